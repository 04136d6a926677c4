"""
Predicting success early
========================

Cross-validate both classifiers on balanced data at several horizons and
rank the features by permutation importance.
"""
from memepredict import detect_communities, k_shell_decompose, learn
from memepredict.features import extract_corpus
from memepredict.sim import CorpusMix, NetworkSpec, generate_corpus, generate_network
from memepredict.synthtext import synthesize_paragraphs, synthetic_lexicons
from memepredict.textfeat import language_features

LABELS = dict(success_min=120, failure_max=30)

g = generate_network(NetworkSpec(n_communities=10, community_size=60, p_intra=0.12, p_inter=0.001,
                                 core_size=12, p_core=0.02, seed=4))
part, shells = detect_communities(g), k_shell_decompose(g)
corpus = generate_corpus(400, g, CorpusMix(p_low=0.05, p_high=0.2), rng_seed=4)

lexicons = synthetic_lexicons(rng_seed=4)
texts = synthesize_paragraphs(corpus, lexicons, rng_seed=4)
language = {mid: language_features(p, lexicons) for mid, p in texts.items()}
by_tau = extract_corpus(corpus, (12, 24, 48), part, shells, (), language, **LABELS)

for tau, vectors in by_tau.items():
    data = learn.balanced(learn.Dataset.from_vectors(vectors), 4)
    tree = learn.cross_validate(data, learn.TREE_ENSEMBLE, 5, rng_seed=4, importance=True, n_trees=20)
    nb = learn.cross_validate(data, learn.NAIVE_BAYES, 5, rng_seed=4)
    top = ", ".join(f"{n} {v:.3f}" for n, v in tree.importance[:3])
    print(f"tau={tau:g}h n={data.n}: trees {tree.accuracy:.3f}, naive Bayes {nb.accuracy:.3f}; top: {top}")

model = learn.train_ensemble(learn.balanced(learn.Dataset.from_vectors(by_tau[48.0]), 4), n_trees=20)
print("prediction for", by_tau[48.0][0].meme_id, "->", learn.predict(model, by_tau[48.0][0].values()))
