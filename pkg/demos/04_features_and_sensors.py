"""
Early features and early-warning blogs
======================================

Generate a corpus, label memes by final size, extract the nine features
at a few horizons and test which blogs post early more often than chance.
"""
from collections import Counter

from memepredict import detect_communities, k_shell_decompose, sensor_test
from memepredict.features import extract_corpus
from memepredict.sim import CorpusMix, NetworkSpec, generate_corpus, generate_network
from memepredict.trajectory import label, timing_table

SUCCESS_MIN, FAILURE_MAX = 120, 30

g = generate_network(NetworkSpec(n_communities=10, community_size=60, p_intra=0.12, p_inter=0.001,
                                 core_size=12, p_core=0.02, seed=3))
part, shells = detect_communities(g), k_shell_decompose(g)
corpus = generate_corpus(300, g, CorpusMix(p_low=0.05, p_high=0.2), rng_seed=3)
labels = Counter(label(t, SUCCESS_MIN, FAILURE_MAX).value for t in corpus)
print("labels:", dict(labels))

print("hours to reach n posts:")
for row in timing_table(corpus, success_min=SUCCESS_MIN, failure_max=FAILURE_MAX):
    print("  ", row)

successful = [t for t in corpus if label(t, SUCCESS_MIN, FAILURE_MAX).value == "Successful"]
report = sensor_test(successful, shells=shells)
print(f"{len(report.sensors())} early-warning blogs out of {len(report.rows)} tested")

by_tau = extract_corpus(corpus, (12, 48), part, shells, report.sensors(),
                        success_min=SUCCESS_MIN, failure_max=FAILURE_MAX)
for tau, vectors in by_tau.items():
    v = vectors[0]
    print(f"tau={tau:g}h {v.meme_id}: posts={v.n_posts} rate={v.post_rate:.3f} "
          f"dispersion={v.community_dispersion} core={v.k_core_blogs} sensors={v.es_blogs} -> {v.label.value}")
