"""``memepredict`` command line.

Every command reads a TOML config (``--config``) and lets flags override
it. Outputs go to ``paths.out_dir`` unless a path is set explicitly.
Failures print one line ``error:<kind>: <message>`` to stderr and exit
non-zero (2 for usage errors, 1 otherwise).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
from scipy import stats

from . import features as feat
from . import learn, sensors, sim, synthtext, textfeat, trajectory
from .community import detect_communities
from .config import LEXICON_FILES, ConfigError, RunConfig, load_config, override
from .graph import GraphFormatError, load_graph, write_edgelist
from .io import SCHEMA_VERSION, atomic_write, csv_text, dump_json, read_csv
from .kshell import KShellIndex, k_shell_decompose
from .textfeat import AXES

log = logging.getLogger("memepredict")


class CliError(Exception):
    def __init__(self, kind: str, message: str, status: int = 1):
        super().__init__(message)
        self.kind = kind
        self.status = status


def _need(path: Path, what: str) -> Path:
    if not Path(path).is_file():
        raise CliError("missing-input", f"{what} not found: {path}")
    return Path(path)


def _tau_tag(tau: float) -> str:
    return f"{tau:g}".replace(".", "p")


# -- artifact loaders ------------------------------------------------------

def _load_graph(cfg: RunConfig):
    return load_graph(_need(cfg.paths.resolve("graph"), "graph"))


def _load_corpus(cfg: RunConfig) -> list:
    return trajectory.read_jsonl(_need(cfg.paths.resolve("trajectories"), "trajectories"))


def _load_shells(cfg: RunConfig, g) -> KShellIndex:
    header, rows = read_csv(_need(cfg.paths.out("shells.csv"), "shell CSV (run decompose)"))
    shell = {v: int(k) for v, k in rows}
    missing = [v for v in g.ids if v not in shell]
    if missing:
        raise CliError("format", f"shell CSV does not cover vertex {missing[0]!r}")
    return KShellIndex(g, np.array([shell[v] for v in g.ids], dtype=np.int64))


def _load_partition(cfg: RunConfig) -> dict:
    header, rows = read_csv(_need(cfg.paths.out("partition.csv"), "partition CSV (run decompose)"))
    return {v: int(c) for v, c in rows}


def _load_sensors(cfg: RunConfig) -> frozenset:
    path = _need(cfg.paths.resolve("sensors"), "sensor list (run sensors)")
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(s.strip() for s in lines if s.strip() and not s.startswith("#"))


def _load_language(cfg: RunConfig, corpus) -> dict:
    """Language features per meme, or zeros when no text is available."""
    texts_path = cfg.paths.resolve("texts")
    lex_paths = {a: cfg.paths.lexicon(a) for a in AXES}
    explicit = bool(cfg.paths.texts or cfg.paths.lexicon_dir)
    if not texts_path.is_file() or not all(p.is_file() for p in lex_paths.values()):
        if explicit:
            _need(texts_path, "texts")
            for a, p in lex_paths.items():
                _need(p, f"{a} lexicon")
        log.warning("no texts or lexicons found; language features set to 0")
        return {}
    lexicons = {a: textfeat.load_lexicon(p, a) for a, p in lex_paths.items()}
    out = {}
    with open(texts_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out[rec["meme_id"]] = textfeat.language_features(rec["paragraphs"], lexicons)
            except (KeyError, TypeError, ValueError) as exc:
                raise CliError("format", f"{texts_path}:{lineno}: {exc}") from None
    return out


def _load_features(cfg: RunConfig, tau: float) -> list:
    path = _need(cfg.paths.out(f"features_tau{_tau_tag(tau)}.csv"), f"features for tau={tau:g} (run features)")
    return feat.read_features_csv(path)


def _load_model(path) -> learn.TrainedModel:
    path = _need(path, "model")
    try:
        return learn.TrainedModel.from_json(Path(path).read_text(encoding="utf-8"))
    except learn.ModelFormatError as exc:
        raise CliError("schema", f"{path}: {exc}") from None
    except (json.JSONDecodeError, KeyError) as exc:
        raise CliError("format", f"{path}: not a model file ({exc})") from None


# -- commands --------------------------------------------------------------

def cmd_gen(cfg: RunConfig, args) -> None:
    g = sim.generate_network(cfg.network)
    write_edgelist(g, cfg.paths.resolve("graph"))
    atomic_write(cfg.paths.out("gen.json"), dump_json({
        "schema_version": SCHEMA_VERSION,
        "network": cfg.network.__dict__,
        "n_vertices": g.n,
        "n_edges": g.m,
        "blocks": [int(b) for b in g.blocks],
        "core": sorted(g.ids[i] for i in g.core),
    }))
    print(f"graph: {g.n} vertices, {g.m} edges")


def _size_summary(corpus, th) -> dict:
    sizes = np.array([t.total_posts for t in corpus], dtype=float)
    labels = [trajectory.label(t, th.success_min, th.failure_max).value for t in corpus]
    med = float(np.median(sizes))
    return {
        "n_memes": len(corpus),
        "size_mean": float(sizes.mean()),
        "size_median": med,
        "size_max": float(sizes.max()),
        "size_skewness": float(stats.skew(sizes)) if len(corpus) > 2 else math.nan,
        "max_over_median": float(sizes.max() / med) if med else math.nan,
        "labels": {k: labels.count(k) for k in ("Successful", "Unsuccessful", "Excluded")},
    }


def cmd_simulate(cfg: RunConfig, args) -> None:
    g = _load_graph(cfg)
    # a generated graph from this run carries planted roles; otherwise they are inferred
    manifest = cfg.paths.out("gen.json")
    if manifest.is_file():
        doc = json.loads(manifest.read_text(encoding="utf-8"))
        if doc.get("n_vertices") == g.n and len(doc.get("blocks", ())) == g.n:
            core = np.array(sorted(g.index(v) for v in doc["core"]), dtype=np.int64)
            g = sim.PlantedGraph(g.ids, g.indptr, g.indices, g.n_self_loops_dropped, g._index,
                                 blocks=np.asarray(doc["blocks"], dtype=np.int64), core=core, spec=None)
    corpus = sim.generate_corpus(cfg.n_memes, g, cfg.corpus, cfg.rng_seed)
    trajectory.write_jsonl(corpus, cfg.paths.resolve("trajectories"))
    lexicons = synthtext.synthetic_lexicons(rng_seed=cfg.rng_seed)
    lex_dir = cfg.paths.resolve("lexicon_dir")
    for axis in AXES:
        textfeat.write_lexicon(lexicons[axis], lex_dir / LEXICON_FILES[axis])
    paragraphs = synthtext.synthesize_paragraphs(corpus, lexicons, rng_seed=cfg.rng_seed)
    atomic_write(cfg.paths.resolve("texts"), "".join(
        json.dumps({"meme_id": t.meme_id, "paragraphs": paragraphs[t.meme_id]}, separators=(",", ":")) + "\n"
        for t in corpus))
    params = [dict(t.meta, meme_id=t.meme_id) for t in corpus]
    summary = _size_summary(corpus, cfg.thresholds)
    atomic_write(cfg.paths.out("simulate.json"), dump_json({
        "schema_version": SCHEMA_VERSION,
        "rng_seed": cfg.rng_seed,
        "corpus_mix": cfg.to_dict()["corpus"],
        "summary": summary,
        "memes": params,
    }))
    print(f"corpus: {summary['n_memes']} memes, labels {summary['labels']}, "
          f"skewness {summary['size_skewness']:.2f}")


def cmd_decompose(cfg: RunConfig, args) -> None:
    g = _load_graph(cfg)
    if g.m == 0:
        raise CliError("value", "graph has no edges; modularity is undefined")
    shells = k_shell_decompose(g)
    part = detect_communities(g, eigensolver=args.eigensolver)
    atomic_write(cfg.paths.out("partition.csv"),
                 csv_text(("vertex", "community"), zip(g.ids, part.labels.tolist()), comment="community partition"))
    atomic_write(cfg.paths.out("shells.csv"),
                 csv_text(("vertex", "shell"), zip(g.ids, shells.shell_array.tolist()), comment="k-shell index"))
    atomic_write(cfg.paths.out("decompose.json"), dump_json({
        "schema_version": SCHEMA_VERSION,
        "n_vertices": g.n,
        "n_edges": g.m,
        "modularity_Q": part.modularity_Q,
        "n_communities": part.n_communities,
        "k_max": shells.k_max,
        "kmax_shell_size": len(shells.kmax_shell()),
    }))
    print(f"Q={part.modularity_Q:.4f} communities={part.n_communities} k_max={shells.k_max}")


def cmd_sensors(cfg: RunConfig, args) -> None:
    g = _load_graph(cfg)
    shells = _load_shells(cfg, g)
    corpus = _load_corpus(cfg)
    th = cfg.thresholds
    succ = [t for t in corpus if trajectory.label(t, th.success_min, th.failure_max) is trajectory.MemeLabel.SUCCESSFUL]
    try:
        report = sensors.sensor_test(succ, th.early_frac, th.alpha, exact=args.exact, bonferroni=args.bonferroni,
                                     shells=shells, core_fraction=args.core_fraction)
    except ValueError as exc:
        raise CliError("value", str(exc)) from None
    report = sensors.with_avoidance(report, corpus, th.avoid_threshold)
    atomic_write(cfg.paths.out("sensors.csv"), report.to_csv())
    atomic_write(cfg.paths.resolve("sensors"), report.sensor_list())
    summary = {"schema_version": SCHEMA_VERSION, "n_successful": len(succ), "n_blogs": len(report.rows)}
    if report.sensors():
        summary.update(sensors.characterize(report, shells, args.core_fraction))
    atomic_write(cfg.paths.out("sensors.json"), dump_json(summary))
    print(f"sensors: {len(report.sensors())} of {len(report.rows)} blogs")


def cmd_features(cfg: RunConfig, args) -> None:
    corpus = _load_corpus(cfg)
    th = cfg.thresholds
    if args.timing:
        rows = trajectory.timing_table(corpus, success_min=th.success_min, failure_max=th.failure_max)
        text = csv_text(("label", "milestone", "n_memes", "mean_hours", "median_hours"), rows,
                        comment="hours to reach 5 and 10 posts and the final post, per class")
        atomic_write(cfg.paths.out("timing.csv"), text)
        atomic_write(cfg.paths.out("timing.txt"), timing_text(rows))
        print(timing_text(rows), end="")
    g = _load_graph(cfg)
    shells = _load_shells(cfg, g)
    partition = _load_partition(cfg)
    sensor_set = _load_sensors(cfg)
    language = _load_language(cfg, corpus)
    by_tau = feat.extract_corpus(corpus, cfg.horizons, partition, shells, sensor_set, language,
                                 success_min=th.success_min, failure_max=th.failure_max)
    for tau, vectors in by_tau.items():
        atomic_write(cfg.paths.out(f"features_tau{_tau_tag(tau)}.csv"), feat.features_csv(vectors))
    print(f"features: {len(corpus)} memes x {len(by_tau)} horizons")


def timing_text(rows) -> str:
    lines = [f"{'class':<13}{'posts':>7}{'memes':>7}{'mean h':>10}{'median h':>10}"]
    for lab, milestone, n, mean, med in rows:
        lines.append(f"{lab:<13}{milestone:>7}{n:>7}{mean:>10.1f}{med:>10.1f}")
    return "\n".join(lines) + "\n"


def _hyper(cfg: RunConfig) -> dict:
    if cfg.model.kind == learn.TREE_ENSEMBLE:
        return {"n_trees": cfg.model.n_trees, "max_depth": cfg.model.max_depth}
    return {}


def _dataset(cfg: RunConfig, tau: float) -> learn.Dataset:
    data = learn.Dataset.from_vectors(_load_features(cfg, tau))
    if data.n == 0 or len(set(data.y.tolist())) < 2:
        raise CliError("value", f"tau={tau:g}: need both Successful and Unsuccessful memes")
    return data


def cmd_train(cfg: RunConfig, args) -> None:
    tau = float(args.tau) if args.tau is not None else cfg.horizons[0]
    data = _dataset(cfg, tau)
    model = learn.train(data, cfg.model.kind, rng_seed=cfg.rng_seed, **_hyper(cfg))
    model.metadata.update({"tau_hours": tau, "rng_seed": cfg.rng_seed})
    if args.cv:
        res = learn.cross_validate(data, cfg.model.kind, cfg.model.k_folds, cfg.rng_seed, **_hyper(cfg))
        model.metadata["cv_accuracy"] = res.accuracy
    atomic_write(cfg.paths.resolve("model"), model.to_json())
    print(f"trained {cfg.model.kind} on {data.n} memes at tau={tau:g}h")


def cmd_eval(cfg: RunConfig, args) -> None:
    kinds = [cfg.model.kind] if not args.both else [learn.TREE_ENSEMBLE, learn.NAIVE_BAYES]
    for tau in cfg.horizons:
        data = _dataset(cfg, tau)
        for kind in kinds:
            hyper = _hyper(cfg) if kind == cfg.model.kind else {}
            try:
                res = learn.cross_validate(data, kind, cfg.model.k_folds, cfg.rng_seed, importance=True, **hyper)
            except ValueError as exc:
                raise CliError("value", f"tau={tau:g}: {exc}") from None
            tag = f"{kind}_tau{_tau_tag(tau)}"
            atomic_write(cfg.paths.out(f"eval_{tag}.csv"), res.to_csv())
            atomic_write(cfg.paths.out(f"importance_{tag}.csv"),
                         csv_text(("rank", "feature", "importance"),
                                  [(i + 1, n, v) for i, (n, v) in enumerate(res.importance)],
                                  comment=f"held-out permutation importance model={kind} tau={tau:g}"))
            print(f"tau={tau:g}h {kind}: accuracy {res.accuracy:.3f}")


def cmd_predict(cfg: RunConfig, args) -> None:
    model = _load_model(cfg.paths.resolve("model"))
    tau = float(args.tau) if args.tau is not None else float(model.metadata.get("tau_hours", cfg.horizons[0]))
    vectors = _load_features(cfg, tau)
    if tuple(model.feature_names) != feat.FEATURE_NAMES:
        raise CliError("schema", "model features do not match the feature CSV")
    X = np.array([fv.values() for fv in vectors]).reshape(len(vectors), len(feat.FEATURE_NAMES))
    scores = learn.predict_scores(model, X) if vectors else np.zeros(0)
    rows = [(fv.meme_id, tau, learn.CLASS_NAMES[int(s >= 0.5)], float(s), fv.label.value)
            for fv, s in zip(vectors, scores)]
    atomic_write(cfg.paths.out(f"predictions_tau{_tau_tag(tau)}.csv"),
                 csv_text(("meme_id", "tau_hours", "predicted", "score", "label"), rows,
                          comment=f"predictions model={model.kind}"))
    known = [(p, lab) for _, _, p, _, lab in rows if lab != "Excluded"]
    if known:
        acc = sum(p == lab for p, lab in known) / len(known)
        print(f"predicted {len(rows)} memes; accuracy on labelled memes {acc:.3f}")


def report_rows(cfg: RunConfig, kind: str) -> list:
    """One row per horizon: tau, % of median successful lifespan, accuracy, top-3 features."""
    corpus = _load_corpus(cfg)
    th = cfg.thresholds
    spans = [t.lifespan for t in corpus
             if trajectory.label(t, th.success_min, th.failure_max) is trajectory.MemeLabel.SUCCESSFUL]
    span = float(np.median(spans)) if spans else math.nan
    rows = []
    for tau in cfg.horizons:
        tag = f"{kind}_tau{_tau_tag(tau)}"
        _, ev = read_csv(_need(cfg.paths.out(f"eval_{tag}.csv"), f"evaluation for tau={tau:g} (run eval)"))
        _, imp = read_csv(_need(cfg.paths.out(f"importance_{tag}.csv"), f"importance for tau={tau:g} (run eval)"))
        acc = float(next(a for f, a in ev if f == "mean"))
        top = [name for _, name, _ in imp[:3]]
        rows.append((tau, 100.0 * tau / span if span else math.nan, acc, *top))
    return rows


def report_text(rows, kind: str) -> str:
    lines = [f"model: {kind}",
             f"{'tau (h)':>8}{'% lifespan':>12}{'accuracy':>10}  ranked predictive features"]
    for tau, pct, acc, *top in rows:
        ranked = " ".join(f"{i}.) {n}" for i, n in enumerate(top, 1))
        lines.append(f"{tau:>8g}{pct:>11.1f}%{100 * acc:>9.1f}%  {ranked}")
    return "\n".join(lines) + "\n"


def cmd_report(cfg: RunConfig, args) -> None:
    kind = cfg.model.kind
    rows = report_rows(cfg, kind)
    atomic_write(cfg.paths.out("report.csv"),
                 csv_text(("tau_hours", "pct_lifespan", "accuracy", "feature_1", "feature_2", "feature_3"),
                          rows, comment=f"accuracy and top features per horizon model={kind}"))
    text = report_text(rows, kind)
    atomic_write(cfg.paths.out("report.txt"), f"# schema_version={SCHEMA_VERSION}\n" + text)
    print(text, end="")


COMMANDS = {
    "gen": (cmd_gen, "generate a synthetic community/core network"),
    "simulate": (cmd_simulate, "simulate a meme corpus with texts and lexicons"),
    "decompose": (cmd_decompose, "k-shell decomposition and community detection"),
    "sensors": (cmd_sensors, "find early-sensor blogs"),
    "features": (cmd_features, "extract feature CSVs per horizon"),
    "train": (cmd_train, "train a classifier at one horizon"),
    "eval": (cmd_eval, "cross-validate at every horizon"),
    "predict": (cmd_predict, "score memes with a trained model"),
    "report": (cmd_report, "accuracy and top features per horizon"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, status=2)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", dest="out_dir", help="output directory (default: run)")
    common.add_argument("--seed", type=int, dest="rng_seed", help="master RNG seed (default: 0)")
    common.add_argument("--horizons", help="comma-separated hours (default: 12,24,48,120)")
    common.add_argument("--graph", help="edge-list path (default: <out>/graph.tsv)")
    common.add_argument("--trajectories", help="JSONL corpus path (default: <out>/trajectories.jsonl)")
    common.add_argument("--texts", help="meme paragraphs JSONL (default: <out>/texts.jsonl)")
    common.add_argument("--lexicon-dir", help="directory holding lexicon_<axis>.tsv (default: <out>)")
    common.add_argument("--sensors", help="sensor list path (default: <out>/sensors.txt)")
    common.add_argument("--model", help="model JSON path (default: <out>/model.json)")
    common.add_argument("--model-kind", choices=learn.KINDS, help="classifier (default: tree_ensemble)")
    common.add_argument("--n-trees", type=int, help="trees in the ensemble (default: 100)")
    common.add_argument("--max-depth", type=int, help="tree depth limit (default: none)")
    common.add_argument("--k-folds", type=int, help="cross-validation folds (default: 10)")
    common.add_argument("--success-min", type=int, help="posts for Successful (default: 1000)")
    common.add_argument("--failure-max", type=int, help="posts for Unsuccessful (default: 100)")
    common.add_argument("--early-frac", type=float, help="early window as lifespan fraction (default: 0.03)")
    common.add_argument("--alpha", type=float, help="sensor test level (default: 0.05)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="memepredict", description="Early meme-success prediction pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        if name == "simulate":
            p.add_argument("--n-memes", type=int, help="memes to simulate (default: 1000)")
            p.add_argument("--min-seeds", type=int, help="fewest seeds per meme (default: 1)")
            p.add_argument("--max-seeds", type=int, help="most seeds per meme (default: 6)")
        elif name == "decompose":
            p.add_argument("--eigensolver", default="auto", choices=("auto", "dense", "lanczos", "power"))
        elif name == "sensors":
            p.add_argument("--exact", action="store_true", help="exact Poisson-binomial tail for <= 64 trials")
            p.add_argument("--bonferroni", action="store_true", help="divide alpha by the number of blogs")
            p.add_argument("--core-fraction", type=float, default=0.001, help="top core share (default: 0.001)")
        elif name == "features":
            p.add_argument("--timing", action="store_true", help="also write the time-to-N-posts table")
        elif name in ("train", "predict"):
            p.add_argument("--tau", type=float, help="horizon in hours (default: first horizon)")
            if name == "train":
                p.add_argument("--cv", action="store_true", help="record CV accuracy in the model")
        elif name == "eval":
            p.add_argument("--both", action="store_true", help="evaluate both model kinds")
    return parser


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    horizons = None
    if args.horizons:
        try:
            horizons = tuple(float(x) for x in args.horizons.split(",") if x.strip())
        except ValueError:
            raise CliError("usage", f"bad --horizons {args.horizons!r}", status=2) from None
    return override(
        cfg,
        rng_seed=args.rng_seed,
        horizons=horizons,
        n_memes=getattr(args, "n_memes", None),
        **{
            "paths.out_dir": args.out_dir,
            "paths.graph": args.graph,
            "paths.trajectories": args.trajectories,
            "paths.texts": args.texts,
            "paths.lexicon_dir": args.lexicon_dir,
            "paths.sensors": args.sensors,
            "paths.model": args.model,
            "model.kind": args.model_kind,
            "model.n_trees": args.n_trees,
            "model.max_depth": args.max_depth,
            "model.k_folds": args.k_folds,
            "thresholds.success_min": args.success_min,
            "thresholds.failure_max": args.failure_max,
            "thresholds.early_frac": args.early_frac,
            "thresholds.alpha": args.alpha,
            "corpus.min_seeds": getattr(args, "min_seeds", None),
            "corpus.max_seeds": getattr(args, "max_seeds", None),
        },
    )


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        try:
            cfg = _config(args)
        except ConfigError as exc:
            raise CliError("usage", str(exc), status=2) from None
        COMMANDS[args.command][0](cfg, args)
        return 0
    except CliError as exc:
        msg, kind, status = str(exc), exc.kind, exc.status
    except GraphFormatError as exc:
        msg, kind, status = str(exc), "format", 1
    except OSError as exc:
        msg, kind, status = f"{exc.strerror or exc}: {exc.filename or ''}".rstrip(": "), "io", 1
    except ValueError as exc:
        msg, kind, status = str(exc), "value", 1
    print(f"error:{kind}: {' '.join(msg.split())}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
