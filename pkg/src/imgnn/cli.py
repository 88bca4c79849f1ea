"""Command-line interface: ``imgnn <subcommand> [options]``.

Every subcommand accepts ``--config FILE`` (JSON, schema below) and flag
overrides; flags win. ``--seed`` sets all randomness. Outputs land in
``--out`` (a run directory) and tabular results also go to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import jsonschema

from . import baselines, harness, oracle
from .centrality import rank
from .graph import EdgeListError, Graph, generate_ba, generate_er, read_edge_file, stats
from .sir import SirConfig

log = logging.getLogger("imgnn")

CONFIG_VERSION = 1
_num = {"type": "number"}
_pos_int = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "version": {"const": CONFIG_VERSION},
        "seed": {"type": "integer", "minimum": 0},
        "runs": _pos_int,
        "corpus": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "preset": {"enum": ["desk", "full"]},
                "groups": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["generator", "param", "count", "nodes"],
                        "properties": {
                            "generator": {"enum": ["ba", "er"]},
                            "param": _num,
                            "count": _pos_int,
                            "nodes": {"type": "integer", "minimum": 2},
                        },
                    },
                },
                "mu_t_ratio": {"type": "number", "exclusiveMinimum": 0},
                "ratios": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "threshold": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "max_nodes": _pos_int,
            },
        },
        "train": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "epochs": _pos_int,
                "learning_rate": {"type": "number", "exclusiveMinimum": 0},
                "optimizer": {"enum": ["adam", "sgd"]},
                "feature_scaling": {"enum": ["none", "minmax"]},
            },
        },
        "eval": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "target_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "mu_ratios": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "mus": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
                "mu_c_kind": {"enum": ["heterogeneous", "mean_degree"]},
            },
        },
        "methods": {"type": "array", "items": {"type": "string"}},
        "model": {"type": "string"},
        "kind": {"enum": ["evaluation", "label_timing"]},
        "networks": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id"],
                "properties": {
                    "id": {"type": "string"},
                    "path": {"type": "string"},
                    "generator": {"enum": ["ba", "er"]},
                    "n": {"type": "integer", "minimum": 2},
                    "param": _num,
                    "seed": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
}


class ConfigError(Exception):
    pass


# run-log handlers opened by the current invocation
_handlers: list[logging.Handler] = []


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config field {where}: {e.message}")


def _pick(flag, cfg: dict, *path, default=None):
    if flag is not None:
        return flag
    node = cfg
    for p in path:
        if not isinstance(node, dict) or p not in node:
            return default
        node = node[p]
    return node


def _run_dir(args, cfg: dict, effective: dict) -> Path | None:
    if not args.out:
        return None
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    (d / "config.json").write_text(json.dumps({**cfg, "effective": effective}, indent=2, default=str))
    handler = logging.FileHandler(d / "run.log")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s %(message)s"))
    logging.getLogger().addHandler(handler)
    _handlers.append(handler)
    return d


def _load_graph(path) -> Graph:
    return read_edge_file(path)


def _load_model(path):
    from .gnn import ModelParams

    return ModelParams.from_json(Path(path).read_text()) if path else None


def _corpus_spec(cfg: dict, preset: str | None):
    groups = _pick(None, cfg, "corpus", "groups")
    if groups and preset is None:
        return [oracle.GroupSpec(**g) for g in groups]
    preset = preset or _pick(None, cfg, "corpus", "preset", default="desk")
    return list(oracle.FULL_CORPUS if preset == "full" else oracle.DESK_CORPUS)


# subcommands


def cmd_stats(args, cfg):
    s = stats(_load_graph(args.input))
    row = asdict(s)
    print("\t".join(row))
    print("\t".join(f"{v:.4f}" if isinstance(v, float) else str(v) for v in row.values()))
    d = _run_dir(args, cfg, row)
    if d:
        (d / "stats.json").write_text(json.dumps(row, indent=2))


def cmd_oracle(args, cfg):
    g = _load_graph(args.input)
    seed = _pick(args.seed, cfg, "seed", default=0)
    runs = _pick(args.runs, cfg, "runs", default=1000)
    threshold = _pick(args.threshold, cfg, "corpus", "threshold", default=0.8)
    max_nodes = _pick(args.max_nodes, cfg, "corpus", "max_nodes", default=oracle.DEFAULT_MAX_NODES)
    sol = oracle.search_optimal_sets(g, args.mu, SirConfig(args.mu, runs, seed), threshold, max_nodes=max_nodes)
    print(f"r={sol.r}")
    print(f"sets={len(sol.sets)}")
    for s, sp in zip(sol.sets, sol.spreads):
        print(" ".join(map(str, s)), f"spread={sp:.4f}")
    d = _run_dir(args, cfg, {"mu": args.mu, "runs": runs, "seed": seed, "threshold": threshold})
    if d:
        (d / "oracle.json").write_text(json.dumps({"r": sol.r, "sets": sol.sets, "spreads": sol.spreads}))


def cmd_gen_data(args, cfg):
    seed = _pick(args.seed, cfg, "seed", default=0)
    runs = _pick(args.runs, cfg, "runs", default=1000)
    ratio = _pick(args.ratio, cfg, "corpus", "mu_t_ratio", default=1.5)
    threshold = _pick(args.threshold, cfg, "corpus", "threshold", default=0.8)
    max_nodes = _pick(args.max_nodes, cfg, "corpus", "max_nodes", default=oracle.DEFAULT_MAX_NODES)
    spec = _corpus_spec(cfg, args.preset)
    if not args.out:
        raise ConfigError("gen-data needs --out")
    d = _run_dir(args, cfg, {"seed": seed, "runs": runs, "ratio": ratio, "groups": [asdict(g) for g in spec]})
    samples = oracle.build_training_corpus(spec, ratio, SirConfig(0.0, runs, seed), seed, threshold, max_nodes)
    oracle.save_corpus(samples, d / "corpus", {"mu_t_ratio": ratio, "seed": seed, "runs": runs,
                                               "groups": [asdict(g) for g in spec]})
    print(f"wrote {len(samples)} samples to {d / 'corpus'}")


def cmd_train(args, cfg):
    from .gnn import ModelConfig, TrainConfig, train

    corpus = oracle.load_corpus(args.corpus)
    tc = TrainConfig(
        epochs=_pick(args.epochs, cfg, "train", "epochs", default=10),
        learning_rate=_pick(args.lr, cfg, "train", "learning_rate", default=0.001),
        optimizer=_pick(args.optimizer, cfg, "train", "optimizer", default="adam"),
        rng_seed=_pick(args.seed, cfg, "seed", default=0),
        model=ModelConfig(feature_scaling=_pick(None, cfg, "train", "feature_scaling", default="none")),
    )
    if not args.out:
        raise ConfigError("train needs --out")
    d = _run_dir(args, cfg, asdict(tc))
    result = train(corpus, tc)
    (d / "model.json").write_text(result.params.to_json())
    (d / "train_log.csv").write_text(result.log_csv())
    sys.stdout.write(result.log_csv())


def cmd_score(args, cfg):
    from .gnn import score_nodes

    model = _load_model(_pick(args.model, cfg, "model"))
    if model is None:
        raise ConfigError("score needs --model")
    out = score_nodes(_load_graph(args.input), model).to_csv()
    sys.stdout.write(out)
    d = _run_dir(args, cfg, {"model": args.model})
    if d:
        (d / "scores.csv").write_text(out)


def cmd_rank(args, cfg):
    g = _load_graph(args.input)
    out = rank(harness.static_scores(g, args.method, _load_model(args.model))).to_csv()
    sys.stdout.write(out)
    d = _run_dir(args, cfg, {"method": args.method})
    if d:
        (d / "ranking.csv").write_text(out)


def cmd_baseline(args, cfg):
    g = _load_graph(args.input)
    k = args.k or g.n
    ranking = harness.make_ranking(g, args.method, _load_model(args.model))
    if isinstance(ranking, baselines.LazySelection):
        trace = ranking.trace(k)
    else:
        trace = baselines.SelectionTrace(tuple(ranking.top(k)), tuple(ranking.scores[ranking.order[:k]]), args.method)
    out = trace.to_csv()
    sys.stdout.write(out)
    d = _run_dir(args, cfg, {"method": args.method, "k": k})
    if d:
        (d / "trace.csv").write_text(out)


def _eval_config(args, cfg, methods=()) -> harness.EvalConfig:
    ratios = args.mu_ratio if getattr(args, "mu_ratio", None) else _pick(None, cfg, "eval", "mu_ratios")
    mus = args.mu if getattr(args, "mu", None) else _pick(None, cfg, "eval", "mus", default=())
    return harness.EvalConfig(
        target_fraction=_pick(getattr(args, "target", None), cfg, "eval", "target_fraction", default=0.8),
        mu_ratios=tuple(ratios or (1.0, 1.5, 2.0)),
        mus=tuple(mus or ()),
        mu_c_kind=_pick(getattr(args, "mu_c_kind", None), cfg, "eval", "mu_c_kind", default="mean_degree"),
        runs=_pick(args.runs, cfg, "runs", default=1000),
        rng_seed=_pick(args.seed, cfg, "seed", default=0),
        methods=tuple(methods),
    )


def cmd_evaluate(args, cfg):
    g = _load_graph(args.network)
    ec = _eval_config(args, cfg, [args.method])
    model = _load_model(_pick(args.model, cfg, "model"))
    d = _run_dir(args, cfg, asdict(ec))
    store = harness.ResultStore(d) if d else None
    recs = harness.run_experiment([(Path(args.network).stem, g)], [args.method], ec, store, model)
    sys.stdout.write(harness.records_csv(recs))
    if any(r.error for r in recs):
        raise RuntimeError("; ".join(r.error for r in recs if r.error))


def _networks(cfg) -> list[tuple[str, Graph]]:
    nets = []
    for spec in cfg.get("networks", []):
        if "path" in spec:
            nets.append((spec["id"], read_edge_file(spec["path"])))
        elif spec.get("generator") == "ba":
            nets.append((spec["id"], generate_ba(spec["n"], int(spec["param"]), spec.get("seed", 0))))
        elif spec.get("generator") == "er":
            nets.append((spec["id"], generate_er(spec["n"], float(spec["param"]), spec.get("seed", 0))))
        else:
            raise ConfigError(f"config field networks/{spec['id']}: needs path or generator")
    return nets


def cmd_sweep(args, cfg):
    if not args.out:
        raise ConfigError("sweep needs --out")
    kind = cfg.get("kind", "evaluation")
    if kind == "label_timing":
        seed = _pick(args.seed, cfg, "seed", default=0)
        runs = _pick(args.runs, cfg, "runs", default=1000)
        ratios = _pick(None, cfg, "corpus", "ratios", default=[1.0, 1.5, 2.0])
        d = _run_dir(args, cfg, {"seed": seed, "runs": runs, "ratios": ratios})
        rows = harness.label_timing_sweep(_corpus_spec(cfg, None), ratios, SirConfig(0.0, runs, seed), seed)
        lines = ["ratio,seconds,networks,nonzero_labels,mean_r"]
        lines += [",".join(repr(v) if isinstance(v, float) else str(v) for v in r.as_row().values()) for r in rows]
        text = "\n".join(lines) + "\n"
        (d / "timing.csv").write_text(text)
        sys.stdout.write(text)
        return
    methods = args.method or cfg.get("methods") or list(harness.STATIC_METHODS[:-1])
    ec = _eval_config(args, cfg, methods)
    nets = _networks(cfg)
    if not nets:
        raise ConfigError("config field networks: at least one network is required")
    model = _load_model(_pick(args.model, cfg, "model"))
    d = _run_dir(args, cfg, asdict(ec))
    store = harness.ResultStore(d)
    recs = harness.run_experiment(nets, methods, ec, store, model)
    store.write_manifest({"config": asdict(ec), "networks": [n for n, _ in nets], "records": len(recs),
                          "errors": sum(bool(r.error) for r in recs)})
    (d / "plot_data.csv").write_text(harness.plot_table(recs))
    sys.stdout.write(harness.records_csv(recs))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="imgnn", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("stats", cmd_stats, "summary statistics of an edge list")
    sp.add_argument("--input", required=True)

    sp = add("oracle", cmd_oracle, "exhaustive minimum seed-set search")
    sp.add_argument("--input", required=True)
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--runs", type=int)
    sp.add_argument("--threshold", type=float)
    sp.add_argument("--max-nodes", type=int)

    sp = add("gen-data", cmd_gen_data, "generate a labelled training corpus")
    sp.add_argument("--preset", choices=["desk", "full"])
    sp.add_argument("--ratio", type=float)
    sp.add_argument("--runs", type=int)
    sp.add_argument("--threshold", type=float)
    sp.add_argument("--max-nodes", type=int)

    sp = add("train", cmd_train, "train the scoring model on a corpus directory")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--lr", type=float)
    sp.add_argument("--optimizer", choices=["adam", "sgd"])

    sp = add("score", cmd_score, "score nodes with a trained model")
    sp.add_argument("--input", required=True)
    sp.add_argument("--model")

    sp = add("rank", cmd_rank, "rank nodes by a static centrality")
    sp.add_argument("--input", required=True)
    sp.add_argument("--method", required=True, choices=list(harness.STATIC_METHODS))
    sp.add_argument("--model")

    sp = add("baseline", cmd_baseline, "run an iterative selection heuristic")
    sp.add_argument("--input", required=True)
    sp.add_argument("--method", required=True)
    sp.add_argument("--k", type=int)
    sp.add_argument("--model")

    for name, fn, help_ in (("evaluate", cmd_evaluate, "minimal seed fraction for one method"),
                            ("sweep", cmd_sweep, "evaluation or label-timing sweep from a config")):
        sp = add(name, fn, help_)
        if name == "evaluate":
            sp.add_argument("--network", required=True)
            sp.add_argument("--method", required=True)
        else:
            sp.add_argument("--method", action="append")
        sp.add_argument("--mu-ratio", type=float, action="append")
        sp.add_argument("--mu", type=float, action="append")
        sp.add_argument("--mu-c-kind", choices=["heterogeneous", "mean_degree"])
        sp.add_argument("--target", type=float)
        sp.add_argument("--runs", type=int)
        sp.add_argument("--model")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        args.fn(args, cfg)
    except ConfigError as exc:
        print(f"imgnn: {exc}", file=sys.stderr)
        return 1
    except (OSError, EdgeListError, ValueError, RuntimeError, AssertionError) as exc:
        print(f"imgnn {args.command}: {exc}", file=sys.stderr)
        return 1
    finally:
        while _handlers:
            h = _handlers.pop()
            logging.getLogger().removeHandler(h)
            h.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
