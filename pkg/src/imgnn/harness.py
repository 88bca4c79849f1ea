"""Evaluation protocol: minimal seed fraction reaching a target infection scale."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import baselines
from .centrality import RankingResult, coreness, degree_centrality, h_index, pagerank, rank
from .graph import Graph
from .oracle import build_training_corpus
from .rng import derive_seed
from .sir import SirConfig, epidemic_threshold, estimate_spread

log = logging.getLogger(__name__)

STATIC_METHODS = ("degree", "pagerank", "kshell", "h-index", "imgnn")
ITERATIVE_METHODS = ("voterank", "ncvoterank", "enrenew", "improved_kshell")
RINF_SUFFIX = "_rinf"


@dataclass(frozen=True)
class EvalConfig:
    target_fraction: float = 0.8
    mu_ratios: tuple[float, ...] = (1.0, 1.5, 2.0)
    mus: tuple[float, ...] = ()
    mu_c_kind: str = "mean_degree"
    runs: int = 1000
    rng_seed: int = 0
    methods: tuple[str, ...] = ("degree", "pagerank", "kshell", "h-index")

    def __post_init__(self):
        if not 0.0 < self.target_fraction < 1.0:
            raise ValueError("target_fraction must lie in (0, 1)")
        if any(r <= 0 for r in self.mu_ratios):
            raise ValueError("mu ratios must be positive")
        if self.mu_c_kind not in ("heterogeneous", "mean_degree"):
            raise ValueError("mu_c_kind must be 'heterogeneous' or 'mean_degree'")


@dataclass(frozen=True)
class EvalRecord:
    network_id: str
    method: str
    mu: float
    mu_ratio: float
    k_star: int
    fraction: float
    spread_at_k: float
    spread_below: float
    seconds: float
    error: str = ""

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.network_id, self.method, repr(float(self.mu)))


_FIELDS = [f.name for f in fields(EvalRecord)]
_TYPES = {f.name: f.type for f in fields(EvalRecord)}


def record_to_row(rec: EvalRecord) -> dict:
    return {k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(rec).items()}


def record_from_row(row: dict) -> EvalRecord:
    cast = {"int": int, "float": float, "str": str}
    return EvalRecord(**{k: cast[_TYPES[k]](row[k]) for k in _FIELDS})


def write_records(records: Iterable[EvalRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(record_to_row(r))


def read_records(path) -> list[EvalRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [record_from_row(row) for row in csv.DictReader(fh)]


def records_csv(records: Iterable[EvalRecord]) -> str:
    import io

    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(record_to_row(r))
    return buf.getvalue()


class ResultStore:
    """Append-only CSV of records plus a JSON manifest."""

    def __init__(self, directory):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.path = self.dir / "records.csv"

    def load(self) -> list[EvalRecord]:
        return read_records(self.path) if self.path.exists() else []

    def append(self, rec: EvalRecord) -> None:
        new = not self.path.exists()
        with open(self.path, "a", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=_FIELDS, lineterminator="\n")
            if new:
                w.writeheader()
            w.writerow(record_to_row(rec))

    def write_manifest(self, payload: dict) -> None:
        (self.dir / "manifest.json").write_text(json.dumps(payload, indent=2, default=str))


def threshold_search(n: int, spread: Callable[[int], float], target: float):
    """Smallest k in 1..n with ``spread(k) > target``, assuming monotone spread.

    Returns ``(k, spread(k), spread(k - 1))`` where the last is the measured
    value at the final failing probe (0.0 when k == 1). ``spread(n)`` is only
    evaluated if the answer is n.
    """
    cache: dict[int, float] = {0: 0.0}

    def f(k):
        if k not in cache:
            cache[k] = spread(k)
        return cache[k]

    lo, hi = 0, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(mid) > target:
            hi = mid
        else:
            lo = mid
    at_k = f(hi)
    if not at_k > target:
        raise AssertionError(f"seeding all {n} nodes did not exceed target {target}")
    return hi, at_k, f(lo)


def _prefix_source(ranking):
    if isinstance(ranking, (RankingResult, baselines.SelectionTrace, baselines.LazySelection)):
        return ranking.top
    seq = list(ranking)
    return lambda k: seq[:k]


def minimal_seed_fraction(
    g: Graph,
    ranking,
    mu: float,
    cfg: EvalConfig,
    network_id: str = "net",
    method: str = "",
    mu_ratio: float = float("nan"),
) -> EvalRecord:
    """Binary search over prefix lengths of ``ranking``.

    Each prefix length ``k`` is simulated with a seed keyed by
    ``(cfg.rng_seed, network_id, mu, k)``, so repeated probes agree and
    every method sees the same randomness at the same ``k``.
    """
    # mu = 0 is allowed: spread is then k/n and the search still terminates
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    top = _prefix_source(ranking)
    t0 = time.perf_counter()

    def spread(k):
        seeds = top(k)
        if len(seeds) < k:
            raise ValueError(f"ranking supplied {len(seeds)} nodes, {k} needed")
        seed = derive_seed(cfg.rng_seed, network_id, float(mu), k)
        return estimate_spread(g, seeds, SirConfig(mu, cfg.runs, seed)).mean_fraction

    k, at_k, below = threshold_search(g.n, spread, cfg.target_fraction)
    return EvalRecord(
        network_id=network_id,
        method=method,
        mu=float(mu),
        mu_ratio=float(mu_ratio),
        k_star=k,
        fraction=k / g.n,
        spread_at_k=at_k,
        spread_below=below,
        seconds=time.perf_counter() - t0,
    )


def verify_record(g: Graph, ranking, rec: EvalRecord, cfg: EvalConfig) -> bool:
    """Re-simulate k* and k*-1 with the same keys and check the threshold straddle."""
    top = _prefix_source(ranking)

    def spread(k):
        seed = derive_seed(cfg.rng_seed, rec.network_id, float(rec.mu), k)
        return estimate_spread(g, top(k), SirConfig(rec.mu, cfg.runs, seed)).mean_fraction

    at_k = spread(rec.k_star)
    below = spread(rec.k_star - 1) if rec.k_star > 1 else 0.0
    return at_k > cfg.target_fraction >= below and at_k == rec.spread_at_k and below == rec.spread_below


def static_scores(g: Graph, method: str, model=None) -> np.ndarray:
    if method == "degree":
        return degree_centrality(g)
    if method == "pagerank":
        return pagerank(g).values
    if method == "kshell":
        return coreness(g).astype(np.float64)
    if method == "h-index":
        return h_index(g).astype(np.float64)
    if method == "imgnn":
        if model is None:
            raise ValueError("method 'imgnn' needs trained model parameters")
        from .gnn import score_nodes

        return score_nodes(g, model).scores
    raise ValueError(f"unknown method {method!r}")


def make_ranking(g: Graph, method: str, model=None):
    """Ranking object for a method name; ``<static>_rinf`` wraps a static
    method in the RINF reordering."""
    if method.endswith(RINF_SUFFIX):
        base = method[: -len(RINF_SUFFIX)]
        scores = static_scores(g, base, model)
        return baselines.LazySelection(g.n, baselines.iter_rinf(g, scores), method)
    if method in STATIC_METHODS:
        return rank(static_scores(g, method, model))
    if method in baselines.ITERATIVE:
        return baselines.LazySelection(g.n, baselines.ITERATIVE[method](g), method)
    raise ValueError(f"unknown method {method!r}")


def known_method(method: str) -> bool:
    base = method[: -len(RINF_SUFFIX)] if method.endswith(RINF_SUFFIX) else method
    if method.endswith(RINF_SUFFIX):
        return base in STATIC_METHODS
    return base in STATIC_METHODS or base in baselines.ITERATIVE


def mu_grid(g: Graph, cfg: EvalConfig) -> list[tuple[float, float]]:
    """(mu, mu / mu_c) pairs; explicit ``cfg.mus`` take precedence over ratios."""
    mu_c = epidemic_threshold(g, cfg.mu_c_kind)
    if cfg.mus:
        return [(float(m), float(m) / mu_c) for m in cfg.mus]
    return [(float(r) * mu_c, float(r)) for r in cfg.mu_ratios]


def run_experiment(
    networks: Sequence[tuple[str, Graph]],
    methods: Sequence[str],
    cfg: EvalConfig,
    store: ResultStore | None = None,
    model=None,
) -> list[EvalRecord]:
    """Evaluate every (network, method, mu) cell.

    With a store, cells already recorded are skipped and new records are
    appended as they complete. Failing cells become error rows.
    """
    for m in methods:
        if not known_method(m):
            raise ValueError(f"unknown method {m!r}")
    done = {r.key: r for r in store.load()} if store else {}
    out = []
    for net_id, g in networks:
        grid = mu_grid(g, cfg)
        for method in methods:
            ranking = None
            for mu, ratio in grid:
                key = (net_id, method, repr(float(mu)))
                if key in done:
                    out.append(done[key])
                    continue
                try:
                    if mu > 1.0:
                        raise ValueError(f"mu={mu} exceeds 1 (ratio {ratio})")
                    if ranking is None:
                        ranking = make_ranking(g, method, model)
                    rec = minimal_seed_fraction(g, ranking, mu, cfg, net_id, method, ratio)
                except Exception as exc:  # error rows must not abort the sweep
                    log.warning("cell %s failed: %s", key, exc)
                    rec = EvalRecord(net_id, method, float(mu), float(ratio), 0, float("nan"),
                                     float("nan"), float("nan"), 0.0, f"{type(exc).__name__}: {exc}")
                if store:
                    store.append(rec)
                out.append(rec)
    return out


def plot_table(records: Iterable[EvalRecord]) -> str:
    """Tidy CSV (network, method, mu_ratio, fraction) for k*/n-vs-mu plots."""
    lines = ["network_id,method,mu,mu_ratio,fraction"]
    for r in records:
        if not r.error:
            lines.append(f"{r.network_id},{r.method},{r.mu!r},{r.mu_ratio!r},{r.fraction!r}")
    return "\n".join(lines) + "\n"


@dataclass
class TimingRow:
    ratio: float
    seconds: float
    networks: int
    nonzero_labels: int
    mean_r: float
    samples: list = field(default_factory=list, repr=False, compare=False)

    def as_row(self) -> dict:
        return {k: getattr(self, k) for k in ("ratio", "seconds", "networks", "nonzero_labels", "mean_r")}


def label_timing_sweep(spec, ratios: Sequence[float], cfg: SirConfig, rng_seed: int = 0,
                       threshold: float = 0.8) -> list[TimingRow]:
    """Label-generation wall time and label spread per training ratio."""
    rows = []
    for ratio in ratios:
        t0 = time.perf_counter()
        samples = build_training_corpus(spec, ratio, cfg, rng_seed, threshold)
        seconds = time.perf_counter() - t0
        rows.append(
            TimingRow(
                ratio=float(ratio),
                seconds=seconds,
                networks=len(samples),
                nonzero_labels=int(sum((s.labels > 0).sum() for s in samples)),
                mean_r=float(np.mean([s.r for s in samples])),
                samples=samples,
            )
        )
        log.info("ratio %.3g: %.2fs, %d nonzero labels", ratio, seconds, rows[-1].nonzero_labels)
    return rows
