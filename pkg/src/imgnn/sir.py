"""Discrete-time SIR spreading with recovery probability 1.

Each infected node is infectious for exactly one step: it tries every
susceptible neighbour once with probability ``mu`` and then recovers.
Because of that, each directed edge is tried at most once per run, so the
hashed engine keys every coin flip by ``(run key, directed edge id)``.
Two seed sets simulated under the same keys therefore share all coin flips,
and the final infected sets are nested whenever the seed sets are.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph
from .rng import edge_uniforms, run_keys

MODES = ("hashed", "stream")
# bound on rows*n cells per simulated chunk
_CHUNK_CELLS = 1 << 22


@dataclass(frozen=True)
class SirConfig:
    mu: float
    runs: int = 1000
    rng_seed: int = 0
    mode: str = "hashed"

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class SpreadEstimate:
    mean_fraction: float
    runs: int
    stderr: float
    rng_seed: int

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> SpreadEstimate:
        return cls(**json.loads(text))


def _seed_array(g: Graph, seeds: Iterable[int]) -> np.ndarray:
    s = np.unique(np.fromiter((int(x) for x in seeds), dtype=np.int64))
    if s.size == 0:
        raise ValueError("seed set must be nonempty")
    if s[0] < 0 or s[-1] >= g.n:
        raise ValueError(f"seed ids must lie in 0..{g.n - 1}")
    return s


def sir_run(g: Graph, seeds: Iterable[int], mu: float, rng: np.random.Generator) -> float:
    """One synchronous SIR run driven by ``rng``; returns the recovered fraction."""
    s = _seed_array(g, seeds)
    ever = np.zeros(g.n, dtype=bool)
    ever[s] = True
    front = s
    for _ in range(g.n):
        if front.size == 0:
            break
        cand = np.concatenate([g.neighbors(u) for u in front])
        cand = cand[~ever[cand]]
        hit = cand[rng.random(cand.size) < mu]
        front = np.unique(hit)
        ever[front] = True
    return float(ever.sum()) / g.n


def _edge_offsets(g: Graph, u: np.ndarray):
    """CSR positions of every outgoing edge of the nodes in ``u``."""
    counts = g.degrees[u]
    total = int(counts.sum())
    base = np.repeat(g.indptr[u] - (np.cumsum(counts) - counts), counts)
    return np.repeat(np.arange(u.size), counts), base + np.arange(total)


def infected_sets(g: Graph, seed_masks: np.ndarray, mu: float, keys: np.ndarray) -> np.ndarray:
    """Final ever-infected masks for a batch of runs.

    ``seed_masks`` is a ``(rows, n)`` boolean array and ``keys`` holds one
    uint64 run key per row. Returns a new ``(rows, n)`` boolean array.
    """
    ever = np.array(seed_masks, dtype=bool, copy=True)
    if mu <= 0.0 or g.m == 0:
        return ever
    front = ever.copy()
    for _ in range(g.n):
        r, u = np.nonzero(front)
        if r.size == 0:
            break
        which, pos = _edge_offsets(g, u)
        rr = r[which]
        v = g.indices[pos]
        open_ = ~ever[rr, v]
        rr, pos, v = rr[open_], pos[open_], v[open_]
        hit = edge_uniforms(keys[rr], pos) < mu
        front = np.zeros_like(ever)
        front[rr[hit], v[hit]] = True
        ever |= front
    return ever


def _summarise(counts: np.ndarray, n: int, runs: int, seed: int) -> SpreadEstimate:
    # integer moments keep the aggregate independent of run order
    c = counts.astype(np.int64)
    s1 = int(c.sum())
    s2 = int((c * c).sum())
    mean = s1 / (runs * n)
    if runs > 1:
        var = max(s2 - s1 * s1 / runs, 0.0) / (runs - 1) / (n * n)
        stderr = math.sqrt(var / runs)
    else:
        stderr = 0.0
    return SpreadEstimate(mean, runs, stderr, seed)


def estimate_spread_many(
    g: Graph,
    seed_sets: Sequence[Iterable[int]],
    mu: float,
    runs: int,
    rng_seeds: Sequence[int],
) -> list[SpreadEstimate]:
    """Hashed-mode estimates for several seed sets, each with its own master seed.

    Identical to calling :func:`estimate_spread` on each set separately; the
    runs of all sets are batched together for speed.
    """
    if len(seed_sets) != len(rng_seeds):
        raise ValueError("one rng seed per seed set is required")
    if not seed_sets:
        return []
    masks = np.zeros((len(seed_sets), g.n), dtype=bool)
    for i, s in enumerate(seed_sets):
        masks[i, _seed_array(g, s)] = True
    seeds_u64 = np.array([int(x) & 0xFFFFFFFFFFFFFFFF for x in rng_seeds], dtype=np.uint64)
    counts = np.zeros((len(seed_sets), runs), dtype=np.int64)
    sets_per_chunk = max(1, _CHUNK_CELLS // max(1, runs * g.n))
    for lo in range(0, len(seed_sets), sets_per_chunk):
        hi = min(lo + sets_per_chunk, len(seed_sets))
        keys = run_keys(seeds_u64[lo:hi], runs).ravel()
        rows = np.repeat(masks[lo:hi], runs, axis=0)
        ever = infected_sets(g, rows, mu, keys)
        counts[lo:hi] = ever.sum(axis=1).reshape(hi - lo, runs)
    return [_summarise(counts[i], g.n, runs, int(rng_seeds[i])) for i in range(len(seed_sets))]


def estimate_spread(g: Graph, seeds: Iterable[int], cfg: SirConfig) -> SpreadEstimate:
    """Monte Carlo mean final infected fraction over ``cfg.runs`` runs.

    Run ``i`` draws its randomness from a key derived from
    ``(cfg.rng_seed, i)`` in either mode, so the estimate is a pure function
    of its inputs.
    """
    seeds = _seed_array(g, seeds)
    if cfg.mode == "hashed":
        return estimate_spread_many(g, [seeds], cfg.mu, cfg.runs, [cfg.rng_seed])[0]
    counts = np.empty(cfg.runs, dtype=np.int64)
    for i in range(cfg.runs):
        rng = np.random.default_rng([cfg.rng_seed & 0xFFFFFFFFFFFFFFFF, i])
        counts[i] = round(sir_run(g, seeds, cfg.mu, rng) * g.n)
    return _summarise(counts, g.n, cfg.runs, cfg.rng_seed)


def epidemic_threshold(g: Graph, kind: str = "heterogeneous") -> float:
    """<k>/(<k^2>-<k>) for ``heterogeneous``; 1/<k> for ``mean_degree``."""
    k = g.degrees.astype(np.float64)
    mk = float(k.mean()) if g.n else 0.0
    if kind == "heterogeneous":
        mk2 = float((k * k).mean()) if g.n else 0.0
        if mk2 - mk <= 0:
            raise ValueError("threshold undefined: <k^2> <= <k>")
        return mk / (mk2 - mk)
    if kind == "mean_degree":
        if mk <= 0:
            raise ValueError("threshold undefined: <k> = 0")
        return 1.0 / mk
    raise ValueError(f"unknown threshold kind {kind!r}")
