"""Iterative spreader-selection heuristics.

Each method exists as a generator (``iter_*``) yielding ``(node, score)`` one
selection at a time, and as a function returning a :class:`SelectionTrace`
of the first ``k`` selections. All ties go to the smallest node id.

NCVoteRank's coreness blend, EnRenew's entropy renewal and the RINF
reordering are reconstructions with configurable constants; their exact
published forms are not reproduced here.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .centrality import RankingResult, coreness
from .graph import Graph


@dataclass(frozen=True)
class SelectionTrace:
    order: tuple[int, ...]
    scores: tuple[float, ...]
    method: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise ValueError("selection order contains duplicates")

    def top(self, k: int) -> list[int]:
        return list(self.order[:k])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# method={self.method}\n")
        for k, v in self.params.items():
            buf.write(f"# {k}={v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "node_id", "score_at_selection", "remaining"])
        total = len(self.order)
        for step, (node, score) in enumerate(zip(self.order, self.scores), start=1):
            w.writerow([step, node, repr(float(score)), total - step])
        return buf.getvalue()


class LazySelection:
    """Pulls selections from a method generator only as far as requested."""

    def __init__(self, n: int, it: Iterator[tuple[int, float]], method: str, params: dict | None = None):
        self.n = n
        self._it = it
        self._order: list[int] = []
        self._scores: list[float] = []
        self.method = method
        self.params = params or {}

    def extend_to(self, k: int) -> None:
        if k > self.n:
            raise ValueError(f"cannot select {k} of {self.n} nodes")
        while len(self._order) < k:
            node, score = next(self._it)
            self._order.append(int(node))
            self._scores.append(float(score))

    def top(self, k: int) -> list[int]:
        self.extend_to(k)
        return self._order[:k]

    def trace(self, k: int | None = None) -> SelectionTrace:
        k = len(self._order) if k is None else k
        self.extend_to(k)
        return SelectionTrace(tuple(self._order[:k]), tuple(self._scores[:k]), self.method, dict(self.params))


def _argmax(values: np.ndarray, eligible: np.ndarray) -> int:
    masked = np.where(eligible, values, -np.inf)
    return int(np.argmax(masked))  # argmax returns the first maximum


def _check_k(g: Graph, k: int) -> None:
    if not 1 <= k <= g.n:
        raise ValueError(f"k must lie in 1..{g.n}, got {k}")


def _take(g, it, k, method, params) -> SelectionTrace:
    _check_k(g, k)
    return LazySelection(g.n, it, method, params).trace(k)


def _neighbor_sum(g: Graph, values: np.ndarray) -> np.ndarray:
    src = np.repeat(np.arange(g.n), g.degrees)
    return np.bincount(src, weights=values[g.indices], minlength=g.n).astype(np.float64)


def iter_voterank(g: Graph, weights: np.ndarray | None = None):
    """VoteRank: score = sum of neighbours' (weighted) voting ability.

    Voting ability starts at 1; the elected node's drops to 0 and each of its
    neighbours loses 1/<k> (floored at 0).
    """
    n = g.n
    ability = np.ones(n)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    mean_k = 2.0 * g.m / n if n else 0.0
    drop = 1.0 / mean_k if mean_k > 0 else 0.0
    eligible = np.ones(n, dtype=bool)
    for _ in range(n):
        score = _neighbor_sum(g, ability * w)
        v = _argmax(score, eligible)
        yield v, score[v]
        eligible[v] = False
        ability[v] = 0.0
        nb = g.neighbors(v)
        ability[nb] = np.maximum(ability[nb] - drop, 0.0)


def voterank(g: Graph, k: int) -> SelectionTrace:
    return _take(g, iter_voterank(g), k, "voterank", {})


def ncvoterank_weights(g: Graph, coreness_weight: float = 1.0) -> np.ndarray:
    """Per-voter weight (1 - w) + w * coreness / max coreness."""
    core = coreness(g).astype(np.float64)
    top = core.max() if g.n else 0.0
    norm = core / top if top > 0 else np.zeros(g.n)
    return (1.0 - coreness_weight) + coreness_weight * norm


def iter_ncvoterank(g: Graph, coreness_weight: float = 1.0):
    return iter_voterank(g, ncvoterank_weights(g, coreness_weight))


def ncvoterank(g: Graph, k: int, coreness_weight: float = 1.0) -> SelectionTrace:
    params = {"coreness_weight": coreness_weight, "reconstruction": True}
    return _take(g, iter_ncvoterank(g, coreness_weight), k, "ncvoterank", params)


def entropy(g: Graph) -> np.ndarray:
    """E_i = -sum_j p_j ln p_j with p_j = k_j / sum_{l in N(i)} k_l over neighbours."""
    k = g.degrees.astype(np.float64)
    src = np.repeat(np.arange(g.n), g.degrees)
    kj = k[g.indices]
    total = np.bincount(src, weights=kj, minlength=g.n)
    p = kj / total[src]
    # bincount over empty weights returns ints
    return np.bincount(src, weights=-p * np.log(p), minlength=g.n).astype(np.float64)


def iter_enrenew(g: Graph, attenuation: float = 0.5):
    e = entropy(g)
    eligible = np.ones(g.n, dtype=bool)
    for _ in range(g.n):
        v = _argmax(e, eligible)
        yield v, e[v]
        eligible[v] = False
        e[g.neighbors(v)] *= attenuation


def enrenew(g: Graph, k: int, attenuation: float = 0.5) -> SelectionTrace:
    if not 0.0 < attenuation < 1.0:
        raise ValueError("attenuation must lie in (0, 1)")
    params = {"attenuation": attenuation, "reconstruction": True}
    return _take(g, iter_enrenew(g, attenuation), k, "enrenew", params)


def iter_improved_kshell(g: Graph):
    """Round-robin over shells from the highest coreness down, taking the
    highest-entropy unselected node of each shell per pass."""
    core = coreness(g)
    e = entropy(g)
    shells = []
    for c in sorted(set(core.tolist()), reverse=True):
        members = np.flatnonzero(core == c)
        # descending entropy, ascending id on ties
        shells.append(list(members[np.lexsort((members, -e[members]))]))
    while any(shells):
        for shell in shells:
            if shell:
                v = int(shell.pop(0))
                yield v, e[v]


def improved_kshell(g: Graph, k: int) -> SelectionTrace:
    return _take(g, iter_improved_kshell(g), k, "improved_kshell", {})


def iter_rinf(g: Graph, base_scores, suppression_radius: int = 1, factor: float = 0.5):
    """Greedy re-selection from a static score: after each pick, scores of
    nodes within ``suppression_radius`` hops are multiplied by ``factor``."""
    s = np.array(base_scores, dtype=np.float64)
    if s.shape != (g.n,):
        raise ValueError("base scores must cover every node")
    if (s < 0).any():
        raise ValueError("rinf reordering needs nonnegative base scores")
    eligible = np.ones(g.n, dtype=bool)
    for _ in range(g.n):
        v = _argmax(s, eligible)
        yield v, s[v]
        eligible[v] = False
        if factor != 1.0 and suppression_radius > 0:
            s[_ball(g, v, suppression_radius)] *= factor


def _ball(g: Graph, v: int, radius: int) -> np.ndarray:
    """Nodes at hop distance 1..radius from v."""
    seen = {v}
    frontier = [v]
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for w in g.neighbors(u).tolist():
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    seen.discard(v)
    return np.fromiter(seen, dtype=np.int64, count=len(seen))


def rinf_reorder(
    g: Graph,
    base: RankingResult,
    k: int,
    suppression_radius: int = 1,
    factor: float = 0.5,
) -> SelectionTrace:
    params = {"suppression_radius": suppression_radius, "factor": factor, "reconstruction": True}
    return _take(g, iter_rinf(g, base.scores, suppression_radius, factor), k, "rinf", params)


ITERATIVE: dict[str, Callable[..., Iterator]] = {
    "voterank": iter_voterank,
    "ncvoterank": iter_ncvoterank,
    "enrenew": iter_enrenew,
    "improved_kshell": iter_improved_kshell,
}
