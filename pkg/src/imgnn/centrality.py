"""Node centralities, neighbourhood chi-square transforms and the feature matrix."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Graph

FEATURE_COLUMNS = (
    "degree_centrality",
    "chi2_degree",
    "clustering",
    "chi2_clustering",
    "pagerank",
    "coreness",
)


class ConvergenceWarning(RuntimeWarning):
    pass


def degree_centrality(g: Graph) -> np.ndarray:
    if g.n < 2:
        raise ValueError("degree centrality needs at least 2 nodes")
    return g.degrees / (g.n - 1.0)


def triangles(g: Graph) -> np.ndarray:
    """Number of triangles through each node."""
    nbrs = [set(g.neighbors(i).tolist()) for i in range(g.n)]
    t = np.zeros(g.n, dtype=np.int64)
    for u, v in g.edges():
        common = len(nbrs[u] & nbrs[v])
        t[u] += common
        t[v] += common
    # each triangle at u is seen from both of u's incident triangle edges
    return t // 2


def clustering_coefficient(g: Graph) -> np.ndarray:
    k = g.degrees.astype(np.float64)
    out = np.zeros(g.n)
    mask = k >= 2
    out[mask] = 2.0 * triangles(g)[mask] / (k[mask] * (k[mask] - 1.0))
    return out


@dataclass(frozen=True)
class PageRankResult:
    values: np.ndarray
    iterations: int
    converged: bool

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def pagerank(
    g: Graph, teleport: float = 0.15, tol: float = 1e-10, max_iter: int = 200
) -> PageRankResult:
    """Power iteration of PR_i = (1-c) sum_j a_ji PR_j / k_j + c/N.

    ``teleport`` is ``c``. Mass sitting on isolated nodes is spread uniformly
    each step so the vector stays normalised.
    """
    if not 0.0 < teleport < 1.0:
        raise ValueError("teleport weight must lie in (0, 1)")
    n = g.n
    if n == 0:
        return PageRankResult(np.zeros(0), 0, True)
    k = g.degrees.astype(np.float64)
    dangling = k == 0
    inv_k = np.divide(1.0, k, out=np.zeros(n), where=~dangling)
    src = np.repeat(np.arange(n), g.degrees)
    pr = np.full(n, 1.0 / n)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        share = pr * inv_k
        new = np.bincount(g.indices, weights=share[src], minlength=n)
        new = (1.0 - teleport) * (new + pr[dangling].sum() / n) + teleport / n
        new /= new.sum()
        delta = np.abs(new - pr).max()
        pr = new
        if delta < tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"pagerank did not reach tol={tol} in {max_iter} iterations",
            ConvergenceWarning,
            stacklevel=2,
        )
    return PageRankResult(pr, it, converged)


def coreness(g: Graph) -> np.ndarray:
    """k-shell index by bucket peeling (Batagelj-Zaversnik)."""
    n = g.n
    deg = g.degrees.copy()
    if n == 0:
        return deg
    maxd = int(deg.max())
    bins = np.zeros(maxd + 1, dtype=np.int64)
    for d in deg:
        bins[d] += 1
    start = np.zeros(maxd + 1, dtype=np.int64)
    np.cumsum(bins[:-1], out=start[1:])
    pos = np.zeros(n, dtype=np.int64)
    vert = np.zeros(n, dtype=np.int64)
    fill = start.copy()
    for v in range(n):
        pos[v] = fill[deg[v]]
        vert[pos[v]] = v
        fill[deg[v]] += 1
    for i in range(n):
        v = vert[i]
        for u in g.neighbors(v):
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = start[du]
                w = vert[pw]
                if u != w:
                    vert[pu], vert[pw] = w, u
                    pos[u], pos[w] = pw, pu
                start[du] += 1
                deg[u] -= 1
    return deg


def h_index(g: Graph) -> np.ndarray:
    out = np.zeros(g.n, dtype=np.int64)
    for i in range(g.n):
        nd = np.sort(g.degrees[g.neighbors(i)])[::-1]
        # largest x with nd[x-1] >= x
        ranks = np.arange(1, nd.size + 1)
        ok = nd >= ranks
        out[i] = int(ranks[ok].max()) if ok.any() else 0
    return out


def neighbor_mean(values, g: Graph) -> np.ndarray:
    """Mean of ``values`` over each node's neighbours (0 for isolated nodes)."""
    values = np.asarray(values, dtype=np.float64)
    src = np.repeat(np.arange(g.n), g.degrees)
    sums = np.bincount(src, weights=values[g.indices], minlength=g.n)
    return np.divide(sums, g.degrees, out=np.zeros(g.n), where=g.degrees > 0)


def chi2_transform(observed, g: Graph) -> np.ndarray:
    """(o - e)^2 / e with e the neighbourhood mean of ``observed``.

    Degenerate cases: isolated node -> 0; e == 0 and o == 0 -> 0;
    e == 0 and o > 0 -> o.
    """
    o = np.asarray(observed, dtype=np.float64)
    if np.any(o < 0):
        raise ValueError("chi-square transform needs nonnegative observations")
    e = neighbor_mean(o, g)
    out = np.zeros(g.n)
    pos = e > 0
    out[pos] = (o[pos] - e[pos]) ** 2 / e[pos]
    zero_e = (~pos) & (g.degrees > 0)
    out[zero_e] = o[zero_e]
    return out


def chi2_value(o: float, e: float) -> float:
    """Scalar form of the transform, with the same degenerate-case rules."""
    if e > 0:
        return (o - e) ** 2 / e
    return float(o)


def feature_matrix(g: Graph, scaling: str = "none") -> np.ndarray:
    """Six feature columns per node, ordered as ``FEATURE_COLUMNS``.

    The chi-square columns are taken over raw degree and raw clustering.
    ``scaling="minmax"`` rescales each column to [0, 1] (constant columns
    become 0).
    """
    if g.n < 2:
        raise ValueError("feature matrix needs at least 2 nodes")
    deg = g.degrees.astype(np.float64)
    clus = clustering_coefficient(g)
    F = np.column_stack(
        [
            degree_centrality(g),
            chi2_transform(deg, g),
            clus,
            chi2_transform(clus, g),
            pagerank(g).values,
            coreness(g).astype(np.float64),
        ]
    )
    if scaling == "minmax":
        lo, hi = F.min(axis=0), F.max(axis=0)
        span = np.where(hi > lo, hi - lo, 1.0)
        F = (F - lo) / span
    elif scaling != "none":
        raise ValueError(f"unknown feature scaling {scaling!r}")
    return F


def features_to_csv(F: np.ndarray, labels=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["node_id", *FEATURE_COLUMNS] + (["label"] if labels is not None else [])
    w.writerow(header)
    for i, row in enumerate(F):
        extra = [repr(float(labels[i]))] if labels is not None else []
        w.writerow([i, *(repr(float(x)) for x in row), *extra])
    return buf.getvalue()


def features_from_csv(text: str):
    """Inverse of :func:`features_to_csv`; returns ``(F, labels or None)``."""
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    if tuple(header[1:7]) != FEATURE_COLUMNS:
        raise ValueError(f"unexpected feature header {header}")
    F = np.array([[float(x) for x in r[1:7]] for r in body]).reshape(-1, 6)
    labels = None
    if len(header) > 7 and header[7] == "label":
        labels = np.array([float(r[7]) for r in body])
    return F, labels


@dataclass(frozen=True)
class RankingResult:
    scores: np.ndarray
    order: np.ndarray

    def top(self, k: int) -> list[int]:
        return self.order[:k].tolist()

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node_id", "score", "rank"])
        for r, node in enumerate(self.order, start=1):
            w.writerow([int(node), repr(float(self.scores[node])), r])
        return buf.getvalue()


def rank(scores) -> RankingResult:
    """Descending scores, ties broken by ascending node id."""
    s = np.asarray(scores, dtype=np.float64)
    if np.isnan(s).any():
        raise ValueError("cannot rank NaN scores")
    # lexsort is stable and sorts by the last key first
    order = np.lexsort((np.arange(s.size), -s))
    return RankingResult(s.copy(), order)
