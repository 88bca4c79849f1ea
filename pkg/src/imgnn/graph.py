"""Undirected simple graphs, edge-list I/O, random generators and summary stats."""

from __future__ import annotations

import io
import logging
from dataclasses import asdict, dataclass
from typing import Iterable, TextIO

import numpy as np

log = logging.getLogger(__name__)


class EdgeListError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class Graph:
    """Immutable undirected simple graph on nodes ``0..n-1``.

    Stored in CSR form: the neighbours of ``i`` are
    ``indices[indptr[i]:indptr[i + 1]]``, sorted ascending. The CSR position
    of an entry doubles as a stable id for the directed edge it represents.
    """

    __slots__ = ("n", "m", "indptr", "indices", "degrees", "_adjacency")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError("node count must be nonnegative")
        pairs = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) outside node range 0..{n - 1}")
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            pairs.add((u, v) if u < v else (v, u))
        if pairs:
            arr = np.array(sorted(pairs), dtype=np.int64)
            src = np.concatenate([arr[:, 0], arr[:, 1]])
            dst = np.concatenate([arr[:, 1], arr[:, 0]])
        else:
            src = dst = np.zeros(0, dtype=np.int64)
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        degrees = np.bincount(src, minlength=n).astype(np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        for a in (indptr, dst, degrees):
            a.flags.writeable = False
        self.n = n
        self.m = len(pairs)
        self.indptr = indptr
        self.indices = dst
        self.degrees = degrees
        self._adjacency = None

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        if self._adjacency is None:
            self._adjacency = tuple(
                tuple(int(x) for x in self.neighbors(i)) for i in range(self.n)
            )
        return self._adjacency

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def degree(self, i: int) -> int:
        return int(self.degrees[i])

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v``, lexicographically sorted."""
        src = np.repeat(np.arange(self.n), self.degrees)
        keep = src < self.indices
        return list(zip(src[keep].tolist(), self.indices[keep].tolist()))

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        pos = np.searchsorted(nb, v)
        return bool(pos < nb.size and nb[pos] == v)

    def relabel(self, perm) -> Graph:
        """Graph with node ``i`` renamed to ``perm[i]``."""
        perm = np.asarray(perm)
        return Graph(self.n, ((perm[u], perm[v]) for u, v in self.edges()))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class LoadReport:
    lines: int
    edges: int
    duplicates: int
    self_loops: int


@dataclass(frozen=True)
class EdgeListLoad:
    graph: Graph
    labels: tuple[str, ...]
    report: LoadReport


def parse_edge_list(text: str | TextIO) -> EdgeListLoad:
    """Parse whitespace-separated edge-list text.

    Lines starting with ``#`` or ``%`` and blank lines are skipped. Tokens are
    mapped to dense ids in order of first appearance. Duplicate edges (in
    either direction) and self-loops are dropped and counted in the report.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    ids: dict[str, int] = {}
    seen: set[tuple[int, int]] = set()
    edges = []
    duplicates = self_loops = lines = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListError(f"expected 2 tokens, got {len(tokens)}", lineno)
        lines += 1
        u = ids.setdefault(tokens[0], len(ids))
        v = ids.setdefault(tokens[1], len(ids))
        if u == v:
            self_loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        edges.append(key)
    if not ids:
        raise EdgeListError("empty edge list")
    report = LoadReport(lines, len(edges), duplicates, self_loops)
    log.info("edge list loaded", extra={"load_report": asdict(report)})
    return EdgeListLoad(Graph(len(ids), edges), tuple(ids), report)


def load_edge_list(text: str | TextIO) -> Graph:
    return parse_edge_list(text).graph


def read_edge_file(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh)


def read_decimal_edge_file(path, n: int | None = None) -> Graph:
    """Read an edge list whose tokens are node ids taken literally.

    Used for files this package wrote itself, where first-appearance
    remapping would scramble ids. ``n`` restores trailing isolated nodes.
    """
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line[0] in "#%":
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise EdgeListError(f"expected 2 tokens, got {len(tokens)}", lineno)
            edges.append((int(tokens[0]), int(tokens[1])))
    top = max((max(e) for e in edges), default=-1) + 1
    return Graph(top if n is None else n, edges)


def to_edge_list(g: Graph) -> str:
    """Decimal-id edge list; isolated nodes are not representable and are lost."""
    return "".join(f"{u} {v}\n" for u, v in g.edges())


def write_edge_file(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={g.n} m={g.m}\n")
        fh.write(to_edge_list(g))


def complete_graph(n: int) -> Graph:
    return Graph(n, ((i, j) for i in range(n) for j in range(i + 1, n)))


def path_graph(n: int) -> Graph:
    return Graph(n, ((i, i + 1) for i in range(n - 1)))


def star_graph(leaves: int) -> Graph:
    """Star with centre 0 and leaves ``1..leaves``."""
    return Graph(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


def generate_ba(n: int, m_attach: int, rng_seed: int) -> Graph:
    """Barabasi-Albert preferential attachment.

    Starts from a complete graph on ``m_attach + 1`` nodes; each later node
    links to ``m_attach`` distinct existing nodes drawn proportionally to
    degree (repeated draws of the same target are redrawn).
    """
    if m_attach < 1 or n <= m_attach:
        raise ValueError(f"need n > m_attach >= 1, got n={n}, m_attach={m_attach}")
    rng = np.random.default_rng(rng_seed)
    core = m_attach + 1
    edges = [(i, j) for i in range(core) for j in range(i + 1, core)]
    # each node appears once per incident edge end
    pool = [v for e in edges for v in e]
    for new in range(core, n):
        targets: set[int] = set()
        while len(targets) < m_attach:
            targets.add(pool[int(rng.integers(len(pool)))])
        for t in sorted(targets):
            edges.append((t, new))
            pool.extend((t, new))
    return Graph(n, edges)


def generate_er(n: int, p: float, rng_seed: int) -> Graph:
    """Erdos-Renyi G(n, p): each unordered pair linked independently."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = np.random.default_rng(rng_seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph(n, zip(iu[keep].tolist(), ju[keep].tolist()))


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    mean_degree: float
    max_degree: int
    mean_clustering: float
    degree_heterogeneity: float
    connected: bool

    def as_row(self) -> dict:
        return asdict(self)


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        return True
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for v in g.neighbors(u):
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return bool(seen.all())


def components(g: Graph) -> np.ndarray:
    """Component label per node, labels assigned in order of smallest member."""
    label = np.full(g.n, -1, dtype=np.int64)
    c = 0
    for s in range(g.n):
        if label[s] >= 0:
            continue
        label[s] = c
        stack = [s]
        while stack:
            u = stack.pop()
            for v in g.neighbors(u):
                if label[v] < 0:
                    label[v] = c
                    stack.append(int(v))
        c += 1
    return label


def stats(g: Graph) -> GraphStats:
    if g.n < 1:
        raise ValueError("stats need at least one node")
    from .centrality import clustering_coefficient

    k = g.degrees.astype(np.float64)
    mean_k = float(k.mean())
    mean_k2 = float((k * k).mean())
    het = mean_k2 / mean_k**2 if mean_k > 0 else float("nan")
    return GraphStats(
        n=g.n,
        m=g.m,
        mean_degree=2.0 * g.m / g.n,
        max_degree=int(g.degrees.max()),
        mean_clustering=float(clustering_coefficient(g).mean()),
        degree_heterogeneity=het,
        connected=is_connected(g),
    )
