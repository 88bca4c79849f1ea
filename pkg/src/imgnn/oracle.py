"""Exhaustive minimum seed-set search on micro-networks and training labels."""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .centrality import feature_matrix, features_from_csv, features_to_csv
from .graph import Graph, generate_ba, generate_er, read_decimal_edge_file, write_edge_file
from .rng import derive_seed, splitmix64
from .sir import SirConfig, epidemic_threshold, estimate_spread_many

DEFAULT_MAX_NODES = 18
# candidate seed sets evaluated per batch
_BATCH = 512


@dataclass(frozen=True)
class OptimalSolutionSet:
    r: int
    sets: tuple[tuple[int, ...], ...]
    threshold: float
    mu_t: float
    runs: int
    spreads: tuple[float, ...] = ()


def candidate_seeds(base_seed: int, network_index: int, r: int, count: int) -> np.ndarray:
    """Master seeds for the ``count`` size-``r`` combinations of one network."""
    root = np.uint64(derive_seed(base_seed, network_index, r))
    return splitmix64(root ^ splitmix64(np.arange(count, dtype=np.uint64)))


def search_optimal_sets(
    g: Graph,
    mu_t: float,
    cfg: SirConfig,
    threshold: float = 0.8,
    *,
    network_index: int = 0,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> OptimalSolutionSet:
    """All minimum-size seed sets whose mean spread exceeds ``threshold``.

    Sizes r = 1, 2, ... are tried in turn; at each size every combination is
    evaluated in lexicographic order with ``cfg.runs`` runs at ``mu_t``, and
    the search stops at the first size with a qualifying combination.
    Combination ``j`` of size ``r`` uses randomness keyed by
    ``(cfg.rng_seed, network_index, r, j)``. ``cfg.mu`` is ignored.
    """
    if g.n > max_nodes:
        raise ValueError(
            f"exhaustive search refused: n={g.n} exceeds cap {max_nodes} "
            "(raise max_nodes to override)"
        )
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    for r in range(1, g.n + 1):
        combos = list(itertools.combinations(range(g.n), r))
        seeds = candidate_seeds(cfg.rng_seed, network_index, r, len(combos))
        found, spreads = [], []
        for lo in range(0, len(combos), _BATCH):
            batch = combos[lo : lo + _BATCH]
            ests = estimate_spread_many(g, batch, mu_t, cfg.runs, seeds[lo : lo + _BATCH].tolist())
            for c, est in zip(batch, ests):
                if est.mean_fraction > threshold:
                    found.append(c)
                    spreads.append(est.mean_fraction)
        if found:
            return OptimalSolutionSet(r, tuple(found), threshold, mu_t, cfg.runs, tuple(spreads))
    raise AssertionError("seeding every node must exceed any threshold below 1")


def assign_labels(sol: OptimalSolutionSet, n: int) -> np.ndarray:
    """Fraction of optimal sets that contain each node."""
    if not sol.sets:
        raise ValueError("no optimal sets to label from")
    counts = np.zeros(n)
    for s in sol.sets:
        counts[list(s)] += 1
    return counts / len(sol.sets)


@dataclass(frozen=True)
class GroupSpec:
    generator: str  # "ba" or "er"
    param: float  # attachment count for BA, link probability for ER
    count: int
    nodes: int

    def make(self, seed: int) -> Graph:
        if self.generator == "ba":
            return generate_ba(self.nodes, int(self.param), seed)
        if self.generator == "er":
            return generate_er(self.nodes, float(self.param), seed)
        raise ValueError(f"unknown generator {self.generator!r}")


FULL_CORPUS = (
    GroupSpec("ba", 2, 50, 15),
    GroupSpec("ba", 4, 50, 15),
    GroupSpec("ba", 6, 50, 15),
    GroupSpec("er", 0.2, 50, 15),
    GroupSpec("er", 0.4, 50, 15),
)
DESK_CORPUS = (
    GroupSpec("ba", 2, 10, 10),
    GroupSpec("er", 0.3, 10, 10),
)


@dataclass
class LabeledSample:
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    r: int
    n_sets: int
    provenance: dict = field(default_factory=dict)
    sets: tuple[tuple[int, ...], ...] = ()


def training_mu(g: Graph, ratio: float) -> float:
    """``ratio`` times the heterogeneous threshold, capped at 1."""
    return min(1.0, ratio * epidemic_threshold(g, "heterogeneous"))


def build_training_corpus(
    spec: Sequence[GroupSpec],
    mu_t_ratio: float,
    cfg: SirConfig,
    rng_seed: int,
    threshold: float = 0.8,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> list[LabeledSample]:
    samples = []
    index = 0
    for gi, group in enumerate(spec):
        for member in range(group.count):
            gen_seed = derive_seed(rng_seed, "graph", gi, member)
            context = f"group {gi} ({group.generator}, {group.param}) member {member}"
            try:
                g = group.make(gen_seed)
                mu_t = training_mu(g, mu_t_ratio)
                t0 = time.perf_counter()
                sol = search_optimal_sets(
                    g,
                    mu_t,
                    SirConfig(mu_t, cfg.runs, rng_seed),
                    threshold,
                    network_index=index,
                    max_nodes=max_nodes,
                )
                seconds = time.perf_counter() - t0
            except (ValueError, AssertionError) as exc:
                raise type(exc)(f"{context}: {exc}") from exc
            samples.append(
                LabeledSample(
                    graph=g,
                    features=feature_matrix(g),
                    labels=assign_labels(sol, g.n),
                    r=sol.r,
                    n_sets=len(sol.sets),
                    sets=sol.sets,
                    provenance={
                        "index": index,
                        "generator": group.generator,
                        "param": group.param,
                        "nodes": group.nodes,
                        "graph_seed": gen_seed,
                        "mu_t": mu_t,
                        "mu_t_ratio": mu_t_ratio,
                        "runs": cfg.runs,
                        "threshold": threshold,
                        "rng_seed": rng_seed,
                        "seconds": seconds,
                    },
                )
            )
            index += 1
    return samples


def label_sum_ok(sample: LabeledSample) -> bool:
    return math.isclose(float(sample.labels.sum()), sample.r, rel_tol=0, abs_tol=1e-9)


def save_corpus(samples: Sequence[LabeledSample], directory, extra: dict | None = None) -> Path:
    """One edge list + one feature/label CSV per network, plus manifest.json."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    entries = []
    for s in samples:
        stem = f"net_{s.provenance.get('index', len(entries)):04d}"
        write_edge_file(s.graph, d / f"{stem}.edges")
        (d / f"{stem}.csv").write_text(features_to_csv(s.features, s.labels))
        entries.append({
                "stem": stem,
                "n": s.graph.n,
                "r": s.r,
                "n_sets": s.n_sets,
                "sets": [list(c) for c in s.sets],
                **s.provenance,
            })
    manifest = {"format": "imgnn-corpus", "version": 1, "networks": entries, **(extra or {})}
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return d


def load_corpus(directory) -> list[LabeledSample]:
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text())
    samples = []
    for e in manifest["networks"]:
        F, labels = features_from_csv((d / f"{e['stem']}.csv").read_text())
        g = read_decimal_edge_file(d / f"{e['stem']}.edges", e["n"])
        prov = {k: v for k, v in e.items() if k not in ("stem", "n", "r", "n_sets", "sets")}
        sets = tuple(tuple(c) for c in e.get("sets", ()))
        samples.append(LabeledSample(g, F, labels, e["r"], e["n_sets"], prov, sets))
    return samples

