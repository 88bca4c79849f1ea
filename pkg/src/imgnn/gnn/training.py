"""Per-graph Adam (or plain gradient descent) training of the scoring model."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..centrality import RankingResult, feature_matrix, rank
from ..graph import Graph
from .model import ModelConfig, ModelParams, init_params, loss_and_gradients, model_forward

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    learning_rate: float = 0.001
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rng_seed: int = 0
    model: ModelConfig = field(default_factory=ModelConfig)

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError("optimizer must be 'adam' or 'sgd'")


@dataclass
class TrainResult:
    params: ModelParams
    epoch_losses: list[float]

    def log_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "mean_loss"])
        for e, loss in enumerate(self.epoch_losses, start=1):
            w.writerow([e, repr(loss)])
        return buf.getvalue()


class Adam:
    def __init__(self, params: ModelParams, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.tensors.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.tensors.items()}
        self.t = 0

    def step(self, params: ModelParams, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for k, g in grads.items():
            self.m[k] = self.b1 * self.m[k] + (1.0 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1.0 - self.b2) * g * g
            params.tensors[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def _features(sample, scaling: str) -> np.ndarray:
    if scaling == "none":
        return np.asarray(sample.features)
    return feature_matrix(sample.graph, scaling)


def train(corpus: Sequence, cfg: TrainConfig, init: ModelParams | None = None) -> TrainResult:
    """One optimiser step per network, corpus reshuffled every epoch.

    ``corpus`` items need ``graph``, ``features`` and ``labels`` attributes.
    """
    if not corpus:
        raise ValueError("training corpus is empty")
    for i, s in enumerate(corpus):
        if np.asarray(s.features).shape != (s.graph.n, cfg.model.in_dim):
            raise ValueError(f"sample {i}: features must have {cfg.model.in_dim} columns")
    params = init.copy() if init is not None else init_params(cfg.model, cfg.rng_seed)
    rng = np.random.default_rng([cfg.rng_seed, 1])
    opt = Adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps) if cfg.optimizer == "adam" else None
    feats = [_features(s, cfg.model.feature_scaling) for s in corpus]
    losses = []
    for epoch in range(1, cfg.epochs + 1):
        total = 0.0
        for i in rng.permutation(len(corpus)):
            s = corpus[i]
            try:
                loss, grads = loss_and_gradients(s.graph, feats[i], s.labels, params)
            except FloatingPointError as exc:
                raise FloatingPointError(f"epoch {epoch}, sample {i}: {exc}") from exc
            if opt is not None:
                opt.step(params, grads)
            else:
                for k, g in grads.items():
                    params.tensors[k] -= cfg.learning_rate * g
            total += loss
        losses.append(total / len(corpus))
        log.info("epoch %d mean loss %.6f", epoch, losses[-1])
    return TrainResult(params, losses)


def score_nodes(g: Graph, params: ModelParams) -> RankingResult:
    F = feature_matrix(g, params.config.feature_scaling)
    return rank(model_forward(g, F, params))


def top_r_hit_rate(corpus: Sequence, params: ModelParams) -> float:
    """Share of samples whose top-r scored nodes form one of their optimal sets."""
    hits = 0
    for s in corpus:
        top = tuple(sorted(score_nodes(s.graph, params).top(s.r)))
        hits += top in set(s.sets)
    return hits / len(corpus)
