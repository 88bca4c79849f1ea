"""Two-block graph attention scoring model.

Block b maps its input ``H`` to ``concat_k ELU(GAT_k(H)) + H @ L_b + c_b``.
The attention of head k at node i runs over i's neighbours and i itself.
Two blocks are followed by a linear head and a sigmoid, giving one score
per node in (0, 1).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ..graph import Graph
from .tensor import Tensor, concat

FORMAT = "imgnn-model"
VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    in_dim: int = 6
    heads: tuple[int, ...] = (5, 10)
    head_dims: tuple[int, ...] = (10, 20)
    leaky_slope: float = 0.2
    elu_alpha: float = 1.0
    feature_scaling: str = "none"

    def __post_init__(self):
        if len(self.heads) != len(self.head_dims) or not self.heads:
            raise ValueError("heads and head_dims must be nonempty and equal length")

    def block_dims(self) -> list[tuple[int, int]]:
        dims, d_in = [], self.in_dim
        for k, d in zip(self.heads, self.head_dims):
            dims.append((d_in, k * d))
            d_in = k * d
        return dims


@dataclass
class ModelParams:
    """Named float64 arrays plus the hyperparameters that shape them."""

    config: ModelConfig
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def names(self) -> list[str]:
        return list(self.tensors)

    def copy(self) -> ModelParams:
        return ModelParams(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def to_json(self) -> str:
        doc = {
            "format": FORMAT,
            "version": VERSION,
            "hyperparameters": {**asdict(self.config), "activation": "elu", "output": "sigmoid"},
            "tensors": {
                k: {"shape": list(v.shape), "data": v.ravel().tolist()}
                for k, v in self.tensors.items()
            },
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> ModelParams:
        doc = json.loads(text)
        if doc.get("format") != FORMAT or doc.get("version") != VERSION:
            raise ValueError("not an imgnn model document of a supported version")
        hp = doc["hyperparameters"]
        cfg = ModelConfig(
            in_dim=hp["in_dim"],
            heads=tuple(hp["heads"]),
            head_dims=tuple(hp["head_dims"]),
            leaky_slope=hp["leaky_slope"],
            elu_alpha=hp["elu_alpha"],
            feature_scaling=hp.get("feature_scaling", "none"),
        )
        tensors = {
            k: np.array(v["data"], dtype=np.float64).reshape(v["shape"])
            for k, v in doc["tensors"].items()
        }
        p = cls(cfg, tensors)
        p.check()
        return p

    def check(self) -> None:
        expected = param_shapes(self.config)
        if set(expected) != set(self.tensors):
            raise ValueError("parameter names do not match the configuration")
        for k, shape in expected.items():
            if self.tensors[k].shape != shape:
                raise ValueError(f"{k}: shape {self.tensors[k].shape} != {shape}")
            if not np.isfinite(self.tensors[k]).all():
                raise ValueError(f"{k}: non-finite values")


def param_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    shapes = {}
    for b, ((d_in, d_out), heads, hd) in enumerate(
        zip(cfg.block_dims(), cfg.heads, cfg.head_dims), start=1
    ):
        for k in range(heads):
            shapes[f"block{b}.head{k}.W"] = (d_in, hd)
            shapes[f"block{b}.head{k}.a"] = (2 * hd, 1)
        shapes[f"block{b}.linear.W"] = (d_in, d_out)
        shapes[f"block{b}.linear.b"] = (1, d_out)
    final = cfg.block_dims()[-1][1]
    shapes["out.W"] = (final, 1)
    shapes["out.b"] = (1, 1)
    return shapes


def init_params(cfg: ModelConfig | None = None, seed: int = 0) -> ModelParams:
    """Glorot-uniform weights, zero biases."""
    cfg = cfg or ModelConfig()
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in param_shapes(cfg).items():
        if name.endswith(".b"):
            tensors[name] = np.zeros(shape)
        else:
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            tensors[name] = rng.uniform(-limit, limit, size=shape)
    return ModelParams(cfg, tensors)


def zero_params(cfg: ModelConfig | None = None) -> ModelParams:
    cfg = cfg or ModelConfig()
    return ModelParams(cfg, {k: np.zeros(s) for k, s in param_shapes(cfg).items()})


@dataclass(frozen=True)
class AttentionIndex:
    """Edge lists (with one self-loop per node) grouped by target node."""

    n: int
    dst: np.ndarray
    src: np.ndarray

    @classmethod
    def of(cls, g: Graph) -> AttentionIndex:
        dst = np.repeat(np.arange(g.n), g.degrees)
        loops = np.arange(g.n)
        return cls(g.n, np.concatenate([dst, loops]), np.concatenate([g.indices, loops]))


def _finite(t: Tensor, where: str) -> Tensor:
    if not np.isfinite(t.data).all():
        raise FloatingPointError(f"non-finite values in {where}")
    return t


def attention_weights(Wh: Tensor, a: Tensor, idx: AttentionIndex, slope: float = 0.2) -> Tensor:
    """Softmax of LeakyReLU(a . [Wh_i || Wh_j]) over each target i's edges.

    Returns an ``(edges, 1)`` tensor aligned with ``idx.dst``/``idx.src``.
    """
    d = Wh.shape[1]
    # a = [a_target ; a_source]
    score_t = Wh @ _rows(a, 0, d)
    score_s = Wh @ _rows(a, d, 2 * d)
    e = (score_t.gather(idx.dst) + score_s.gather(idx.src)).leaky_relu(slope)
    # per-target max shift is a constant, so it needs no gradient path
    shift = np.full(idx.n, -np.inf)
    np.maximum.at(shift, idx.dst, e.data[:, 0])
    ex = (e - shift[idx.dst][:, None]).exp()
    return ex / ex.segment_sum(idx.dst, idx.n).gather(idx.dst)


def gat_layer(
    H: Tensor,
    idx: AttentionIndex,
    heads: list[tuple[Tensor, Tensor]],
    slope: float = 0.2,
    alpha: float = 1.0,
    activation: bool = True,
    attention_out: list | None = None,
) -> Tensor:
    """Multi-head attention layer; head outputs are ELU-activated and concatenated."""
    outs = []
    for W, a in heads:
        if H.shape[1] != W.shape[0] or a.shape[0] != 2 * W.shape[1]:
            raise ValueError(
                f"dimension mismatch: H {H.shape}, W {W.shape}, a {a.shape}"
            )
        Wh = H @ W
        att = attention_weights(Wh, a, idx, slope)
        if attention_out is not None:
            attention_out.append(att.data[:, 0].copy())
        agg = (Wh.gather(idx.src) * att).segment_sum(idx.dst, idx.n)
        outs.append(agg.elu(alpha) if activation else agg)
    return outs[0] if len(outs) == 1 else concat(outs, axis=1)


def _rows(t: Tensor, lo: int, hi: int) -> Tensor:
    def back(g):
        full = np.zeros_like(t.data)
        full[lo:hi] = g
        t._accumulate(full)

    return Tensor(t.data[lo:hi], (t,), back)


def forward(
    g: Graph,
    F,
    params: ModelParams,
    leaves: dict[str, Tensor] | None = None,
    attention_out: list | None = None,
) -> Tensor:
    """Scores as an ``(n, 1)`` tensor. ``leaves`` maps parameter names to
    the Tensors to differentiate against (created if omitted)."""
    cfg = params.config
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 2 or F.shape != (g.n, cfg.in_dim):
        raise ValueError(f"features must have shape ({g.n}, {cfg.in_dim}), got {F.shape}")
    if leaves is None:
        leaves = {k: Tensor(v) for k, v in params.tensors.items()}
    idx = AttentionIndex.of(g)
    H = Tensor(F)
    for b, heads in enumerate(cfg.heads, start=1):
        pairs = [(leaves[f"block{b}.head{k}.W"], leaves[f"block{b}.head{k}.a"]) for k in range(heads)]
        gat = gat_layer(H, idx, pairs, cfg.leaky_slope, cfg.elu_alpha, attention_out=attention_out)
        lin = H @ leaves[f"block{b}.linear.W"] + leaves[f"block{b}.linear.b"]
        H = _finite(gat + lin, f"block {b}")
    logits = _finite(H @ leaves["out.W"] + leaves["out.b"], "output head")
    return logits.sigmoid()


def model_forward(g: Graph, F, params: ModelParams) -> np.ndarray:
    return forward(g, F, params).data[:, 0].copy()


def loss_and_gradients(g: Graph, F, labels, params: ModelParams):
    """Squared loss sum_i (score_i - label_i)^2 and its gradient per tensor."""
    y = np.asarray(labels, dtype=np.float64).reshape(-1, 1)
    if y.shape[0] != g.n:
        raise ValueError("one label per node is required")
    if (y < 0).any() or (y > 1).any():
        raise ValueError("labels must lie in [0, 1]")
    leaves = {k: Tensor(v) for k, v in params.tensors.items()}
    loss = (forward(g, F, params, leaves) - y).square().sum()
    if not np.isfinite(loss.data):
        raise FloatingPointError("non-finite loss")
    loss.backward()
    grads = {
        k: (t.grad if t.grad is not None else np.zeros_like(t.data)) for k, t in leaves.items()
    }
    return float(loss.data), grads
