from .model import (
    AttentionIndex,
    ModelConfig,
    ModelParams,
    attention_weights,
    forward,
    gat_layer,
    init_params,
    loss_and_gradients,
    model_forward,
    param_shapes,
    zero_params,
)
from .training import TrainConfig, TrainResult, score_nodes, top_r_hit_rate, train

__all__ = [
    "AttentionIndex",
    "ModelConfig",
    "ModelParams",
    "TrainConfig",
    "TrainResult",
    "attention_weights",
    "forward",
    "gat_layer",
    "init_params",
    "loss_and_gradients",
    "model_forward",
    "param_shapes",
    "score_nodes",
    "top_r_hit_rate",
    "train",
    "zero_params",
]
