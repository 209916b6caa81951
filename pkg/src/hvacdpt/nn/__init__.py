from .tensor import (
    DEFAULT_DTYPE,
    ShapeError,
    Tensor,
    add,
    as_tensor,
    causal_mask,
    causal_self_attention,
    clip,
    div,
    dropout,
    embedding_lookup,
    exp,
    gelu,
    layer_norm,
    linear,
    log,
    matmul,
    mse_loss,
    minimum,
    mul,
    parameter,
    params_checksum,
    reshape,
    scaled_uniform,
    sigmoid,
    softmax,
    square,
    sub,
    tanh,
    tmean,
    transpose,
    truncated_normal,
    tsum,
)
from .optim import AdamW, NonFiniteGradient
from .checkpoint import CheckpointError, load_ntc, save_ntc
from .gradcheck import check_gradients, numeric_gradient

__all__ = [
    "DEFAULT_DTYPE", "ShapeError", "Tensor", "add", "as_tensor", "causal_mask",
    "causal_self_attention", "clip", "div", "dropout", "embedding_lookup",
    "exp", "gelu", "layer_norm", "linear", "log", "matmul", "mse_loss",
    "minimum", "mul", "parameter", "params_checksum", "reshape",
    "scaled_uniform", "sigmoid", "softmax", "square", "sub", "tanh", "tmean",
    "transpose", "truncated_normal", "tsum", "AdamW", "NonFiniteGradient",
    "CheckpointError", "load_ntc", "save_ntc", "check_gradients",
    "numeric_gradient",
]
