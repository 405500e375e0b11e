from .tensor import (
    Tensor,
    no_grad,
    is_grad_enabled,
    backward,
    add,
    mul,
    div,
    matmul,
    conv1d,
    conv_transpose1d,
    gated,
    tanh,
    sigmoid,
    softplus,
    exp,
    log,
    sqrt,
    absolute,
    clip,
    power,
    sum as tsum,
    mean as tmean,
    concat,
    reshape,
    transpose,
    take,
    frame,
    layer_norm,
    softmax,
    cosine_similarity,
)
from .optim import AdamW, adamw_step, OptimHyper, OptimState
from .rng import RngStreams

__all__ = [
    "Tensor",
    "no_grad",
    "is_grad_enabled",
    "backward",
    "add",
    "mul",
    "div",
    "matmul",
    "conv1d",
    "conv_transpose1d",
    "gated",
    "tanh",
    "sigmoid",
    "softplus",
    "exp",
    "log",
    "sqrt",
    "absolute",
    "clip",
    "power",
    "tsum",
    "tmean",
    "concat",
    "reshape",
    "transpose",
    "take",
    "frame",
    "layer_norm",
    "softmax",
    "cosine_similarity",
    "AdamW",
    "adamw_step",
    "OptimHyper",
    "OptimState",
    "RngStreams",
]
