"""Tensor arithmetic with reverse-mode differentiation and Adam."""

from .functional import (
    categorical_kl,
    categorical_kl_rows,
    conv2d,
    entropy_rows,
    gaussian_kl_unit,
    mse,
    softmax,
    upsample2,
)
from .optim import Adam, AdamState, adam_step
from .serial import load_tensors, save_tensors
from .tensor import (
    Tape,
    Tensor,
    affine,
    add,
    backward,
    clamp,
    exp,
    log,
    log_softmax_last,
    matmul,
    maximum,
    mean_all,
    minimum,
    mul,
    neg,
    reshape,
    sigmoid,
    softmax_last,
    sub,
    sum_all,
    sum_last,
    take_last,
    tanh,
    zero_grads,
)

__all__ = [
    "Adam",
    "AdamState",
    "Tape",
    "Tensor",
    "adam_step",
    "affine",
    "add",
    "backward",
    "categorical_kl",
    "categorical_kl_rows",
    "clamp",
    "conv2d",
    "entropy_rows",
    "exp",
    "gaussian_kl_unit",
    "load_tensors",
    "log",
    "log_softmax_last",
    "matmul",
    "maximum",
    "mean_all",
    "minimum",
    "mse",
    "mul",
    "neg",
    "reshape",
    "save_tensors",
    "sigmoid",
    "softmax",
    "softmax_last",
    "sub",
    "sum_all",
    "sum_last",
    "take_last",
    "tanh",
    "upsample2",
    "zero_grads",
]
