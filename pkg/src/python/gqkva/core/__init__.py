"""Dense tensors, differentiable operations and the gradient tape."""

from .gradcheck import check_gradients, finite_diff_grad, max_relative_error
from .tape import OpRecord, Tape, backward, no_tape
from .tensor import DType, GradPair, Tensor, full, ones, trunc_normal, zeros

__all__ = [
    "DType",
    "GradPair",
    "OpRecord",
    "Tape",
    "Tensor",
    "backward",
    "check_gradients",
    "finite_diff_grad",
    "full",
    "max_relative_error",
    "no_tape",
    "ones",
    "trunc_normal",
    "zeros",
]
