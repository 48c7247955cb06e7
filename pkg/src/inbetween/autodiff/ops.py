"""Shape-checked functional primitives.

Everything here records onto torch's autograd tape, so each primitive's
adjoint comes for free. The wrappers exist to give uniform ``ShapeError``
messages and to pin down conventions (true convolution, not correlation).
"""

import torch
import torch.nn.functional as F

from ..errors import ShapeError


def _shape(t):
    return tuple(t.shape)


def matmul(a, b):
    if a.dim() < 1 or b.dim() < 1 or a.shape[-1] != b.shape[-2 if b.dim() > 1 else 0]:
        raise ShapeError(f"matmul: incompatible shapes {_shape(a)} and {_shape(b)}")
    return a @ b


def add(a, b):
    try:
        torch.broadcast_shapes(a.shape, b.shape)
    except RuntimeError:
        raise ShapeError(f"add: cannot broadcast {_shape(a)} and {_shape(b)}") from None
    return a + b


def mul(a, b):
    try:
        torch.broadcast_shapes(a.shape, b.shape)
    except RuntimeError:
        raise ShapeError(f"mul: cannot broadcast {_shape(a)} and {_shape(b)}") from None
    return a * b


def concat(tensors, dim=-1):
    ref = tensors[0]
    for t in tensors[1:]:
        if t.dim() != ref.dim():
            raise ShapeError(f"concat: rank mismatch {_shape(ref)} and {_shape(t)}")
        d = dim % ref.dim()
        for i in range(ref.dim()):
            if i != d and t.shape[i] != ref.shape[i]:
                raise ShapeError(f"concat: shapes {_shape(ref)} and {_shape(t)} differ off axis {dim}")
    return torch.cat(tensors, dim=dim)


def softmax(x, dim=-1):
    return torch.softmax(x, dim=dim)


def l1_norm(x, dim=None):
    return x.abs().sum() if dim is None else x.abs().sum(dim=dim)


def l2_norm(x, dim=None):
    return torch.sqrt((x * x).sum()) if dim is None else torch.sqrt((x * x).sum(dim=dim))


def _conv_padding(kernel_size, padding):
    if padding == "same":
        if kernel_size % 2 == 0:
            raise ShapeError(f"'same' padding needs an odd kernel, got size {kernel_size}")
        return kernel_size // 2
    return int(padding)


def conv1d(x, weight, bias=None, stride=1, padding=0):
    """1-D convolution (kernel flipped, i.e. true convolution).

    ``x`` is (B, C_in, T) and ``weight`` is (C_out, C_in, K). A unit impulse
    convolved with a kernel under 'same' padding reproduces the kernel.
    """
    if x.dim() != 3 or weight.dim() != 3 or x.shape[1] != weight.shape[1]:
        raise ShapeError(f"conv1d: input {_shape(x)} incompatible with weight {_shape(weight)}")
    pad = _conv_padding(weight.shape[-1], padding)
    return F.conv1d(x, weight.flip(-1), bias, stride=stride, padding=pad)


def conv_transpose1d(x, weight, bias=None, stride=1, padding=0, output_padding=0):
    """Adjoint of :func:`conv1d`; ``weight`` is (C_in, C_out, K)."""
    if x.dim() != 3 or weight.dim() != 3 or x.shape[1] != weight.shape[0]:
        raise ShapeError(
            f"conv_transpose1d: input {_shape(x)} incompatible with weight {_shape(weight)}"
        )
    pad = _conv_padding(weight.shape[-1], padding)
    return F.conv_transpose1d(
        x, weight.flip(-1), bias, stride=stride, padding=pad, output_padding=output_padding
    )
