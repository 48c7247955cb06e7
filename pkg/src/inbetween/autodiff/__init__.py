"""Tensor primitives, layers, optimizer and checkpoint container.

Gradient bookkeeping is delegated to torch's reverse-mode tape; this
subpackage adds the shape-checked primitives, layer set and optimizer the
models are built from.
"""

from .container import read_container, write_container, encode_text, decode_text
from .gradcheck import backward, finite_difference_check
from .layers import MLP, Conv1d, ConvTranspose1d, LSTMCell, FiLM, Attention, GatedExperts
from .optim import AMSGrad

__all__ = [
    "AMSGrad",
    "Attention",
    "Conv1d",
    "ConvTranspose1d",
    "FiLM",
    "GatedExperts",
    "LSTMCell",
    "MLP",
    "backward",
    "decode_text",
    "encode_text",
    "finite_difference_check",
    "read_container",
    "write_container",
]
