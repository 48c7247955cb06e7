import math

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..errors import ShapeError
from . import ops


def _identity(x):
    return x


ACTIVATIONS = {
    "elu": F.elu,
    "relu": F.relu,
    "tanh": torch.tanh,
    "none": _identity,
}


def _uniform_(t, fan_in, gain=1.0):
    bound = gain / math.sqrt(max(fan_in, 1))
    with torch.no_grad():
        t.uniform_(-bound, bound)
    return t


class MLP(nn.Module):
    """Feed-forward stack; the activation is skipped after the last layer."""

    def __init__(self, sizes, activation="elu", out_activation="none"):
        super().__init__()
        self.sizes = list(sizes)
        self.layers = nn.ModuleList(nn.Linear(a, b) for a, b in zip(self.sizes[:-1], self.sizes[1:]))
        self.act = ACTIVATIONS[activation]
        self.out_act = ACTIVATIONS[out_activation]

    def forward(self, x):
        if x.shape[-1] != self.sizes[0]:
            raise ShapeError(f"MLP expects last dim {self.sizes[0]}, got shape {tuple(x.shape)}")
        for i, layer in enumerate(self.layers):
            x = layer(x)
            x = self.act(x) if i < len(self.layers) - 1 else self.out_act(x)
        return x


class Conv1d(nn.Module):
    def __init__(self, in_channels, out_channels, kernel_size, stride=1, padding="same"):
        super().__init__()
        self.stride = stride
        self.padding = padding
        self.weight = nn.Parameter(torch.empty(out_channels, in_channels, kernel_size))
        self.bias = nn.Parameter(torch.empty(out_channels))
        fan_in = in_channels * kernel_size
        _uniform_(self.weight, fan_in)
        _uniform_(self.bias, fan_in)

    def forward(self, x):
        return ops.conv1d(x, self.weight, self.bias, stride=self.stride, padding=self.padding)


class ConvTranspose1d(nn.Module):
    def __init__(self, in_channels, out_channels, kernel_size, stride=1, padding="same",
                 output_padding=0):
        super().__init__()
        self.stride = stride
        self.padding = padding
        self.output_padding = output_padding
        self.weight = nn.Parameter(torch.empty(in_channels, out_channels, kernel_size))
        self.bias = nn.Parameter(torch.empty(out_channels))
        fan_in = in_channels * kernel_size
        _uniform_(self.weight, fan_in)
        _uniform_(self.bias, fan_in)

    def forward(self, x):
        return ops.conv_transpose1d(
            x, self.weight, self.bias, stride=self.stride, padding=self.padding,
            output_padding=self.output_padding,
        )


class LSTMCell(nn.Module):
    """Single LSTM step with gate order (input, forget, cell, output)."""

    def __init__(self, input_size, hidden_size):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.w_x = nn.Parameter(torch.empty(input_size, 4 * hidden_size))
        self.w_h = nn.Parameter(torch.empty(hidden_size, 4 * hidden_size))
        self.bias = nn.Parameter(torch.zeros(4 * hidden_size))
        _uniform_(self.w_x, hidden_size)
        _uniform_(self.w_h, hidden_size)

    def forward(self, x, h_prev, c_prev):
        H = self.hidden_size
        if x.shape[-1] != self.input_size or h_prev.shape[-1] != H or c_prev.shape[-1] != H:
            raise ShapeError(
                f"LSTMCell(input={self.input_size}, hidden={H}) got x {tuple(x.shape)}, "
                f"h {tuple(h_prev.shape)}, c {tuple(c_prev.shape)}"
            )
        gates = ops.matmul(x, self.w_x) + ops.matmul(h_prev, self.w_h) + self.bias
        i = torch.sigmoid(gates[..., :H])
        f = torch.sigmoid(gates[..., H:2 * H])
        g = torch.tanh(gates[..., 2 * H:3 * H])
        o = torch.sigmoid(gates[..., 3 * H:])
        c = f * c_prev + i * g
        h = o * torch.tanh(c)
        return h, c


class FiLM(nn.Module):
    """Feature-wise modulation: ``x * (1 + gamma) + beta`` with (gamma, beta) = linear(cond)."""

    def __init__(self, cond_dim, feature_dim):
        super().__init__()
        self.linear = nn.Linear(cond_dim, 2 * feature_dim)
        self.feature_dim = feature_dim

    def forward(self, x, cond):
        gamma, beta = self.linear(cond).chunk(2, dim=-1)
        if x.shape[-1] != self.feature_dim:
            raise ShapeError(f"FiLM over {self.feature_dim} features got {tuple(x.shape)}")
        return x * (1.0 + gamma) + beta


class Attention(nn.Module):
    """Single-head dot-product attention pooling a sequence against one query.

    ``query`` is (B, D_q) and ``memory`` is (B, T, D_m); returns (B, D_v).
    """

    def __init__(self, query_dim, memory_dim, dim):
        super().__init__()
        self.q = nn.Linear(query_dim, dim)
        self.k = nn.Linear(memory_dim, dim)
        self.v = nn.Linear(memory_dim, dim)
        self.dim = dim

    def forward(self, query, memory, return_weights=False):
        if memory.dim() != 3 or query.shape[0] != memory.shape[0]:
            raise ShapeError(f"attention: query {tuple(query.shape)} vs memory {tuple(memory.shape)}")
        q = self.q(query).unsqueeze(1)
        k = self.k(memory)
        v = self.v(memory)
        scores = (q * k).sum(-1) / math.sqrt(self.dim)
        w = ops.softmax(scores, dim=-1)
        out = (w.unsqueeze(-1) * v).sum(1)
        return (out, w) if return_weights else out


class GatedExperts(nn.Module):
    """Feed-forward network whose weights are a gate-weighted blend of K expert sets.

    With ``blend="parameters"`` every layer uses W = sum_k w_k W_k and
    b = sum_k w_k b_k (per sample). ``blend="outputs"`` instead runs K whole
    expert networks and mixes their outputs.
    """

    def __init__(self, sizes, num_experts, activation="elu", blend="parameters"):
        super().__init__()
        if blend not in ("parameters", "outputs"):
            raise ValueError(f"unknown blend mode {blend!r}")
        self.sizes = list(sizes)
        self.num_experts = num_experts
        self.blend = blend
        self.act = ACTIVATIONS[activation]
        self.weights = nn.ParameterList()
        self.biases = nn.ParameterList()
        for a, b in zip(self.sizes[:-1], self.sizes[1:]):
            w = nn.Parameter(torch.empty(num_experts, a, b))
            bias = nn.Parameter(torch.zeros(num_experts, b))
            _uniform_(w, a)
            self.weights.append(w)
            self.biases.append(bias)

    def forward(self, x, gate):
        if x.shape[-1] != self.sizes[0] or gate.shape[-1] != self.num_experts:
            raise ShapeError(
                f"GatedExperts{self.sizes} x{self.num_experts} got x {tuple(x.shape)}, "
                f"gate {tuple(gate.shape)}"
            )
        n = len(self.weights)
        if self.blend == "parameters":
            for i, (w, b) in enumerate(zip(self.weights, self.biases)):
                # identical to applying sum_k g_k W_k per sample, without materialising it
                x = torch.einsum("bk,bko->bo", gate, torch.einsum("bi,kio->bko", x, w)) + gate @ b
                if i < n - 1:
                    x = self.act(x)
            return x
        h = x.unsqueeze(1).expand(-1, self.num_experts, -1)
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = torch.einsum("bki,kio->bko", h, w) + b
            if i < n - 1:
                h = self.act(h)
        return torch.einsum("bk,bko->bo", gate, h)

    def blended_parameters(self, gate_row):
        """Explicit per-layer (W, b) blend for a single gate vector of shape (K,)."""
        return [
            (torch.einsum("k,kio->io", gate_row, w), gate_row @ b)
            for w, b in zip(self.weights, self.biases)
        ]
