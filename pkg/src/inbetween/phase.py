"""Periodic autoencoder and the phase-manifold parameterisation.

Each of the N_p latent channels is summarised by amplitude A, frequency F
(cycles per frame), offset b and signed shift S (turns, in [-0.5, 0.5]);
the channel's phase vector is (A sin 2piS, A cos 2piS).
"""

import logging
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .autodiff import AMSGrad, Conv1d, ConvTranspose1d
from .errors import EmptyDataset, InvalidAmplitude, ShapeError, TrainingDiverged
from .motion.dataset import PhaseTrack

log = logging.getLogger(__name__)


def phase_vector(A, S):
    """Interleaved phase vector (..., 2*N_p) from amplitudes and shifts (..., N_p)."""
    A = np.asarray(A, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if np.any(A < 0):
        raise InvalidAmplitude("phase amplitude must be non-negative")
    ang = 2.0 * np.pi * S
    p = np.stack([A * np.sin(ang), A * np.cos(ang)], axis=-1)
    return p.reshape(*A.shape[:-1], -1) if A.ndim else p


def frequency_from_shifts(S_t, S_prev):
    """Per-frame frequency as the wrapped difference of consecutive shifts."""
    d = np.asarray(S_t, dtype=np.float64) - np.asarray(S_prev, dtype=np.float64)
    d = np.where(d > 0.5, d - 1.0, d)
    d = np.where(d < -0.5, d + 1.0, d)
    return float(d) if d.ndim == 0 else d


def fit_spectral_params(curve):
    """(A, F, b, S) of a sampled curve from its DFT.

    A is the dominant non-DC bin magnitude times 2/W, F that bin's frequency
    in cycles per frame, b the mean. S is the angle of the curve's
    projection onto sin/cos at F, with time measured from the window centre,
    so ``A sin(2pi(F t + S)) + b`` approximates the curve.
    """
    x = np.asarray(curve, dtype=np.float64)
    W = x.shape[0]
    if W < 4:
        raise ShapeError(f"need at least 4 samples, got {W}")
    b = float(x.mean())
    X = np.fft.rfft(x)
    mag = np.abs(X[1:])
    if mag.size == 0 or mag.max() < 1e-12:
        return 0.0, 0.0, b, 0.0
    k = int(np.argmax(mag)) + 1
    A = 2.0 * mag[k - 1] / W
    if 2 * k == W:
        A /= 2.0
    freq = k / W
    t = np.arange(W) - (W - 1) / 2.0
    r = x - b
    s_comp = np.sum(r * np.sin(2 * np.pi * freq * t))
    c_comp = np.sum(r * np.cos(2 * np.pi * freq * t))
    S = float(np.arctan2(c_comp, s_comp) / (2 * np.pi))
    return float(A), float(freq), b, S


def spectral_params_torch(latent):
    """Differentiable (A, F, b) of latent curves (B, C, W).

    F is the power-weighted mean frequency of the non-DC bins and A is
    2/W times the root of their total power.
    """
    W = latent.shape[-1]
    X = torch.fft.rfft(latent, dim=-1)
    power = X.real[..., 1:] ** 2 + X.imag[..., 1:] ** 2
    freqs = torch.arange(1, power.shape[-1] + 1, dtype=latent.dtype) / W
    total = power.sum(-1)
    F_ = (power * freqs).sum(-1) / (total + 1e-12)
    A = 2.0 * torch.sqrt(total + 1e-12) / W
    b = X.real[..., 0] / W
    return A, F_, b


@dataclass
class PhaseConfig:
    channels: int = 5
    window: int = 61
    hidden: int = 32
    kernel: int = 11
    steps: int = 1500
    batch: int = 32
    lr: float = 1e-3
    seed: int = 0


class PeriodicAutoencoder(nn.Module):
    def __init__(self, input_channels, cfg):
        super().__init__()
        self.cfg = cfg
        C, H, k, W = cfg.channels, cfg.hidden, cfg.kernel, cfg.window
        self.input_channels = input_channels
        self.enc1 = Conv1d(input_channels, H, k)
        self.enc2 = Conv1d(H, C, k)
        # per-channel linear projection of the curve onto a 2-D shift vector
        self.shift_proj = nn.Parameter(torch.randn(C, W, 2) / np.sqrt(W))
        self.shift_bias = nn.Parameter(torch.zeros(C, 2))
        self.dec1 = ConvTranspose1d(C, H, k)
        self.dec2 = ConvTranspose1d(H, input_channels, k)
        t = torch.arange(W, dtype=torch.float32) - (W - 1) / 2.0
        self.register_buffer("t", t)
        self.register_buffer("in_mean", torch.zeros(input_channels))
        self.register_buffer("in_std", torch.ones(input_channels))

    def encode(self, x):
        """Latent curves (B, N_p, W) from normalised velocity windows (B, C_in, W)."""
        if x.dim() != 3 or x.shape[1] != self.input_channels or x.shape[2] != self.cfg.window:
            raise ShapeError(
                f"expected windows (B, {self.input_channels}, {self.cfg.window}), got {tuple(x.shape)}"
            )
        return self.enc2(F.elu(self.enc1(x)))

    def parameters_of(self, latent):
        A, F_, b = spectral_params_torch(latent)
        v = torch.einsum("bcw,cwk->bck", latent, self.shift_proj) + self.shift_bias
        S = torch.atan2(v[..., 1], v[..., 0]) / (2 * np.pi)
        return A, F_, b, S

    def forward(self, x):
        latent = self.encode(x)
        A, F_, b, S = self.parameters_of(latent)
        curve = A[..., None] * torch.sin(2 * np.pi * (F_[..., None] * self.t + S[..., None])) + b[..., None]
        out = self.dec2(F.elu(self.dec1(curve)))
        return out, latent, (A, F_, b, S)


def velocity_channels(clip):
    """(T, J*3) joint velocities, the autoencoder input."""
    return clip.velocities.reshape(len(clip), -1)


def _windows(seq, centers, W):
    """Edge-padded windows (N, C, W) of ``seq`` (T, C) centred on ``centers``."""
    half = W // 2
    padded = np.concatenate([np.repeat(seq[:1], half, 0), seq, np.repeat(seq[-1:], half, 0)])
    idx = np.asarray(centers)[:, None] + np.arange(W)[None, :]
    return np.transpose(padded[idx], (0, 2, 1))


def train_pae(dataset, cfg=None, log_every=100):
    """Fit the periodic autoencoder on ``dataset`` clips and annotate every frame.

    Returns ``(model, phases, losses)``: ``phases`` holds one
    :class:`PhaseTrack` per clip and ``losses`` the per-step training loss.
    """
    cfg = cfg or PhaseConfig()
    if not dataset.clips:
        raise EmptyDataset("no clips to train the phase model on")
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    seqs = [velocity_channels(c) for c in dataset.clips]
    allv = np.concatenate(seqs)
    mean, std = allv.mean(0), allv.std(0) + 1e-6
    model = PeriodicAutoencoder(allv.shape[1], cfg)
    model.in_mean.copy_(torch.as_tensor(mean, dtype=torch.float32))
    model.in_std.copy_(torch.as_tensor(std, dtype=torch.float32))
    opt = AMSGrad(model.parameters(), lr=cfg.lr)
    norm = [((s - mean) / std).astype(np.float32) for s in seqs]
    losses = []
    for step in range(cfg.steps):
        ci = rng.integers(0, len(norm), size=cfg.batch)
        batch = np.stack([
            _windows(norm[i], [int(rng.integers(0, len(norm[i])))], cfg.window)[0] for i in ci
        ])
        x = torch.from_numpy(batch)
        out, _, _ = model(x)
        loss = F.mse_loss(out, x)
        if not torch.isfinite(loss):
            raise TrainingDiverged(step, {"reconstruction": loss.item()})
        opt.zero_grad()
        loss.backward()
        opt.step()
        losses.append(loss.item())
        if log_every and step % log_every == 0:
            log.info("pae step %d loss %.5f", step, float(loss))
    model.eval()
    phases = [extract_phase(model, c) for c in dataset.clips]
    return model, phases, losses


@torch.no_grad()
def reconstruction_loss(model, clips, n_windows=64, seed=123):
    rng = np.random.default_rng(seed)
    W = model.cfg.window
    mean, std = model.in_mean.numpy(), model.in_std.numpy()
    batch = []
    for _ in range(n_windows):
        c = clips[int(rng.integers(0, len(clips)))]
        seq = ((velocity_channels(c) - mean) / std).astype(np.float32)
        batch.append(_windows(seq, [int(rng.integers(0, len(seq)))], W)[0])
    x = torch.from_numpy(np.stack(batch))
    out, _, _ = model(x)
    return float(F.mse_loss(out, x))


@torch.no_grad()
def extract_phase(model, clip):
    """Per-frame :class:`PhaseTrack` for ``clip`` using windows centred on each frame."""
    W = model.cfg.window
    seq = ((velocity_channels(clip) - model.in_mean.numpy()) / model.in_std.numpy()).astype(np.float32)
    T = len(seq)
    A_all, S_all, F_all = [], [], []
    for start in range(0, T, 256):
        centers = np.arange(start, min(T, start + 256))
        x = torch.from_numpy(_windows(seq, centers, W))
        A, F_, _, S = model.parameters_of(model.encode(x))
        A_all.append(A.numpy())
        S_all.append(S.numpy())
        F_all.append(F_.numpy())
    A = np.concatenate(A_all).T.astype(np.float64)
    S = np.concatenate(S_all).T.astype(np.float64)
    Fq = np.concatenate(F_all).T.astype(np.float64)
    return PhaseTrack(A, S, Fq)
