"""Motion quality metrics, control perturbations, the FMD style classifier and latency."""

import csv
import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .autodiff import AMSGrad, Conv1d
from .core_math import power_spectrum
from .errors import (
    DurationError, EmptyDataset, InsufficientRepetitions, InsufficientSamples, ShapeError,
)
from .manifold import Normalizer

log = logging.getLogger(__name__)

FOOT_HEIGHT_THRESHOLD = 2.5
FMD_SHRINKAGE = 1e-3
REPORT_HEADER = ("metric", "frames", "d", "dt", "value", "n")


def _batched(x, rank):
    x = np.asarray(x, dtype=np.float64)
    return x[None] if x.ndim == rank else x


def _same_shape(a, b):
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")


# ---------------------------------------------------------------- metrics

def l2_global(M, M_ref):
    """Mean over frames (and samples) of the per-frame stacked position L2 distance.

    Inputs are global joint positions (T, J, 3) or (B, T, J, 3).
    """
    a, b = _batched(M, 3), _batched(M_ref, 3)
    _same_shape(a, b)
    d = (a - b).reshape(a.shape[0], a.shape[1], -1)
    return float(np.linalg.norm(d, axis=-1).mean())


def last_frame_error(generated, target):
    """Stacked position L2 distance between the final generated frame and the target.

    ``generated`` is (T, J, 3) or (B, T, J, 3); ``target`` (J, 3) or (B, J, 3).
    Batches are averaged.
    """
    g = _batched(generated, 3)[:, -1]
    t = _batched(target, 2)
    _same_shape(g, t)
    return float(np.linalg.norm((g - t).reshape(g.shape[0], -1), axis=-1).mean())


def npss(gt, pred):
    """Normalised power spectrum similarity over channels.

    ``gt``/``pred`` are (T, C) or (B, T, C). Each channel's non-DC power
    spectrum is normalised to unit mass; the per-channel earth mover's
    distance is the summed absolute difference of the cumulative spectra,
    and channels are averaged with weights proportional to their
    ground-truth power. Channels without ground-truth power get weight 0.
    """
    a, b = _batched(gt, 2), _batched(pred, 2)
    _same_shape(a, b)
    B, T, C = a.shape
    emd, weight = [], []
    for i in range(B):
        for c in range(C):
            pa = power_spectrum(a[i, :, c])[1:]
            pb = power_spectrum(b[i, :, c])[1:]
            sa, sb = pa.sum(), pb.sum()
            if sa <= 0:
                continue
            na = pa / sa
            nb = pb / sb if sb > 0 else np.zeros_like(pb)
            emd.append(np.abs(np.cumsum(na) - np.cumsum(nb)).sum())
            weight.append(sa)
    if not weight:
        return 0.0
    w = np.asarray(weight)
    return float(np.dot(w / w.sum(), emd))


def rotation_channels(frames, num_joints):
    """Flatten the 6D rotation channels of (..., T, J*12) frames to (..., T, J*6)."""
    f = np.asarray(frames, dtype=np.float64)
    f = f.reshape(*f.shape[:-1], num_joints, 12)[..., 6:]
    return f.reshape(*f.shape[:-2], num_joints * 6)


def foot_skate(positions, foot_idx, threshold=FOOT_HEIGHT_THRESHOLD):
    """Mean of ``v_f * clamp(2 - 2^(h/H), 0, 1)`` over frames and foot joints.

    ``positions`` are global (T, J, 3) or (B, T, J, 3) in cm with +Y up;
    v_f is the horizontal foot displacement between consecutive frames and
    h the height at the later frame.
    """
    p = _batched(positions, 3)[:, :, list(foot_idx)]
    if p.shape[1] < 2:
        return 0.0
    v = np.linalg.norm(p[:, 1:, :, [0, 2]] - p[:, :-1, :, [0, 2]], axis=-1)
    h = p[:, 1:, :, 1]
    w = np.clip(2.0 - np.power(2.0, h / threshold), 0.0, 1.0)
    return float((v * w).mean())


def diversity(samples):
    """Mean pairwise :func:`l2_global` over all unordered sample pairs (S, T, J, 3)."""
    s = np.asarray(samples, dtype=np.float64)
    if s.shape[0] < 2:
        raise InsufficientSamples(f"diversity needs at least 2 samples, got {s.shape[0]}")
    return float(np.mean([l2_global(s[i], s[j]) for i, j in itertools.combinations(range(len(s)), 2)]))


# ---------------------------------------------------------------- control

def remap_location(x0, xT, d):
    """Target location scaled about the start: ``x0 + d (xT - x0)``."""
    x0 = np.asarray(x0, dtype=np.float64)
    return x0 + d * (np.asarray(xT, dtype=np.float64) - x0)


def scale_duration(frames, dt):
    n = int(np.floor(frames * dt + 0.5))
    if n < 2:
        raise DurationError(f"duration {frames} x {dt} gives {n} frames, need at least 2")
    return n


def control_transform(start, target, frames, d=1.0, dt=1.0, hip=0):
    """Perturbed in-betweening task.

    ``start``/``target`` are (J, C) frames whose first three channels are
    global positions. The target's ground-plane location (hip x, z) is
    remapped by :func:`remap_location`, moving every joint rigidly; the
    duration is scaled and rounded to the nearest frame. Returns
    ``(new_target, new_frames)``.
    """
    s = np.asarray(start, dtype=np.float64)
    t = np.array(target, dtype=np.float64)
    x0, xT = s[hip, [0, 2]], t[hip, [0, 2]]
    shift = remap_location(x0, xT, d) - xT
    t[:, 0] += shift[0]
    t[:, 2] += shift[1]
    return t, scale_duration(frames, dt)


# ---------------------------------------------------------------- FMD

def classifier_features(frames, num_joints, hip=0):
    """Frames (B, T, J*12) with ground positions relative to the first frame's hip."""
    f = torch.as_tensor(frames, dtype=torch.float32)
    B, T, _ = f.shape
    f = f.reshape(B, T, num_joints, 12).clone()
    origin = f[:, :1, hip:hip + 1, :3].clone()
    origin[..., 1] = 0.0
    f[..., :3] = f[..., :3] - origin
    return f.reshape(B, T, -1)


class StyleClassifier(nn.Module):
    """Style-encoder convolutions, mean pooling over time and a softmax head."""

    def __init__(self, frame_dim, num_styles, channels=64, kernel=5):
        super().__init__()
        self.num_joints = frame_dim // 12
        self.conv1 = Conv1d(frame_dim, channels, kernel, stride=2)
        self.conv2 = Conv1d(channels, channels, kernel, stride=2)
        self.head = nn.Linear(channels, num_styles)
        self.norm = Normalizer(frame_dim)

    def latent(self, frames):
        x = self.norm.norm(classifier_features(frames, self.num_joints)).transpose(1, 2)
        h = self.conv2(F.elu(self.conv1(x)))
        return F.elu(h).mean(-1)

    def forward(self, frames):
        return torch.softmax(self.head(self.latent(frames)), dim=-1)

    def logits(self, frames):
        return self.head(self.latent(frames))


@dataclass
class ClassifierConfig:
    length: int = 41
    channels: int = 64
    steps: int = 300
    batch: int = 64
    lr: float = 1e-3
    seed: int = 0


def train_style_classifier(bank, num_styles, cfg=None):
    """Fit a :class:`StyleClassifier` on random sub-windows of a window bank."""
    cfg = cfg or ClassifierConfig()
    if len(bank) == 0:
        raise EmptyDataset("no windows to train the style classifier")
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    D = bank.frames.shape[-1]
    model = StyleClassifier(D, num_styles, cfg.channels)
    with torch.no_grad():
        model.norm.fit(classifier_features(bank.frames, model.num_joints).numpy())
    opt = AMSGrad(model.parameters(), lr=cfg.lr)
    labels = torch.from_numpy(bank.style)
    W = bank.frames.shape[1]
    for _ in range(cfg.steps):
        ci = rng.integers(0, len(bank), cfg.batch)
        st = rng.integers(0, W - cfg.length + 1, cfg.batch)
        x = bank.frames[ci[:, None], st[:, None] + np.arange(cfg.length)]
        loss = F.cross_entropy(model.logits(x), labels[ci])
        opt.zero_grad()
        loss.backward()
        opt.step()
    model.eval()
    return model


@torch.no_grad()
def classifier_accuracy(model, bank, length=41):
    x = bank.frames[:, :length]
    pred = model(x).argmax(-1).numpy()
    return float((pred == bank.style).mean())


def _sqrtm_psd(S):
    w, V = np.linalg.eigh((S + S.T) / 2.0)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def _covariance(x):
    n, d = x.shape
    cov = np.cov(x, rowvar=False).reshape(d, d) if n > 1 else np.zeros((d, d))
    if n <= d:
        cov = cov + FMD_SHRINKAGE * np.eye(d)
    return cov


def frechet_distance(mu1, cov1, mu2, cov2):
    """``|mu1 - mu2|^2 + tr(S1 + S2 - 2 (S1 S2)^(1/2))`` with the root taken on a symmetric product."""
    r1 = _sqrtm_psd(cov1)
    M = r1 @ cov2 @ r1
    w = np.linalg.eigvalsh((M + M.T) / 2.0)
    tr_sqrt = np.sqrt(np.clip(w, 0.0, None)).sum()
    diff = np.asarray(mu1) - np.asarray(mu2)
    val = float(diff @ diff + np.trace(cov1) + np.trace(cov2) - 2.0 * tr_sqrt)
    return max(val, 0.0)


def fmd_latents(a, b):
    """Frechet distance between Gaussians fitted to two latent sets (N, d)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise InsufficientSamples("FMD needs at least 2 samples per set")
    return frechet_distance(a.mean(0), _covariance(a), b.mean(0), _covariance(b))


@torch.no_grad()
def fmd(generated, reference, classifier):
    """FMD of two sets of frame sequences (N, T, D) in the classifier's pooled latent space."""
    ga = classifier.latent(generated).double().numpy()
    ra = classifier.latent(reference).double().numpy()
    return fmd_latents(ga, ra)


# ---------------------------------------------------------------- latency

def benchmark_latency(synth_fn, frames, repetitions, warmup=2):
    """Per-frame wall-clock statistics in milliseconds.

    ``synth_fn(frames, timings)`` must synthesize ``frames`` frames and
    append one duration in seconds per frame to ``timings``.
    """
    if repetitions < 1:
        raise InsufficientRepetitions("latency benchmark needs at least one repetition")
    for _ in range(warmup):
        synth_fn(frames, [])
    per_frame, per_run = [], []
    for _ in range(repetitions):
        timings = []
        t0 = time.perf_counter()
        synth_fn(frames, timings)
        per_run.append((time.perf_counter() - t0) / frames)
        per_frame.extend(timings)
    ms = np.asarray(per_frame) * 1e3
    return {
        "frames": frames,
        "repetitions": repetitions,
        "mean_ms": float(ms.mean()),
        "p95_ms": float(np.percentile(ms, 95)),
        "max_ms": float(ms.max()),
        "run_mean_ms": float(np.mean(per_run) * 1e3),
    }


# ---------------------------------------------------------------- report

@dataclass
class MetricReport:
    rows: list = field(default_factory=list)

    def add(self, metric, frames, d, dt, value, n):
        if not np.isfinite(value) or n <= 0:
            raise ValueError(f"invalid metric row {metric}: value={value}, n={n}")
        self.rows.append((metric, int(frames), float(d), float(dt), float(value), int(n)))

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_HEADER)
            for m, fr, d, dt, v, n in self.rows:
                w.writerow([m, fr, f"{d:g}", f"{dt:g}", f"{v:.9g}", n])

    def value(self, metric, frames, d=1.0, dt=1.0):
        for m, fr, dd, tt, v, _ in self.rows:
            if m == metric and fr == frames and dd == d and tt == dt:
                return v
        raise KeyError((metric, frames, d, dt))
