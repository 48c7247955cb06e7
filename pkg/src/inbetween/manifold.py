"""Conditional VAE motion manifold with a gated mixture-of-experts decoder.

The encoder maps two consecutive frames to a Gaussian posterior over z;
a gating network turns the next phase vector and z into expert blend
weights; the blended expert maps (current frame, next hip feature, z) to
the pose change, so the next frame is the current frame plus the decoder
output.
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .autodiff import AMSGrad, MLP, GatedExperts
from .errors import MissingLabels, ShapeError, TrainingDiverged

log = logging.getLogger(__name__)

JOINT_FEATURES = 12
HIP_FEATURES = 9


@dataclass
class ManifoldConfig:
    latent: int = 32
    experts: int = 4
    hidden: int = 128
    gate_hidden: int = 64
    window: int = 25
    beta: float = 1e-3
    lr: float = 1e-3
    steps: int = 1200
    batch: int = 32
    blend: str = "parameters"
    seed: int = 0


def kl_divergence(mu, logvar):
    """Elementwise KL(N(mu, exp(logvar)) || N(0, 1))."""
    return -0.5 * (1.0 + logvar - mu * mu - torch.exp(logvar))


def reparameterize(mu, logvar, eps):
    return mu + eps * torch.exp(0.5 * logvar)


class Normalizer(nn.Module):
    def __init__(self, dim):
        super().__init__()
        self.register_buffer("mean", torch.zeros(dim))
        self.register_buffer("std", torch.ones(dim))

    def fit(self, x):
        x = torch.as_tensor(np.asarray(x).reshape(-1, self.mean.shape[0]), dtype=torch.float32)
        self.mean.copy_(x.mean(0))
        self.std.copy_(x.std(0).clamp_min(1e-3))

    def norm(self, x):
        return (x - self.mean) / self.std

    def denorm(self, x):
        return x * self.std + self.mean


class ManifoldModel(nn.Module):
    def __init__(self, num_joints, phase_channels, cfg):
        super().__init__()
        self.cfg = cfg
        self.num_joints = num_joints
        self.phase_channels = phase_channels
        D = num_joints * JOINT_FEATURES
        self.frame_dim = D
        L, H, K = cfg.latent, cfg.hidden, cfg.experts
        self.encoder = MLP([2 * D, H, H, 2 * L])
        self.gate = MLP([2 * phase_channels + L, cfg.gate_hidden, cfg.gate_hidden, K])
        self.experts = GatedExperts([D + HIP_FEATURES + L, H, H, D], K, blend=cfg.blend)
        self.frame_norm = Normalizer(D)
        self.delta_norm = Normalizer(D)
        self.hip_norm = Normalizer(HIP_FEATURES)

    def _check(self, x, width, what):
        if x.shape[-1] != width:
            raise ShapeError(f"{what}: expected last dim {width}, got {tuple(x.shape)}")

    def encode(self, s_t, s_next):
        """(mu, logvar) of the transition s_t -> s_next (raw features, (B, D))."""
        self._check(s_t, self.frame_dim, "current frame")
        self._check(s_next, self.frame_dim, "next frame")
        h = self.encoder(torch.cat([self.frame_norm.norm(s_t), self.frame_norm.norm(s_next)], -1))
        return h.chunk(2, dim=-1)

    def gate_weights(self, p_next, z):
        self._check(p_next, 2 * self.phase_channels, "phase vector")
        self._check(z, self.cfg.latent, "latent")
        return torch.softmax(self.gate(torch.cat([p_next, z], -1)), dim=-1)

    def decode_with_gate(self, s_t, v_h_next, z, gate):
        self._check(v_h_next, HIP_FEATURES, "hip feature")
        x = torch.cat([self.frame_norm.norm(s_t), self.hip_norm.norm(v_h_next), z], -1)
        delta = self.delta_norm.denorm(self.experts(x, gate))
        return couple_velocity(s_t, delta, self.num_joints)

    def decode_moe(self, s_t, v_h_next, z, p_next):
        """Pose change (B, D); the next frame is ``s_t + decode_moe(...)``."""
        return self.decode_with_gate(s_t, v_h_next, z, self.gate_weights(p_next, z))

    def manifest(self):
        c = self.cfg
        return {"K": c.experts, "L": c.latent, "N_p": self.phase_channels,
                "joints": self.num_joints, "frame_dim": self.frame_dim, "config": asdict(c)}


def couple_velocity(s_t, delta, num_joints):
    """Rewrite the velocity part of ``delta`` so the next frame's velocity equals
    its realised position change."""
    B = delta.shape[0]
    d = delta.reshape(B, num_joints, JOINT_FEATURES)
    v = s_t.reshape(B, num_joints, JOINT_FEATURES)[..., 3:6]
    fixed = torch.cat([d[..., :3], d[..., :3] - v, d[..., 6:]], dim=-1)
    return fixed.reshape(B, -1)


def foot_velocity(frames, foot_idx, num_joints):
    """(..., N_f, 3) foot velocity channels of flattened frames."""
    f = frames.reshape(*frames.shape[:-1], num_joints, JOINT_FEATURES)
    return f[..., foot_idx, 3:6]


def foot_loss(pred_frames, contact, foot_idx, num_joints):
    """Mean over frames and feet of |predicted foot velocity * contact|^2."""
    if contact is None:
        raise MissingLabels("foot contact labels are required")
    v = foot_velocity(pred_frames, foot_idx, num_joints)
    return ((v * contact[..., None]) ** 2).sum(-1).mean()


def manifold_loss(pred, target, mu, logvar, contact, norm, foot_idx, num_joints, beta=1e-3):
    """Total and component losses for a rollout.

    ``pred``/``target`` are raw frames (B, T, D); reconstruction is the mean
    squared error of normalised features; the foot term uses raw cm/frame.
    """
    rec = ((norm.norm(pred) - norm.norm(target)) ** 2).mean()
    kl = kl_divergence(mu, logvar).mean()
    foot = foot_loss(pred, contact, foot_idx, num_joints)
    total = rec + beta * kl + foot
    return total, {"rec": rec, "kl": kl, "foot": foot}


def fit_normalizers(model, bank):
    frames = bank.frames
    model.frame_norm.fit(frames)
    model.delta_norm.fit(frames[:, 1:] - frames[:, :-1])
    model.hip_norm.fit(bank.hip)


def _batch(bank, rng, B, length):
    n, L = bank.frames.shape[:2]
    ci = rng.integers(0, n, size=B)
    st = rng.integers(0, L - length + 1, size=B)
    sl = (ci[:, None], st[:, None] + np.arange(length)[None, :])
    return {k: torch.from_numpy(getattr(bank, k)[sl]) for k in ("frames", "hip", "phase", "contact")}


def rollout(model, batch, eps=None, generator=None, use_mean=False):
    """Autoregressive reconstruction of a batch window with teacher hip/phase inputs.

    Returns predicted frames (B, W-1, D) for frames 1..W-1 and stacked
    (mu, logvar) of shape (B, W-1, L).
    """
    frames, hip, phase = batch["frames"], batch["hip"], batch["phase"]
    B, W, _ = frames.shape
    s = frames[:, 0]
    preds, mus, lvs = [], [], []
    for t in range(W - 1):
        mu, lv = model.encode(s, frames[:, t + 1])
        if use_mean:
            z = mu
        else:
            e = eps[:, t] if eps is not None else torch.randn(mu.shape, generator=generator)
            z = reparameterize(mu, lv, e)
        s = s + model.decode_moe(s, hip[:, t + 1], z, phase[:, t + 1])
        preds.append(s)
        mus.append(mu)
        lvs.append(lv)
    return torch.stack(preds, 1), torch.stack(mus, 1), torch.stack(lvs, 1)


def train_manifold(bank, foot_idx, num_joints, phase_channels, cfg=None, log_every=100,
                   model=None):
    """Train the manifold on 25-frame windows drawn from the 60-frame clips.

    Returns ``(model, history)`` where ``history`` lists per-step component
    losses.
    """
    cfg = cfg or ManifoldConfig()
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    gen = torch.Generator().manual_seed(cfg.seed)
    if model is None:
        model = ManifoldModel(num_joints, phase_channels, cfg)
        fit_normalizers(model, bank)
    opt = AMSGrad(model.parameters(), lr=cfg.lr, betas=(0.5, 0.9))
    history = []
    model.train()
    for step in range(cfg.steps):
        batch = _batch(bank, rng, cfg.batch, cfg.window)
        pred, mu, lv = rollout(model, batch, generator=gen)
        total, comp = manifold_loss(
            pred, batch["frames"][:, 1:], mu, lv, batch["contact"][:, 1:], model.frame_norm,
            foot_idx, num_joints, cfg.beta,
        )
        if not torch.isfinite(total):
            raise TrainingDiverged(step, {k: v.item() for k, v in comp.items()})
        opt.zero_grad()
        total.backward()
        opt.step()
        row = {k: v.item() for k, v in comp.items()}
        row["total"] = total.item()
        history.append(row)
        if log_every and step % log_every == 0:
            log.info("manifold step %d %s", step, row)
    model.eval()
    return model, history


@torch.no_grad()
def heldout_reconstruction(model, bank, n=64, seed=321, window=25):
    """Mean normalised squared error of posterior-mean rollouts on ``bank``."""
    rng = np.random.default_rng(seed)
    batch = _batch(bank, rng, n, window)
    pred, _, _ = rollout(model, batch, use_mean=True)
    return float(((model.frame_norm.norm(pred) - model.frame_norm.norm(batch["frames"][:, 1:])) ** 2).mean())
