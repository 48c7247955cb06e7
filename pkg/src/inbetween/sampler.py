"""Autoregressive style sampler driving the frozen motion manifold.

Per step the sampler encodes the current frame, the target and the
current-to-target offset, mixes in the style code ``k`` (FiLM on its
temporal mean and attention over its time axis), advances an LSTM and
decodes the next latent ``z``, an intermediate phase, amplitude, frequency
and hip feature. The phase is then advanced by :func:`phase_update_torch`
and the manifold turns everything into the next frame.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .autodiff import AMSGrad, MLP, Attention, Conv1d, FiLM, LSTMCell
from .core_math import rotate2d, slerp_angle
from .errors import (
    CheckpointError, ConfigError, EmptyDataset, MissingPhase, ShapeError, StateError, StyleClipTooShort,
    TrainingDiverged,
)
from .manifold import HIP_FEATURES, foot_loss
from .phase import frequency_from_shifts
from .motion.clip import MotionClip
from .motion.windows import STYLE_LENGTH

log = logging.getLogger(__name__)

T_ZERO = 5
T_PERIOD = 30
NOISE_VAR = 0.5
FINETUNE_GROUPS = ("style_encoder", "film_linear", "atn_linear")


# ---------------------------------------------------------------- closed forms

def time_embedding(dt, d):
    """Sinusoidal embedding of the frames-remaining count ``dt`` (width ``d``)."""
    if d % 2:
        raise ConfigError(f"time embedding width must be even, got {d}")
    i = np.arange(d // 2, dtype=np.float64)
    arg = np.asarray(dt, dtype=np.float64)[..., None] / 10000.0 ** (2.0 * i / d)
    out = np.empty(arg.shape[:-1] + (d,))
    out[..., 0::2] = np.sin(arg)
    out[..., 1::2] = np.cos(arg)
    return out


def time_embedding_torch(dt, d):
    """Batched float32 version of :func:`time_embedding`; ``dt`` is (B,)."""
    if d % 2:
        raise ConfigError(f"time embedding width must be even, got {d}")
    i = torch.arange(d // 2, dtype=torch.float64)
    arg = dt.to(torch.float64)[:, None] / 10000.0 ** (2.0 * i / d)
    return torch.stack([torch.sin(arg), torch.cos(arg)], -1).reshape(dt.shape[0], d).float()


def noise_scale(remaining, t_zero=T_ZERO, t_period=T_PERIOD):
    """Noise weight lambda for ``remaining`` = T - t frames to go, clamped to [0, 1]."""
    lam = (np.asarray(remaining, dtype=np.float64) - t_zero) / (t_period - t_zero)
    lam = np.clip(lam, 0.0, 1.0)
    return float(lam) if lam.ndim == 0 else lam


def noise_schedule(remaining, dim, generator, t_zero=T_ZERO, t_period=T_PERIOD):
    """Target-context noise ``lambda * eps`` with eps ~ N(0, 0.5) per component.

    ``remaining`` is an int or a (B,) tensor; returns (B, dim). The normal
    draw is always consumed so the random stream does not depend on lambda.
    """
    rem = torch.as_tensor(remaining, dtype=torch.float64).reshape(-1)
    eps = torch.randn((rem.shape[0], dim), generator=generator) * math.sqrt(NOISE_VAR)
    lam = torch.as_tensor(noise_scale(rem.numpy(), t_zero, t_period), dtype=torch.float32).reshape(-1, 1)
    return lam * eps


def phase_update(p_t, p_hat, A_hat, F_hat, dt=1.0):
    """Reference phase update for one frame.

    ``p_t``/``p_hat`` are interleaved (sin, cos) vectors (2*N_p,), ``A_hat``
    and ``F_hat`` (N_p,) with F in cycles per frame and ``dt`` in frames.
    Returns ``(p_next, p_tilde)``.
    """
    p_t = np.asarray(p_t, dtype=np.float64).reshape(-1, 2)
    p_hat = np.asarray(p_hat, dtype=np.float64).reshape(-1, 2)
    A_hat = np.asarray(A_hat, dtype=np.float64)
    theta = dt * 2.0 * np.pi * np.asarray(F_hat, dtype=np.float64)
    ang_hat = np.arctan2(p_hat[:, 0], p_hat[:, 1])
    # rotate in (cos, sin) coordinates so a positive F advances the shift
    cs = rotate2d(p_t[:, ::-1], theta)
    amp_t = np.linalg.norm(p_t, axis=1)
    ang_tilde = np.where(amp_t > 0, np.arctan2(cs[:, 1], cs[:, 0]), ang_hat)
    p_tilde = np.stack([A_hat * np.sin(ang_tilde), A_hat * np.cos(ang_tilde)], 1)
    ang = slerp_angle(ang_tilde, ang_hat, 0.5)
    amp = 0.5 * (A_hat + np.linalg.norm(p_hat, axis=1))
    p_next = np.stack([amp * np.sin(ang), amp * np.cos(ang)], 1)
    return p_next.reshape(-1), p_tilde.reshape(-1)


def _unit(v, eps=1e-8):
    n = torch.sqrt((v * v).sum(-1, keepdim=True) + eps * eps)
    return v / n, n


def advance_phase(p, F_hat, dt=1.0):
    """Rotate interleaved (sin, cos) phase vectors (B, 2*N_p) forward by 2*pi*F*dt."""
    B = p.shape[0]
    P = p.reshape(B, -1, 2)
    theta = dt * 2.0 * math.pi * F_hat
    c, s = torch.cos(theta), torch.sin(theta)
    return torch.stack([P[..., 0] * c + P[..., 1] * s, P[..., 1] * c - P[..., 0] * s], -1).reshape(B, -1)


def phase_update_torch(p_t, p_hat, A_hat, F_hat, dt=1.0):
    """Differentiable batched phase update, (B, 2*N_p) in and out.

    The slerp midpoint of two unit vectors is their normalised sum; exactly
    opposite vectors fall back to the counter-clockwise quarter turn.
    """
    B = p_t.shape[0]
    H = p_hat.reshape(B, -1, 2)
    u_hat, n_hat = _unit(H)
    u_t, n_t = _unit(p_t.reshape(B, -1, 2))
    u_tilde = advance_phase(u_t.reshape(B, -1), F_hat, dt).reshape(B, -1, 2)
    u_tilde = torch.where(n_t > 1e-6, u_tilde, u_hat)
    p_tilde = A_hat[..., None] * u_tilde
    mid = u_tilde + u_hat
    quarter = torch.stack([u_tilde[..., 1], -u_tilde[..., 0]], -1)
    mid = torch.where((mid * mid).sum(-1, keepdim=True) > 1e-12, mid, quarter)
    u_mid, _ = _unit(mid)
    amp = 0.5 * (A_hat[..., None] + n_hat)
    return (amp * u_mid).reshape(B, -1), p_tilde.reshape(B, -1)


# ---------------------------------------------------------------- network

@dataclass
class SamplerConfig:
    hidden: int = 128          # LSTM width
    encoder: int = 128         # state encoder width; also the z_dt width
    target: int = 64           # width of each of E_tar and E_off
    style_channels: int = 64
    style_kernel: int = 5
    decoder: int = 128
    min_length: int = 20
    max_length: int = 40
    epochs: int = 10
    steps_per_epoch: int = 150
    batch: int = 32
    lr: float = 1e-3
    style_weight_decay: float = 1e-4
    seed: int = 0


@dataclass
class SamplerState:
    h: torch.Tensor = None
    c: torch.Tensor = None
    phase: torch.Tensor = None
    frame: torch.Tensor = None
    remaining: torch.Tensor = None

    def check(self):
        for name in ("h", "c", "phase", "frame", "remaining"):
            if getattr(self, name) is None:
                raise StateError(f"sampler state field '{name}' is not initialised")


class StyleEncoder(nn.Module):
    """Two stride-2 convolutions: (B, D, 120) -> temporal code (B, C_s, 30)."""

    def __init__(self, frame_dim, channels, kernel):
        super().__init__()
        self.conv1 = Conv1d(frame_dim, channels, kernel, stride=2)
        self.conv2 = Conv1d(channels, channels, kernel, stride=2)

    def forward(self, x):
        return self.conv2(F.elu(self.conv1(x)))


class SamplerModel(nn.Module):
    def __init__(self, manifold, cfg=None):
        super().__init__()
        cfg = cfg or SamplerConfig()
        if 2 * cfg.target != cfg.encoder:
            raise ConfigError("the target context (2 * target) must match the encoder width")
        self.cfg = cfg
        # the manifold is shared, frozen and kept out of this module's state dict
        object.__setattr__(self, "manifold", manifold)
        D = manifold.frame_dim
        Np = manifold.phase_channels
        L = manifold.cfg.latent
        E, Cs = cfg.encoder, cfg.style_channels
        self.frame_dim, self.phase_channels, self.latent = D, Np, L
        self.style_encoder = StyleEncoder(D, Cs, cfg.style_kernel)
        self.state_encoder = MLP([D, E, E])
        self.sty_film = FiLM(Cs, E)
        self.sty_atn = Attention(E, Cs, E)
        self.sty_out = nn.Linear(2 * E, E)
        self.target_encoder = MLP([D, cfg.target, cfg.target])
        self.offset_encoder = MLP([D, cfg.target, cfg.target])
        self.lstm = LSTMCell(2 * E, cfg.hidden)
        self.dec_in = nn.Linear(2 * Np + cfg.hidden + E, cfg.decoder)
        self.dec_film = FiLM(Cs, cfg.decoder)
        self.dec_hidden = nn.Linear(cfg.decoder, cfg.decoder)
        self.dec_out = nn.Linear(cfg.decoder, L + 2 * Np + Np + Np + HIP_FEATURES)

    # parameter groups ------------------------------------------------
    def parameter_groups(self):
        """Map every named parameter to one group tag."""
        groups = {}
        for name, _ in self.named_parameters():
            if name.startswith("style_encoder."):
                groups[name] = "style_encoder"
            elif name.startswith(("sty_film.linear.", "dec_film.linear.")):
                groups[name] = "film_linear"
            elif name.startswith("sty_atn."):
                groups[name] = "atn_linear"
            else:
                groups[name] = "core"
        return groups

    @torch.no_grad()
    def init_output_heads(self, amplitude, frequency):
        """Start the phase heads at the data's mean amplitude and frequency (per channel).

        Their weight rows are zeroed so an untrained sampler advances the
        start phase at a steady rate instead of a random one.
        """
        L, Np = self.latent, self.phase_channels
        A = torch.as_tensor(np.asarray(amplitude, dtype=np.float64).clip(1e-4), dtype=torch.float32)
        self.dec_out.weight[L:L + 4 * Np].zero_()
        self.dec_out.bias[L:L + 2 * Np].zero_()
        self.dec_out.bias[L + 2 * Np:L + 3 * Np] = torch.log(torch.expm1(A))
        self.dec_out.bias[L + 3 * Np:L + 4 * Np] = torch.as_tensor(frequency, dtype=torch.float32)

    def manifest(self):
        return {"config": asdict(self.cfg), "frame_dim": self.frame_dim,
                "phase_channels": self.phase_channels, "latent": self.latent,
                "groups": self.parameter_groups()}

    # encoders ----------------------------------------------------------
    def encode_style(self, clips):
        """Style code (B, C_s, 30) from raw style clips (B, >=120, D); longer clips are cropped."""
        clips = torch.as_tensor(clips, dtype=torch.float32)
        if clips.dim() == 2:
            clips = clips[None]
        if clips.shape[1] < STYLE_LENGTH:
            raise StyleClipTooShort(f"style clip has {clips.shape[1]} frames, need {STYLE_LENGTH}")
        if clips.shape[-1] != self.frame_dim:
            raise ShapeError(f"style clip frames must have {self.frame_dim} features, got {clips.shape[-1]}")
        x = self.manifold.frame_norm.norm(clips[:, :STYLE_LENGTH])
        return self.style_encoder(x.transpose(1, 2))

    def init_state(self, start, phase, remaining):
        start = torch.as_tensor(start, dtype=torch.float32)
        B = start.shape[0]
        H = self.cfg.hidden
        rem = torch.as_tensor(remaining, dtype=torch.long).expand(B).clone()
        return SamplerState(torch.zeros(B, H), torch.zeros(B, H),
                            torch.as_tensor(phase, dtype=torch.float32), start, rem)

    def step(self, state, target, k, noise):
        """One sampler step.

        Returns ``(outputs, next_state)`` where ``outputs`` holds the decoded
        ``z``, ``p_hat``, ``A_hat``, ``F_hat``, ``v_h``, the updated phase
        ``p`` and ``p_tilde``, and the next frame ``frame``.
        """
        state.check()
        m = self.manifold
        s_t = state.frame
        k_mean = k.mean(-1)
        e_stat = self.state_encoder(m.frame_norm.norm(s_t))
        e_sty = self.sty_out(torch.cat([self.sty_film(e_stat, k_mean),
                                        self.sty_atn(e_stat, k.transpose(1, 2))], -1))
        z_dt = time_embedding_torch(state.remaining, self.cfg.encoder)
        h_target = torch.cat([
            self.target_encoder(m.frame_norm.norm(target)),
            self.offset_encoder((target - s_t) / m.frame_norm.std),
        ], -1) + noise + z_dt
        h, c = self.lstm(torch.cat([e_sty + z_dt, h_target], -1), state.h, state.c)
        x = F.elu(self.dec_in(torch.cat([state.phase, h, h_target], -1)))
        x = F.elu(self.dec_hidden(self.dec_film(x, k_mean)))
        out = self.dec_out(x)
        L, Np = self.latent, self.phase_channels
        z, p_hat, A_raw, F_hat, vh = torch.split(out, [L, 2 * Np, Np, Np, HIP_FEATURES], -1)
        A_hat = F.softplus(A_raw)
        # the decoded phase is a correction to the current phase carried forward
        p_hat = advance_phase(state.phase, F_hat) + p_hat
        v_h = m.hip_norm.denorm(vh)
        p_next, p_tilde = phase_update_torch(state.phase, p_hat, A_hat, F_hat)
        s_next = s_t + m.decode_moe(s_t, v_h, z, p_next)
        outputs = {"z": z, "p_hat": p_hat, "A_hat": A_hat, "F_hat": F_hat, "v_h": v_h,
                   "p": p_next, "p_tilde": p_tilde, "frame": s_next}
        return outputs, SamplerState(h, c, p_next, s_next, state.remaining - 1)

    def rollout(self, start, target, length, k, phase0, generator, timings=None):
        """Synthesize ``length`` frames after ``start``; returns stacked step outputs.

        ``frames`` in the result has ``length + 1`` entries, the first being
        ``start`` itself.
        """
        state = self.init_state(start, phase0, length)
        target = torch.as_tensor(target, dtype=torch.float32)
        keys = ("z", "p_hat", "A_hat", "F_hat", "v_h", "p", "p_tilde", "frame")
        acc = {key: [] for key in keys}
        noises = []
        for _ in range(length):
            t0 = time.perf_counter()
            noise = noise_schedule(state.remaining, self.cfg.encoder, generator)
            out, state = self.step(state, target, k, noise)
            if timings is not None:
                timings.append(time.perf_counter() - t0)
            noises.append(noise)
            for key in keys:
                acc[key].append(out[key])
        res = {key: torch.stack(v, 1) for key, v in acc.items()}
        res["frame"] = torch.cat([state_start(start), res["frame"]], 1)
        res["noise"] = torch.stack(noises, 1)
        return res


def state_start(start):
    return torch.as_tensor(start, dtype=torch.float32)[:, None]


# ---------------------------------------------------------------- loss

def frequency_targets(shift):
    """Per-frame ground-truth frequency from consecutive signed shifts (B, T, N_p)."""
    s = np.asarray(shift, dtype=np.float64)
    f = np.zeros_like(s)
    f[:, 1:] = frequency_from_shifts(s[:, 1:], s[:, :-1])
    f[:, 0] = f[:, 1] if s.shape[1] > 1 else 0.0
    return f


def sampler_loss(pred, target, norm, foot_idx, num_joints, phase_gt=None, contact=None):
    """Total loss and its components.

    ``pred`` is a rollout dict (frames include the start frame). ``target``
    holds ground-truth ``frames`` (B, T+1, D); ``phase_gt`` holds
    ``phase`` (B, T, 2N_p), ``amplitude`` and ``frequency`` (B, T, N_p) for
    frames 1..T.
    """
    if phase_gt is None:
        raise MissingPhase("sampler loss needs the ground-truth phase track")
    gen = pred["frame"][:, 1:]
    gt = target[:, 1:]
    rec = (norm.norm(gen) - norm.norm(gt)).abs().mean()
    last = (norm.norm(gen[:, -1]) - norm.norm(gt[:, -1])).abs().mean()
    foot = foot_loss(gen, contact, foot_idx, num_joints)
    p = phase_gt["phase"]
    Np = p.shape[-1] // 2
    B, T = p.shape[:2]
    amp_freq = ((phase_gt["amplitude"] - pred["A_hat"]) ** 2
                + (phase_gt["frequency"] - pred["F_hat"]) ** 2).mean()
    vec = (((p - pred["p_hat"]) ** 2).sum() + ((p - pred["p_tilde"]) ** 2).sum()) / (2 * B * T * Np)
    ph = amp_freq + vec
    total = rec + last + foot + ph
    return total, {"rec": rec, "last": last, "foot": foot, "phase": ph}


# ---------------------------------------------------------------- training

def curriculum_lengths(cfg):
    """Per-epoch rollout length, growing linearly from ``min_length`` to ``max_length``."""
    E = cfg.epochs
    if E == 1:
        return [cfg.max_length]
    return [int(round(cfg.min_length + (cfg.max_length - cfg.min_length) * e / (E - 1))) for e in range(E)]


def sample_batch(bank, style_bank, rng, B, length, styles=None):
    """Random sub-windows of ``length`` + 1 frames and same-style exemplar clips."""
    n, W = bank.frames.shape[:2]
    if length + 1 > W:
        raise ConfigError(f"rollout length {length} does not fit in {W}-frame windows")
    pool = np.arange(n) if styles is None else np.flatnonzero(np.isin(bank.style, styles))
    pool = pool[np.isin(bank.style[pool], list(style_bank))]
    if pool.size == 0:
        raise EmptyDataset("no windows with a matching style clip")
    ci = pool[rng.integers(0, pool.size, size=B)]
    st = rng.integers(0, W - length, size=B)
    sl = (ci[:, None], st[:, None] + np.arange(length + 1)[None, :])
    batch = {
        "frames": torch.from_numpy(bank.frames[sl]),
        "phase": torch.from_numpy(bank.phase[sl]),
        "amplitude": torch.from_numpy(bank.amplitude[sl]),
        "frequency": torch.from_numpy(frequency_targets(bank.shift[sl]).astype(np.float32)),
        "contact": torch.from_numpy(bank.contact[sl]),
    }
    clips = []
    for s in bank.style[ci]:
        pool_s = style_bank[int(s)]
        clips.append(pool_s[int(rng.integers(0, len(pool_s)))])
    batch["style"] = torch.from_numpy(np.stack(clips))
    return batch


def batch_loss(model, batch, generator, foot_idx):
    length = batch["frames"].shape[1] - 1
    k = model.encode_style(batch["style"])
    frames = batch["frames"]
    pred = model.rollout(frames[:, 0], frames[:, -1], length, k, batch["phase"][:, 0], generator)
    gt_phase = {key: batch[key][:, 1:] for key in ("phase", "amplitude", "frequency")}
    return sampler_loss(pred, frames, model.manifold.frame_norm, foot_idx,
                        model.manifold.num_joints, gt_phase, batch["contact"][:, 1:])


def freeze(module):
    for p in module.parameters():
        p.requires_grad_(False)
    return module


def _optimizer(model, cfg, groups=None):
    tags = model.parameter_groups()
    named = dict(model.named_parameters())
    style = [named[n] for n, g in tags.items() if g == "style_encoder" and (groups is None or g in groups)]
    other = [named[n] for n, g in tags.items() if g != "style_encoder" and (groups is None or g in groups)]
    param_groups = [{"params": style, "weight_decay": cfg.style_weight_decay}]
    if other:
        param_groups.append({"params": other, "weight_decay": 0.0})
    return AMSGrad(param_groups, lr=cfg.lr, betas=(0.5, 0.9))


def _fit(model, bank, style_bank, cfg, foot_idx, opt, log_every, styles=None, stage="sampler"):
    rng = np.random.default_rng(cfg.seed)
    gen = torch.Generator().manual_seed(cfg.seed)
    history = []
    model.train()
    for epoch, length in enumerate(curriculum_lengths(cfg)):
        for it in range(cfg.steps_per_epoch):
            batch = sample_batch(bank, style_bank, rng, cfg.batch, length, styles)
            total, comp = batch_loss(model, batch, gen, foot_idx)
            if not torch.isfinite(total):
                raise TrainingDiverged(len(history), {k: v.item() for k, v in comp.items()})
            opt.zero_grad()
            total.backward()
            opt.step()
            row = {k: v.item() for k, v in comp.items()}
            row.update(total=total.item(), epoch=epoch, length=length)
            history.append(row)
            if log_every and len(history) % log_every == 1:
                log.info("%s epoch %d len %d %s", stage, epoch, length, row)
    model.eval()
    return history


def initial_sampler(manifold, bank, cfg=None):
    """The untrained sampler exactly as training starts from it (seeded, heads set from ``bank``)."""
    cfg = cfg or SamplerConfig()
    torch.manual_seed(cfg.seed)
    freeze(manifold)
    manifold.eval()
    model = SamplerModel(manifold, cfg)
    Np = model.phase_channels
    model.init_output_heads(bank.amplitude.reshape(-1, Np).mean(0),
                            frequency_targets(bank.shift).reshape(-1, Np).mean(0))
    return model


def train_sampler(manifold, bank, style_bank, foot_idx, cfg=None, log_every=50, model=None):
    """Train a sampler against a frozen manifold.

    Returns ``(model, history)``; history rows carry the component losses,
    the epoch and the curriculum rollout length.
    """
    cfg = cfg or SamplerConfig()
    if model is None:
        model = initial_sampler(manifold, bank, cfg)
    opt = _optimizer(model, cfg)
    history = _fit(model, bank, style_bank, cfg, foot_idx, opt, log_every)
    return model, history


def finetune_style(model, bank, style_bank, foot_idx, cfg=None, log_every=20):
    """Few-shot adaptation: only the style encoder and the FiLM/attention linear layers move."""
    cfg = cfg or SamplerConfig(epochs=3, steps_per_epoch=20)
    if len(bank) == 0 or not style_bank:
        raise EmptyDataset("fine-tuning needs at least one clip of the new style")
    torch.manual_seed(cfg.seed)
    tags = model.parameter_groups()
    named = dict(model.named_parameters())
    saved = {n: p.requires_grad for n, p in named.items()}
    for n, p in named.items():
        p.requires_grad_(tags[n] in FINETUNE_GROUPS)
    opt = _optimizer(model, cfg, groups=FINETUNE_GROUPS)
    try:
        history = _fit(model, bank, style_bank, cfg, foot_idx, opt, log_every, stage="finetune")
    finally:
        for n, p in named.items():
            p.requires_grad_(saved[n])
    return model, history


# ---------------------------------------------------------------- inference

@torch.no_grad()
def synthesize(model, start, target, length, style_clip, phase0, seed=0, timings=None):
    """Batched synthesis; ``start``/``target`` (B, D), ``style_clip`` (B, >=120, D).

    Returns the rollout dict; ``frame`` is (B, length + 1, D) with frame 0
    equal to ``start``.
    """
    gen = torch.Generator().manual_seed(seed)
    k = model.encode_style(style_clip)
    start = torch.as_tensor(start, dtype=torch.float32)
    if k.shape[0] == 1 and start.shape[0] > 1:
        k = k.expand(start.shape[0], -1, -1)
    return model.rollout(start, target, length, k, phase0, gen, timings)


def synthesize_transition(model, skeleton, start, target, length, style_clip, start_phase, seed=0,
                          style=""):
    """Single in-between clip of ``length + 1`` frames plus per-frame timings (seconds).

    ``start``/``target`` are (D,) or (J, 12) frames, ``style_clip`` (>=120, D)
    and ``start_phase`` (2*N_p,).
    """
    D = model.frame_dim
    if len(skeleton) * 12 != D:
        raise CheckpointError(f"sampler expects {D // 12} joints, skeleton has {len(skeleton)}")
    start = np.asarray(start, dtype=np.float32).reshape(1, D)
    target = np.asarray(target, dtype=np.float32).reshape(1, D)
    timings = []
    out = synthesize(model, start, target, length, np.asarray(style_clip, dtype=np.float32)[None],
                     np.asarray(start_phase, dtype=np.float32).reshape(1, -1), seed, timings)
    frames = out["frame"][0].numpy().astype(np.float64)
    return MotionClip.from_frames(skeleton, frames, style=style), timings
