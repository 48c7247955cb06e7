"""Procedural walking gaits used as a desk-scale motion dataset.

A gait is a periodic cycle over a root that follows a smoothly curving
path with a slowly varying stride. Each foot is pinned to the ground
during stance (60% of the cycle) and follows a lifted arc during swing;
legs are posed with analytic two-bone IK so the stance feet do not slide.
Distinct parameter sets act as distinct styles.
"""

from dataclasses import asdict, dataclass

import numpy as np

from ..core_math import axis_angle_matrix
from ..errors import ParameterError
from .clip import FPS, MotionClip
from .skeleton import ANKLE_HEIGHT, SHIN, THIGH, default_skeleton

STANCE = 0.6
# swing foot only travels horizontally once it is clear of the ground
SWING_MOVE = (0.15, 0.85)
BASE_LIFT = 6.0
# per-clip variability: log-amplitude of the stride scale, turning rate in deg/s
SPEED_VARIATION = 0.6
TURN_RATE = 30.0
STRIDE_LIMIT = 130.0


@dataclass(frozen=True)
class GaitStyle:
    name: str = "neutral"
    stride: float = 60.0      # cm travelled per gait cycle
    cadence: float = 1.0      # gait cycles per second
    leg_lift: float = 4.0     # extra swing-foot lift, cm
    sway: float = 3.0         # lateral torso sway, cm (and degrees of roll)
    arm_swing: float = 20.0   # shoulder swing amplitude, degrees

    def as_dict(self):
        return asdict(self)


def _smoothstep(q):
    q = np.clip(q, 0.0, 1.0)
    return q * q * (3.0 - 2.0 * q)


def _two_bone(hip, target, pole, l1, l2):
    """Knee position and (thigh, shin) global rotations reaching ``target``.

    Bones point along -Y in the rest pose, the knee bends toward ``pole``.
    """
    d_vec = target - hip
    d = np.linalg.norm(d_vec, axis=-1, keepdims=True)
    if np.any(d > l1 + l2 - 1e-6) or np.any(d < abs(l1 - l2) + 1e-6):
        raise ParameterError("gait parameters put the foot out of the leg's reach")
    u = d_vec / d
    a = (l1 * l1 - l2 * l2 + d * d) / (2.0 * d)
    r = np.sqrt(np.maximum(l1 * l1 - a * a, 0.0))
    p = pole - np.sum(pole * u, axis=-1, keepdims=True) * u
    p /= np.linalg.norm(p, axis=-1, keepdims=True)
    knee = hip + a * u + r * p

    def frame(top, bottom):
        y = top - bottom
        y /= np.linalg.norm(y, axis=-1, keepdims=True)
        x = pole - np.sum(pole * y, axis=-1, keepdims=True) * y
        x /= np.linalg.norm(x, axis=-1, keepdims=True)
        z = np.cross(x, y)
        return np.stack([x, y, z], axis=-1)

    return knee, frame(hip, knee), frame(knee, target)


def _wander(rng, t, periods=(2.0, 6.0)):
    """Smooth random signal in [-1, 1]: the mean of two slow sinusoids."""
    out = np.zeros_like(t)
    for _ in range(2):
        period = rng.uniform(*periods)
        out += np.sin(2 * np.pi * t / period + rng.uniform(0.0, 2 * np.pi))
    return 0.5 * out


def _at(phase_grid, values, query):
    """Piecewise-linear lookup of per-frame ``values`` at fractional phases."""
    if values.ndim == 1:
        return np.interp(query, phase_grid, values)
    return np.stack([np.interp(query, phase_grid, v) for v in values.T], axis=-1)


def _foot_path(phase, phase_grid, path, heading, side, offset, lift):
    """Ankle ground position (T, 2), lift height, foot yaw and stance mask of one foot.

    The foot of cycle ``n`` lands when the global phase reaches
    ``n - offset`` and is placed where the root will be 0.3 cycles later,
    shifted sideways by ``side``. It stays there for the stance part of the
    cycle and then swings to the next landing spot.
    """
    u_all = phase + offset
    n = np.floor(u_all)
    u = u_all - n

    def spot(k):
        q = k - offset + 0.3
        p = _at(phase_grid, path, q)
        th = _at(phase_grid, heading, q)
        normal = np.stack([np.sin(th), np.cos(th)], axis=-1)
        return p + side * normal, th

    p0, th0 = spot(n)
    p1, th1 = spot(n + 1)
    stance = u < STANCE
    s = np.where(stance, 0.0, (u - STANCE) / (1.0 - STANCE))
    lo, hi = SWING_MOVE
    g = np.where(stance, 0.0, _smoothstep((s - lo) / (hi - lo)))
    ground = p0 + g[:, None] * (p1 - p0)
    yaw = th0 + g * (th1 - th0)
    h = np.where(stance, 0.0, lift * np.sin(np.pi * s))
    return ground, h, yaw, stance


def synth_gait(style, T, seed=0, fps=FPS, heading=None, speed_variation=SPEED_VARIATION,
               turn_rate=TURN_RATE):
    """Generate a T-frame clip of ``style`` on the 23-joint skeleton.

    The seed picks the start phase, a small per-clip jitter of the style
    parameters, the initial heading (unless ``heading`` is given) and two
    smooth random profiles: the stride scale (``exp(speed_variation * w)``
    with ``w`` in [-1, 1], capped at :data:`STRIDE_LIMIT`) and the turning
    rate (up to ``turn_rate`` degrees per second). Zero variation gives a
    straight walk at constant speed; a zero-stride style never turns.

    ``clip.extras`` holds ``stance`` (T, 2) for (left, right) ankles, and the
    root positions / local rotations for BVH export.
    """
    if style.cadence <= 0:
        raise ParameterError(f"cadence must be positive, got {style.cadence}")
    if style.stride < 0 or style.leg_lift < 0 or style.sway < 0 or style.arm_swing < 0:
        raise ParameterError("gait amplitudes must be non-negative")
    rng = np.random.default_rng(seed)
    jitter = 1.0 + 0.04 * rng.uniform(-1.0, 1.0, size=5)
    stride = style.stride * jitter[0]
    cadence = style.cadence * jitter[1]
    lift = (style.leg_lift * jitter[2] + BASE_LIFT) if style.stride > 0 else style.leg_lift * jitter[2]
    sway = style.sway * jitter[3]
    arm = np.radians(style.arm_swing * jitter[4])
    phase0 = rng.uniform(0.0, 1.0)
    if heading is None:
        heading = rng.uniform(-np.pi, np.pi)
    if style.stride == 0:
        turn_rate = 0.0  # stepping in place keeps its heading

    sk = default_skeleton()
    J = len(sk)
    idx = sk.index

    # per-frame profiles on a grid padded by two cycles on each side
    pad = int(np.ceil(2.0 * fps / cadence)) + 1
    t_ext = np.arange(-pad, T + pad) / fps
    phase_ext = phase0 + cadence * t_ext
    stride_ext = np.minimum(stride * np.exp(speed_variation * _wander(rng, t_ext)),
                            max(stride, STRIDE_LIMIT))
    yaw_ext = heading + np.cumsum(np.radians(turn_rate) * _wander(rng, t_ext)) / fps
    yaw_ext -= yaw_ext[pad] - heading
    fwd_ext = np.stack([np.cos(yaw_ext), -np.sin(yaw_ext)], axis=-1)
    step = (stride_ext * cadence / fps)[:, None] * fwd_ext
    path_ext = np.cumsum(step, axis=0)
    path_ext -= path_ext[pad]
    sl = slice(pad, pad + T)
    phase = phase_ext[sl]
    yaw = yaw_ext[sl]
    stride_t = stride_ext[sl]

    bob = 0.03 * stride_t
    roll = np.radians(sway) * np.sin(2 * np.pi * phase)
    reach = THIGH + SHIN - 1.0
    horiz = 0.37 * stride_ext.max() + 2.0
    lateral = 0.5 * sway + 10.0 * np.sin(np.radians(sway)) + 1.0
    if horiz**2 + lateral**2 >= reach**2:
        raise ParameterError("gait parameters put the foot out of the leg's reach")
    vert = np.sqrt(reach**2 - horiz**2 - lateral**2)
    hip_height = ANKLE_HEIGHT + 4.0 + vert

    normal = np.stack([np.sin(yaw), np.cos(yaw)], axis=-1)
    ground = path_ext[sl] + (0.5 * sway * np.sin(2 * np.pi * phase))[:, None] * normal
    root = np.stack([ground[:, 0], hip_height - 0.5 * bob * (1.0 - np.cos(4 * np.pi * phase)),
                     ground[:, 1]], axis=-1)

    local = np.tile(np.eye(3), (T, J, 1, 1))
    facing = axis_angle_matrix("y", yaw)
    pelvis = facing @ axis_angle_matrix("x", roll)
    local[:, idx("Hips")] = pelvis
    local[:, idx("Spine1")] = axis_angle_matrix("x", -0.7 * roll)
    swing = arm * np.sin(2 * np.pi * (phase + 0.25))
    local[:, idx("RightShoulder")] = axis_angle_matrix("z", swing)
    local[:, idx("LeftShoulder")] = axis_angle_matrix("z", -swing)
    for side, sgn in (("Right", 1.0), ("Left", -1.0)):
        bend = np.radians(12.0) + 0.5 * arm * (1.0 + sgn * np.sin(2 * np.pi * (phase + 0.25)))
        local[:, idx(f"{side}Elbow")] = axis_angle_matrix("z", bend)

    stance = np.zeros((T, 2), dtype=bool)
    pole = np.stack([np.cos(yaw), np.zeros(T), -np.sin(yaw)], axis=-1)
    for k, (side, z, off) in enumerate((("Left", -10.0, 0.0), ("Right", 10.0, 0.5))):
        hip_off = sk.offsets[idx(f"{side}Hip")]
        hip_pos = root + np.einsum("tij,j->ti", pelvis, hip_off)
        foot, h, foot_yaw, st = _foot_path(phase, phase_ext, path_ext, yaw_ext, z, off, lift)
        ankle = np.stack([foot[:, 0], ANKLE_HEIGHT + h, foot[:, 1]], axis=-1)
        if lift == 0 and stride == 0:
            st = np.ones(T, dtype=bool)
        stance[:, k] = st
        _, thigh_g, shin_g = _two_bone(hip_pos, ankle, pole, THIGH, SHIN)
        local[:, idx(f"{side}Hip")] = np.swapaxes(pelvis, -1, -2) @ thigh_g
        local[:, idx(f"{side}Knee")] = np.swapaxes(thigh_g, -1, -2) @ shin_g
        # the foot stays flat on the ground, turned to its landing heading
        local[:, idx(f"{side}Ankle")] = np.swapaxes(shin_g, -1, -2) @ axis_angle_matrix("y", foot_yaw)

    return MotionClip.from_local(sk, root, local, style=style.name, fps=fps, extras={"stance": stance})


def make_catalog(n_styles, seed=0):
    """Deterministic list of ``n_styles`` distinct gait styles."""
    rng = np.random.default_rng(seed)
    styles = []
    for i in range(n_styles):
        styles.append(GaitStyle(
            name=f"style{i:02d}",
            stride=float(rng.uniform(40.0, 85.0)),
            cadence=float(rng.uniform(0.75, 1.3)),
            leg_lift=float(rng.uniform(0.0, 14.0)),
            sway=float(rng.uniform(0.0, 8.0)),
            arm_swing=float(rng.uniform(0.0, 40.0)),
        ))
    return styles
