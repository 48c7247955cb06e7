"""Rotation, kinematics, spectral and interpolation primitives.

Conventions used throughout the package:

* world frame is Y-up; the ground is the XZ plane;
* a 6D rotation stores the first two columns of the rotation matrix
  (forward axis, then up axis) back to back;
* angles are radians in (-pi, pi]; phase shifts are stored in turns.
"""

import math

import numpy as np

from .errors import (
    DegenerateRotation,
    InvalidRotation,
    InvalidSpeed,
    SignalTooShort,
    SkeletonMismatch,
)

_EPS = 1e-8


def rot6d_to_matrix(r):
    """Decode 6D rotations of shape (..., 6) into matrices of shape (..., 3, 3).

    Gram-Schmidt: the forward vector is normalised, the up vector is
    orthogonalised against it, and the third column is their cross product.
    """
    r = np.asarray(r, dtype=np.float64)
    if r.shape[-1] != 6:
        raise ValueError(f"expected trailing dimension 6, got shape {r.shape}")
    a, b = r[..., :3], r[..., 3:]
    na = np.linalg.norm(a, axis=-1, keepdims=True)
    if np.any(na < _EPS):
        raise DegenerateRotation("forward vector has zero length")
    x = a / na
    b = b - np.sum(x * b, axis=-1, keepdims=True) * x
    nb = np.linalg.norm(b, axis=-1, keepdims=True)
    if np.any(nb < _EPS * np.maximum(1.0, np.linalg.norm(r[..., 3:], axis=-1, keepdims=True))):
        raise DegenerateRotation("up vector is zero or parallel to the forward vector")
    y = b / nb
    z = np.cross(x, y)
    return np.stack([x, y, z], axis=-1)


def matrix_to_rot6d(R, tol=1e-5):
    """Encode rotation matrices (..., 3, 3) as 6D vectors (..., 6)."""
    R = np.asarray(R, dtype=np.float64)
    if R.shape[-2:] != (3, 3):
        raise InvalidRotation(f"expected (..., 3, 3) matrices, got shape {R.shape}")
    gram = np.swapaxes(R, -1, -2) @ R
    if np.max(np.abs(gram - np.eye(3)), initial=0.0) > tol:
        raise InvalidRotation("matrix is not orthonormal")
    if np.any(np.linalg.det(R) < 0):
        raise InvalidRotation("matrix is a reflection (det < 0)")
    return np.concatenate([R[..., :, 0], R[..., :, 1]], axis=-1)


def axis_angle_matrix(axis, angle):
    """Rotation matrix about a principal axis ('x', 'y' or 'z'); broadcasts over angle."""
    angle = np.asarray(angle, dtype=np.float64)
    c, s = np.cos(angle), np.sin(angle)
    o, i = np.zeros_like(angle), np.ones_like(angle)
    if axis == "x":
        rows = [[i, o, o], [o, c, -s], [o, s, c]]
    elif axis == "y":
        rows = [[c, o, s], [o, i, o], [-s, o, c]]
    elif axis == "z":
        rows = [[c, -s, o], [s, c, o], [o, o, i]]
    else:
        raise ValueError(f"unknown axis {axis!r}")
    return np.stack([np.stack(row, axis=-1) for row in rows], axis=-2)


def forward_kinematics(skeleton, root_positions, local_rotations):
    """Global joint positions and rotations from local joint rotations.

    ``root_positions`` is (T, 3) and ``local_rotations`` is (T, J, 3, 3).
    A child sits at its parent's position plus the parent's global rotation
    applied to the child's rest offset. Returns ``(positions (T, J, 3),
    global_rotations (T, J, 3, 3))``.
    """
    parents = list(skeleton.parents)
    offsets = np.asarray(skeleton.offsets, dtype=np.float64)
    local_rotations = np.asarray(local_rotations, dtype=np.float64)
    root_positions = np.asarray(root_positions, dtype=np.float64)
    n = len(parents)
    if local_rotations.ndim != 4 or local_rotations.shape[1] != n:
        raise SkeletonMismatch(
            f"skeleton has {n} joints but rotations have shape {local_rotations.shape}"
        )
    T = local_rotations.shape[0]
    if root_positions.shape != (T, 3):
        raise SkeletonMismatch(f"root positions shape {root_positions.shape} != ({T}, 3)")
    pos = np.zeros((T, n, 3))
    rot = np.zeros((T, n, 3, 3))
    for j, p in enumerate(parents):
        if p < 0:
            rot[:, j] = local_rotations[:, j]
            pos[:, j] = root_positions + offsets[j]
        else:
            rot[:, j] = rot[:, p] @ local_rotations[:, j]
            pos[:, j] = pos[:, p] + np.einsum("tij,j->ti", rot[:, p], offsets[j])
    return pos, rot


def power_spectrum(signal):
    """Per-bin power |DFT(x)[j]|^2 for j = 0..n//2 of a real sequence."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {x.shape}")
    if x.shape[0] < 2:
        raise SignalTooShort(f"need at least 2 samples, got {x.shape[0]}")
    return np.abs(np.fft.rfft(x)) ** 2


def contact_weight(f_v):
    """Foot-contact probability from foot speed (cm/frame).

    1 at or below 0.5, 0 at or above 1.0, and the cubic 2t^3 - 3t^2 + 1 with
    t = 2(f_v - 0.5) in between. Accepts scalars or arrays.
    """
    v = np.asarray(f_v, dtype=np.float64)
    if np.any(v < 0) or np.any(np.isnan(v)):
        raise InvalidSpeed("foot speed must be non-negative")
    t = np.clip(2.0 * (v - 0.5), 0.0, 1.0)
    w = 2.0 * t**3 - 3.0 * t**2 + 1.0
    if w.ndim == 0:
        return float(w)
    return w


def wrap_angle(theta):
    """Map radians into (-pi, pi]."""
    w = np.mod(np.asarray(theta, dtype=np.float64) + math.pi, 2.0 * math.pi) - math.pi
    w = np.where(w <= -math.pi, w + 2.0 * math.pi, w)
    return float(w) if w.ndim == 0 else w


def slerp_angle(a, b, w):
    """Interpolate angle ``a`` toward ``b`` along the shorter arc.

    When the two angles are exactly antipodal the arc in the positive
    (counter-clockwise) direction is taken.
    """
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < 0) or np.any(w > 1):
        raise ValueError("interpolation weight must lie in [0, 1]")
    diff = wrap_angle(np.asarray(b, dtype=np.float64) - np.asarray(a, dtype=np.float64))
    return wrap_angle(np.asarray(a, dtype=np.float64) + w * diff)


def rotate2d(p, theta):
    """Counter-clockwise rotation of 2-vectors (..., 2) by ``theta`` radians."""
    p = np.asarray(p, dtype=np.float64)
    c, s = np.cos(theta), np.sin(theta)
    x, y = p[..., 0], p[..., 1]
    return np.stack([c * x - s * y, s * x + c * y], axis=-1)
