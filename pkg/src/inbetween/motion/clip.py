"""Motion clips in the global feature representation and their processing.

Per frame and joint a clip stores global position (cm), global linear
velocity (cm/frame) and global rotation in 6D form: 12 numbers, so a clip
of T frames on the 23-joint skeleton is a 23 x 12 x T feature block.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ..core_math import axis_angle_matrix, contact_weight, forward_kinematics, matrix_to_rot6d
from ..errors import ResampleError, RetargetError
from .skeleton import Skeleton

log = logging.getLogger(__name__)

FPS = 30
FEATURES_PER_JOINT = 12


def finite_velocity(positions):
    """Backward differences with the first frame copying the second."""
    vel = np.zeros_like(positions)
    if positions.shape[0] > 1:
        vel[1:] = positions[1:] - positions[:-1]
        vel[0] = vel[1]
    return vel


@dataclass
class MotionClip:
    skeleton: Skeleton
    positions: np.ndarray   # (T, J, 3)
    velocities: np.ndarray  # (T, J, 3)
    rotations: np.ndarray   # (T, J, 6)
    style: str = ""
    fps: int = FPS
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_global(cls, skeleton, positions, rotation_matrices, style="", fps=FPS, extras=None):
        positions = np.asarray(positions, dtype=np.float64)
        return cls(
            skeleton,
            positions,
            finite_velocity(positions),
            matrix_to_rot6d(rotation_matrices),
            style=style,
            fps=fps,
            extras=dict(extras or {}),
        )

    @classmethod
    def from_local(cls, skeleton, root_positions, local_rotations, style="", fps=FPS, extras=None):
        pos, rot = forward_kinematics(skeleton, root_positions, local_rotations)
        ex = dict(extras or {})
        ex.setdefault("root_positions", np.asarray(root_positions, dtype=np.float64))
        ex.setdefault("local_rotations", np.asarray(local_rotations, dtype=np.float64))
        return cls.from_global(skeleton, pos, rot, style=style, fps=fps, extras=ex)

    @classmethod
    def from_frames(cls, skeleton, frames, style="", fps=FPS):
        """Inverse of :meth:`frames`: (T, J*12) or (T, J, 12) array."""
        f = np.asarray(frames, dtype=np.float64).reshape(len(frames), len(skeleton), FEATURES_PER_JOINT)
        return cls(skeleton, f[..., :3].copy(), f[..., 3:6].copy(), f[..., 6:].copy(), style, fps)

    def __len__(self):
        return self.positions.shape[0]

    @property
    def num_frames(self):
        return self.positions.shape[0]

    def frames(self):
        """(T, J, 12) per-frame feature array: position, velocity, 6D rotation."""
        return np.concatenate([self.positions, self.velocities, self.rotations], axis=-1)

    def features(self):
        """(J, 12, T) feature block."""
        return np.transpose(self.frames(), (1, 2, 0))

    def hip_feature(self):
        """(T, 9) hip velocity and 6D hip rotation."""
        h = self.skeleton.hip_index
        return np.concatenate([self.velocities[:, h], self.rotations[:, h]], axis=-1)

    def slice(self, start, stop):
        return replace(
            self,
            positions=self.positions[start:stop].copy(),
            velocities=self.velocities[start:stop].copy(),
            rotations=self.rotations[start:stop].copy(),
            extras={k: v[start:stop].copy() for k, v in self.extras.items()
                    if isinstance(v, np.ndarray) and v.ndim and v.shape[0] == self.num_frames},
        )


def retarget_drop_joints(skeleton, root_positions, local_rotations, names):
    """Remove joints (and require their whole subtree to be removed too).

    Returns the reduced skeleton and local rotations. Surviving joints keep
    their parents, so their global transforms are unchanged.
    """
    drop = {skeleton.index(n) for n in names}
    for j in drop:
        kept = [k for k in skeleton.descendants(j) if k not in drop]
        if kept:
            raise RetargetError(
                f"cannot remove {skeleton.names[j]}: descendants "
                f"{[skeleton.names[k] for k in kept]} are kept"
            )
    keep = [j for j in range(len(skeleton)) if j not in drop]
    return skeleton.subset(keep), np.asarray(local_rotations)[:, keep], np.asarray(root_positions)


def resample_to_30fps(frames, source_fps):
    """Strided subsampling to 30 fps; ``frames`` is any array with frames first."""
    ratio = source_fps / FPS
    stride = int(round(ratio))
    if source_fps < FPS or abs(ratio - stride) > 1e-9:
        raise ResampleError(f"cannot subsample {source_fps} fps to {FPS} fps by an integer stride")
    return frames[::stride]


def mirror_clip(clip):
    """Reflect a clip through the YZ plane and swap left/right joints.

    Positions and velocities have x negated. For rotations, the reflected
    frame is Mx R Mz (Mz flips the skeleton's lateral axis), whose first two
    columns are the original columns with x negated.
    """
    perm = clip.skeleton.mirror_indices()
    flip3 = np.array([-1.0, 1.0, 1.0])
    flip6 = np.array([-1.0, 1.0, 1.0, -1.0, 1.0, 1.0])
    return replace(
        clip,
        positions=clip.positions[:, perm] * flip3,
        velocities=clip.velocities[:, perm] * flip3,
        rotations=clip.rotations[:, perm] * flip6,
        extras={},
    )


def window_starts(T, length, overlap):
    stride = length - overlap
    if stride <= 0:
        raise ValueError("overlap must be smaller than the window length")
    return list(range(0, T - length + 1, stride))


def crop_windows(clip, length, overlap=0):
    if len(clip) < length:
        log.warning("clip of %d frames is shorter than window %d; skipped", len(clip), length)
        return []
    return [clip.slice(s, s + length) for s in window_starts(len(clip), length, overlap)]


def random_crop(clip, length, rng):
    if len(clip) < length:
        log.warning("clip of %d frames is shorter than crop %d; skipped", len(clip), length)
        return None
    start = int(rng.integers(0, len(clip) - length + 1))
    return clip.slice(start, start + length)


def facing_yaw(rotation6d):
    """Yaw angle (about +Y) of a joint's forward axis projected to the ground."""
    fwd = np.asarray(rotation6d)[..., :3]
    return np.arctan2(-fwd[..., 2], fwd[..., 0])


def apply_rigid(clip, yaw, translation):
    """Rotate about +Y by ``yaw`` after translating by ``translation`` (3-vector)."""
    R = axis_angle_matrix("y", yaw)
    pos = (clip.positions + translation) @ R.T
    vel = clip.velocities @ R.T
    rot = np.concatenate([clip.rotations[..., :3] @ R.T, clip.rotations[..., 3:] @ R.T], axis=-1)
    return replace(clip, positions=pos, velocities=vel, rotations=rot, extras={})


def orient_to_x(clip):
    """Rigidly move the clip so frame 0's hip faces +X above the origin."""
    h = clip.skeleton.hip_index
    yaw = facing_yaw(clip.rotations[0, h])
    hip = clip.positions[0, h]
    return apply_rigid(clip, -yaw, np.array([-hip[0], 0.0, -hip[2]]))


def foot_speeds(clip):
    """(T, N_f) foot joint speeds in cm/frame."""
    return np.linalg.norm(clip.velocities[:, clip.skeleton.foot_indices], axis=-1)


def contact_labels(clip):
    """(T, N_f) soft contact probability per foot joint."""
    return contact_weight(foot_speeds(clip))
