from dataclasses import dataclass, field

import numpy as np

from ..errors import MirrorError, SkeletonMismatch

FOOT_JOINTS = ("LeftAnkle", "LeftToe", "RightAnkle", "RightToe")
HIP_JOINT = "Hips"


@dataclass
class Skeleton:
    """Joint hierarchy in topological order with rest offsets in centimeters."""

    names: list
    parents: list
    offsets: np.ndarray
    foot_names: tuple = FOOT_JOINTS
    mirror_pairs: dict = field(default=None)

    def __post_init__(self):
        self.names = list(self.names)
        self.parents = [int(p) for p in self.parents]
        self.offsets = np.asarray(self.offsets, dtype=np.float64).reshape(-1, 3)
        n = len(self.names)
        if len(self.parents) != n or self.offsets.shape[0] != n:
            raise SkeletonMismatch("names, parents and offsets must have equal length")
        roots = [j for j, p in enumerate(self.parents) if p < 0]
        if roots != [0]:
            raise SkeletonMismatch(f"expected joint 0 to be the only root, roots={roots}")
        for j, p in enumerate(self.parents):
            if p >= j:
                raise SkeletonMismatch(f"joint {self.names[j]} has parent index {p} >= {j}")

    def __len__(self):
        return len(self.names)

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise SkeletonMismatch(f"no joint named {name!r}") from None

    @property
    def foot_indices(self):
        return [self.index(n) for n in self.foot_names if n in self.names]

    @property
    def hip_index(self):
        return 0

    def children(self, j):
        return [k for k, p in enumerate(self.parents) if p == j]

    def descendants(self, j):
        out = []
        stack = self.children(j)
        while stack:
            k = stack.pop()
            out.append(k)
            stack.extend(self.children(k))
        return sorted(out)

    def mirror_indices(self):
        """Index permutation swapping left/right joints.

        Pairs come from ``mirror_pairs`` when given, otherwise from the
        "Left"/"Right" name prefixes. Midline joints map to themselves.
        """
        pairs = dict(self.mirror_pairs or {})
        pairs.update({v: k for k, v in list(pairs.items())})
        perm = []
        for name in self.names:
            if name in pairs:
                other = pairs[name]
            elif name.startswith("Left"):
                other = "Right" + name[4:]
            elif name.startswith("Right"):
                other = "Left" + name[5:]
            else:
                other = name
            if other not in self.names:
                raise MirrorError(f"lateral joint {name!r} has no counterpart {other!r}")
            perm.append(self.names.index(other))
        return perm

    def subset(self, keep):
        """Skeleton restricted to the joint indices in ``keep`` (sorted)."""
        keep = sorted(keep)
        remap = {old: new for new, old in enumerate(keep)}
        parents = []
        for j in keep:
            p = self.parents[j]
            while p >= 0 and p not in remap:
                p = self.parents[p]
            parents.append(remap[p] if p >= 0 else -1)
        return Skeleton(
            [self.names[j] for j in keep], parents, self.offsets[keep],
            foot_names=self.foot_names, mirror_pairs=self.mirror_pairs,
        )


def _build(spec):
    names, parents, offsets = [], [], []
    for name, parent, offset in spec:
        names.append(name)
        parents.append(names.index(parent) if parent else -1)
        offsets.append(offset)
    return Skeleton(names, parents, np.array(offsets, dtype=np.float64))


def _arm(side, z):
    return [
        (f"{side}Collar", "Spine3", (0.0, 5.0, 4.0 * z)),
        (f"{side}Shoulder", f"{side}Collar", (0.0, 0.0, 14.0 * z)),
        (f"{side}Elbow", f"{side}Shoulder", (0.0, -28.0, 0.0)),
        (f"{side}Wrist", f"{side}Elbow", (0.0, -25.0, 0.0)),
        (f"{side}Thumb", f"{side}Wrist", (3.0, -3.0, 0.0)),
    ]


def _leg(side, z):
    return [
        (f"{side}Hip", "Hips", (0.0, -4.0, 10.0 * z)),
        (f"{side}Knee", f"{side}Hip", (0.0, -THIGH, 0.0)),
        (f"{side}Ankle", f"{side}Knee", (0.0, -SHIN, 0.0)),
        (f"{side}Toe", f"{side}Ankle", (14.0, -ANKLE_HEIGHT, 0.0)),
    ]


THIGH = 42.0
SHIN = 40.0
ANKLE_HEIGHT = 8.0


def full_rig():
    """27-joint capture rig (with wrists and thumbs), facing +X, Y up, right side +Z."""
    spec = [
        ("Hips", None, (0.0, 0.0, 0.0)),
        ("Spine", "Hips", (0.0, 10.0, 0.0)),
        ("Spine1", "Spine", (0.0, 10.0, 0.0)),
        ("Spine2", "Spine1", (0.0, 10.0, 0.0)),
        ("Spine3", "Spine2", (0.0, 10.0, 0.0)),
        ("Neck", "Spine3", (0.0, 8.0, 0.0)),
        ("Neck1", "Neck", (0.0, 5.0, 0.0)),
        ("Head", "Neck1", (0.0, 5.0, 0.0)),
        ("HeadEnd", "Head", (0.0, 15.0, 0.0)),
    ]
    spec += _arm("Right", 1.0) + _arm("Left", -1.0)
    spec += _leg("Right", 1.0) + _leg("Left", -1.0)
    return _build(spec)


DROPPED_JOINTS = ("LeftWrist", "LeftThumb", "RightWrist", "RightThumb")


def default_skeleton():
    """The 23-joint skeleton used for all features."""
    rig = full_rig()
    keep = [j for j, n in enumerate(rig.names) if n not in DROPPED_JOINTS]
    return rig.subset(keep)
