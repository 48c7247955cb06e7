"""BVH reading and writing.

Only the root may carry position channels. Rotation channels may come in
any order; the rotation matrix is the product of the per-axis rotations in
the order listed (intrinsic convention, as in the format's reference
implementations).
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from ..errors import ParseError
from .skeleton import Skeleton

_POS = ("Xposition", "Yposition", "Zposition")
_ROT = ("Xrotation", "Yrotation", "Zrotation")


@dataclass
class BvhData:
    skeleton: Skeleton
    channels: list  # per joint, list of channel names
    frame_time: float
    motion: np.ndarray  # (F, total channels)

    @property
    def fps(self):
        return 1.0 / self.frame_time

    def rotation_order(self, j):
        return "".join(c[0] for c in self.channels[j] if c in _ROT)


class _Lines:
    def __init__(self, text):
        self.lines = text.splitlines()
        self.i = 0

    def next(self):
        while self.i < len(self.lines):
            line = self.lines[self.i].strip()
            self.i += 1
            if line:
                return line.split()
        raise ParseError("unexpected end of file", self.i)

    @property
    def lineno(self):
        return self.i


def parse_bvh(text):
    src = _Lines(text)
    tok = src.next()
    if tok[0] != "HIERARCHY":
        raise ParseError("expected HIERARCHY", src.lineno)
    names, parents, offsets, channels = [], [], [], []
    stack = []
    tok = src.next()
    if tok[0] != "ROOT" or len(tok) < 2:
        raise ParseError("expected ROOT <name>", src.lineno)
    pending = (tok[1], -1)
    while True:
        if pending is not None:
            name, parent = pending
            pending = None
            if src.next()[0] != "{":
                raise ParseError(f"expected '{{' after joint {name}", src.lineno)
            off = src.next()
            if off[0] != "OFFSET" or len(off) != 4:
                raise ParseError(f"expected OFFSET x y z for joint {name}", src.lineno)
            ch = src.next()
            if ch[0] != "CHANNELS":
                raise ParseError(f"expected CHANNELS for joint {name}", src.lineno)
            try:
                count = int(ch[1])
                off_vals = [float(v) for v in off[1:]]
            except ValueError:
                raise ParseError(f"malformed number in joint {name}", src.lineno) from None
            chans = ch[2:]
            if len(chans) != count:
                raise ParseError(
                    f"joint {name} declares {count} channels but lists {len(chans)}", src.lineno
                )
            for c in chans:
                if c not in _POS + _ROT:
                    raise ParseError(f"unknown channel {c}", src.lineno)
            if parent >= 0 and any(c in _POS for c in chans):
                raise ParseError(f"position channels on non-root joint {name}", src.lineno)
            names.append(name)
            parents.append(parent)
            offsets.append(off_vals)
            channels.append(chans)
            stack.append(len(names) - 1)
            continue
        tok = src.next()
        if tok[0] == "JOINT":
            if len(tok) < 2:
                raise ParseError("JOINT without a name", src.lineno)
            if not stack:
                raise ParseError("JOINT outside of any parent", src.lineno)
            pending = (tok[1], stack[-1])
        elif tok[0] == "End":
            if src.next()[0] != "{":
                raise ParseError("expected '{' after End Site", src.lineno)
            if src.next()[0] != "OFFSET":
                raise ParseError("expected OFFSET in End Site", src.lineno)
            if src.next()[0] != "}":
                raise ParseError("expected '}' closing End Site", src.lineno)
        elif tok[0] == "}":
            if not stack:
                raise ParseError("unbalanced '}'", src.lineno)
            stack.pop()
            if not stack:
                break
        else:
            raise ParseError(f"unexpected token {tok[0]!r}", src.lineno)

    tok = src.next()
    if tok[0] != "MOTION":
        raise ParseError("expected MOTION", src.lineno)
    tok = src.next()
    if tok[0] != "Frames:":
        raise ParseError("expected 'Frames:'", src.lineno)
    try:
        n_frames = int(tok[1])
    except (IndexError, ValueError):
        raise ParseError("malformed frame count", src.lineno) from None
    tok = src.next()
    if tok[:2] != ["Frame", "Time:"]:
        raise ParseError("expected 'Frame Time:'", src.lineno)
    frame_time = float(tok[2])
    n_chan = sum(len(c) for c in channels)
    rows = []
    for _ in range(n_frames):
        vals = src.next()
        if len(vals) != n_chan:
            raise ParseError(f"expected {n_chan} channel values, got {len(vals)}", src.lineno)
        try:
            rows.append([float(v) for v in vals])
        except ValueError:
            raise ParseError("malformed channel value", src.lineno) from None
    motion = np.array(rows, dtype=np.float64).reshape(n_frames, n_chan)
    skeleton = Skeleton(names, parents, np.array(offsets))
    return BvhData(skeleton, channels, frame_time, motion)


def _fmt(v):
    return f"{v:.6f}"


def write_bvh(data):
    sk = data.skeleton
    order = []
    todo = [0]
    while todo:
        j = todo.pop()
        order.append(j)
        todo.extend(reversed(sk.children(j)))
    if order != list(range(len(sk))):
        raise ValueError("joints must be stored in depth-first order to be written as BVH")
    out = ["HIERARCHY"]

    def emit(j, depth):
        pad = "\t" * depth
        kw = "ROOT" if sk.parents[j] < 0 else "JOINT"
        out.append(f"{pad}{kw} {sk.names[j]}")
        out.append(f"{pad}{{")
        out.append(f"{pad}\tOFFSET " + " ".join(_fmt(v) for v in sk.offsets[j]))
        chans = data.channels[j]
        out.append(f"{pad}\tCHANNELS {len(chans)} " + " ".join(chans))
        kids = sk.children(j)
        for k in kids:
            emit(k, depth + 1)
        if not kids:
            out.append(f"{pad}\tEnd Site")
            out.append(f"{pad}\t{{")
            out.append(f"{pad}\t\tOFFSET 0.000000 0.000000 0.000000")
            out.append(f"{pad}\t}}")
        out.append(f"{pad}}}")

    emit(0, 0)
    out.append("MOTION")
    out.append(f"Frames: {data.motion.shape[0]}")
    out.append(f"Frame Time: {data.frame_time:.8f}")
    for row in data.motion:
        out.append(" ".join(_fmt(v) for v in row))
    return "\n".join(out) + "\n"


def to_local(data):
    """Root positions (F, 3) and local rotation matrices (F, J, 3, 3)."""
    F_ = data.motion.shape[0]
    J = len(data.skeleton)
    root = np.zeros((F_, 3))
    local = np.tile(np.eye(3), (F_, J, 1, 1))
    col = 0
    for j, chans in enumerate(data.channels):
        block = data.motion[:, col:col + len(chans)]
        col += len(chans)
        rot_idx = [i for i, c in enumerate(chans) if c in _ROT]
        for i, c in enumerate(chans):
            if c in _POS:
                root[:, _POS.index(c)] = block[:, i]
        if rot_idx:
            order = "".join(chans[i][0] for i in rot_idx)
            local[:, j] = Rotation.from_euler(order, block[:, rot_idx], degrees=True).as_matrix()
    return root, local


def from_local(skeleton, root_positions, local_rotations, frame_time=1.0 / 30.0, order="ZYX"):
    """Pack local rotations into BVH channels (root: positions then rotations)."""
    rot_names = [f"{a}rotation" for a in order]
    channels = [list(_POS) + rot_names] + [list(rot_names) for _ in range(len(skeleton) - 1)]
    F_, J = local_rotations.shape[:2]
    eul = Rotation.from_matrix(local_rotations.reshape(-1, 3, 3)).as_euler(order, degrees=True)
    eul = eul.reshape(F_, J, 3)
    motion = np.concatenate([np.asarray(root_positions).reshape(F_, 3), eul.reshape(F_, J * 3)], axis=1)
    return BvhData(skeleton, channels, frame_time, motion)


def clip_to_bvh(clip, order="ZYX"):
    """BVH data for a clip: hip trajectory plus local rotations from its global 6D rotations."""
    from ..core_math import rot6d_to_matrix

    sk = clip.skeleton
    glob = rot6d_to_matrix(clip.rotations)
    local = glob.copy()
    for j, p in enumerate(sk.parents):
        if p >= 0:
            local[:, j] = np.swapaxes(glob[:, p], -1, -2) @ glob[:, j]
    root = clip.positions[:, sk.hip_index] - sk.offsets[sk.hip_index]
    return from_local(sk, root, local, frame_time=1.0 / clip.fps, order=order)
