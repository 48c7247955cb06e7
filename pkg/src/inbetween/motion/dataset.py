"""Clip collections, the synthetic catalog and the on-disk clip cache."""

import json
from dataclasses import dataclass, field

import numpy as np

from ..autodiff.container import decode_text, encode_text, read_container, write_container
from ..errors import EmptyDataset
from .clip import MotionClip
from .gait import GaitStyle, make_catalog, synth_gait
from .skeleton import Skeleton
from .splits import make_splits


@dataclass
class PhaseTrack:
    """Per-frame phase parameters of one clip, each (N_p, T)."""

    amplitude: np.ndarray
    shift: np.ndarray
    frequency: np.ndarray

    def vectors(self):
        """(T, 2*N_p) phase vectors, channel-interleaved (sin, cos)."""
        ang = 2.0 * np.pi * self.shift
        p = np.stack([self.amplitude * np.sin(ang), self.amplitude * np.cos(ang)], axis=1)
        return p.reshape(-1, self.shift.shape[1]).T.copy()

    def slice(self, start, stop):
        return PhaseTrack(self.amplitude[:, start:stop], self.shift[:, start:stop],
                          self.frequency[:, start:stop])


@dataclass
class MotionDataset:
    clips: list
    styles: list                      # catalog order
    phases: list = None               # PhaseTrack per clip, once extracted
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.clips:
            raise EmptyDataset("dataset has no clips")

    @property
    def skeleton(self):
        return self.clips[0].skeleton

    @property
    def clip_styles(self):
        return [c.style for c in self.clips]

    def splits(self, seed=None):
        return make_splits(self.styles, self.clip_styles, self.meta.get("seed", 0) if seed is None else seed)

    def subset(self, indices):
        idx = list(indices)
        return MotionDataset(
            [self.clips[i] for i in idx], self.styles,
            None if self.phases is None else [self.phases[i] for i in idx], dict(self.meta),
        )

    def to_tensors(self):
        lengths = np.array([len(c) for c in self.clips], dtype=np.float32)
        sk = self.skeleton
        meta = dict(self.meta)
        meta.update(
            styles=self.styles,
            clip_styles=self.clip_styles,
            joint_names=sk.names,
            foot_names=list(sk.foot_names),
            fps=self.clips[0].fps,
        )
        out = {
            "positions": np.concatenate([c.positions for c in self.clips]),
            "velocities": np.concatenate([c.velocities for c in self.clips]),
            "rotations": np.concatenate([c.rotations for c in self.clips]),
            "clip_lengths": lengths,
            "skeleton_parents": np.array(sk.parents, dtype=np.float32),
            "skeleton_offsets": sk.offsets,
            "metadata": encode_text(json.dumps(meta, sort_keys=True)),
        }
        if self.phases is not None:
            out["phase_A"] = np.concatenate([p.amplitude for p in self.phases], axis=1)
            out["phase_S"] = np.concatenate([p.shift for p in self.phases], axis=1)
            out["phase_F"] = np.concatenate([p.frequency for p in self.phases], axis=1)
        return out

    def save(self, path):
        write_container(path, self.to_tensors())

    @classmethod
    def from_tensors(cls, t):
        meta = json.loads(decode_text(t["metadata"]))
        sk = Skeleton(meta.pop("joint_names"), t["skeleton_parents"].astype(int).tolist(),
                      t["skeleton_offsets"].astype(np.float64), foot_names=tuple(meta.pop("foot_names")))
        styles = meta.pop("styles")
        clip_styles = meta.pop("clip_styles")
        fps = int(meta.pop("fps"))
        bounds = np.concatenate([[0], np.cumsum(t["clip_lengths"].astype(int))])
        clips, phases = [], []
        has_phase = "phase_A" in t
        for i, style in enumerate(clip_styles):
            a, b = bounds[i], bounds[i + 1]
            clips.append(MotionClip(
                sk,
                t["positions"][a:b].astype(np.float64),
                t["velocities"][a:b].astype(np.float64),
                t["rotations"][a:b].astype(np.float64),
                style=style, fps=fps,
            ))
            if has_phase:
                phases.append(PhaseTrack(*(t[k][:, a:b].astype(np.float64) for k in ("phase_A", "phase_S", "phase_F"))))
        return cls(clips, styles, phases if has_phase else None, meta)

    @classmethod
    def load(cls, path):
        return cls.from_tensors(read_container(path))


def synthetic_dataset(styles=10, clips=8, frames=600, seed=0):
    """The synthetic gait catalog: ``styles`` styles x ``clips`` clips x ``frames`` frames."""
    catalog = make_catalog(styles, seed)
    rng = np.random.default_rng(seed + 1)
    out = []
    for st in catalog:
        for _ in range(clips):
            out.append(synth_gait(st, frames, seed=int(rng.integers(0, 2**31 - 1))))
    for c in out:
        c.extras = {}
    meta = {"source": "synthetic", "seed": seed, "catalog": [s.as_dict() for s in catalog]}
    return MotionDataset(out, [s.name for s in catalog], None, meta)


def catalog_styles(dataset):
    return [GaitStyle(**d) for d in dataset.meta.get("catalog", [])]
