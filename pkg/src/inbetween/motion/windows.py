"""Fixed-length training windows with their phase and contact annotations."""

from dataclasses import dataclass

import numpy as np

from ..errors import MissingPhase
from .clip import contact_labels, mirror_clip, orient_to_x, window_starts

CLIP_LENGTH = 60
CLIP_OVERLAP = 20
STYLE_LENGTH = 120


@dataclass
class WindowBank:
    """Stacked, oriented 60-frame clips.

    frames (N, L, J*12); hip (N, L, 9); phase (N, L, 2*N_p);
    amplitude/shift/frequency (N, L, N_p); contact (N, L, N_f); style (N,)
    """

    frames: np.ndarray
    hip: np.ndarray
    phase: np.ndarray
    amplitude: np.ndarray
    shift: np.ndarray
    frequency: np.ndarray
    contact: np.ndarray
    style: np.ndarray
    style_names: list

    def __len__(self):
        return self.frames.shape[0]


def _annotated_windows(clip, track, length, overlap):
    out = []
    for s in window_starts(len(clip), length, overlap):
        w = orient_to_x(clip.slice(s, s + length))
        out.append((w, track.slice(s, s + length)))
    return out


def build_window_bank(dataset, indices=None, length=CLIP_LENGTH, overlap=CLIP_OVERLAP):
    if dataset.phases is None:
        raise MissingPhase("dataset has no phase tracks; run the phase stage first")
    indices = range(len(dataset.clips)) if indices is None else indices
    style_ix = {s: i for i, s in enumerate(dataset.styles)}
    cols = {k: [] for k in ("frames", "hip", "phase", "A", "S", "F", "contact", "style")}
    for i in indices:
        clip, track = dataset.clips[i], dataset.phases[i]
        for w, tr in _annotated_windows(clip, track, length, overlap):
            cols["frames"].append(w.frames().reshape(length, -1))
            cols["hip"].append(w.hip_feature())
            cols["phase"].append(tr.vectors())
            cols["A"].append(tr.amplitude.T)
            cols["S"].append(tr.shift.T)
            cols["F"].append(tr.frequency.T)
            cols["contact"].append(contact_labels(w))
            cols["style"].append(style_ix[clip.style])
    f32 = lambda k: np.stack(cols[k]).astype(np.float32)
    return WindowBank(
        f32("frames"), f32("hip"), f32("phase"), f32("A"), f32("S"), f32("F"), f32("contact"),
        np.array(cols["style"], dtype=np.int64), list(dataset.styles),
    )


def build_style_bank(dataset, indices=None, length=STYLE_LENGTH, stride=30):
    """Oriented style clips per style index: dict style -> array (n, length, J*12)."""
    indices = range(len(dataset.clips)) if indices is None else indices
    style_ix = {s: i for i, s in enumerate(dataset.styles)}
    bank = {}
    for i in indices:
        clip = dataset.clips[i]
        for s in range(0, len(clip) - length + 1, stride):
            w = orient_to_x(clip.slice(s, s + length))
            bank.setdefault(style_ix[clip.style], []).append(w.frames().reshape(length, -1))
    return {k: np.stack(v).astype(np.float32) for k, v in bank.items()}


def with_mirrors(dataset, indices):
    """Indices into a dataset extended by mirrored copies of ``indices``.

    Returns ``(extended_dataset, extended_indices)``; mirrored copies keep
    their source's style label. Phase tracks must be re-extracted for them.
    """
    from .dataset import MotionDataset

    idx = list(indices)
    clips = list(dataset.clips) + [mirror_clip(dataset.clips[i]) for i in idx]
    n = len(dataset.clips)
    ext = MotionDataset(clips, dataset.styles, None, dict(dataset.meta))
    return ext, idx + list(range(n, n + len(idx)))
