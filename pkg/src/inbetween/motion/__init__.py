"""Skeletons, BVH I/O, motion clips, synthetic gaits, splits and window banks."""

from .bvh import clip_to_bvh, parse_bvh, write_bvh
from .clip import FPS, MotionClip, mirror_clip
from .dataset import MotionDataset, PhaseTrack, synthetic_dataset
from .gait import GaitStyle, make_catalog, synth_gait
from .skeleton import Skeleton, default_skeleton
from .splits import DatasetSplit, make_splits

__all__ = [
    "FPS",
    "DatasetSplit",
    "GaitStyle",
    "MotionClip",
    "MotionDataset",
    "PhaseTrack",
    "Skeleton",
    "clip_to_bvh",
    "default_skeleton",
    "make_catalog",
    "make_splits",
    "mirror_clip",
    "parse_bvh",
    "synth_gait",
    "synthetic_dataset",
    "write_bvh",
]
