"""Model checkpoints stored in the named-tensor container.

Every checkpoint holds a ``manifest`` text tensor (JSON: model kind,
configuration, dimensions, parameter groups) and one ``param/<name>``
tensor per state-dict entry.
"""

import json

import numpy as np
import torch

from .autodiff.container import decode_text, encode_text, read_container, write_container
from .errors import CheckpointError

PREFIX = "param/"


def save_module(path, module, kind, manifest=None):
    info = dict(manifest or {})
    info["kind"] = kind
    tensors = {"manifest": encode_text(json.dumps(info, sort_keys=True))}
    for name, t in module.state_dict().items():
        tensors[PREFIX + name] = t.detach().cpu().numpy().astype(np.float32)
    write_container(path, tensors)


def read_checkpoint(path, kind):
    """``(state_dict, manifest)`` of a checkpoint, checking its kind."""
    raw = read_container(path)
    if "manifest" not in raw:
        raise CheckpointError(f"{path}: no manifest")
    manifest = json.loads(decode_text(raw["manifest"]))
    if manifest.get("kind") != kind:
        raise CheckpointError(f"{path}: expected a {kind} checkpoint, found {manifest.get('kind')}")
    state = {k[len(PREFIX):]: torch.from_numpy(np.array(v, dtype=np.float32))
             for k, v in raw.items() if k.startswith(PREFIX)}
    return state, manifest


def load_into(module, state, path="checkpoint"):
    """Load ``state`` into ``module``, turning any size or key mismatch into CheckpointError."""
    own = module.state_dict()
    missing = sorted(set(own) - set(state))
    extra = sorted(set(state) - set(own))
    if missing or extra:
        raise CheckpointError(f"{path}: missing tensors {missing[:3]}, unexpected {extra[:3]}")
    for k, v in state.items():
        if tuple(own[k].shape) != tuple(v.shape):
            raise CheckpointError(f"{path}: {k} has shape {tuple(v.shape)}, model expects {tuple(own[k].shape)}")
    module.load_state_dict(state)
    return module
