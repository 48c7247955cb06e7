"""Stage runners shared by the command line and the test-suite.

A run lives in one output directory::

    clips.rsmt             clip cache (positions, velocities, rotations, labels)
    splits.json            train / style-overlap / style-no-overlap clip indices
    phase.rsmt             periodic autoencoder checkpoint
    annotated.rsmt         training clips plus mirrored copies, with phase tracks
    manifold.rsmt          motion manifold checkpoint
    sampler.rsmt           sampler checkpoint
    sampler_finetuned.rsmt sampler after few-shot style adaptation
    *_loss.csv             per-step loss curves
"""

import csv
import json
import logging
import os
from dataclasses import asdict

import numpy as np
import torch

from .checkpoint import load_into, read_checkpoint, save_module
from .config import RunConfig, dump_config
from .errors import CheckpointError, ConfigError, DurationError, EmptyDataset, MissingPrerequisite, StyleClipTooShort
from .evaluation import (
    ClassifierConfig, MetricReport, StyleClassifier, benchmark_latency, control_transform, diversity,
    fmd, foot_skate, l2_global, last_frame_error, npss, rotation_channels, train_style_classifier,
)
from .manifold import ManifoldConfig, ManifoldModel, train_manifold
from .motion.bvh import clip_to_bvh, parse_bvh, to_local, write_bvh
from .motion.clip import MotionClip, mirror_clip, orient_to_x, random_crop, resample_to_30fps, retarget_drop_joints
from .motion.dataset import MotionDataset, synthetic_dataset
from .motion.skeleton import DROPPED_JOINTS
from .motion.windows import STYLE_LENGTH, build_style_bank, build_window_bank, with_mirrors
from .phase import PeriodicAutoencoder, PhaseConfig, extract_phase, train_pae
from .sampler import SamplerConfig, SamplerModel, finetune_style, synthesize, train_sampler

log = logging.getLogger(__name__)

STAGES = {
    "prepare": "clips.rsmt",
    "phase": "phase.rsmt",
    "manifold": "manifold.rsmt",
    "sampler": "sampler.rsmt",
    "finetune": "sampler_finetuned.rsmt",
}
REFERENCE_LATENCY_MS = 1.7  # published per-frame figure, for comparison only


def seed_everything(seed):
    torch.manual_seed(seed)
    np.random.seed(seed % 2**32)


def write_loss_csv(path, history):
    if not history:
        return
    keys = list(history[0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step"] + keys)
        for i, row in enumerate(history):
            w.writerow([i] + [f"{row[k]:.9g}" if isinstance(row[k], float) else row[k] for k in keys])


# ---------------------------------------------------------------- data loading

def load_bvh_dataset(directory):
    """Clips from every ``*.bvh`` under ``directory``; the style is the file-name prefix before ``_``."""
    names = sorted(f for f in os.listdir(directory) if f.lower().endswith(".bvh"))
    if not names:
        raise EmptyDataset(f"no .bvh files in {directory}")
    clips, styles = [], []
    for name in names:
        with open(os.path.join(directory, name), encoding="utf-8") as fh:
            data = parse_bvh(fh.read())
        root, local = to_local(data)
        sk = data.skeleton
        drop = [n for n in DROPPED_JOINTS if n in sk.names]
        if drop:
            sk, local, root = retarget_drop_joints(sk, root, local, drop)
        fps = int(round(data.fps))
        keep = resample_to_30fps(np.arange(len(root)), fps)
        style = os.path.splitext(name)[0].split("_")[0]
        clips.append(MotionClip.from_local(sk, root[keep], local[keep], style=style))
        if style not in styles:
            styles.append(style)
    return MotionDataset(clips, styles, None, {"source": os.path.abspath(directory)})


def annotate(dataset, pae):
    dataset.phases = [extract_phase(pae, c) for c in dataset.clips]
    return dataset


# ---------------------------------------------------------------- workspace

class Workspace:
    """Lazy access to the artefacts of one run directory."""

    def __init__(self, root, cfg=None):
        self.root = root
        self.cfg = cfg or RunConfig()
        self._cache = {}
        os.makedirs(root, exist_ok=True)

    def path(self, name):
        return os.path.join(self.root, name)

    def require(self, stage):
        p = self.path(STAGES[stage])
        if not os.path.exists(p):
            raise MissingPrerequisite(stage, p)
        return p

    def _cached(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def dataset(self):
        return self._cached("dataset", lambda: MotionDataset.load(self.require("prepare")))

    def split(self):
        return self._cached("split", lambda: self.dataset().splits(self.cfg.seed))

    def annotated(self):
        """(dataset with phases, training indices incl. mirrors)."""
        def build():
            self.require("phase")
            ds = MotionDataset.load(self.path("annotated.rsmt"))
            with open(self.path("splits.json"), encoding="utf-8") as fh:
                train = json.load(fh)["train_with_mirrors"]
            return ds, train
        return self._cached("annotated", build)

    def pae(self):
        def build():
            state, man = read_checkpoint(self.require("phase"), "phase")
            model = PeriodicAutoencoder(int(man["input_channels"]), PhaseConfig(**man["config"]))
            return load_into(model, state, self.path("phase.rsmt")).eval()
        return self._cached("pae", build)

    def manifold(self):
        def build():
            state, man = read_checkpoint(self.require("manifold"), "manifold")
            model = ManifoldModel(int(man["joints"]), int(man["N_p"]), ManifoldConfig(**man["config"]))
            return load_into(model, state, self.path("manifold.rsmt")).eval()
        return self._cached("manifold", build)

    def sampler(self, finetuned=False):
        stage = "finetune" if finetuned else "sampler"

        def build():
            state, man = read_checkpoint(self.require(stage), "sampler")
            m = self.manifold()
            if int(man["frame_dim"]) != m.frame_dim or int(man["phase_channels"]) != m.phase_channels \
                    or int(man["latent"]) != m.cfg.latent:
                raise CheckpointError("sampler checkpoint does not match the manifold dimensions")
            model = SamplerModel(m, SamplerConfig(**man["config"]))
            return load_into(model, state, self.path(STAGES[stage])).eval()
        return self._cached(stage, build)


# ---------------------------------------------------------------- stages

def prepare(ws):
    cfg = ws.cfg
    seed_everything(cfg.seed)
    if cfg.dataset == "synthetic":
        ds = synthetic_dataset(cfg.styles, cfg.clips, cfg.frames, seed=cfg.seed)
    else:
        ds = load_bvh_dataset(cfg.dataset)
    ds.meta["seed"] = cfg.seed
    ds.save(ws.path("clips.rsmt"))
    sp = ds.splits(cfg.seed)
    with open(ws.path("splits.json"), "w", encoding="utf-8") as fh:
        json.dump({k: v for k, v in asdict(sp).items()}, fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(ws.path("config.txt"), "w", encoding="utf-8") as fh:
        fh.write(dump_config(cfg))
    ws._cache.clear()
    return ds, sp


def train_phase_stage(ws, log_every=0):
    cfg = ws.cfg
    seed_everything(cfg.seed)
    ds, sp = ws.dataset(), ws.split()
    ext, train = with_mirrors(ds, sp.train)
    pcfg = PhaseConfig(channels=cfg.phase_channels, window=cfg.phase_window, steps=cfg.phase_steps,
                       seed=cfg.seed)
    model, _, losses = train_pae(ext.subset(train), pcfg, log_every=log_every)
    save_module(ws.path("phase.rsmt"), model, "phase",
                {"config": asdict(pcfg), "input_channels": model.input_channels})
    annotate(ext, model).save(ws.path("annotated.rsmt"))
    with open(ws.path("splits.json"), encoding="utf-8") as fh:
        info = json.load(fh)
    info["train_with_mirrors"] = train
    with open(ws.path("splits.json"), "w", encoding="utf-8") as fh:
        json.dump(info, fh, indent=1, sort_keys=True)
        fh.write("\n")
    write_loss_csv(ws.path("phase_loss.csv"), [{"reconstruction": v} for v in losses])
    ws._cache.clear()
    return model, losses


def training_banks(ws):
    ds, train = ws.annotated()
    return build_window_bank(ds, train), build_style_bank(ds, train)


def train_manifold_stage(ws, log_every=0):
    cfg = ws.cfg
    ws.require("phase")
    seed_everything(cfg.seed)
    bank, _ = training_banks(ws)
    sk = ws.dataset().skeleton
    mcfg = ManifoldConfig(latent=cfg.latent, experts=cfg.experts, hidden=cfg.manifold_hidden,
                          window=cfg.manifold_window, beta=cfg.beta, lr=cfg.lr, steps=cfg.manifold_steps,
                          seed=cfg.seed)
    model, history = train_manifold(bank, sk.foot_indices, len(sk), cfg.phase_channels, mcfg,
                                    log_every=log_every)
    save_module(ws.path("manifold.rsmt"), model, "manifold", model.manifest())
    write_loss_csv(ws.path("manifold_loss.csv"), history)
    ws._cache.pop("manifold", None)
    return model, history


def sampler_config(cfg, **kw):
    base = SamplerConfig(hidden=cfg.lstm_hidden, min_length=cfg.min_length, max_length=cfg.max_length,
                         epochs=cfg.epochs, steps_per_epoch=cfg.steps_per_epoch, batch=cfg.batch,
                         lr=cfg.lr, style_weight_decay=cfg.style_weight_decay, seed=cfg.seed)
    for k, v in kw.items():
        setattr(base, k, v)
    return base


def train_sampler_stage(ws, log_every=0):
    cfg = ws.cfg
    manifold = ws.manifold()
    seed_everything(cfg.seed)
    bank, style_bank = training_banks(ws)
    sk = ws.dataset().skeleton
    model, history = train_sampler(manifold, bank, style_bank, sk.foot_indices, sampler_config(cfg),
                                   log_every=log_every)
    save_module(ws.path("sampler.rsmt"), model, "sampler", model.manifest())
    write_loss_csv(ws.path("sampler_loss.csv"), history)
    ws._cache.pop("sampler", None)
    return model, history


def augment_clips(clips, augment, rng):
    """``augment`` variants per clip: the clip, its mirror, then random temporal crops."""
    out = []
    for c in clips:
        variants = [c, mirror_clip(c)]
        while len(variants) < augment:
            length = int(rng.integers(max(STYLE_LENGTH + 1, len(c) // 2), len(c) + 1))
            variants.append(random_crop(c, length, rng))
        out.extend(variants[:augment])
    return out


def finetune_split(ws, style=None, clips=4):
    """(style name, fine-tuning clip indices, held-out clip indices) of a no-overlap style."""
    ds, sp = ws.dataset(), ws.split()
    style = style or sp.styles_c[0]
    idx = [i for i in sp.test_no_overlap if ds.clips[i].style == style]
    if not idx:
        raise EmptyDataset(f"no clips of style {style!r} in the style-no-overlap split")
    return style, idx[:clips], idx[clips:]


def finetune_stage(ws, style=None, clips=4, augment=3, log_every=0):
    cfg = ws.cfg
    model = ws.sampler()
    seed_everything(cfg.seed)
    style, ft_idx, _ = finetune_split(ws, style, clips)
    ds = ws.dataset()
    rng = np.random.default_rng(cfg.seed)
    seqs = augment_clips([ds.clips[i] for i in ft_idx], augment, rng)
    aug = annotate(MotionDataset(seqs, ds.styles, None, {}), ws.pae())
    bank = build_window_bank(aug)
    style_bank = build_style_bank(aug)
    fcfg = sampler_config(cfg, epochs=cfg.finetune_epochs, steps_per_epoch=cfg.finetune_steps)
    sk = ds.skeleton
    model, history = finetune_style(model, bank, style_bank, sk.foot_indices, fcfg, log_every=log_every)
    save_module(ws.path("sampler_finetuned.rsmt"), model, "sampler",
                dict(model.manifest(), finetuned_style=style, sequences=len(seqs)))
    write_loss_csv(ws.path("finetune_loss.csv"), history)
    ws._cache.pop("finetune", None)
    return model, history, len(seqs)


# ---------------------------------------------------------------- transitions

def transition_tasks(bank, frames, n, seed=0):
    """``n`` start/target pairs: frame 0 and frame ``frames`` of random windows."""
    if frames + 1 > bank.frames.shape[1]:
        raise ValueError(f"{frames} frames do not fit in {bank.frames.shape[1]}-frame windows")
    rng = np.random.default_rng(seed)
    ci = rng.choice(len(bank), size=n, replace=n > len(bank))
    return {
        "index": ci,
        "start": bank.frames[ci, 0],
        "target": bank.frames[ci, frames],
        "truth": bank.frames[ci, :frames + 1],
        "phase": bank.phase[ci, 0],
        "style": bank.style[ci],
    }


def exemplars(style_bank, styles, seed=0):
    """One 120-frame style clip per requested style index."""
    rng = np.random.default_rng(seed)
    out = []
    for s in styles:
        pool = style_bank[int(s)]
        out.append(pool[int(rng.integers(0, len(pool)))])
    return np.stack(out)


def perturb(tasks, frames, d, dt, num_joints):
    """Control-perturbed targets and the new duration."""
    targets, new_frames = [], None
    for s, t in zip(tasks["start"], tasks["target"]):
        nt, new_frames = control_transform(s.reshape(num_joints, 12), t.reshape(num_joints, 12), frames, d, dt)
        targets.append(nt.reshape(-1))
    return np.asarray(targets, dtype=np.float32), new_frames


def generate(model, tasks, style_clips, frames, seed=0, target=None):
    out = synthesize(model, tasks["start"], tasks["target"] if target is None else target, frames,
                     style_clips, tasks["phase"], seed=seed)
    return out["frame"].numpy().astype(np.float64)


def positions(frames, num_joints):
    f = np.asarray(frames)
    return f.reshape(*f.shape[:-1], num_joints, 12)[..., :3]


def stacked_displacement(tasks, num_joints, target=None):
    """Stacked position L2 between each start frame and its target (a standing-still error)."""
    tgt = tasks["target"] if target is None else target
    return float(np.mean([
        last_frame_error(positions(s, num_joints)[None], positions(t, num_joints))
        for s, t in zip(tasks["start"], tgt)
    ]))


# ---------------------------------------------------------------- evaluation

def test_material(ws, split="overlap"):
    """(window bank, style bank) for an evaluation split."""
    ds, sp = ws.dataset(), ws.split()
    idx = sp.test_overlap if split == "overlap" else sp.test_no_overlap
    pae = ws.pae()
    test = annotate(ds.subset(idx), pae)
    bank = build_window_bank(test)
    if split == "overlap":
        _, style_bank = training_banks(ws)
    else:
        style_bank = build_style_bank(test)
    return bank, style_bank


def style_classifier(ws):
    path = ws.path("classifier.rsmt")
    ds = ws.dataset()
    if os.path.exists(path):
        state, man = read_checkpoint(path, "classifier")
        model = StyleClassifier(int(man["frame_dim"]), int(man["styles"]), int(man["channels"]))
        return load_into(model, state, path).eval()
    seed_everything(ws.cfg.seed)
    bank = build_window_bank(annotate(MotionDataset(list(ds.clips), ds.styles), ws.pae()))
    ccfg = ClassifierConfig(steps=ws.cfg.classifier_steps, seed=ws.cfg.seed)
    model = train_style_classifier(bank, len(ds.styles), ccfg)
    save_module(path, model, "classifier", {"frame_dim": bank.frames.shape[-1], "styles": len(ds.styles),
                                            "channels": ccfg.channels})
    return model


def evaluate_stage(ws, frames=(10, 20, 40), controls=((2.0, 1.0), (-1.0, 1.0), (1.0, 2.0), (1.0, 0.5)),
                   split="overlap", finetuned=False, ground_truth=False, out=None):
    """Metric suite written as a CSV report; returns ``(report, path)``.

    With ``ground_truth`` the reference motion stands in for the generated
    motion (a sanity run: comparison metrics are zero).
    """
    cfg = ws.cfg
    seed_everything(cfg.seed)
    model = ws.sampler(finetuned)
    bank, style_bank = test_material(ws, split)
    J = ws.dataset().skeleton
    foot = J.foot_indices
    nj = len(J)
    clf = style_classifier(ws)
    report = MetricReport()
    n = cfg.eval_pairs
    for T in frames:
        tasks = transition_tasks(bank, T, n, seed=cfg.seed + T)
        clips = exemplars(style_bank, tasks["style"], seed=cfg.seed + T)
        gen = tasks["truth"].astype(np.float64) if ground_truth else generate(model, tasks, clips, T, cfg.seed)
        gt = tasks["truth"].astype(np.float64)
        report.add("l2_global", T, 1, 1, l2_global(positions(gen, nj), positions(gt, nj)), n)
        val = npss(rotation_channels(gt, nj), rotation_channels(gen, nj))
        report.add("npss", T, 1, 1, val, n)
        report.add("npss_x100", T, 1, 1, 100.0 * val, n)
        report.add("foot_skate", T, 1, 1, foot_skate(positions(gen, nj), foot), n)
        report.add("last_frame", T, 1, 1, last_frame_error(positions(gen, nj), positions(tasks["target"], nj)), n)
        if T == max(frames):
            report.add("fmd", T, 1, 1, fmd(gen.astype(np.float32), gt.astype(np.float32), clf), n)
        # diversity over repeated samples of a few pairs
        k = min(cfg.diversity_pairs, n)
        divs = []
        for i in range(k):
            sub = {key: v[i:i + 1].repeat(cfg.diversity_samples, 0) for key, v in tasks.items()}
            if ground_truth:
                samples = sub["truth"].astype(np.float64)
            else:
                samples = generate(model, sub, clips[i:i + 1].repeat(cfg.diversity_samples, 0), T,
                                   seed=cfg.seed + 1000 + i)
            divs.append(diversity(positions(samples, nj)))
        report.add("diversity", T, 1, 1, float(np.mean(divs)), k)
        for d, dt in controls:
            target, T2 = perturb(tasks, T, d, dt, nj)
            if ground_truth:
                continue
            g = generate(model, tasks, clips, T2, cfg.seed, target=target)
            report.add("last_frame", T, d, dt, last_frame_error(positions(g, nj), positions(target, nj)), n)
            report.add("foot_skate", T, d, dt, foot_skate(positions(g, nj), foot), n)
    path = out or ws.path("report.csv")
    report.write_csv(path)
    return report, path


def synthesize_stage(ws, clip=None, start=0, frames=30, style_clip=None, seed=0, finetuned=False, name="synth"):
    """Synthesize a transition between two frames of one dataset clip.

    Writes ``<name>.bvh`` and ``<name>.rsmt`` (a one-clip cache) and returns
    ``(clip, timings, paths)``.
    """
    from .sampler import synthesize_transition

    model = ws.sampler(finetuned)
    ds, sp = ws.dataset(), ws.split()
    clip = sp.test_overlap[0] if clip is None else clip
    style_clip = clip if style_clip is None else style_clip
    for c in (clip, style_clip):
        if not 0 <= c < len(ds.clips):
            raise ConfigError(f"clip index {c} out of range (dataset has {len(ds.clips)} clips)")
    src = ds.clips[clip]
    if start + frames >= len(src):
        raise DurationError(f"clip {clip} has {len(src)} frames; cannot reach frame {start + frames}")
    window = orient_to_x(src.slice(start, start + frames + 1))
    phase = extract_phase(ws.pae(), src).slice(start, start + 1).vectors()[0]
    sty = ds.clips[style_clip]
    if len(sty) < STYLE_LENGTH:
        raise StyleClipTooShort(f"style clip {style_clip} has {len(sty)} frames")
    sty = orient_to_x(sty.slice(0, STYLE_LENGTH)).frames().reshape(STYLE_LENGTH, -1)
    f = window.frames().reshape(frames + 1, -1)
    out, timings = synthesize_transition(model, ds.skeleton, f[0], f[-1], frames, sty, phase, seed,
                                         style=ds.clips[style_clip].style)
    paths = (ws.path(f"{name}.bvh"), ws.path(f"{name}.rsmt"))
    with open(paths[0], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_bvh(clip_to_bvh(out)))
    MotionDataset([out], ds.styles, None, {"source": "synthesized", "seed": seed}).save(paths[1])
    return out, timings, paths


def bench_stage(ws, frames=40, repetitions=20, warmup=2):
    torch.set_num_threads(1)
    model = ws.sampler()
    bank, style_bank = test_material(ws)
    tasks = transition_tasks(bank, min(frames, bank.frames.shape[1] - 1), 1, seed=ws.cfg.seed)
    clips = exemplars(style_bank, tasks["style"])

    def run(T, timings):
        synthesize(model, tasks["start"], tasks["target"], T, clips, tasks["phase"], seed=0, timings=timings)

    res = benchmark_latency(run, frames, repetitions, warmup)
    res["reference_ms"] = REFERENCE_LATENCY_MS
    return res
