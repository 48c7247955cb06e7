"""Command-line entry point.

Exit codes: 0 success, 1 any other package error, 2 a prerequisite stage
has not been run, 3 invalid configuration.
"""

import argparse
import json
import logging
import os
import sys

import torch

from . import pipeline as P
from .config import RunConfig, coerce, parse_config
from .errors import ConfigError, InbetweenError, MissingPrerequisite

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISSING = 2
EXIT_CONFIG = 3


def _key_values(items, flag):
    out = []
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"{flag} expects key=value pairs, got {item!r}")
        out.append(item)
    return out


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def parse_controls(tokens):
    """``["d=2,-1", "dt=2,0.5"]`` -> ((2, 1), (-1, 1), (1, 2), (1, 0.5))."""
    controls = []
    for tok in tokens or []:
        key, _, vals = tok.partition("=")
        if key == "d":
            controls += [(v, 1.0) for v in _floats(vals)]
        elif key == "dt":
            controls += [(1.0, v) for v in _floats(vals)]
        else:
            raise ConfigError(f"unknown control {key!r}; use d=... or dt=...")
    return tuple(controls)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="run", help="run directory (default: run)")
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    common.add_argument("--seed", type=int, help="global random seed")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="inbetween", description="Stylized motion in-betweening")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", parents=[common], help="generate or ingest clips and splits")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--synthetic", nargs="*", metavar="KEY=VALUE",
                     help="synthetic gait catalog, e.g. styles=10 clips=8 frames=600")
    src.add_argument("--bvh", metavar="DIR", help="directory of .bvh clips named <style>_<take>.bvh")

    sub.add_parser("train-phase", parents=[common], help="train the periodic autoencoder")
    sub.add_parser("train-manifold", parents=[common], help="train the motion manifold")
    sub.add_parser("train-sampler", parents=[common], help="train the style sampler")

    p = sub.add_parser("finetune", parents=[common], help="few-shot adaptation to an unseen style")
    p.add_argument("--style", help="style name (default: first style-no-overlap style)")
    p.add_argument("--clips", type=int, default=4, help="number of clips of the new style")
    p.add_argument("--augment", type=int, default=3, help="sequences per clip (clip, mirror, crops)")

    p = sub.add_parser("synthesize", parents=[common], help="synthesize one transition")
    p.add_argument("--clip", type=int, help="dataset clip providing start and target frames")
    p.add_argument("--start", type=int, default=0, help="start frame index")
    p.add_argument("--frames", type=int, default=30, help="transition duration in frames")
    p.add_argument("--style-clip", type=int, help="dataset clip used as the style exemplar")
    p.add_argument("--finetuned", action="store_true")
    p.add_argument("--name", default="synth", help="output file stem")

    p = sub.add_parser("evaluate", parents=[common], help="metric suite, written as CSV")
    p.add_argument("--frames", default="10,20,40")
    p.add_argument("--control", nargs="*", default=["d=2,-1", "dt=2,0.5"])
    p.add_argument("--split", choices=("overlap", "no-overlap"), default="overlap")
    p.add_argument("--finetuned", action="store_true")
    p.add_argument("--ground-truth", action="store_true",
                   help="score the reference motion against itself (sanity run)")
    p.add_argument("--report", help="CSV path (default: <out>/report.csv)")

    p = sub.add_parser("bench", parents=[common], help="per-frame synthesis latency")
    p.add_argument("--frames", type=int, default=40)
    p.add_argument("--repetitions", type=int, default=20)
    p.add_argument("--warmup", type=int, default=2)
    return ap


def _config(args):
    overrides = []
    if args.command == "prepare" and args.synthetic:
        overrides += _key_values(args.synthetic, "--synthetic")
    if args.command == "prepare" and args.bvh:
        overrides.append(f"dataset={args.bvh}")
    overrides += _key_values(args.set, "--set")
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    # later stages inherit the configuration saved by prepare
    values = {}
    saved = os.path.join(args.out, "config.txt")
    if args.command != "prepare" and os.path.exists(saved):
        values.update(_read(saved))
    if args.config:
        values.update(_read(args.config))
    for item in overrides:
        k, v = (s.strip() for s in item.split("=", 1))
        values[k] = coerce(k, v)
    return RunConfig().replace(**values)


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def run(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    torch.set_num_threads(1)
    try:
        cfg = _config(args)
        ws = P.Workspace(args.out, cfg)
        cmd = args.command
        every = 50 if args.verbose else 0
        if cmd == "prepare":
            ds, sp = P.prepare(ws)
            print(f"prepared {len(ds.clips)} clips of {len(ds.styles)} styles: "
                  f"{len(sp.train)} train, {len(sp.test_overlap)} style-overlap test, "
                  f"{len(sp.test_no_overlap)} style-no-overlap test -> {ws.path('clips.rsmt')}")
        elif cmd == "train-phase":
            ws.require("prepare")
            _, losses = P.train_phase_stage(ws, every)
            print(f"phase model: loss {losses[0]:.4f} -> {losses[-1]:.4f} -> {ws.path('phase.rsmt')}")
        elif cmd == "train-manifold":
            ws.require("phase")
            _, hist = P.train_manifold_stage(ws, every)
            print(f"manifold: rec {hist[0]['rec']:.4f} -> {hist[-1]['rec']:.4f} -> {ws.path('manifold.rsmt')}")
        elif cmd == "train-sampler":
            ws.require("manifold")
            _, hist = P.train_sampler_stage(ws, every)
            print(f"sampler: loss {hist[0]['total']:.4f} -> {hist[-1]['total']:.4f} -> {ws.path('sampler.rsmt')}")
        elif cmd == "finetune":
            ws.require("sampler")
            _, hist, n = P.finetune_stage(ws, args.style, args.clips, args.augment, every)
            print(f"fine-tuned on {n} sequences: loss {hist[0]['total']:.4f} -> {hist[-1]['total']:.4f}"
                  f" -> {ws.path('sampler_finetuned.rsmt')}")
        elif cmd == "synthesize":
            ws.require("finetune" if args.finetuned else "sampler")
            clip, timings, paths = P.synthesize_stage(ws, args.clip, args.start, args.frames, args.style_clip,
                                                      cfg.seed, args.finetuned, args.name)
            print(f"synthesized {len(clip)} frames -> {paths[0]}, {paths[1]}")
        elif cmd == "evaluate":
            ws.require("finetune" if args.finetuned else "sampler")
            frames = tuple(int(v) for v in _floats(args.frames))
            controls = parse_controls(args.control)
            report, path = P.evaluate_stage(ws, frames, controls, args.split, args.finetuned,
                                            args.ground_truth, args.report)
            print(f"{len(report.rows)} metric rows -> {path}")
        elif cmd == "bench":
            ws.require("sampler")
            res = P.bench_stage(ws, args.frames, args.repetitions, args.warmup)
            print(json.dumps(res, indent=1, sort_keys=True))
            print(f"per-frame latency: mean {res['mean_ms']:.3f} ms, p95 {res['p95_ms']:.3f} ms "
                  f"(reference figure {res['reference_ms']} ms/frame on different hardware)")
    except MissingPrerequisite as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MISSING
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except InbetweenError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
