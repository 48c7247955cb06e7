"""End-to-end acceptance checks.

Each test prints one ``[PASS]``/``[FAIL]`` line (also repeated in the
pytest terminal summary). The training-efficacy checks share one seeded
run of the whole pipeline on the default synthetic catalog.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest
import torch

from inbetween import pipeline as P
from inbetween.autodiff import MLP, Attention, Conv1d, ConvTranspose1d, FiLM, GatedExperts, LSTMCell
from inbetween.autodiff import finite_difference_check, ops
from inbetween.config import RunConfig
from inbetween.core_math import contact_weight
from inbetween.evaluation import (
    control_transform,
    diversity,
    fmd,
    fmd_latents,
    foot_skate,
    frechet_distance,
    l2_global,
    last_frame_error,
    npss,
)
from inbetween.manifold import ManifoldConfig, ManifoldModel, fit_normalizers, heldout_reconstruction, kl_divergence
from inbetween.motion import GaitStyle, make_catalog, synth_gait
from inbetween.phase import frequency_from_shifts, phase_vector
from inbetween.sampler import FINETUNE_GROUPS, initial_sampler, noise_scale, phase_update, synthesize, time_embedding

from test_evaluation import fmd_oracle, npss_oracle, skate_oracle

pytestmark = pytest.mark.slow

TRAINING_BUDGET_S = 15 * 60
# start/target pairs per duration for the efficacy and style checks
PAIRS = 64
# efficacy durations: the shortest and longest rollouts of the training curriculum
EFFICACY_FRAMES = (20, 40)
STYLE_FRAMES = 40
# four samples per classifier latent dimension keeps the FMD covariance estimate full rank
FMD_PAIRS = 256
REFERENCE_MS = 1.7

TINY_CONFIG = """\
styles = 6
clips = 3
frames = 160
phase_channels = 2
phase_window = 21
phase_steps = 20
latent = 8
experts = 2
manifold_hidden = 32
manifold_window = 8
manifold_steps = 20
lstm_hidden = 16
min_length = 6
max_length = 10
epochs = 2
steps_per_epoch = 3
batch = 4
finetune_epochs = 1
finetune_steps = 2
classifier_steps = 10
eval_pairs = 4
diversity_samples = 2
diversity_pairs = 2
"""


# ------------------------------------------------------------------ 1

def _gradcheck_cases(seed):
    torch.manual_seed(seed)
    g = torch.Generator().manual_seed(seed)

    def leaf(*shape):
        return torch.randn(*shape, generator=g, dtype=torch.float64).requires_grad_()

    mlp = MLP([3, 4, 2]).double()
    x = leaf(2, 3)
    yield "mlp", mlp, {"x": x}, lambda: (mlp(x) ** 2).sum()
    conv = Conv1d(2, 3, 3, stride=2).double()
    xc = leaf(1, 2, 8)
    yield "conv1d", conv, {"x": xc}, lambda: (conv(xc) ** 2).sum()
    tconv = ConvTranspose1d(3, 2, 3, stride=2).double()
    yt = leaf(1, 3, 4)
    yield "conv_transpose1d", tconv, {"y": yt}, lambda: (tconv(yt) ** 2).sum()
    cell = LSTMCell(3, 2).double()
    xl, h, c = leaf(2, 3), leaf(2, 2), leaf(2, 2)
    yield "lstm_cell", cell, {"x": xl, "h": h, "c": c}, lambda: sum((o ** 2).sum() for o in cell(xl, h, c))
    gate_net = MLP([3, 4, 3]).double()
    experts = GatedExperts([2, 3, 2], 3).double()
    xg, xe = leaf(2, 3), leaf(2, 2)
    gate = torch.nn.ModuleList([gate_net, experts])
    yield "softmax_gate", gate, {"x": xg, "xe": xe}, \
        lambda: (experts(xe, ops.softmax(gate_net(xg), dim=-1)) ** 2).sum()
    film = FiLM(2, 3).double()
    xf, cf = leaf(2, 3), leaf(2, 2)
    yield "film", film, {"x": xf, "c": cf}, lambda: (film(xf, cf) ** 2).sum()
    att = Attention(3, 2, 4).double()
    q, m = leaf(2, 3), leaf(2, 5, 2)
    yield "attention", att, {"q": q, "m": m}, lambda: (att(q, m) ** 2).sum()


def test_1_gradient_integrity(criterion):
    t0 = time.perf_counter()
    failures, checks = [], 0
    for seed in range(20):
        for name, module, inputs, fn in _gradcheck_cases(seed):
            tensors = dict(module.named_parameters())
            tensors.update(inputs)
            res = finite_difference_check(fn, tensors, rtol=1e-3)
            checks += 1
            if not res.ok:
                failures.append((name, seed))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60.0
    criterion("1 gradient integrity", ok,
              f"{checks} checks over 7 layers x 20 seeds, {len(failures)} failures, {elapsed:.1f}s (< 60s)")
    assert ok, failures


# ------------------------------------------------------------------ 2

def test_2_formula_oracles(criterion):
    tol = 1e-9
    checks = {}
    checks["contact_weight"] = (contact_weight(0.5) == 1.0 and contact_weight(1.0) == 0.0
                                and abs(contact_weight(0.75) - 0.5) <= tol)
    kl = kl_divergence(torch.tensor([0.0, 1.0], dtype=torch.float64), torch.zeros(2, dtype=torch.float64))
    checks["kl"] = kl[0].item() == 0.0 and abs(kl[1].item() - 0.5) <= tol
    checks["z_noise_lambda"] = (noise_scale(5) == 0.0 and noise_scale(30) == 1.0 and noise_scale(45) == 1.0
                                and abs(noise_scale(17.5) - 0.5) <= tol)
    z0 = time_embedding(0, 8)
    checks["z_dt"] = (np.array_equal(z0[0::2], np.zeros(4)) and np.array_equal(z0[1::2], np.ones(4))
                      and abs(time_embedding(math.pi, 8)[0]) <= tol)
    checks["frequency_wrap"] = (abs(frequency_from_shifts(0.9, 0.05) + 0.15) <= tol
                                and abs(frequency_from_shifts(-0.4, 0.4) - 0.2) <= tol)
    checks["phase_vector"] = (np.allclose(phase_vector([1.0], [0.25]), [1.0, 0.0], rtol=0, atol=tol)
                              and np.array_equal(phase_vector([0.0], [0.1]), [0.0, 0.0])
                              and np.allclose(phase_vector([2.0], [-0.5]), [0.0, -2.0], rtol=0, atol=tol))
    p = phase_vector([1.3], [0.1])
    fixed, _ = phase_update(p, p, [1.3], [0.0])
    full, _ = phase_update(p, p, [1.3], [1.0])
    # p_t at angle 0, p_hat at angle pi/2, quarter-turn rotation, unit amplitudes
    quarter, _ = phase_update([0.0, 1.0], [1.0, 0.0], [1.0], [0.25])
    checks["phase_update"] = (np.allclose(fixed, p, rtol=0, atol=tol) and np.allclose(full, p, rtol=0, atol=tol)
                              and np.allclose(quarter, [1.0, 0.0], rtol=0, atol=tol))
    start, target = np.zeros((1, 12)), np.zeros((1, 12))
    target[0, 0] = 1.0
    far, _ = control_transform(start, target, 40, d=2.0)
    back, _ = control_transform(start, target, 40, d=-1.0)
    same, n1 = control_transform(start, target, 40)
    _, n_half = control_transform(start, target, 40, dt=0.5)
    checks["control_transform"] = (far[0, 0] == 2.0 and far[0, 2] == 0.0 and back[0, 0] == -1.0
                                   and np.array_equal(same, target) and n1 == 40 and n_half == 20)
    bad = [k for k, v in checks.items() if not v]
    criterion("2 formula oracles", not bad, f"{len(checks) - len(bad)}/{len(checks)} exact or within 1e-9"
              + (f"; failing {bad}" if bad else ""))
    assert not bad


# ------------------------------------------------------------------ 3

def test_3_metric_oracles(criterion):
    rng = np.random.default_rng(0)
    tol = 1e-6
    gt, pred = rng.normal(size=(16, 3)), rng.normal(size=(16, 3))
    a, b = rng.normal(size=(300, 4)), rng.normal(size=(300, 4)) @ rng.normal(size=(4, 4)) + 0.5
    s = rng.normal(size=(4, 6, 3, 3))
    pairs = [np.mean(np.sqrt(((s[i] - s[j]) ** 2).sum((-1, -2)))) for i in range(4) for j in range(i + 1, 4)]
    pos = rng.uniform(0.0, 4.0, size=(9, 5, 3))
    matches = {
        "npss": abs(npss(gt, pred) - npss_oracle(gt, pred)) <= tol,
        "fmd": abs(fmd_latents(a, b) - fmd_oracle(a, b)) <= tol,
        "diversity": abs(diversity(s) - np.mean(pairs)) <= tol,
        "foot_skate": abs(foot_skate(pos, [1, 3]) - skate_oracle(pos, [1, 3])) <= tol,
    }
    still = pos.copy()
    still[:] = pos[:1]
    zeros = {
        "npss": npss(gt, gt) == 0.0,
        "fmd": abs(fmd_latents(a, a)) <= tol and frechet_distance(a.mean(0), np.eye(4), a.mean(0), np.eye(4)) == 0.0,
        "diversity": diversity(np.repeat(s[:1], 3, 0)) == 0.0,
        "foot_skate": foot_skate(still, [1, 3]) == 0.0,
        "l2_global": l2_global(pos, pos) == 0.0,
        "last_frame": last_frame_error(pos, pos[-1]) == 0.0,
    }
    skates = []
    for i, style in enumerate(make_catalog(4, seed=3) + [GaitStyle()]):
        clip = synth_gait(style, 200, seed=i)
        skates.append(foot_skate(clip.positions, clip.skeleton.foot_indices))
    gait_ok = max(skates) < 0.01
    ok = all(matches.values()) and all(zeros.values()) and gait_ok
    criterion("3 metric oracles", ok,
              f"oracle matches {sum(matches.values())}/4 within 1e-6, zero on identical inputs "
              f"{sum(zeros.values())}/{len(zeros)}, synthetic gait foot skate max {max(skates):.2e} (< 0.01)")
    assert ok, (matches, zeros, skates)


# ------------------------------------------------------------------ shared pipeline run

@pytest.fixture(scope="module")
def run(tmp_path_factory):
    torch.set_num_threads(1)
    ws = P.Workspace(str(tmp_path_factory.mktemp("acceptance")), RunConfig(seed=0))
    cpu = {}
    t = time.process_time()
    P.prepare(ws)
    cpu["prepare"] = time.process_time() - t
    t = time.process_time()
    P.train_phase_stage(ws)
    cpu["phase"] = time.process_time() - t
    # the untrained manifold is built exactly as training builds it
    cfg = ws.cfg
    bank, style_bank = P.training_banks(ws)
    sk = ws.dataset().skeleton
    mcfg = ManifoldConfig(latent=cfg.latent, experts=cfg.experts, hidden=cfg.manifold_hidden,
                          window=cfg.manifold_window, seed=cfg.seed)
    torch.manual_seed(cfg.seed)
    fresh_manifold = ManifoldModel(len(sk), cfg.phase_channels, mcfg)
    fit_normalizers(fresh_manifold, bank)
    t = time.process_time()
    P.train_manifold_stage(ws)
    cpu["manifold"] = time.process_time() - t
    t = time.process_time()
    P.train_sampler_stage(ws)
    cpu["sampler"] = time.process_time() - t
    manifold = ws.manifold()
    untrained = initial_sampler(manifold, bank, P.sampler_config(cfg)).eval()
    ws._cache.clear()
    return {"ws": ws, "cpu": cpu, "fresh_manifold": fresh_manifold, "untrained": untrained,
            "test": P.test_material(ws)}


def test_4_training_budget(run, criterion):
    total = sum(run["cpu"].values())
    detail = ", ".join(f"{k} {v:.0f}s" for k, v in run["cpu"].items())
    ok = total <= TRAINING_BUDGET_S
    criterion("4 training CPU budget", ok, f"{total:.0f}s of {TRAINING_BUDGET_S}s ({detail})")
    assert ok


def test_4a_phase_frequency(run, criterion):
    ws = run["ws"]
    ds, train = ws.annotated()
    cadence = {s["name"]: s["cadence"] for s in ws.dataset().meta["catalog"]}
    errs = []
    for i in train:
        F = np.median(np.abs(ds.phases[i].frequency), axis=1) * 30.0
        errs.append(np.abs(F - cadence[ds.clips[i].style]) / cadence[ds.clips[i].style])
    per_channel = np.median(np.array(errs), axis=0)
    ok = bool((per_channel <= 0.2).any())
    best = int(np.argmin(per_channel))
    criterion("4a phase frequency", ok,
              f"median relative error per channel {np.round(per_channel, 3).tolist()}; "
              f"channel {best} at {per_channel[best]:.1%} (<= 20%)")
    assert ok


def test_4b_manifold_reconstruction(run, criterion):
    bank, _ = run["test"]
    window = run["ws"].cfg.manifold_window
    before = heldout_reconstruction(run["fresh_manifold"], bank, window=window)
    after = heldout_reconstruction(run["ws"].manifold(), bank, window=window)
    ok = before / after >= 2.0
    criterion("4b manifold held-out reconstruction", ok,
              f"{before:.4f} -> {after:.4f} ({before / after:.1f}x, >= 2x)")
    assert ok


def _last_frame(model, bank, style_bank, frames, d, seed=0):
    J = bank.frames.shape[-1] // 12
    tasks = P.transition_tasks(bank, frames, PAIRS, seed=seed + frames)
    clips = P.exemplars(style_bank, tasks["style"], seed=seed + frames)
    target, _ = P.perturb(tasks, frames, d, 1.0, J)
    gen = P.generate(model, tasks, clips, frames, seed, target=target)
    err = np.mean([last_frame_error(P.positions(g, J), P.positions(t, J)) for g, t in zip(gen, target)])
    exact_start = np.array_equal(gen[:, 0], tasks["start"].astype(np.float64))
    return float(err), P.stacked_displacement(tasks, J, target), exact_start


def test_4c_sampler_last_frame(run, criterion):
    bank, style_bank = run["test"]
    trained = run["ws"].sampler()
    parts, ok = [], True
    for T in EFFICACY_FRAMES:
        before, _, _ = _last_frame(run["untrained"], bank, style_bank, T, 1.0)
        after, _, _ = _last_frame(trained, bank, style_bank, T, 1.0)
        ok &= before / after >= 5.0
        parts.append(f"T={T}: {before:.1f} -> {after:.1f} ({before / after:.1f}x)")
    criterion("4c sampler last-frame L2 vs untrained", ok, "; ".join(parts) + " (>= 5x each)")
    assert ok


def test_4d_sampler_far_target(run, criterion):
    bank, style_bank = run["test"]
    trained = run["ws"].sampler()
    parts, ok = [], True
    for T in EFFICACY_FRAMES:
        err, disp, _ = _last_frame(trained, bank, style_bank, T, 2.0)
        ok &= err < 0.25 * disp
        parts.append(f"T={T}: {err:.1f} vs displacement {disp:.1f} ({err / disp:.2f})")
    criterion("4d last-frame L2 under d=2", ok, "; ".join(parts) + " (< 0.25 each)")
    assert ok


# ------------------------------------------------------------------ 5

def test_5a_style_swap_contrast(run, criterion):
    bank, style_bank = run["test"]
    model = run["ws"].sampler()
    J = bank.frames.shape[-1] // 12
    T = STYLE_FRAMES
    tasks = P.transition_tasks(bank, T, PAIRS, seed=77)
    own = P.exemplars(style_bank, tasks["style"], seed=1)
    again = P.exemplars(style_bank, tasks["style"], seed=2)
    rng = np.random.default_rng(3)
    styles = sorted(style_bank)
    other_styles = [rng.choice([s for s in styles if s != st]) for st in tasks["style"]]
    other = P.exemplars(style_bank, other_styles, seed=4)
    ref = P.generate(model, tasks, own, T, seed=0)
    within = P.generate(model, tasks, again, T, seed=1)
    across = P.generate(model, tasks, other, T, seed=0)
    d_within = np.array([l2_global(P.positions(a, J), P.positions(b, J)) for a, b in zip(ref, within)])
    d_across = np.array([l2_global(P.positions(a, J), P.positions(b, J)) for a, b in zip(ref, across)])
    frac = float((d_across > d_within).mean())
    ok = frac >= 0.8
    criterion("5a style-swap contrast", ok,
              f"{frac:.0%} of {PAIRS} pairs (>= 80%); mean distance across styles {d_across.mean():.1f}, "
              f"within a style {d_within.mean():.1f}")
    assert ok


@pytest.fixture(scope="module")
def finetuned(run):
    ws = run["ws"]
    J = len(ws.dataset().skeleton)
    style, _, held = P.finetune_split(ws)
    ds = ws.dataset()
    held_ds = P.annotate(ds.subset(held), ws.pae())
    from inbetween.motion.windows import build_style_bank, build_window_bank
    bank = build_window_bank(held_ds)
    sbank = build_style_bank(held_ds)
    clf = P.style_classifier(ws)
    tasks = P.transition_tasks(bank, STYLE_FRAMES, FMD_PAIRS, seed=5)
    clips = P.exemplars(sbank, tasks["style"], seed=5)
    truth = tasks["truth"]

    def score(model):
        gen = P.generate(model, tasks, clips, STYLE_FRAMES, seed=0)
        return fmd(gen.astype(np.float32), truth, clf)

    base = ws.sampler()
    before = score(base)
    frozen = {n: p.detach().clone() for n, p in base.named_parameters()
              if base.parameter_groups()[n] not in FINETUNE_GROUPS}
    frozen.update({f"manifold.{n}": p.detach().clone() for n, p in base.manifold.named_parameters()})
    model, _, _ = P.finetune_stage(ws, style)
    after = score(model)
    ws._cache.pop("sampler", None)
    return {"style": style, "before": before, "after": after, "frozen": frozen, "model": model, "J": J}


def test_5b_finetune_reduces_fmd(finetuned, criterion):
    f = finetuned
    ok = f["after"] < f["before"]
    criterion("5b fine-tuning FMD to held-out style", ok,
              f"style {f['style']}: {f['before']:.4f} -> {f['after']:.4f} (strict decrease)")
    assert ok


def test_5c_frozen_tensors_unchanged(finetuned, criterion):
    model = finetuned["model"]
    params = dict(model.named_parameters())
    params.update({f"manifold.{n}": p for n, p in model.manifold.named_parameters()})
    changed = [n for n, t in finetuned["frozen"].items() if not torch.equal(params[n], t)]
    manifold = sum(n.startswith("manifold.") for n in finetuned["frozen"])
    ok = not changed and manifold > 0
    criterion("5c frozen tensors bit-identical", ok,
              f"{len(finetuned['frozen'])} frozen tensors ({manifold} of them manifold), {len(changed)} changed")
    assert ok


# ------------------------------------------------------------------ 6

def _cli(args, out):
    env = dict(os.environ, PYTHONHASHSEED="0")
    res = subprocess.run([sys.executable, "-m", "inbetween.cli", *args, "--out", str(out)],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 0, res.stderr
    return res.stdout


def _smoke(out, cfg_path):
    _cli(["prepare", "--config", str(cfg_path), "--synthetic"], out)
    for cmd in (["train-phase"], ["train-manifold"], ["train-sampler"], ["finetune", "--clips", "2"],
                ["synthesize", "--frames", "10"], ["evaluate", "--frames", "10"]):
        _cli(cmd, out)
    return {name: (out / name).read_bytes() for name in sorted(os.listdir(out))}


def test_6a_cli_smoke_bit_reproducible(tmp_path, criterion):
    cfg_path = tmp_path / "tiny.cfg"
    cfg_path.write_text(TINY_CONFIG)
    first = _smoke(tmp_path / "a", cfg_path)
    second = _smoke(tmp_path / "b", cfg_path)
    differ = [k for k in first if first[k] != second.get(k)]
    ok = not differ and first.keys() == second.keys()
    criterion("6a CLI smoke run bit-reproducible", ok,
              f"{len(first)} artefacts compared byte for byte, {len(differ)} differ")
    assert ok, differ


def test_6b_frame_zero_is_start(run, criterion):
    bank, style_bank = run["test"]
    results = [_last_frame(m, bank, style_bank, T, d)[2]
               for m in (run["untrained"], run["ws"].sampler()) for T in (10, 40) for d in (1.0, 2.0)]
    ok = all(results)
    criterion("6b frame 0 equals start frame", ok, f"{sum(results)}/{len(results)} batches exact")
    assert ok


def test_6c_zero_lambda_zero_noise(run, criterion):
    bank, style_bank = run["test"]
    model = run["ws"].sampler()
    T = 40
    tasks = P.transition_tasks(bank, T, 16, seed=9)
    clips = P.exemplars(style_bank, tasks["style"], seed=9)
    out = synthesize(model, tasks["start"], tasks["target"], T, clips, tasks["phase"], seed=0)
    noise = out["noise"]
    lam = np.array([noise_scale(T - t) for t in range(T)])
    zero_steps = np.flatnonzero(lam == 0.0)
    exact = bool((noise[:, zero_steps] == 0).all())
    live = bool((noise[:, lam > 0].abs().sum(-1) > 0).all())
    ok = exact and live and len(zero_steps) == 5
    criterion("6c lambda=0 frames carry zero noise", ok,
              f"{len(zero_steps)} zero-lambda steps exactly zero: {exact}; noisy steps nonzero: {live}")
    assert ok


# ------------------------------------------------------------------ 7

def test_7_latency_report(run, criterion):
    res = P.bench_stage(run["ws"], frames=40, repetitions=20)
    ok = all(np.isfinite(res[k]) and res[k] > 0 for k in ("mean_ms", "p95_ms"))
    criterion("7 latency report", ok,
              f"mean {res['mean_ms']:.3f} ms/frame, p95 {res['p95_ms']:.3f} ms/frame on this CPU "
              f"(reference figure {REFERENCE_MS} ms/frame on different hardware; report only)")
    assert ok
