import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings, strategies as st

from inbetween.errors import InvalidAmplitude, ShapeError
from inbetween.motion import GaitStyle, synth_gait
from inbetween.motion.dataset import MotionDataset, PhaseTrack
from inbetween.phase import (
    PeriodicAutoencoder,
    PhaseConfig,
    extract_phase,
    fit_spectral_params,
    frequency_from_shifts,
    phase_vector,
    spectral_params_torch,
    train_pae,
)


def test_phase_vector_interleaves_sin_cos():
    A = np.array([2.0, 1.0])
    S = np.array([0.25, 0.0])
    np.testing.assert_allclose(phase_vector(A, S), [2.0, 0.0, 0.0, 1.0], atol=1e-12)
    with pytest.raises(InvalidAmplitude):
        phase_vector([-1.0], [0.0])


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_frequency_wrap_matches_circular_difference(a, b):
    f = frequency_from_shifts(a, b)
    assert -0.5 <= f <= 0.5
    # same point on the circle as the plain difference
    assert math.isclose(math.cos(2 * math.pi * f), math.cos(2 * math.pi * (a - b)), abs_tol=1e-9)
    assert math.isclose(math.sin(2 * math.pi * f), math.sin(2 * math.pi * (a - b)), abs_tol=1e-9)


def test_frequency_wrap_examples():
    assert frequency_from_shifts(-0.45, 0.45) == pytest.approx(0.1, abs=1e-12)
    assert frequency_from_shifts(0.45, -0.45) == pytest.approx(-0.1, abs=1e-12)
    assert frequency_from_shifts(0.3, 0.1) == pytest.approx(0.2, abs=1e-12)


def test_fit_spectral_params_recovers_sinusoid():
    W = 60
    t = np.arange(W) - (W - 1) / 2
    A, Fq, b, S = 1.7, 4 / W, 0.3, 0.12
    curve = A * np.sin(2 * np.pi * (Fq * t + S)) + b
    got = fit_spectral_params(curve)
    np.testing.assert_allclose(got, (A, Fq, b, S), atol=1e-9)


def test_fit_spectral_params_flat_and_short():
    assert fit_spectral_params(np.full(10, 2.0)) == (0.0, 0.0, 2.0, 0.0)
    with pytest.raises(ShapeError):
        fit_spectral_params([1.0, 2.0])


def test_spectral_params_torch_pure_tone():
    W = 40
    t = torch.arange(W, dtype=torch.float64)
    x = (0.8 * torch.sin(2 * math.pi * 5 * t / W) + 0.1)[None, None]
    A, Fq, b = spectral_params_torch(x)
    assert A.item() == pytest.approx(0.8, rel=1e-6)
    assert Fq.item() == pytest.approx(5 / W, rel=1e-6)
    assert b.item() == pytest.approx(0.1, abs=1e-9)


def test_phase_track_vectors_match_phase_vector():
    rng = np.random.default_rng(0)
    A, S = rng.uniform(0, 2, (3, 7)), rng.uniform(-0.5, 0.5, (3, 7))
    tr = PhaseTrack(A, S, np.zeros_like(A))
    np.testing.assert_allclose(tr.vectors(), phase_vector(A.T, S.T), atol=1e-12)


def test_autoencoder_shapes_and_errors():
    cfg = PhaseConfig(channels=3, window=21, hidden=8, kernel=5)
    model = PeriodicAutoencoder(6, cfg)
    x = torch.randn(4, 6, 21)
    out, latent, (A, Fq, b, S) = model(x)
    assert out.shape == x.shape and latent.shape == (4, 3, 21)
    assert A.shape == Fq.shape == b.shape == S.shape == (4, 3)
    assert (S.abs() <= 0.5).all()
    with pytest.raises(ShapeError):
        model(torch.randn(4, 6, 20))


def test_short_training_annotates_every_frame():
    clips = [synth_gait(GaitStyle(), 90, seed=s) for s in range(2)]
    ds = MotionDataset(clips, ["neutral"])
    cfg = PhaseConfig(channels=2, window=21, hidden=8, kernel=5, steps=30, batch=8)
    model, phases, losses = train_pae(ds, cfg, log_every=0)
    assert len(phases) == 2 and phases[0].shift.shape == (2, 90)
    assert losses[-1] < losses[0]
    again = extract_phase(model, clips[0])
    np.testing.assert_array_equal(again.shift, phases[0].shift)
