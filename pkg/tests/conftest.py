import numpy as np
import pytest
import torch

from inbetween.manifold import ManifoldConfig, ManifoldModel, fit_normalizers
from inbetween.motion import synthetic_dataset
from inbetween.motion.dataset import PhaseTrack
from inbetween.motion.windows import build_style_bank, build_window_bank

torch.set_num_threads(1)


def analytic_phases(dataset, channels=2):
    """Clean sinusoidal phase tracks at the catalog cadence (no autoencoder needed)."""
    cadence = {s["name"]: s["cadence"] for s in dataset.meta["catalog"]}
    tracks = []
    for clip in dataset.clips:
        T = len(clip)
        f = np.array([cadence[clip.style] * (k + 1) / 30.0 for k in range(channels)])
        shift = (f[:, None] * np.arange(T)[None, :] + 0.5) % 1.0 - 0.5
        tracks.append(PhaseTrack(np.ones((channels, T)), shift, np.repeat(f[:, None], T, 1)))
    return tracks


@pytest.fixture(scope="session")
def tiny_data():
    ds = synthetic_dataset(styles=3, clips=2, frames=130, seed=0)
    ds.phases = analytic_phases(ds)
    return ds, build_window_bank(ds), build_style_bank(ds)


@pytest.fixture(scope="session")
def tiny_manifold(tiny_data):
    ds, bank, _ = tiny_data
    torch.manual_seed(0)
    cfg = ManifoldConfig(latent=8, experts=2, hidden=32, gate_hidden=16)
    model = ManifoldModel(len(ds.skeleton), 2, cfg)
    fit_normalizers(model, bank)
    return model.eval()


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def criterion():
    """Record one PASS/FAIL line; the lines are repeated in the terminal summary."""
    def record(name, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
