from dataclasses import dataclass

import numpy as np
import torch

from ..errors import NonScalarLoss


def backward(loss):
    """Populate ``.grad`` of every leaf that requires it; repeated calls accumulate."""
    if loss.numel() != 1:
        raise NonScalarLoss(f"loss must be scalar, got shape {tuple(loss.shape)}")
    loss.reshape(()).backward()


@dataclass
class GradCheckResult:
    ok: bool
    max_abs_err: float
    max_rel_err: float
    worst: str


def finite_difference_check(fn, tensors, eps=1e-6, rtol=1e-3, atol=1e-5):
    """Compare autograd gradients of scalar ``fn()`` with central differences.

    ``tensors`` maps names to float64 leaves with ``requires_grad=True``; they
    are perturbed in place one entry at a time. An entry passes when
    ``|analytic - numeric| <= atol + rtol * |numeric|``.
    """
    for t in tensors.values():
        t.grad = None
    loss = fn()
    backward(loss)
    analytic = {k: t.grad.detach().clone() for k, t in tensors.items()}

    ok, max_abs, max_rel, worst = True, 0.0, 0.0, ""
    with torch.no_grad():
        for name, t in tensors.items():
            flat = t.view(-1)
            num = np.zeros(flat.numel())
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + eps
                up = fn().item()
                flat[i] = orig - eps
                down = fn().item()
                flat[i] = orig
                num[i] = (up - down) / (2 * eps)
            ana = analytic[name].view(-1).numpy()
            err = np.abs(ana - num)
            rel = err / np.maximum(np.abs(num), 1e-12)
            bad = err > atol + rtol * np.abs(num)
            if err.size and err.max() > max_abs:
                max_abs = float(err.max())
                worst = f"{name}[{int(err.argmax())}]"
            if err.size:
                max_rel = max(max_rel, float(np.where(err > atol, rel, 0.0).max()))
            ok = ok and not bad.any()
    return GradCheckResult(ok, max_abs, max_rel, worst)
