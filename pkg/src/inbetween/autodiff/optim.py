import torch


class AMSGrad(torch.optim.Optimizer):
    """Adam with the AMSGrad running maximum and decoupled weight decay.

    Per parameter ``p`` with gradient ``g`` at step ``t``::

        m = b1*m + (1-b1)*g
        v = b2*v + (1-b2)*g^2
        vmax = max(vmax, v)
        p -= lr * wd * p
        p -= lr * (m / (1-b1^t)) / (sqrt(vmax / (1-b2^t)) + eps)

    Weight decay is set per parameter group, so one optimizer can decay
    only a chosen subset (e.g. a style encoder).
    """

    def __init__(self, params, lr=1e-3, betas=(0.5, 0.9), eps=1e-8, weight_decay=0.0):
        defaults = dict(lr=lr, betas=betas, eps=eps, weight_decay=weight_decay)
        super().__init__(params, defaults)

    @torch.no_grad()
    def step(self, closure=None):
        loss = None
        if closure is not None:
            with torch.enable_grad():
                loss = closure()
        for group in self.param_groups:
            b1, b2 = group["betas"]
            lr, eps, wd = group["lr"], group["eps"], group["weight_decay"]
            for p in group["params"]:
                if p.grad is None:
                    continue
                g = p.grad
                state = self.state[p]
                if not state:
                    state["step"] = 0
                    state["m"] = torch.zeros_like(p)
                    state["v"] = torch.zeros_like(p)
                    state["vmax"] = torch.zeros_like(p)
                state["step"] += 1
                t = state["step"]
                m, v, vmax = state["m"], state["v"], state["vmax"]
                m.mul_(b1).add_(g, alpha=1 - b1)
                v.mul_(b2).addcmul_(g, g, value=1 - b2)
                torch.maximum(vmax, v, out=vmax)
                if wd:
                    p.mul_(1 - lr * wd)
                denom = (vmax / (1 - b2**t)).sqrt_().add_(eps)
                p.addcdiv_(m, denom, value=-lr / (1 - b1**t))
        return loss
