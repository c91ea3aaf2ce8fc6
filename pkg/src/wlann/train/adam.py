"""Adam with global-norm gradient clipping, in a fixed parameter order."""

from __future__ import annotations

import numpy as np

from ..errors import NumericError
from ..ndiff.tensor import Tensor


class Adam:
    """Standard bias-corrected Adam; moments live alongside each parameter."""

    def __init__(
        self,
        params: list[Tensor],
        learning_rate: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        clip_norm: float = 1.0,
        weight_decay: float = 0.0,
    ):
        self.params = list(params)
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.clip_norm = clip_norm
        self.weight_decay = weight_decay
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def global_grad_norm(self) -> float:
        total = 0.0
        for p in self.params:
            if p.grad is not None:
                total += float(np.sum(p.grad.astype(np.float64) ** 2))
        return float(np.sqrt(total))

    def step(self) -> None:
        norm = self.global_grad_norm()
        if not np.isfinite(norm):
            raise NumericError(f"non-finite gradient norm at optimizer step {self.step_count + 1}")
        scale = 1.0
        if self.clip_norm > 0 and norm > self.clip_norm:
            scale = self.clip_norm / norm
        self.step_count += 1
        correction1 = 1.0 - self.beta1**self.step_count
        correction2 = 1.0 - self.beta2**self.step_count
        for p, m, v in zip(self.params, self.m, self.v):
            grad = (p.grad if p.grad is not None else np.zeros_like(p.data)) * scale
            grad = grad.astype(p.data.dtype)
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            m_hat = m / correction1
            v_hat = v / correction2
            update = self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)
            if self.weight_decay > 0.0:
                update = update + (self.learning_rate * self.weight_decay) * p.data
            p.data = p.data - update

    def zero_grads(self) -> None:
        for p in self.params:
            p.zero_grad()
