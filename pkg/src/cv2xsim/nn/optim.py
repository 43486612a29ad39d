"""Adam optimizer: decaying averages of gradients and squared gradients.

The update keeps first/second moment estimates per parameter and applies
theta <- theta - lr * m / (sqrt(v) + eps).  Bias correction of the moments
is on by default; ``bias_correction=False`` applies the raw moments
(literal-recurrence mode).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Adam:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    bias_correction: bool = True
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def _ensure_state(self, params: list[np.ndarray]) -> None:
        if not self.m:
            self.m = [np.zeros_like(p, dtype=np.float64) for p in params]
            self.v = [np.zeros_like(p, dtype=np.float64) for p in params]
        if len(self.m) != len(params):
            raise ValueError("optimizer state does not match parameter list")

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """Update parameters in place."""
        self._ensure_state(params)
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, g, m, v in zip(params, grads, self.m, self.v):
            if p.shape != g.shape:
                raise ValueError("gradient shape does not match parameter")
            g64 = g.astype(np.float64)
            m *= b1
            m += (1 - b1) * g64
            v *= b2
            v += (1 - b2) * g64**2
            if self.bias_correction:
                mhat = m / (1 - b1**self.t)
                vhat = v / (1 - b2**self.t)
            else:
                mhat, vhat = m, v
            p -= (self.learning_rate * mhat / (np.sqrt(vhat) + self.eps)).astype(p.dtype)


def adam_step(params, grads, state: Adam) -> Adam:
    """Functional wrapper: apply one update and return the (mutated) state."""
    state.step(params, grads)
    return state
