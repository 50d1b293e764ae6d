"""Adam with bias correction, applied in place through the fused kernel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass
class AdamParams:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


class AdamState:
    """First/second moment buffers and step counter for one weight array."""

    def __init__(self, shape, dtype):
        self.m = np.zeros(shape, dtype=dtype)
        self.v = np.zeros(shape, dtype=dtype)
        self.t = 0

    def step(self, w: np.ndarray, grad: np.ndarray, hp: AdamParams) -> None:
        self.t += 1
        bc1 = 1.0 - hp.beta1 ** self.t
        bc2 = 1.0 - hp.beta2 ** self.t
        kernels.adam_step(w.ravel(), np.ascontiguousarray(grad).ravel(),
                          self.m.ravel(), self.v.ravel(), hp.learning_rate,
                          hp.beta1, hp.beta2, hp.eps, bc1, bc2)
