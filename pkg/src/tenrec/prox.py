"""Trace-norm objectives and their proximal maps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .linalg import singular_values, svd
from .tensor_core import as_tensor, frobenius_norm, unfold


@dataclass(frozen=True)
class Objective:
    """Either the tensor trace norm or the augmented ``||X||_* + ||X||_F^2 / (2 alpha)``."""

    kind: Literal["trace-norm", "augmented"] = "trace-norm"
    alpha: float | None = None

    def __post_init__(self):
        if self.kind == "trace-norm":
            if self.alpha is not None:
                raise ValueError("trace-norm objective takes no alpha")
        elif self.kind == "augmented":
            if self.alpha is None or not self.alpha > 0 or not np.isfinite(self.alpha):
                raise ValueError(f"augmented objective needs a finite alpha > 0, got {self.alpha}")
        else:
            raise ValueError(f"unknown objective kind {self.kind!r}")

    @classmethod
    def trace_norm(cls) -> "Objective":
        return cls("trace-norm")

    @classmethod
    def augmented(cls, alpha: float) -> "Objective":
        return cls("augmented", float(alpha))

    @property
    def is_augmented(self) -> bool:
        return self.kind == "augmented"

    def label(self) -> str:
        return self.kind if not self.is_augmented else f"augmented(alpha={self.alpha:.6g})"


def mode_trace_norms(t) -> np.ndarray:
    t = as_tensor(t)
    return np.array([np.sum(singular_values(unfold(t, n))) for n in range(t.ndim)])


def tensor_trace_norm(t) -> float:
    """Average over modes of the nuclear norm of each unfolding."""
    return float(np.mean(mode_trace_norms(t)))


def objective_value(t, obj: Objective) -> float:
    value = tensor_trace_norm(t)
    if obj.is_augmented:
        value += frobenius_norm(t) ** 2 / (2.0 * obj.alpha)
    return value


def svt(m, tau: float) -> np.ndarray:
    """Singular value soft-thresholding, the prox of ``tau * ||.||_*``."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    u, s, v = svd(m)
    shrunk = np.maximum(s - tau, 0.0)
    keep = shrunk > 0
    return (u[:, keep] * shrunk[keep]) @ v[:, keep].T


def augmented_prox(m, tau: float, alpha: float) -> np.ndarray:
    """Minimizer of ``||X||_* + ||X||_F^2/(2 alpha) + ||X - m||_F^2/(2 tau)``.

    Completing the square turns the two quadratics into one centred at
    ``alpha/(alpha+tau) * m`` with weight ``(alpha+tau)/(2 alpha tau)``, so the
    answer is ``alpha/(alpha+tau) * svt(m, tau)``.
    """
    if not tau > 0 or not alpha > 0:
        raise ValueError(f"tau and alpha must be positive, got tau={tau}, alpha={alpha}")
    return (alpha / (alpha + tau)) * svt(m, tau)
