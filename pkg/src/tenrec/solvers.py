"""ADMM solvers for trace-norm and augmented trace-norm recovery.

All three solvers share one splitting. With one auxiliary matrix ``M_n`` per
mode and scaled duals ``U_n``::

    M_n <- prox_{f / (N rho)}(X_(n) + U_n)      f = ||.||_* or ||.||_* + ||.||^2/(2 alpha)
    X   <- data step applied to mean_n refold(M_n - U_n)
    U_n <- U_n + X_(n) - M_n

The augmented Frobenius term is split evenly across the N per-mode terms, so
at consensus it contributes exactly ``||X||_F^2 / (2 alpha)`` once. The data
step re-imposes observed entries (completion), projects onto the affine set
``F(X) = b`` (equality), or solves the penalized least-squares system (noisy).

For the noisy model the consensus gap on observed entries contracts only by
about ``1 - N rho / lam`` per iteration, so very large ``lam`` needs many
iterations before the stationarity test passes even though the iterate is
already close to the constrained solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
import scipy.linalg

from .operators import SensingOperator
from .prox import Objective, augmented_prox, objective_value, svt
from .tensor_core import as_tensor, frobenius_norm, refold, relative_error, unfold


class InfeasibleSystemError(ValueError):
    """The measurement vector is not in the range of the operator."""


@dataclass
class SolverConfig:
    max_iters: int = 500
    tol_rel_change: float = 1e-8
    tol_feas: float = 1e-9
    penalty: float = 1.0
    record_history: bool = True
    reference_solution: np.ndarray | None = None
    relaxation: float = 1.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not (self.tol_rel_change > 0 and self.tol_feas > 0 and self.penalty > 0):
            raise ValueError("tolerances and penalty must be positive")
        if not 0 < self.relaxation < 2:
            raise ValueError("relaxation must lie in (0, 2)")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    objective: float
    feasibility: float
    consensus: float
    stationarity: float
    relative_error: float | None = None


@dataclass
class SolverReport:
    solution: np.ndarray
    iterations_used: int
    status: Literal["converged", "max-iters"]
    history: list[IterationRecord] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def errors(self) -> np.ndarray:
        return np.array([h.relative_error for h in self.history], dtype=float)


def _mode_prox(obj: Objective, tau: float) -> Callable[[np.ndarray], np.ndarray]:
    if obj.is_augmented:
        return lambda v: augmented_prox(v, tau, obj.alpha)
    return lambda v: svt(v, tau)


def _admm(
    x: np.ndarray,
    data_step: Callable[[np.ndarray], np.ndarray],
    residual: Callable[[np.ndarray], float],
    objective: Callable[[np.ndarray], float],
    obj: Objective,
    cfg: SolverConfig,
    b_norm: float,
    need_stationarity: bool = False,
) -> SolverReport:
    shape = x.shape
    order = x.ndim
    rho = cfg.penalty
    relax = cfg.relaxation
    b_scale = max(1.0, b_norm)
    prox = _mode_prox(obj, 1.0 / (order * rho))
    mats = [unfold(x, n) for n in range(order)]
    duals = [np.zeros_like(m) for m in mats]
    history: list[IterationRecord] = []
    status = "max-iters"
    k = 0
    for k in range(1, cfg.max_iters + 1):
        unfolded = [unfold(x, n) for n in range(order)]
        mats = [prox(unfolded[n] + duals[n]) for n in range(order)]
        relaxed = [relax * mats[n] + (1.0 - relax) * unfolded[n] for n in range(order)]
        avg = sum(refold(relaxed[n] - duals[n], n, shape) for n in range(order)) / order
        x_new = data_step(avg)
        gaps = [unfold(x_new, n) - mats[n] for n in range(order)]
        for n in range(order):
            duals[n] += unfold(x_new, n) - relaxed[n]

        step = frobenius_norm(x_new - x)
        # measured against the data scale too, so that iterates decaying
        # geometrically to a zero solution still stop
        scale = max(frobenius_norm(x_new), b_norm)
        rel_change = step / scale if scale > 0 else step
        feas = residual(x_new)
        consensus = float(np.sqrt(sum(np.sum(g * g) for g in gaps)))
        # KKT residual of the splitting: X-step optimality gap plus dual residual
        stationarity = rho * max(
            frobenius_norm(sum(refold(g, n, shape) for n, g in enumerate(gaps))),
            np.sqrt(order) * step,
        )
        x = x_new

        if cfg.record_history:
            err = None
            if cfg.reference_solution is not None:
                err = relative_error(x, cfg.reference_solution)
            history.append(IterationRecord(k, objective(x), feas, consensus, stationarity, err))

        # X can stall while the duals are still moving, so the splitting's
        # primal residual has to be small as well
        rel_consensus = consensus / scale if scale > 0 else consensus
        done = rel_change <= cfg.tol_rel_change and rel_consensus <= cfg.tol_rel_change
        if need_stationarity:
            done = done and stationarity <= 1e-6 * b_scale
        else:
            done = done and feas <= cfg.tol_feas * b_scale
        if done:
            status = "converged"
            break
    return SolverReport(x, k, status, history)


def _check_finite(*arrays) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("inputs contain non-finite values")


def solve_completion(
    observed, mask: SensingOperator, obj: Objective, cfg: SolverConfig | None = None
) -> SolverReport:
    """Minimize ``obj(X)`` subject to ``X`` matching ``observed`` on the mask."""
    cfg = cfg or SolverConfig()
    observed = as_tensor(observed)
    if mask.kind != "mask":
        raise ValueError("completion needs a mask operator")
    if mask.shape != observed.shape:
        raise ValueError(f"mask shape {mask.shape} differs from tensor shape {observed.shape}")
    if mask.m == 0:
        raise ValueError("the mask observes no entries")
    b = mask.apply(observed)
    _check_finite(b)
    known = mask.mask_array()
    values = np.where(known, np.nan_to_num(observed), 0.0)

    def data_step(v):
        return np.where(known, values, v)

    return _admm(
        values.copy(),
        data_step,
        lambda x: float(np.linalg.norm(mask.apply(x) - b)),
        lambda x: objective_value(x, obj),
        obj,
        cfg,
        float(np.linalg.norm(b)),
    )


def solve_equality(
    op: SensingOperator, b, obj: Objective, cfg: SolverConfig | None = None
) -> SolverReport:
    """Minimize ``obj(X)`` subject to ``F(X) = b``."""
    cfg = cfg or SolverConfig()
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.size != op.m:
        raise ValueError(f"expected {op.m} measurements, got {b.size}")
    _check_finite(b)
    b_scale = max(1.0, float(np.linalg.norm(b)))

    if op.kind == "mask":
        known = op.mask_array()
        values = op.adjoint(b)

        def data_step(v):
            return np.where(known, values, v)
    else:
        a = op.matrix
        a_pinv = op.pinv()
        shape = op.shape

        def data_step(v):
            x = v.ravel(order="F")
            x = x - a_pinv @ (a @ x - b)
            return x.reshape(shape, order="F")

    x0 = data_step(np.zeros(op.shape))
    r0 = float(np.linalg.norm(op.apply(x0) - b))
    if r0 > 1e-6 * b_scale:
        raise InfeasibleSystemError(f"no tensor matches the measurements (residual {r0:.3e})")
    return _admm(
        x0,
        data_step,
        lambda x: float(np.linalg.norm(op.apply(x) - b)),
        lambda x: objective_value(x, obj),
        obj,
        cfg,
        float(np.linalg.norm(b)),
    )


def solve_noisy(
    op: SensingOperator, b, lam: float, obj: Objective, cfg: SolverConfig | None = None
) -> SolverReport:
    """Minimize ``obj(X) + (lam/2) ||F(X) - b||^2``.

    Convergence is declared when the relative change falls below
    ``tol_rel_change`` and the splitting's first-order residual is at most
    ``1e-6 * max(1, ||b||)``.
    """
    cfg = cfg or SolverConfig()
    if not lam > 0:
        raise ValueError("lam must be positive")
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.size != op.m:
        raise ValueError(f"expected {op.m} measurements, got {b.size}")
    _check_finite(b)
    shape = op.shape
    c = len(shape) * cfg.penalty
    rhs_data = lam * op.adjoint(b)

    if op.kind == "mask":
        weight = c + lam * op.mask_array()

        def data_step(v):
            return (c * v + rhs_data) / weight
    else:
        # (c I + lam A^T A)^{-1} via Woodbury on the m x m system
        a = op.matrix
        small = scipy.linalg.cho_factor(c * np.eye(op.m) + lam * (a @ a.T))
        rhs_vec = rhs_data.ravel(order="F")

        def data_step(v):
            r = c * v.ravel(order="F") + rhs_vec
            x = (r - lam * a.T @ scipy.linalg.cho_solve(small, a @ r)) / c
            return x.reshape(shape, order="F")

    def objective(x):
        return objective_value(x, obj) + 0.5 * lam * float(np.sum((op.apply(x) - b) ** 2))

    return _admm(
        np.zeros(shape),
        data_step,
        lambda x: float(np.linalg.norm(op.apply(x) - b)),
        objective,
        obj,
        cfg,
        float(np.linalg.norm(b)),
        need_stationarity=True,
    )
