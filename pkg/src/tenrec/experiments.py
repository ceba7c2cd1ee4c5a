"""Seeded completion/recovery experiments and their CSV output.

Config files are flat ``key = value`` text; list-valued keys are repeated or
space-separated, ``#`` starts a comment. Example::

    shape = 6 6 6
    ranks = 1 1 1
    operator = mask
    p = 0.6
    objective = trace-norm
    objective = augmented 10 fro
    trials = 10
    seed = 0
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .linalg import spectral_norm
from .multilinear import random_low_rank
from .operators import SensingOperator, gaussian_operator, random_mask
from .prox import Objective
from .solvers import SolverConfig, SolverReport, solve_completion, solve_equality
from .tensor_core import check_shape, frobenius_norm, unfold

SCHEMA_VERSION = 1
CURVE_COLUMNS = [
    "schema", "trial", "objective", "alpha_multiple", "alpha_scale", "alpha",
    "iteration", "objective_value", "feasibility", "relative_error",
]


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("\n".join(problems))


@dataclass(frozen=True)
class ObjectiveSpec:
    """An objective whose alpha is a multiple of a property of the ground truth.

    ``scale`` is ``"fro"`` (``||X0||_F``), ``"spec"`` (``max_i ||X0_(i)||_2``)
    or ``"abs"`` (the multiple is alpha itself).
    """

    kind: Literal["trace-norm", "augmented"] = "trace-norm"
    multiple: float | None = None
    scale: Literal["fro", "spec", "abs"] | None = None

    @classmethod
    def parse(cls, text: str) -> "ObjectiveSpec":
        parts = text.replace(":", " ").split()
        if parts == ["trace-norm"]:
            return cls()
        if parts and parts[0] == "augmented" and len(parts) in (2, 3):
            scale = parts[2] if len(parts) == 3 else "abs"
            if scale not in ("fro", "spec", "abs"):
                raise ValueError(f"unknown alpha scale {scale!r}")
            multiple = float(parts[1])
            if not multiple > 0:
                raise ValueError("alpha multiple must be positive")
            return cls("augmented", multiple, scale)
        raise ValueError(f"cannot parse objective {text!r}")

    def resolve(self, x0: np.ndarray) -> Objective:
        if self.kind == "trace-norm":
            return Objective.trace_norm()
        return Objective.augmented(self.multiple * alpha_scale(x0, self.scale))

    def label(self) -> str:
        return self.kind


def alpha_scale(x0, scale: str) -> float:
    if scale == "fro":
        return frobenius_norm(x0)
    if scale == "spec":
        return max_mode_spectral_norm(x0)
    return 1.0


def max_mode_spectral_norm(x0) -> float:
    """``max_i ||X0_(i)||_2``."""
    return max(spectral_norm(unfold(x0, n)) for n in range(np.ndim(x0)))


def data_scaled_penalty(b, factor: float = 0.5) -> float:
    """ADMM penalty ``factor / rms(b)``, which makes iterates scale-free."""
    rms = float(np.sqrt(np.mean(np.square(b)))) if np.size(b) else 0.0
    return factor / rms if rms > 0 else factor


@dataclass
class ExperimentConfig:
    shape: tuple[int, ...]
    ranks: tuple[int, ...]
    operator: Literal["mask", "gaussian"] = "mask"
    p: float | None = None
    m: int | None = None
    objectives: list[ObjectiveSpec] = field(default_factory=lambda: [ObjectiveSpec()])
    max_iters: int = 500
    tol_rel_change: float = 1e-8
    tol_feas: float = 1e-9
    penalty: float = 0.5
    penalty_mode: Literal["data", "absolute"] = "data"
    relaxation: float = 1.0
    seed: int = 0
    trials: int = 1
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        self.shape = check_shape(self.shape)
        if len(self.ranks) != len(self.shape) or any(not 1 <= r <= d for r, d in zip(self.ranks, self.shape)):
            raise ValueError(f"ranks {self.ranks} invalid for shape {self.shape}")
        if not self.objectives:
            raise ValueError("at least one objective is required")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.operator == "mask":
            if self.p is None or not 0 < self.p <= 1:
                raise ValueError("mask experiments need 0 < p <= 1")
        elif self.operator == "gaussian":
            if self.m is None or self.m < 1:
                raise ValueError("gaussian experiments need m >= 1")
        else:
            raise ValueError(f"unknown operator {self.operator!r}")
        if self.penalty_mode not in ("data", "absolute"):
            raise ValueError(f"unknown penalty mode {self.penalty_mode!r}")


_SCALARS = {
    "operator": str, "p": float, "m": int, "max_iters": int, "tol_rel_change": float,
    "tol_feas": float, "penalty": float, "penalty_mode": str, "relaxation": float,
    "seed": int, "trials": int, "workers": int, "output": str,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the key=value format; all problems are reported with line numbers."""
    values: dict = {}
    problems: list[str] = []
    objectives: list[ObjectiveSpec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected key = value")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in ("shape", "ranks"):
                values[key] = tuple(int(v) for v in value.split())
            elif key == "objective":
                objectives.append(ObjectiveSpec.parse(value))
            elif key in _SCALARS:
                if key in values:
                    raise ValueError(f"duplicate key {key!r}")
                values[key] = _SCALARS[key](value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            problems.append(f"line {lineno}: {exc}")
    for key in ("shape", "ranks"):
        if key not in values:
            problems.append(f"missing required key {key!r}")
    if problems:
        raise ConfigError(problems)
    if objectives:
        values["objectives"] = objectives
    try:
        return ExperimentConfig(**values)
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None


@dataclass
class TrialResult:
    trial: int
    spec: ObjectiveSpec
    alpha: float | None
    report: SolverReport


def make_instance(cfg: ExperimentConfig, trial: int) -> tuple[np.ndarray, SensingOperator]:
    rng = np.random.default_rng([cfg.seed, trial])
    x0 = random_low_rank(cfg.shape, cfg.ranks, rng)
    if cfg.operator == "mask":
        op = random_mask(cfg.shape, cfg.p, rng)
    else:
        op = gaussian_operator(cfg.shape, cfg.m, rng)
    return x0, op


def run_trial(cfg: ExperimentConfig, trial: int) -> list[TrialResult]:
    x0, op = make_instance(cfg, trial)
    b = op.apply(x0)
    rho = data_scaled_penalty(b, cfg.penalty) if cfg.penalty_mode == "data" else cfg.penalty
    solver_cfg = SolverConfig(
        max_iters=cfg.max_iters, tol_rel_change=cfg.tol_rel_change, tol_feas=cfg.tol_feas,
        penalty=rho, relaxation=cfg.relaxation, record_history=True, reference_solution=x0,
    )
    out = []
    for spec in cfg.objectives:
        obj = spec.resolve(x0)
        if op.kind == "mask":
            observed = np.where(op.mask_array(), x0, 0.0)
            report = solve_completion(observed, op, obj, solver_cfg)
        else:
            report = solve_equality(op, b, obj, solver_cfg)
        out.append(TrialResult(trial, spec, obj.alpha, report))
    return out


def run_experiment(cfg: ExperimentConfig) -> list[TrialResult]:
    """Run every trial; results are ordered by trial index, then objective."""
    trials = range(cfg.trials)
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            batches = list(pool.map(run_trial, [cfg] * cfg.trials, trials))
    else:
        batches = [run_trial(cfg, t) for t in trials]
    return [r for batch in batches for r in batch]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _curve_rows(result: TrialResult, trial_label) -> list[list[str]]:
    spec = result.spec
    rows = []
    for h in result.report.history:
        rows.append([
            str(SCHEMA_VERSION), str(trial_label), spec.label(), _fmt(spec.multiple), spec.scale or "",
            _fmt(result.alpha), str(h.iteration), _fmt(h.objective), _fmt(h.feasibility),
            _fmt(h.relative_error),
        ])
    return rows


def _aggregate_rows(results: Sequence[TrialResult]) -> list[list[str]]:
    """Mean and median of final values per objective, in the curve columns."""
    groups: dict[ObjectiveSpec, list[TrialResult]] = {}
    for r in results:
        groups.setdefault(r.spec, []).append(r)
    rows = []
    for spec, group in groups.items():
        finals = np.array([
            [r.report.iterations_used, r.report.history[-1].objective,
             r.report.history[-1].feasibility, r.report.history[-1].relative_error]
            for r in group
        ], dtype=float)
        alphas = [r.alpha for r in group]
        alpha = None if alphas[0] is None else float(np.mean(alphas))
        for name, stat in (("mean", np.mean), ("median", np.median)):
            agg = stat(finals, axis=0)
            rows.append([
                str(SCHEMA_VERSION), name, spec.label(), _fmt(spec.multiple), spec.scale or "",
                _fmt(alpha), _fmt(float(agg[0])), _fmt(float(agg[1])), _fmt(float(agg[2])), _fmt(float(agg[3])),
            ])
    return rows


def results_to_csv(results: Sequence[TrialResult], aggregate: bool = True) -> str:
    """Long-form CSV: one row per iteration per (trial, objective).

    With more than one trial, ``mean`` and ``median`` rows of the final values
    (trial column holds the statistic name) follow the curves.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for r in results:
        writer.writerows(_curve_rows(r, r.trial))
    if aggregate and len({r.trial for r in results}) > 1:
        writer.writerows(_aggregate_rows(results))
    return buf.getvalue()

