"""Recovery-guarantee constants and sampled certificate estimators.

None of the certificates here is a proof. The null-space and isometry
conditions quantify over whole subspaces and rank varieties, so every
estimator searches a finite, seeded sample (with local refinement) and reports
what it saw: ``violated`` means an explicit counterexample was found,
``holds-on-samples`` means none was, ``inconclusive`` means the check could
not say anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Literal, Sequence

import numpy as np

from .linalg import null_space_basis, singular_values, spectral_norm
from .multilinear import random_low_rank, truncate_hosvd
from .operators import SensingOperator
from .prox import tensor_trace_norm
from .tensor_core import from_vec, unfold, vec

Verdict = Literal["holds-on-samples", "violated", "inconclusive"]

# a sampled inequality counts as violated only beyond this margin
VIOLATION_TOL = 1e-10


@dataclass
class CertificateReport:
    kind: Literal["nsp", "nsp-augmented", "rip", "ssp"]
    estimate: float
    samples_used: int
    verdict: Verdict
    witness: np.ndarray | None = None
    seed: int | None = None
    details: dict = field(default_factory=dict)
    maximizer: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.witness is not None) != (self.verdict == "violated"):
            raise ValueError("a witness is attached exactly when the verdict is 'violated'")

    def to_kv(self) -> str:
        """Flat ``key=value`` block, one pair per line."""
        pairs = [
            ("kind", self.kind),
            ("estimate", f"{self.estimate:.17g}"),
            ("samples", str(self.samples_used)),
            ("verdict", self.verdict),
            ("seed", "" if self.seed is None else str(self.seed)),
        ]
        for key, value in self.details.items():
            pairs.append((key, f"{value:.17g}" if isinstance(value, float) else str(value)))
        return "\n".join(f"{k}={v}" for k, v in pairs) + "\n"


def _rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), (None if rng is None else int(rng))


# -- closed-form constants -----------------------------------------------------

def theta(delta: float) -> float:
    """``sqrt(4 (1 + 5d - 4d^2) / ((1 - d)(32 - 25d)))``.

    Bounds the head-to-tail ratio of mode singular values of any null-space
    element when the operator's isometry constant is ``delta``.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    return math.sqrt(4.0 * (1.0 + 5.0 * delta - 4.0 * delta**2) / ((1.0 - delta) * (32.0 - 25.0 * delta)))


def rip_threshold_plain() -> float:
    """Largest delta with ``theta(delta) < 1``: ``(77 - sqrt(1337)) / 82``."""
    return (77.0 - math.sqrt(1337.0)) / 82.0


def rip_threshold_augmented() -> float:
    return 0.4404


def alpha_lower_bound(delta: float, spectral_norm: float) -> float:
    """Smallest alpha with ``(1 + s/alpha) theta(delta) <= 1``, i.e. ``s theta/(1 - theta)``.

    Returns the bound for one mode; take the max over modes.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if spectral_norm < 0:
        raise ValueError("spectral norm must be nonnegative")
    t = theta(delta) if delta < 1 else math.inf
    # at the plain threshold theta is 1 up to rounding; the bound blows up there
    if t >= 1.0 - 1e-12:
        raise ValueError(f"theta({delta}) = {t} >= 1, no alpha suffices")
    return spectral_norm * (t / (1.0 - t))


def check_ssp_sufficient(
    m: int,
    delta_hat: float,
    ranks: Sequence[int],
    alpha: float,
    spectral_norms: Sequence[float],
) -> tuple[bool, ...]:
    """Per mode: ``m >= (2 + s_i/alpha)^2 * r_i * Delta``. ``alpha`` may be ``inf``."""
    if len(ranks) != len(spectral_norms):
        raise ValueError("need one spectral norm per mode")
    out = []
    for r, s in zip(ranks, spectral_norms):
        factor = 2.0 + (0.0 if math.isinf(alpha) else s / alpha)
        out.append(bool(m >= factor**2 * r * delta_hat))
    return tuple(out)


# -- null-space property -------------------------------------------------------

def _mode_spectra(h: np.ndarray) -> list[np.ndarray]:
    return [singular_values(unfold(h, n)) for n in range(h.ndim)]


def _head_tail(h: np.ndarray, ranks: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    spectra = _mode_spectra(h)
    head = np.array([s[:r].sum() for s, r in zip(spectra, ranks)])
    tail = np.array([s[r:].sum() for s, r in zip(spectra, ranks)])
    return head, tail


def nsp_margin(h, ranks: Sequence[int]) -> float:
    """Tail minus head mode singular-value mass; the plain condition needs it > 0."""
    head, tail = _head_tail(np.asarray(h, dtype=np.float64), ranks)
    return float(tail.sum() - head.sum())


def nsp_augmented_margin(h, ranks: Sequence[int], alpha: float, spectral_norms: Sequence[float]) -> float:
    """Tail minus ``sum_i (1 + s_i/alpha) * head_i``; the augmented condition needs it >= 0."""
    head, tail = _head_tail(np.asarray(h, dtype=np.float64), ranks)
    weights = 1.0 + np.asarray(spectral_norms, dtype=np.float64) / alpha
    return float(tail.sum() - weights @ head)


def _dense_matrix(op: SensingOperator) -> np.ndarray:
    return op.to_matrix()


def _check_rank_tuple(shape, ranks) -> tuple[int, ...]:
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(shape) or any(r < 0 or r > d for r, d in zip(ranks, shape)):
        raise ValueError(f"rank tuple {ranks} invalid for shape {shape}")
    return ranks


def _null_space_samples(
    basis: np.ndarray,
    shape: tuple[int, ...],
    ranks: tuple[int, ...],
    n_samples: int,
    rng: np.random.Generator,
    refine_steps: int,
) -> Iterator[np.ndarray]:
    """Unit-norm null-space tensors: alternately Gaussian, and low-rank-seeking.

    The low-rank-seeking samples start from a random rank-``ranks`` tensor and
    alternate projection onto the null space with HOSVD truncation, which is
    where violations of the rank-dependent conditions live.
    """
    dim = basis.shape[1]
    target = tuple(max(1, r) for r in ranks)
    for i in range(n_samples):
        if i % 2 == 0:
            h = basis @ rng.standard_normal(dim)
        else:
            start = vec(random_low_rank(shape, target, rng))
            h = basis @ (basis.T @ start)
            for _ in range(refine_steps):
                norm = np.linalg.norm(h)
                if norm == 0:
                    break
                t = vec(truncate_hosvd(from_vec(h / norm, shape), target))
                h = basis @ (basis.T @ t)
        norm = np.linalg.norm(h)
        if norm == 0:
            h = basis @ rng.standard_normal(dim)
            norm = np.linalg.norm(h)
        yield from_vec(h / norm, shape)


def _nsp_run(op, ranks, n_samples, rng, refine_steps, margin_fn, kind) -> CertificateReport:
    gen, seed = _rng(rng)
    if n_samples < 1:
        raise ValueError("need at least one sample")
    ranks = _check_rank_tuple(op.shape, ranks)
    basis = null_space_basis(_dense_matrix(op))
    if basis.shape[1] == 0:
        return CertificateReport(kind, math.inf, 0, "holds-on-samples", seed=seed,
                                 details={"null_dim": 0})
    worst, worst_h = math.inf, None
    for h in _null_space_samples(basis, op.shape, ranks, n_samples, gen, refine_steps):
        margin = margin_fn(h)
        if margin < worst:
            worst, worst_h = margin, h
    details = {"null_dim": int(basis.shape[1])}
    if worst < -VIOLATION_TOL:
        details["witness_norm"] = float(np.linalg.norm(vec(worst_h)))
        return CertificateReport(kind, worst, n_samples, "violated", witness=worst_h, seed=seed, details=details)
    verdict = "holds-on-samples" if worst > VIOLATION_TOL else "inconclusive"
    return CertificateReport(kind, worst, n_samples, verdict, seed=seed, details=details)


def check_nsp(
    op: SensingOperator,
    ranks: Sequence[int],
    n_samples: int = 1000,
    rng=None,
    refine_steps: int = 10,
) -> CertificateReport:
    """Search the null space for ``H`` whose top-``r_i`` mode singular values
    outweigh the rest. The estimate is the smallest margin seen on unit-norm
    samples.
    """
    ranks_t = tuple(ranks)
    return _nsp_run(op, ranks_t, n_samples, rng, refine_steps, lambda h: nsp_margin(h, ranks_t), "nsp")


def check_nsp_augmented(
    op: SensingOperator,
    ranks: Sequence[int],
    alpha: float,
    spectral_norms: Sequence[float],
    n_samples: int = 1000,
    rng=None,
    refine_steps: int = 10,
) -> CertificateReport:
    """Like :func:`check_nsp` with head mass weighted by ``1 + ||X0_(i)||_2 / alpha``.

    The same seed draws the same samples as :func:`check_nsp`, so the two
    reports are directly comparable.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    norms = tuple(float(s) for s in spectral_norms)
    if len(norms) != len(op.shape) or any(s < 0 for s in norms):
        raise ValueError("need one nonnegative spectral norm per mode")
    ranks_t = tuple(ranks)
    report = _nsp_run(op, ranks_t, n_samples, rng, refine_steps,
                      lambda h: nsp_augmented_margin(h, ranks_t, alpha, norms), "nsp-augmented")
    report.details["alpha"] = float(alpha)
    return report


# -- restricted isometry -----------------------------------------------------

def _distortion(a: np.ndarray, x: np.ndarray) -> float:
    """``||A x||^2 / ||x||^2 - 1`` (signed)."""
    ax = a @ x
    return float(ax @ ax / (x @ x) - 1.0)


def estimate_rip(
    op: SensingOperator,
    ranks: Sequence[int],
    n_samples: int = 200,
    refine_steps: int = 50,
    rng=None,
    warm_start: Sequence[np.ndarray] = (),
    threshold: float | None = None,
) -> CertificateReport:
    """Lower bound on the isometry constant over tensors of multilinear rank <= ``ranks``.

    Each random unit rank-``ranks`` sample is refined by projected gradient
    ascent on ``| ||F x||^2 - ||x||^2 |`` with step ``0.1 / ||F||_2^2``,
    truncating back to the rank set and renormalizing after every step. The
    estimate is the largest distortion met on any iterate.

    ``warm_start`` tensors are refined first; passing the maximizer of a
    lower-rank run makes estimates monotone in the rank tuple. With a
    ``threshold``, an estimate at or above it is a proven violation (the
    estimate is a lower bound); otherwise the verdict is ``holds-on-samples``.
    """
    gen, seed = _rng(rng)
    if n_samples < 1:
        raise ValueError("need at least one sample")
    shape = op.shape
    ranks = _check_rank_tuple(shape, ranks)
    if min(ranks) < 1:
        raise ValueError("ranks must be at least 1")
    a = _dense_matrix(op)
    gram = a.T @ a
    lip = spectral_norm(a) ** 2
    step = 0.1 / lip if lip > 0 else 0.0

    def project(x):
        t = truncate_hosvd(from_vec(x, shape), ranks)
        v = vec(t)
        norm = np.linalg.norm(v)
        return v / norm if norm > 0 else None

    best, best_x = -math.inf, None

    def refine(x):
        nonlocal best, best_x
        for k in range(refine_steps + 1):
            d = _distortion(a, x)
            if abs(d) > best:
                best, best_x = abs(d), x
            if k == refine_steps or step == 0.0:
                break
            y = x + step * math.copysign(1.0, d) * 2.0 * (gram @ x - x)
            y = project(y)
            if y is None:
                break
            x = y

    for w in warm_start:
        x = project(vec(np.asarray(w, dtype=np.float64)))
        if x is not None:
            refine(x)
    for _ in range(n_samples):
        refine(project(vec(random_low_rank(shape, ranks, gen))))

    estimate = max(best, 0.0)
    maximizer = from_vec(best_x, shape)
    details = {"ranks": " ".join(map(str, ranks))}
    if threshold is not None:
        details["threshold"] = float(threshold)
        if estimate >= threshold:
            return CertificateReport("rip", estimate, n_samples, "violated", witness=maximizer,
                                     seed=seed, details=details, maximizer=maximizer)
        return CertificateReport("rip", estimate, n_samples, "holds-on-samples", seed=seed,
                                 details=details, maximizer=maximizer)
    return CertificateReport("rip", estimate, n_samples, "inconclusive", seed=seed,
                             details=details, maximizer=maximizer)


def check_rip_uniqueness(
    op: SensingOperator,
    ranks: Sequence[int],
    n_samples: int = 200,
    rng=None,
    refine_steps: int = 50,
) -> CertificateReport:
    """Estimate the isometry constant at doubled ranks and compare with 1.

    Only an estimate >= 1 is conclusive (it proves the constant is >= 1 and
    uniqueness cannot be certified this way). An estimate < 1 is evidence, not
    proof, since the true constant may be larger.
    """
    ranks = _check_rank_tuple(op.shape, ranks)
    doubled = tuple(2 * r for r in ranks)
    if any(r > d for r, d in zip(doubled, op.shape)):
        raise ValueError(f"doubled ranks {doubled} exceed shape {op.shape}")
    report = estimate_rip(op, doubled, n_samples, refine_steps, rng, threshold=1.0)
    report.details["note"] = "lower-bound estimate; below 1 is evidence only"
    return report


# -- spherical section property ------------------------------------------------

def estimate_ssp(
    op: SensingOperator,
    n_samples: int = 1000,
    refine_steps: int = 10,
    rng=None,
) -> CertificateReport:
    """Smallest ``||H||_* / ||H||_F`` found over the null space, and ``Delta = m / ratio^2``.

    Optimistic: the true minimum ratio can be lower, so the true Delta can be
    larger than the reported one.
    """
    gen, seed = _rng(rng)
    if n_samples < 1:
        raise ValueError("need at least one sample")
    basis = null_space_basis(_dense_matrix(op))
    if basis.shape[1] == 0:
        return CertificateReport("ssp", math.inf, 0, "inconclusive", seed=seed,
                                 details={"null_dim": 0, "note": "trivial null space"})
    ones = (1,) * len(op.shape)
    best = math.inf
    best_h = None
    for h in _null_space_samples(basis, op.shape, ones, n_samples, gen, refine_steps):
        ratio = tensor_trace_norm(h)  # h has unit Frobenius norm
        if ratio < best:
            best, best_h = ratio, h
    delta_hat = op.m / best**2
    return CertificateReport("ssp", best, n_samples, "holds-on-samples", seed=seed,
                             details={"null_dim": int(basis.shape[1]), "delta_hat": delta_hat},
                             maximizer=best_h)
