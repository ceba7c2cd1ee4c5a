"""Matrix substrate: SVD, spectral norm, orthonormal sampling, null spaces.

The SVD itself is LAPACK's (via numpy); this module pins the contracts the
rest of the package relies on.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class SvdResult(NamedTuple):
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def _as_finite_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got an array with {a.ndim} axes")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def svd(a) -> SvdResult:
    """Thin SVD ``a = u @ diag(s) @ v.T`` with ``s`` descending."""
    a = _as_finite_matrix(a)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return SvdResult(u, s, vt.T)


def singular_values(a) -> np.ndarray:
    return np.linalg.svd(_as_finite_matrix(a), compute_uv=False)


def spectral_norm(a) -> float:
    s = singular_values(a)
    return float(s[0]) if s.size else 0.0


def nuclear_norm(a) -> float:
    return float(np.sum(singular_values(a)))


def default_rank_tol(a, s=None) -> float:
    """``max(rows, cols) * eps * sigma_1``."""
    if s is None:
        s = singular_values(a)
    top = float(s[0]) if s.size else 0.0
    return max(np.shape(a)) * np.finfo(np.float64).eps * top


def numerical_rank(a, tol: float | None = None) -> int:
    s = singular_values(a)
    if tol is None:
        tol = default_rank_tol(a, s)
    return int(np.count_nonzero(s > tol))


def random_orthonormal(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """A ``rows x cols`` matrix with orthonormal columns, Haar-distributed."""
    if cols > rows:
        raise ValueError(f"cannot fit {cols} orthonormal columns in dimension {rows}")
    if cols < 0:
        raise ValueError("column count must be nonnegative")
    g = rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(g)
    # sign fix makes the distribution Haar and the output a deterministic function of g
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def null_space_basis(a, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical null space of ``a``.

    ``tol`` is an absolute singular-value cutoff; the default is
    :func:`default_rank_tol`.
    """
    a = _as_finite_matrix(a)
    rows, cols = a.shape
    if rows == 0:
        return np.eye(cols)
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    if tol is None:
        tol = default_rank_tol(a, s)
    rank = int(np.count_nonzero(s > tol))
    return vt[rank:].T.copy()
