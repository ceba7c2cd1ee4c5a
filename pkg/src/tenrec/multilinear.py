"""Higher-order SVD, multilinear ranks, HOSVD truncation, low-rank sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import random_orthonormal, singular_values
from .tensor_core import as_tensor, check_shape, mode_n_product, multi_mode_product, unfold

DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class Hosvd:
    """``t = core x_1 U1 x_2 U2 ... x_N UN`` with square orthogonal factors.

    ``mode_singular_values[n]`` holds the singular values of the mode-n
    unfolding, zero-padded to length ``I_n``. They equal the Frobenius norms
    of the core slices with the n-th index fixed (see :meth:`slice_norms`) up
    to rounding, but unlike those are exactly nonincreasing.
    """

    core: np.ndarray
    factors: tuple[np.ndarray, ...]
    mode_singular_values: tuple[np.ndarray, ...]

    def reconstruct(self) -> np.ndarray:
        return multi_mode_product(self.core, self.factors)

    def slice_norms(self, n: int) -> np.ndarray:
        axes = tuple(k for k in range(self.core.ndim) if k != n)
        return np.sqrt(np.sum(self.core**2, axis=axes)) if axes else np.abs(self.core)


def hosvd(t) -> Hosvd:
    t = as_tensor(t)
    factors, sigmas = [], []
    for n in range(t.ndim):
        # full left basis so the factor is square even when I_n > prod(other dims)
        u, s, _ = np.linalg.svd(unfold(t, n), full_matrices=True)
        factors.append(u)
        sigmas.append(np.concatenate([s, np.zeros(t.shape[n] - len(s))]))
    core = multi_mode_product(t, factors, transpose=True)
    return Hosvd(core, tuple(factors), tuple(sigmas))


def n_rank(t, tol: float = DEFAULT_RANK_TOL) -> tuple[int, ...]:
    """Multilinear rank: per mode, count of singular values above ``tol * sigma_1``."""
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    t = as_tensor(t)
    ranks = []
    for n in range(t.ndim):
        s = singular_values(unfold(t, n))
        ranks.append(int(np.count_nonzero(s > tol * s[0])) if s[0] > 0 else 0)
    return tuple(ranks)


def _check_ranks(shape: Sequence[int], ranks: Sequence[int], lower: int) -> tuple[int, ...]:
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(shape):
        raise ValueError(f"rank tuple {ranks} has wrong length for shape {tuple(shape)}")
    for r, d in zip(ranks, shape):
        if r < lower or r > d:
            raise ValueError(f"rank tuple {ranks} invalid for shape {tuple(shape)}")
    return ranks


def rank_leq(a: Sequence[int], b: Sequence[int]) -> bool:
    """The componentwise partial order on rank tuples."""
    return len(a) == len(b) and all(x <= y for x, y in zip(a, b))


def truncate_hosvd(t, ranks: Sequence[int]) -> np.ndarray:
    """Zero the core slices beyond ``ranks[n]`` in each mode and reconstruct."""
    t = as_tensor(t)
    ranks = _check_ranks(t.shape, ranks, lower=0)
    out = t
    for n, r in enumerate(ranks):
        if r == t.shape[n]:
            continue
        u, _, _ = np.linalg.svd(unfold(t, n), full_matrices=False)
        u = u[:, :r]
        out = mode_n_product(out, u @ u.T, n)
    return out


def random_low_rank(shape: Sequence[int], ranks: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Gaussian core of shape ``ranks`` times Haar orthonormal factors."""
    shape = check_shape(shape)
    ranks = _check_ranks(shape, ranks, lower=1)
    core = rng.standard_normal(ranks)
    factors = [random_orthonormal(d, r, rng) for d, r in zip(shape, ranks)]
    return multi_mode_product(core, factors)
