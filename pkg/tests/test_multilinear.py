import numpy as np
import pytest

from tenrec.linalg import numerical_rank
from tenrec.multilinear import hosvd, n_rank, random_low_rank, rank_leq, truncate_hosvd
from tenrec.tensor_core import frobenius_norm, unfold


def _slices_gram(core, n):
    m = unfold(core, n)
    return m @ m.T


def check_hosvd(t):
    f = hosvd(t)
    norm = frobenius_norm(t)
    assert frobenius_norm(f.reconstruct() - t) <= 1e-10 * max(norm, 1e-300) + (0 if norm else 1e-300)
    core_sq = frobenius_norm(f.core) ** 2
    for n in range(t.ndim):
        u = f.factors[n]
        assert u.shape == (t.shape[n], t.shape[n])
        assert np.linalg.norm(u.T @ u - np.eye(t.shape[n])) <= 1e-12
        g = _slices_gram(f.core, n)
        off = g - np.diag(np.diag(g))
        assert np.max(np.abs(off), initial=0.0) <= 1e-10 * max(core_sq, 1e-300)
        sig = f.mode_singular_values[n]
        assert np.all(np.diff(sig) <= 0)
        assert abs(np.sum(sig**2) - norm**2) <= 1e-9 * max(norm**2, 1e-300)
        s = np.linalg.svd(unfold(t, n), compute_uv=False)
        padded = np.zeros(t.shape[n])
        padded[: len(s)] = s
        np.testing.assert_allclose(sig, padded, atol=1e-10 * max(norm, 1.0))
        np.testing.assert_allclose(f.slice_norms(n), sig, atol=1e-10 * max(norm, 1.0))
    return f


def test_hosvd_zero_tensor():
    f = hosvd(np.zeros((2, 3, 2)))
    assert frobenius_norm(f.core) == 0
    assert all(np.all(s == 0) for s in f.mode_singular_values)


def test_hosvd_outer_product_of_unit_vectors(rng):
    vs = [v / np.linalg.norm(v) for v in (rng.standard_normal(d) for d in (3, 4, 2))]
    t = np.einsum("i,j,k->ijk", *vs)
    f = check_hosvd(t)
    for sig in f.mode_singular_values:
        assert sig[0] == pytest.approx(1.0, abs=1e-12)
        assert np.all(sig[1:] <= 1e-12)


def test_hosvd_random(rng):
    check_hosvd(rng.standard_normal((4, 5, 3)))


def test_hosvd_degenerate_modes(rng):
    f = check_hosvd(rng.standard_normal((1, 4, 1)))
    assert f.factors[0].shape == (1, 1) and abs(f.factors[0][0, 0]) == 1


def test_n_rank(rng):
    assert n_rank(np.einsum("i,j,k->ijk", [1.0, 2], [3.0, 1, 1], [1.0, -1])) == (1, 1, 1)
    assert n_rank(np.zeros((3, 3, 3))) == (0, 0, 0)
    assert n_rank(random_low_rank((5, 6, 4), (2, 3, 2), rng)) == (2, 3, 2)


def test_n_rank_agrees_with_unfolding_rank_and_core_slices(rng):
    """Rank from the last nonzero core slice equals the unfolding's matrix rank."""
    for i in range(200):
        order = int(rng.integers(2, 5))
        shape = tuple(int(d) for d in rng.integers(1, 6, size=order))
        if i % 2:
            ranks = tuple(int(rng.integers(1, d + 1)) for d in shape)
            t = random_low_rank(shape, ranks, rng)
        else:
            t = rng.standard_normal(shape)
        ranks = n_rank(t)
        f = hosvd(t)
        for n in range(order):
            u = unfold(t, n)
            s = np.linalg.svd(u, compute_uv=False)
            assert ranks[n] == numerical_rank(u, 1e-8 * s[0])
            sig = f.mode_singular_values[n]
            assert ranks[n] == int(np.count_nonzero(sig > 1e-8 * sig[0]))


def test_rank_subadditivity(rng):
    shape = (5, 5, 4)
    for _ in range(50):
        ra = tuple(int(rng.integers(1, 3)) for _ in shape)
        rb = tuple(int(rng.integers(1, 3)) for _ in shape)
        a = random_low_rank(shape, ra, rng)
        b = random_low_rank(shape, rb, rng)
        bound = tuple(min(x + y, d) for x, y, d in zip(ra, rb, shape))
        assert rank_leq(n_rank(a + b), bound)


def test_truncate_hosvd(rng):
    t = rng.standard_normal((3, 4, 2))
    assert frobenius_norm(truncate_hosvd(t, t.shape) - t) <= 1e-10 * frobenius_norm(t)
    r1 = random_low_rank((3, 4, 2), (1, 1, 1), rng)
    assert frobenius_norm(truncate_hosvd(r1, (1, 1, 1)) - r1) <= 1e-10 * frobenius_norm(r1)
    with pytest.raises(ValueError):
        truncate_hosvd(t, (4, 1, 1))


def test_truncation_error_bound(rng):
    for _ in range(50):
        t = rng.standard_normal((4, 3, 5))
        r = tuple(int(rng.integers(1, d + 1)) for d in t.shape)
        approx = truncate_hosvd(t, r)
        assert rank_leq(n_rank(approx), r)
        sig = hosvd(t).mode_singular_values
        bound = np.sqrt(sum(np.sum(s[k:] ** 2) for s, k in zip(sig, r)))
        assert frobenius_norm(t - approx) <= bound + 1e-12


def test_random_low_rank(rng):
    assert n_rank(random_low_rank((4, 4, 4), (1, 1, 1), rng)) == (1, 1, 1)
    assert n_rank(random_low_rank((3, 4, 2), (3, 4, 2), rng)) == (3, 4, 2)
    a = random_low_rank((3, 3, 3), (2, 2, 2), np.random.default_rng(9))
    b = random_low_rank((3, 3, 3), (2, 2, 2), np.random.default_rng(9))
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        random_low_rank((3, 3), (0, 1), rng)
    with pytest.raises(ValueError):
        random_low_rank((3, 3), (4, 1), rng)
