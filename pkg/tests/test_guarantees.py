import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tenrec.guarantees import (
    CertificateReport, VIOLATION_TOL, alpha_lower_bound, check_nsp, check_nsp_augmented,
    check_rip_uniqueness, check_ssp_sufficient, estimate_rip, estimate_ssp, nsp_margin,
    rip_threshold_augmented, rip_threshold_plain, theta,
)
from tenrec.linalg import random_orthonormal
from tenrec.multilinear import n_rank
from tenrec.operators import (
    dense_operator, gaussian_operator, mask_from_boolean, mask_from_linear,
)
from tenrec.prox import Objective, objective_value
from tenrec.solvers import SolverConfig, solve_equality
from tenrec.tensor_core import frobenius_norm

CUBE = (4, 4, 4)
ONES = (1, 1, 1)


# -- constants ---------------------------------------------------------------

def test_theta_examples():
    assert abs(theta(0.0) - math.sqrt(4 / 32)) <= 1e-10
    assert abs(theta(rip_threshold_plain()) - 1.0) <= 1e-9
    t = theta(0.4404)
    assert abs(1 / (1 / t - 1) - 9.9849) <= 1e-3
    for bad in (-0.1, 1.0, 2.0):
        with pytest.raises(ValueError):
            theta(bad)


def test_theta_monotone_on_grid():
    grid = np.linspace(0, 0.4931, 1000)
    values = np.array([theta(d) for d in grid])
    assert np.all(np.diff(values) > 0)


def test_thresholds():
    assert abs(rip_threshold_plain() - 0.49311) <= 1e-4
    assert rip_threshold_augmented() == 0.4404
    assert rip_threshold_plain() > rip_threshold_augmented()


def test_alpha_lower_bound_examples():
    assert abs(alpha_lower_bound(0.4404, 1.0) - 9.9849) <= 1e-3
    t0 = math.sqrt(4 / 32)
    for s in (0.5, 1.0, 7.0):
        assert abs(alpha_lower_bound(0.0, s) - s * t0 / (1 - t0)) <= 1e-12 * s
        assert abs(alpha_lower_bound(0.0, s) - 0.5469 * s) <= 1e-3 * s
    for delta in (rip_threshold_plain(), 0.5, 0.9):
        with pytest.raises(ValueError):
            alpha_lower_bound(delta, 1.0)
    with pytest.raises(ValueError):
        alpha_lower_bound(0.1, -1.0)


def test_alpha_lower_bound_grid():
    grid = np.linspace(0, 0.49, 1000)
    unit = np.array([alpha_lower_bound(d, 1.0) for d in grid])
    assert np.all(np.diff(unit) > 0)
    for s in (0.0, 0.25, 3.0):
        np.testing.assert_array_equal([alpha_lower_bound(d, s) for d in grid[::50]], s * unit[::50])


@given(st.floats(0.0, 0.49), st.floats(0.0, 1e3, allow_subnormal=False))
def test_alpha_lower_bound_closes_the_condition(delta, s):
    a = alpha_lower_bound(delta, s)
    if a > 0:
        assert (1 + s / a) * theta(delta) <= 1 + 1e-12


def test_check_ssp_sufficient():
    s = 2.0
    assert check_ssp_sufficient(5, 1.0, ONES, 10 * s, (s,) * 3) == (True,) * 3
    assert check_ssp_sufficient(4, 1.0, ONES, 10 * s, (s,) * 3) == (False,) * 3
    # alpha -> inf gives m >= 4 r Delta
    assert check_ssp_sufficient(4, 1.0, ONES, math.inf, (s,) * 3) == (True,) * 3
    assert check_ssp_sufficient(8, 1.0, (2, 1, 1), math.inf, (s,) * 3) == (True, True, True)
    assert check_ssp_sufficient(7, 1.0, (2, 1, 1), math.inf, (s,) * 3) == (False, True, True)
    with pytest.raises(ValueError):
        check_ssp_sufficient(5, 1.0, ONES, 1.0, (s,) * 2)


@given(st.integers(1, 4), st.floats(0.1, 50), st.floats(0.1, 10), st.floats(0.1, 10))
def test_ssp_required_m_linear_in_rank(r, delta_hat, alpha, s):
    need = (2 + s / alpha) ** 2 * r * delta_hat
    need2 = (2 + s / alpha) ** 2 * 2 * r * delta_hat
    assert abs(need2 - 2 * need) <= 1e-12 * need2
    m = math.ceil(need)
    assert check_ssp_sufficient(m, delta_hat, (r,), alpha, (s,)) == (True,)
    assert check_ssp_sufficient(math.ceil(need2), delta_hat, (2 * r,), alpha, (s,)) == (True,)


# -- null-space property -----------------------------------------------------

def assert_witness_valid(op, report, ranks):
    assert report.verdict == "violated" and report.witness is not None
    w = report.witness
    assert np.linalg.norm(op.apply(w)) <= 1e-8
    assert nsp_margin(w, ranks) <= -VIOLATION_TOL


def test_nsp_trivial_null_space(rng):
    q = random_orthonormal(8, 8, rng)
    rep = check_nsp(dense_operator((2, 2, 2), q), ONES, n_samples=10, rng=1)
    assert rep.verdict == "holds-on-samples" and rep.samples_used == 0


def test_nsp_empty_mask_violated():
    op = mask_from_linear(CUBE, [])
    rep = check_nsp(op, ONES, n_samples=20, rng=0)
    assert_witness_valid(op, rep, ONES)
    assert rep.estimate == pytest.approx(-3.0, abs=1e-9)
    assert n_rank(rep.witness) == ONES


def test_nsp_gaussian_holds():
    op = gaussian_operator(CUBE, 60, np.random.default_rng(0))
    rep = check_nsp(op, ONES, n_samples=500, rng=1)
    assert rep.verdict == "holds-on-samples" and rep.estimate > 0
    assert rep.witness is None and rep.samples_used == 500
    norms = (1.0, 1.0, 1.0)
    aug = check_nsp_augmented(op, ONES, 10 * max(norms), norms, n_samples=500, rng=1)
    assert aug.verdict == "holds-on-samples"


@pytest.mark.parametrize("seed", range(4))
def test_augmented_limit_agrees(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(5, 60))
    op = gaussian_operator(CUBE, m, rng)
    norms = tuple(rng.uniform(0.1, 3, 3))
    plain = check_nsp(op, ONES, n_samples=60, rng=seed)
    aug = check_nsp_augmented(op, ONES, 1e12, norms, n_samples=60, rng=seed)
    assert plain.verdict == aug.verdict
    assert abs(plain.estimate - aug.estimate) <= 1e-9
    # the augmented inequality is the stronger one
    finite = check_nsp_augmented(op, ONES, 1.0, norms, n_samples=60, rng=seed)
    assert finite.estimate <= plain.estimate + 1e-12
    if plain.verdict == "violated":
        assert_witness_valid(op, plain, ONES)
        assert finite.verdict == "violated"


def test_nsp_rejects_bad_ranks():
    op = gaussian_operator(CUBE, 10, np.random.default_rng(0))
    with pytest.raises(ValueError):
        check_nsp(op, (1, 1), n_samples=1)
    with pytest.raises(ValueError):
        check_nsp(op, (5, 1, 1), n_samples=1)
    with pytest.raises(ValueError):
        check_nsp_augmented(op, ONES, 0.0, (1, 1, 1), n_samples=1)


@pytest.mark.parametrize("op", [
    mask_from_linear(CUBE, []),
    mask_from_boolean(np.arange(64).reshape(CUBE) < 16),
])
def test_violated_witness_gives_indistinguishable_tensors(op):
    rep = check_nsp(op, ONES, n_samples=40, rng=2)
    assert_witness_valid(op, rep, ONES)
    w = rep.witness
    if n_rank(w, tol=1e-10) > ONES:
        pytest.skip("witness not exactly low rank")
    x1, x2 = w, -w
    b1, b2 = op.apply(x1), op.apply(x2)
    np.testing.assert_allclose(b1, b2, atol=1e-8)
    obj = Objective.trace_norm()
    assert abs(objective_value(x1, obj) - objective_value(x2, obj)) <= 1e-6
    if op.m:
        sol = solve_equality(op, b1, obj, SolverConfig(max_iters=50)).solution
        # neither candidate is singled out: both are feasible and the solver
        # finds something at least as good
        assert objective_value(sol, obj) <= objective_value(x1, obj) + 1e-6


# -- restricted isometry -----------------------------------------------------

@pytest.mark.parametrize("ranks", [(1, 1, 1), (2, 1, 2), (2, 2, 2)])
def test_rip_orthogonal_is_exact(ranks, rng):
    op = dense_operator((2, 2, 2), random_orthonormal(8, 8, rng))
    rep = estimate_rip(op, ranks, n_samples=20, refine_steps=10, rng=0)
    assert rep.estimate <= 1e-10


def test_rip_zero_operator():
    op = dense_operator((2, 2, 2), np.zeros((3, 8)))
    rep = estimate_rip(op, ONES, n_samples=5, rng=0)
    assert abs(rep.estimate - 1.0) <= 1e-12
    assert rep.verdict == "inconclusive"
    uniq = check_rip_uniqueness(op, ONES, n_samples=5, rng=0)
    assert uniq.verdict == "violated" and uniq.witness is not None


def test_rip_uniqueness_orthogonal(rng):
    op = dense_operator((2, 2, 2), random_orthonormal(8, 8, rng))
    rep = check_rip_uniqueness(op, ONES, n_samples=10, rng=0)
    assert rep.verdict == "holds-on-samples" and rep.estimate < 1
    with pytest.raises(ValueError):
        check_rip_uniqueness(op, (2, 1, 1), n_samples=1)


def test_rip_uniqueness_gaussian_m50():
    op = gaussian_operator(CUBE, 50, np.random.default_rng(0))
    rep = check_rip_uniqueness(op, ONES, rng=0)
    assert rep.estimate < 1


def test_rip_uniqueness_gaussian_m200():
    op = gaussian_operator(CUBE, 200, np.random.default_rng(0))
    rep = check_rip_uniqueness(op, ONES, rng=0)
    assert rep.estimate < 1 and rep.verdict == "holds-on-samples"


def test_rip_estimate_is_a_witnessed_lower_bound():
    op = gaussian_operator(CUBE, 30, np.random.default_rng(4))
    rep = estimate_rip(op, (2, 1, 2), n_samples=20, rng=1)
    x = rep.maximizer
    assert all(r <= c for r, c in zip(n_rank(x), (2, 1, 2)))
    dist = abs(np.sum(op.apply(x) ** 2) / frobenius_norm(x) ** 2 - 1)
    assert abs(dist - rep.estimate) <= 1e-9
    assert rep.estimate >= 0


def test_rip_monotone_in_ranks():
    op = gaussian_operator(CUBE, 30, np.random.default_rng(5))
    chain = [(1, 1, 1), (2, 1, 1), (2, 2, 1), (2, 2, 2), (3, 2, 2), (4, 4, 4)]
    prev = None
    for ranks in chain:
        warm = () if prev is None else (prev.maximizer,)
        rep = estimate_rip(op, ranks, n_samples=10, refine_steps=20, rng=7, warm_start=warm)
        if prev is not None:
            assert rep.estimate >= prev.estimate - 1e-12
        prev = rep


def test_rip_threshold_verdicts():
    op = gaussian_operator(CUBE, 30, np.random.default_rng(5))
    rep = estimate_rip(op, ONES, n_samples=10, rng=0)
    above = estimate_rip(op, ONES, n_samples=10, rng=0, threshold=rep.estimate / 2)
    below = estimate_rip(op, ONES, n_samples=10, rng=0, threshold=rep.estimate * 2)
    assert above.verdict == "violated" and below.verdict == "holds-on-samples"


# -- spherical section ---------------------------------------------------------

def test_ssp_trivial(rng):
    op = dense_operator((2, 2, 2), random_orthonormal(8, 8, rng))
    assert estimate_ssp(op, n_samples=5, rng=0).verdict == "inconclusive"


@pytest.mark.parametrize("m", [5, 40, 63])
def test_ssp_ratio_at_least_one(m):
    op = gaussian_operator(CUBE, m, np.random.default_rng(m))
    rep = estimate_ssp(op, n_samples=100, rng=0)
    assert rep.estimate >= 1 - 1e-9
    assert rep.details["delta_hat"] == pytest.approx(m / rep.estimate**2)


def test_ssp_empty_mask_hits_rank_one():
    op = mask_from_linear(CUBE, [])
    rep = estimate_ssp(op, n_samples=10, rng=0)
    assert rep.estimate == pytest.approx(1.0, abs=1e-9)


@pytest.mark.slow
def test_ssp_stable_across_seeds():
    op = gaussian_operator(CUBE, 40, np.random.default_rng(0))
    values = [estimate_ssp(op, n_samples=2000, rng=s).details["delta_hat"] for s in range(5)]
    assert max(values) <= 1.1 * min(values)


# -- reports -------------------------------------------------------------------

def test_report_contract():
    with pytest.raises(ValueError):
        CertificateReport("nsp", -1.0, 3, "violated")
    with pytest.raises(ValueError):
        CertificateReport("nsp", 1.0, 3, "holds-on-samples", witness=np.zeros(2))
    rep = check_nsp(mask_from_linear((2, 2, 2), []), ONES, n_samples=4, rng=9)
    kv = dict(line.split("=", 1) for line in rep.to_kv().splitlines())
    assert kv["kind"] == "nsp" and kv["verdict"] == "violated" and kv["seed"] == "9"
    assert kv["samples"] == "4" and float(kv["estimate"]) == rep.estimate


def test_seeded_runs_reproduce():
    op = gaussian_operator(CUBE, 20, np.random.default_rng(1))
    a, b = check_nsp(op, ONES, n_samples=30, rng=4), check_nsp(op, ONES, n_samples=30, rng=4)
    assert a.estimate == b.estimate and a.verdict == b.verdict
    r1 = estimate_rip(op, ONES, n_samples=5, rng=4)
    r2 = estimate_rip(op, ONES, n_samples=5, rng=4)
    assert r1.estimate == r2.estimate
