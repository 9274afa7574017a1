import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hdp.bounds import (
    FAMILIES,
    BoundParams,
    TailBound,
    bernstein_bound,
    bernstein_bounded_bound,
    bound_audit,
    clopper_pearson_upper,
    empirical_tail,
    hoeffding_bound,
    matrix_bernstein_bound,
    matrix_bernstein_expectation,
    rademacher_sum_sampler,
    sign_pair_matrices,
    sign_pair_norm_sampler,
    sign_pair_variance,
)


def test_hoeffding_examples():
    p = BoundParams(psi2_norms=[1.0], c_const=1.0)
    assert hoeffding_bound(p, 0.0) == 1.0
    assert hoeffding_bound(p, 2.0) == pytest.approx(2 * math.exp(-4), rel=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 2.0, 7.5])
def test_hoeffding_homogeneous(alpha):
    p = BoundParams(psi2_norms=[1.0, 0.5, 2.0])
    q = BoundParams(psi2_norms=[alpha * v for v in p.psi2_norms])
    assert hoeffding_bound(q, 3.0 * alpha) == pytest.approx(hoeffding_bound(p, 3.0), rel=1e-12)


def test_bernstein_examples():
    p = BoundParams(psi1_norms=[1.0] * 4, c_const=1.0)
    assert bernstein_bound(p, 0.0) == 1.0
    assert bernstein_bound(p, 2.0) == pytest.approx(2 * math.exp(-1), rel=1e-12)
    assert bernstein_bound(p, 100.0) == pytest.approx(2 * math.exp(-100), rel=1e-12)


def test_bounded_bernstein_examples():
    p = BoundParams(sigma2=1.0, K=1.0, C_const=1.0 / 3.0)
    assert bernstein_bounded_bound(p, 3.0) == pytest.approx(2 * math.exp(-2.25), rel=1e-12)
    assert bernstein_bounded_bound(p, 0.0) == 1.0
    g = BoundParams(sigma2=2.0, K=0.0)
    assert bernstein_bounded_bound(g, 3.0) == pytest.approx(2 * math.exp(-9 / 4), rel=1e-12)


def test_matrix_bernstein_examples():
    p = BoundParams(sigma2=1.0, K=1.0, dim_n=2)
    assert matrix_bernstein_bound(p, 3.0) == pytest.approx(4 * math.exp(-2.25), rel=1e-12)
    assert matrix_bernstein_bound(p, 0.0) == 1.0


@pytest.mark.parametrize("sigma2,K", [(1.0, 1.0), (0.3, 2.0), (5.0, 0.0)])
def test_matrix_bernstein_scalar_case(sigma2, K):
    p = BoundParams(sigma2=sigma2, K=K, dim_n=1, C_const=1.0 / 3.0)
    for t in np.linspace(0, 20, 100):
        assert matrix_bernstein_bound(p, t) == bernstein_bounded_bound(p, t)


def test_matrix_bernstein_expectation_examples():
    assert matrix_bernstein_expectation(BoundParams(sigma2=0.0, K=0.0, dim_n=8)) == 0.0
    p = BoundParams(sigma2=1.0, K=1.0, dim_n=8)
    L = math.log(8)
    assert matrix_bernstein_expectation(p, C_const=1.0) == pytest.approx(math.sqrt(L) + L, rel=1e-12)
    assert matrix_bernstein_expectation(p, C_const=2.0) == pytest.approx(
        2 * matrix_bernstein_expectation(p, C_const=1.0), rel=1e-15
    )


def test_negative_t_rejected():
    with pytest.raises(ValueError):
        hoeffding_bound(BoundParams(psi2_norms=[1.0]), -1.0)


def test_invalid_params():
    with pytest.raises(ValueError):
        BoundParams(sigma2=-1.0)
    with pytest.raises(ValueError):
        TailBound("chernoff", BoundParams())


FAMILY_PARAMS = {
    "hoeffding": BoundParams(psi2_norms=[1.0, 2.0]),
    "bernstein": BoundParams(psi1_norms=[1.0, 0.5, 3.0]),
    "bernstein_bounded": BoundParams(sigma2=2.0, K=0.7),
    "matrix_bernstein": BoundParams(sigma2=2.0, K=0.7, dim_n=5),
}


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_monotone_and_clipped(family):
    tb = TailBound(family, FAMILY_PARAMS[family])
    vals = np.array([tb(t) for t in np.linspace(0, 30, 100)])
    assert np.all((vals >= 0) & (vals <= 1))
    assert np.all(np.diff(vals) <= 0)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0, 1e3), st.floats(0, 10), st.floats(0, 10), st.integers(1, 1000), st.floats(0, 100),
)
def test_clipping_property(sigma2, K, psi, n, t):
    params = BoundParams(psi2_norms=[psi + 1e-3], psi1_norms=[psi + 1e-3], sigma2=sigma2, K=K, dim_n=n)
    for fn in FAMILIES.values():
        assert 0.0 <= fn(params, t) <= 1.0


# ---- empirical tails


def test_clopper_pearson_matches_scipy():
    k, n = 7, 1000
    ref = stats.binomtest(k, n).proportion_ci(0.98, method="exact").high
    assert clopper_pearson_upper(k, n) == pytest.approx(ref, rel=1e-10)
    assert clopper_pearson_upper(n, n) == 1.0


def test_empirical_tail_constant_zero(rng):
    tail = empirical_tail(lambda g, s: np.zeros(s), [0.0, 0.5, 3.0], 1000, rng)
    np.testing.assert_array_equal(tail.p_hat, [1.0, 0.0, 0.0])


def test_empirical_tail_normal(rng):
    tail = empirical_tail(lambda g, s: g.standard_normal(s), [1.96], 10**5, rng)
    assert tail.p_hat[0] == pytest.approx(0.05, abs=0.003)
    assert tail.upper_conf[0] >= tail.p_hat[0]


def test_empirical_tail_trials_floor(rng):
    with pytest.raises(ValueError):
        empirical_tail(lambda g, s: np.zeros(s), [1.0], 10, rng)


def rademacher_hoeffding(N=20):
    return TailBound("hoeffding", BoundParams(psi2_norms=[1 / math.sqrt(math.log(2))] * N, c_const=0.25))


def test_hoeffding_audit_passes(rng):
    rep = bound_audit(rademacher_hoeffding(), rademacher_sum_sampler(20), np.arange(0, 6, 2) * math.sqrt(20), 10**5, rng)
    assert rep.passed


@pytest.mark.xfail(strict=True, reason="bound drops below the zero-count confidence floor 1 - 0.01**(1/trials)")
def test_hoeffding_audit_full_grid(rng):
    rep = bound_audit(rademacher_hoeffding(), rademacher_sum_sampler(20), np.arange(0, 12, 2) * math.sqrt(20), 10**5, rng)
    assert rep.passed


def test_hoeffding_dominates_exact_tail():
    # exact binomial tail of the Rademacher sum, no Monte-Carlo floor
    N, tb = 20, rademacher_hoeffding()
    for t in np.arange(0, 12, 2) * math.sqrt(N):
        k = math.ceil((N + t) / 2 - 1e-12)
        exact = min(1.0, 2 * stats.binom.sf(k - 1, N, 0.5))
        assert tb(t) >= exact


def test_audit_constant_zero_statistic(rng):
    tb = TailBound("bernstein_bounded", BoundParams(sigma2=1.0, K=1.0))
    assert bound_audit(tb, lambda g, s: np.zeros(s), np.linspace(0.1, 3, 10), 500, rng).passed


def test_audit_zero_bound_fails(rng):
    rep = bound_audit(lambda t: 0.0, lambda g, s: g.standard_normal(s), [1.0], 2000, rng)
    assert not rep.passed
    assert rep.violations == [1.0]


# ---- matrix Bernstein test instance


def test_sign_pair_variance(rng):
    n, N = 6, 30
    X = sign_pair_matrices(n, N, rng, 4000)
    S2 = np.einsum("tij,tjk->ik", X.reshape(-1, n, n), X.reshape(-1, n, n)) / 4000
    assert np.linalg.norm(S2, 2) == pytest.approx(sign_pair_variance(n, N), rel=0.05)


def test_sign_pair_norms_bounded(rng):
    z = sign_pair_norm_sampler(10, 50)(rng, 200)
    assert z.shape == (200,)
    assert np.all(z >= 0) and np.all(z <= 50)


def test_matrix_bernstein_audit_passes(rng):
    n, N = 10, 50
    sigma2 = sign_pair_variance(n, N)
    tb = TailBound("matrix_bernstein", BoundParams(sigma2=sigma2, K=1.0, dim_n=n))
    grid = np.linspace(0, 4 * math.sqrt(sigma2), 20)
    assert bound_audit(tb, sign_pair_norm_sampler(n, N), grid, 10**4, rng).passed
