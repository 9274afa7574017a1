import math

import numpy as np
import pytest
from scipy import integrate, optimize

from hdp.ensembles import (
    KINDS,
    EnsembleSpec,
    RngStream,
    equivalence_audit,
    estimate_psi1,
    estimate_psi2,
    isotropy_check,
    orlicz_estimate,
    sample_matrix,
    sample_vector,
)


def test_rademacher_support(rng):
    x = sample_vector(EnsembleSpec("rademacher", 3), rng)
    assert set(np.unique(x)) <= {-1.0, 1.0}


def test_sphere_radius(rng):
    assert np.linalg.norm(sample_vector(EnsembleSpec("sphere_sqrt_n", 4), rng)) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("kind", ["sphere_sqrt_n", "uniform_cube"])
def test_exact_squared_norm(rng, kind):
    A = sample_matrix(EnsembleSpec(kind, 9), 200, rng)
    np.testing.assert_allclose((A**2).sum(axis=1), 9.0, atol=1e-10)


def test_gaussian_mean_variance(rng):
    x = sample_matrix(EnsembleSpec("gaussian", 1), 10**6, rng).ravel()
    assert abs(x.mean()) <= 0.004
    assert abs(x.var() - 1) <= 0.01


def test_single_row_matches_vector():
    spec = EnsembleSpec("gaussian", 4)
    np.testing.assert_array_equal(
        sample_matrix(spec, 1, RngStream(3).generator())[0], sample_vector(spec, RngStream(3).generator())
    )


def test_gaussian_entries_distinct(rng):
    A = sample_matrix(EnsembleSpec("gaussian", 3), 5, rng)
    assert np.unique(A).size == 15


def test_rademacher_isotropy(rng):
    # typical deviation is about 2 sqrt(n/m) = 0.2
    A = sample_matrix(EnsembleSpec("rademacher", 10), 1000, rng)
    assert np.linalg.norm(A.T @ A / 1000 - np.eye(10), 2) <= 0.3


@pytest.mark.parametrize("kind", KINDS)
def test_isotropy_check(rng, kind):
    assert isotropy_check(EnsembleSpec(kind, 5), 10**5, rng) <= 0.1


def test_cube_second_moment_diagonal(rng):
    A = sample_matrix(EnsembleSpec("uniform_cube", 6), 7, rng)
    np.testing.assert_array_equal(np.diag(A.T @ A / 7), np.ones(6))


def test_isotropy_single_draw():
    x = sample_vector(EnsembleSpec("gaussian", 1), RngStream(5).generator())[0]
    assert isotropy_check(EnsembleSpec("gaussian", 1), 1, RngStream(5).generator()) == pytest.approx(abs(x * x - 1))


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec("cauchy", 3)
    with pytest.raises(ValueError):
        EnsembleSpec("gaussian", 0)


def test_stream_determinism():
    a = sample_matrix(EnsembleSpec("gaussian", 5), 10, RngStream(42, 7).generator())
    b = sample_matrix(EnsembleSpec("gaussian", 5), 10, RngStream(42, 7).generator())
    c = sample_matrix(EnsembleSpec("gaussian", 5), 10, RngStream(42, 8).generator())
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_children_independent():
    root = RngStream(1)
    x = root.child(0).generator().random(5)
    y = root.child(1).generator().random(5)
    assert not np.array_equal(x, y)
    np.testing.assert_array_equal(x, RngStream(1).child(0).generator().random(5))


# ---- Orlicz norms


def gaussian_psi2_oracle():
    # solve E exp(X^2/t^2) = 2 by quadrature, independent of the closed form
    def mgf(t):
        f = lambda x: math.exp(x * x / t**2 - x * x / 2) / math.sqrt(2 * math.pi)
        return integrate.quad(f, -np.inf, np.inf)[0] - 2.0

    return optimize.brentq(mgf, 1.5, 3.0)


def test_psi2_oracle_closed_form():
    assert gaussian_psi2_oracle() == pytest.approx(math.sqrt(8 / 3), rel=1e-8)


def test_psi_zero():
    assert estimate_psi2(np.zeros(200)) == 0.0
    assert estimate_psi1(np.zeros(200)) == 0.0


def test_psi_rademacher():
    x = np.tile([1.0, -1.0], 500)
    assert estimate_psi2(x) == pytest.approx(1 / math.sqrt(math.log(2)), rel=1e-9)
    assert estimate_psi1(x) == pytest.approx(1 / math.log(2), rel=1e-9)


def test_psi_gaussian(rng):
    x = rng.standard_normal(10**6)
    assert estimate_psi2(x) == pytest.approx(gaussian_psi2_oracle(), rel=0.1)
    assert estimate_psi1(x**2) == pytest.approx(8 / 3, rel=0.15)


def test_psi_requires_samples():
    with pytest.raises(ValueError):
        estimate_psi2(np.ones(10))


@pytest.mark.parametrize("alpha", [0.5, 2.0, 10.0, -3.0])
def test_psi2_scale_equivariance(rng, alpha):
    x = rng.standard_normal(5000)
    assert estimate_psi2(alpha * x) == pytest.approx(abs(alpha) * estimate_psi2(x), rel=1e-9)


@pytest.mark.parametrize("kind", ["gaussian", "rademacher"])
def test_psi1_psi2_square_relation(rng, kind):
    x = sample_matrix(EnsembleSpec(kind, 1), 10**6, rng).ravel()
    ratio = estimate_psi1(x**2) / estimate_psi2(x) ** 2
    assert 0.8 <= ratio <= 1.25


def test_orlicz_estimate_moments(rng):
    est = orlicz_estimate(rng.standard_normal(10**5))
    assert est.moment_params[2] == pytest.approx(1.0, rel=0.02)
    assert est.psi2 > 0 and est.psi1 > 0


# ---- equivalence audit


def test_audit_gaussian(rng):
    rep = equivalence_audit(rng.standard_normal(10**5))
    assert rep.passed
    assert all(0.1 <= r <= 10 for r in rep.ratios.values())


def test_audit_rademacher(rng):
    assert equivalence_audit(rng.choice([-1.0, 1.0], 10**5)).passed


def test_audit_exponential_drift(rng):
    rep = equivalence_audit(rng.exponential(size=10**5), "subgaussian")
    assert rep.moment_drift


def test_audit_gaussian_no_drift(rng):
    assert not equivalence_audit(rng.standard_normal(10**5)).moment_drift


def test_audit_needs_samples(rng):
    with pytest.raises(ValueError):
        equivalence_audit(rng.standard_normal(100))
