import math

import pytest

import selfsim as ss


def test_bracket():
    assert ss.bracket(2.0, 0.5) == pytest.approx(1.5)
    assert ss.bracket(3.7, 1.0) == 3.7
    with pytest.raises(ValueError):
        ss.bracket(-1.0, 0.5)


def test_barrier_exponent():
    mu = ss.FiniteMeasure.barrier(0.5)
    assert ss.laplace_exponent(mu, 1.0) == pytest.approx(1.0, rel=1e-9)
    assert ss.laplace_exponent(mu, 0.5) == pytest.approx(math.pi / 2 - 1, rel=1e-9)
    assert mu.integrate(lambda x: 1.0) == pytest.approx(1.0, rel=1e-9)
    m = ss.analytic_moments(mu, 0.5, 2)
    assert m[1] == pytest.approx(1.7519383938, rel=1e-9)
    assert m[2] == pytest.approx(3.5038767876, rel=1e-9)


def test_triple_round_trip():
    mu = ss.FiniteMeasure.barrier(0.5) + ss.FiniteMeasure.atom(0.2, 0.0)
    t = ss.levy_triple(mu)
    assert t.killing == pytest.approx(0.2)
    for lam in (0.5, 1.0, 3.0):
        assert t.laplace_exponent(lam) == pytest.approx(ss.laplace_exponent(mu, lam), rel=1e-7)


def test_kernels():
    q = ss.StepDistribution.finite([0.0, 0.5, 0.5])
    k = ss.barrier_kernel(q)
    assert k.row(2) == pytest.approx([0.5, 0.5, 0.0])
    assert ss.generating_function(k, 2, 1.0) == pytest.approx(0.25)
    c = ss.coalescent_kernel(ss.FiniteMeasure.beta_density(1.5, 1.0))
    assert c.prob(3, 1) == pytest.approx(1 / 3)
    p = ss.composition_kernel(ss.LevyMeasure.atom(1.0, math.log(2.0)))
    assert p.prob(2, 0) == pytest.approx(1 / 3)


def test_exact_dp():
    q = ss.StepDistribution.finite([0.0, 0.5, 0.5])
    k = ss.barrier_kernel(q)
    values = ss.absorption_moments(k, 2, 2)
    assert values[2][1] == pytest.approx(1.5)
    assert values[2][2] == pytest.approx(2.5)
    pmf, tail = ss.absorption_distribution(k, 2, 5)
    assert pmf[1] == pytest.approx(0.5)
    assert tail == 0.0
    with pytest.raises(ss.PreconditionError):
        ss.absorption_moments(ss.coalescent_kernel(ss.FiniteMeasure.beta_density(1.5, 1.0)), 5, 1)


def test_sampling_is_reproducible():
    k = ss.barrier_kernel(ss.StepDistribution.power_tail(0.5))
    a = ss.sample_path(k, 1000, seed=7, stream=3)
    b = ss.sample_path(k, 1000, seed=7, stream=3)
    assert a == b
    assert a[0] == 1000 and a[-1] == 0
    assert all(x >= y for x, y in zip(a, a[1:]))


def test_exponential_functional_mean():
    mu = ss.FiniteMeasure.barrier(0.5)
    xs = ss.sample_exponential_functional(mu, 0.5, 4000, seed=11)
    mean, se = ss.empirical_moment(xs)
    assert abs(mean - ss.analytic_moments(mu, 0.5, 1)[1]) <= 4 * se
