"""Pathwise integrals, cylindrical characteristics, empirical CF."""

import math

import numpy as np
import pytest
import scipy.integrate as spi

from levyfield import Region, SamplerConfig, interval, preset, sample_field
from levyfield.funcs import (GaussianFunction, IndicatorFunction,
                             PolynomialDecay, ProductBump, SimpleFunction,
                             SumFunction)
from levyfield.integrate import (NotIntegrableError, cylindrical_action,
                                 cylindrical_characteristics, empirical_cf,
                                 integrate, integrate_simple)

WIN = Region.from_intervals([(0.0, 1.0)])


def realization(chars, seed, **kw):
    kw.setdefault("window", WIN)
    kw.setdefault("eps", 0.0)
    return sample_field(chars, SamplerConfig(seed=seed, **kw))


def test_integrate_simple_is_the_defining_sum():
    real = realization(preset("impulsive", rate=30.0), seed=11)
    a = Region.from_intervals([(0.0, 0.4)])
    b = Region.from_intervals([(0.6, 1.0)])
    f = SimpleFunction(((2.0, a), (-1.5, b)))
    got = integrate_simple(real, f, 0.7)
    want = 2.0 * real.evaluate(0.7, a) - 1.5 * real.evaluate(0.7, b)
    assert got == want


def test_integrate_indicator_matches_set_evaluation():
    # asymmetric stable: exercises drift, jump sum and compensator together
    chars = preset("balan-stable", alpha=1.5, p=0.7, q=0.3)
    real = realization(chars, seed=3, eps=1e-2)
    a = Region.from_intervals([(0.1, 0.8)])
    res = integrate(real, IndicatorFunction(a), 1.0)
    assert res.value == pytest.approx(real.evaluate(1.0, a), rel=1e-10)
    assert float(res) == res.value


def test_integrate_is_additive_over_disjoint_supports():
    chars = preset("balan-stable", alpha=1.5, p=0.5, q=0.5)
    real = realization(chars, seed=8, eps=1e-2,
                       small_jump_mode="gaussian-substitute")
    b1 = ProductBump(center=(0.25,), radius=(0.2,))
    b2 = ProductBump(center=(0.75,), radius=(0.2,))
    both = SumFunction((b1, b2))
    total = integrate(real, both, 1.0)
    parts = integrate(real, b1, 1.0).value + integrate(real, b2, 1.0).value
    assert total.value == pytest.approx(parts, rel=1e-10, abs=1e-12)


def test_integrate_splits_across_regions():
    # finite-activity pure-jump: region additivity is a finite re-grouping
    real = realization(preset("impulsive", rate=40.0), seed=21)
    f = GaussianFunction(center=(0.5,), scale=0.3)
    left = Region.from_intervals([(0.0, 0.5)])
    right = Region.from_intervals([(0.5, 1.0)])
    whole = integrate(real, f, 1.0).value
    split = integrate(real, f, 1.0, region=left).value \
        + integrate(real, f, 1.0, region=right).value
    assert whole == pytest.approx(split, rel=1e-12, abs=1e-14)


def test_membership_check_blocks_slowly_decaying_integrand():
    chars = preset("balan-stable", alpha=0.8)
    real = realization(chars, seed=5, eps=1e-2)
    f = PolynomialDecay(r=0.3, dim=1)
    with pytest.raises(NotIntegrableError):
        integrate(real, f, 1.0, check_membership=True)
    # without the gate the pathwise sum itself is still a finite number
    assert np.isfinite(integrate(real, f, 1.0).value)


def test_cylindrical_characteristics_gaussian_quadratic_form():
    chars = preset("gaussian-white-noise")
    f = GaussianFunction(center=(0.3,), scale=0.2)
    cyl = cylindrical_characteristics(chars, f)
    # <Qf, f> = int f(x)^2 dx = s * sqrt(pi)
    assert cyl.qf == pytest.approx(0.2 * math.sqrt(math.pi), rel=1e-8)
    assert cyl.a == 0.0
    assert cyl.pushforward.compact_mass() == 0.0


def test_cylindrical_pushforward_of_simple_function():
    chars = preset("impulsive", rate=20.0)
    a = Region.from_intervals([(0.2, 0.5)])
    cyl = cylindrical_characteristics(chars, SimpleFunction(((2.0, a),)))
    push = cyl.pushforward
    # image measure: mass 0.3 * 20 on jump values {-2, +2}
    assert push.tail_mass(1.5) == pytest.approx(6.0, rel=1e-12)
    assert push.tail_mass(2.5) == 0.0
    assert push.compact_mass() == pytest.approx(6.0, rel=1e-12)
    assert cyl.qf == 0.0
    assert abs(cyl.a) < 1e-12


def test_cylindrical_pushforward_table_for_smooth_integrand():
    rate = 12.0
    chars = preset("impulsive", rate=rate)
    bump = ProductBump(center=(0.5,), radius=(0.3,))
    push = cylindrical_characteristics(chars, bump).pushforward
    # level sets of exp(-1/(1-t^2)) have closed-form width
    s = 0.1
    width = 2 * 0.3 * math.sqrt(1.0 - 1.0 / math.log(1.0 / s))
    assert push.tail_mass(s) == pytest.approx(rate * width, rel=0.03)
    # compact_mass must agree with integrating the table's own tail curve;
    # against the exact moment it only sees the log-grid resolution (the
    # spectrum has a hard edge at max f = 1/e that the grid smears out)
    dense = np.linspace(1e-4, 1.0, 20001)
    curve = np.array([push.tail_mass(v) for v in dense])
    assert push.compact_mass() == pytest.approx(
        np.trapezoid(2.0 * dense * curve, dense), rel=0.02)
    moment, _ = spi.quad(lambda t: math.exp(-2.0 / (1.0 - t * t)), -1, 1)
    assert push.compact_mass() == pytest.approx(rate * 0.3 * moment, rel=0.2)


def test_cylindrical_action_dispatches_on_function_type():
    real = realization(preset("impulsive", rate=25.0), seed=2)
    a = Region.from_intervals([(0.0, 0.6)])
    f = SimpleFunction(((3.0, a),))
    act = cylindrical_action(real, f, 1.0)
    assert act.value == integrate_simple(real, f, 1.0)
    assert act.error == 0.0
    g = GaussianFunction(center=(0.4,), scale=0.25)
    assert cylindrical_action(real, g, 1.0).value == integrate(real, g, 1.0).value


def test_empirical_cf_of_standard_normal():
    rng = np.random.default_rng(99)
    x = rng.standard_normal(20_000)
    u = np.array([0.5, 1.0, 2.0])
    ecf, radius = empirical_cf(x, u)
    assert radius == 2.0 / math.sqrt(20_000)
    assert np.all(np.abs(ecf - np.exp(-0.5 * u ** 2)) <= radius)
    with pytest.raises(ValueError):
        empirical_cf([1.0], u)
