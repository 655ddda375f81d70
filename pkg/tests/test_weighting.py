"""Weight catalog, antiderivative consistency, and feasibility checks."""

import math

import numpy as np
import pytest

from wogl import (
    WeightSpec,
    check_feasible,
    exponential_weight,
    family_weight,
    integrate,
    power_tgo_weight,
    register_family,
    uniform_weight,
)
from wogl.weighting import FAMILIES


def test_uniform_inv_w_is_one():
    w = uniform_weight(0.0, 10.0)
    assert float(w.inv_w(5.0)) == 1.0


def test_uniform_anti1_difference():
    w = uniform_weight(0.0, 10.0)
    assert float(w.anti1(4.0)) - float(w.anti1(1.0)) == pytest.approx(3.0, abs=1e-14)


def test_uniform_anti3_difference():
    # independent oracle: integral of tau^2/2 over [0, 2] = 8/6
    w = uniform_weight(0.0, 2.0)
    expected = integrate(lambda tau: 0.5 * tau * tau, 0.0, 2.0, rel_tol=1e-13)
    assert expected == pytest.approx(8.0 / 6.0, rel=1e-12)
    assert float(w.anti3(2.0)) - float(w.anti3(0.0)) == pytest.approx(expected, rel=1e-13)


def test_uniform_rejects_bad_interval():
    with pytest.raises(ValueError):
        uniform_weight(5.0, 5.0)
    with pytest.raises(ValueError):
        uniform_weight(2.0, 1.0)


def test_power_n0_equals_uniform_everywhere():
    wu = uniform_weight(0.0, 10.0)
    wp = power_tgo_weight(0.0, 10.0, 0.0)
    for tau in np.linspace(0.0, 10.0, 23):
        assert float(wp.inv_w(tau)) == pytest.approx(float(wu.inv_w(tau)), abs=1e-15)
        for level in ("anti1", "anti2", "anti3"):
            a = float(getattr(wp, level)(tau))
            b = float(getattr(wu, level)(tau))
            assert a == pytest.approx(b, rel=1e-12, abs=1e-12), level


def test_power_inv_w_value():
    w = power_tgo_weight(0.0, 10.0, 1.0)
    assert float(w.inv_w(4.0)) == pytest.approx(6.0, rel=1e-15)


def test_power_anti1_integral():
    # (10-4)^3 / 3 = 72
    w = power_tgo_weight(0.0, 10.0, 2.0)
    got = float(w.anti1(10.0)) - float(w.anti1(4.0))
    assert got == pytest.approx(72.0, rel=1e-13)


def test_power_rejects_negative_exponent():
    with pytest.raises(ValueError):
        power_tgo_weight(0.0, 10.0, -0.5)


def test_exponential_zero_rate_equals_uniform():
    wu = uniform_weight(0.0, 10.0)
    we = exponential_weight(0.0, 10.0, 0.0)
    for tau in np.linspace(0.0, 10.0, 11):
        assert float(we.inv_w(tau)) == float(wu.inv_w(tau))
        assert float(we.anti2(tau)) == float(wu.anti2(tau))


def test_exponential_value_at_tf():
    w = exponential_weight(0.0, 10.0, 0.5)
    assert float(w.inv_w(10.0)) == pytest.approx(1.0, rel=1e-15)


def test_exponential_anti1_integral_against_quadrature():
    w = exponential_weight(0.0, 10.0, 0.5)
    closed = float(w.anti1(10.0)) - float(w.anti1(0.0))
    assert closed == pytest.approx((1.0 - math.exp(-5.0)) / 0.5, rel=1e-13)
    quad = integrate(lambda tau: float(w.inv_w(tau)), 0.0, 10.0, rel_tol=1e-12)
    assert closed == pytest.approx(quad, rel=1e-10)


def test_exponential_rejects_non_finite_rate():
    with pytest.raises(ValueError):
        exponential_weight(0.0, 10.0, math.inf)


@pytest.mark.parametrize(
    "w",
    [
        uniform_weight(0.0, 10.0),
        power_tgo_weight(0.0, 10.0, 1.0),
        power_tgo_weight(0.0, 10.0, 2.5),
        exponential_weight(0.0, 10.0, 0.5),
        exponential_weight(0.0, 10.0, -1.5),
        exponential_weight(2.0, 7.0, 2.0),
    ],
    ids=["uniform", "power1", "power2.5", "exp0.5", "exp-1.5", "exp2"],
)
def test_antiderivative_stack_consistency(w):
    # central differences with step 1e-5*(tf-t0) on a 100-point interior grid
    h = 1e-5 * w.span
    grid = np.linspace(w.t0 + 2 * h, w.tf - 2 * h, 100)
    for upper, lower in ((w.anti1, w.inv_w), (w.anti2, w.anti1), (w.anti3, w.anti2)):
        for tau in grid:
            fd = (float(upper(tau + h)) - float(upper(tau - h))) / (2.0 * h)
            ref = float(lower(tau))
            assert abs(fd - ref) <= 1e-6 * (1.0 + abs(ref))


@pytest.mark.parametrize("n", [4.0, 6.0])
def test_steep_power_stack_consistent_to_fp_limit(n):
    # high exponents push antiderivative magnitudes to span^(n+3); the raw
    # central difference hits its rounding floor there, so consistency is
    # asserted through the floor-aware feasibility residuals
    rep = check_feasible(power_tgo_weight(0.0, 10.0, n), samples=100)
    assert rep.analytic_path
    assert rep.stack_consistent
    assert rep.feasible


def test_check_feasible_uniform():
    rep = check_feasible(uniform_weight(0.0, 10.0), samples=64)
    assert rep.feasible
    assert rep.positive and rep.bounded and rep.analytic_path
    assert rep.stack_consistent


def test_check_feasible_power():
    rep = check_feasible(power_tgo_weight(0.0, 10.0, 2.0), samples=64)
    assert rep.feasible
    assert rep.analytic_path


def test_check_feasible_unbounded_near_tf():
    w = WeightSpec(inv_w=lambda tau: 1.0 / (10.0 - tau), t0=0.0, tf=10.0)
    rep = check_feasible(w, samples=64)
    assert not rep.bounded
    assert not rep.feasible


def test_check_feasible_unbounded_near_t0():
    w = WeightSpec(inv_w=lambda tau: 1.0 / (tau + 1e-30), t0=0.0, tf=10.0)
    rep = check_feasible(w, samples=64)
    assert not rep.feasible


def test_check_feasible_sign_change():
    w = WeightSpec(inv_w=lambda tau: math.cos(tau), t0=0.0, tf=10.0)
    rep = check_feasible(w, samples=64)
    assert not rep.positive
    assert not rep.feasible


def test_check_feasible_flags_inconsistent_stack():
    base = uniform_weight(0.0, 10.0)
    w = WeightSpec(
        inv_w=base.inv_w,
        t0=0.0,
        tf=10.0,
        anti1=lambda tau: 2.0 * np.asarray(tau, dtype=float),  # derivative 2, not 1
        anti2=base.anti2,
        anti3=base.anti3,
    )
    rep = check_feasible(w, samples=32)
    assert rep.analytic_path
    assert not rep.stack_consistent
    assert not rep.feasible


def test_check_feasible_is_pure():
    w = power_tgo_weight(0.0, 10.0, 3.0)
    assert check_feasible(w, samples=50) == check_feasible(w, samples=50)


def test_check_feasible_rejects_tiny_sample_count():
    with pytest.raises(ValueError):
        check_feasible(uniform_weight(0.0, 1.0), samples=1)


def test_quadrature_only_spec_reports_no_analytic_path():
    w = WeightSpec(inv_w=lambda tau: 1.0 + tau, t0=0.0, tf=5.0)
    rep = check_feasible(w, samples=32)
    assert rep.feasible
    assert not rep.analytic_path
    assert rep.stack_residuals is None


def test_family_weight_catalog_and_unknown():
    w = family_weight("power_tgo", 0.0, 10.0, {"n": 2.0})
    assert float(w.inv_w(8.0)) == pytest.approx(4.0)
    with pytest.raises(ValueError, match="unknown weight family"):
        family_weight("nope", 0.0, 10.0)


def test_register_family_and_duplicate():
    name = "test_dummy_family"
    try:
        register_family(name, lambda t0, tf: uniform_weight(t0, tf))
        assert float(family_weight(name, 0.0, 2.0).inv_w(1.0)) == 1.0
        with pytest.raises(ValueError, match="already registered"):
            register_family(name, lambda t0, tf: uniform_weight(t0, tf))
    finally:
        FAMILIES.pop(name, None)


def test_every_catalog_family_builds_feasible_specs():
    cases = [
        ("uniform", {}),
        ("power_tgo", {"n": 0.0}),
        ("power_tgo", {"n": 4.0}),
        ("exponential", {"a": 1.0}),
        ("exponential", {"a": -0.5}),
    ]
    for name, params in cases:
        rep = check_feasible(family_weight(name, 0.0, 10.0, params), samples=64)
        assert rep.feasible, (name, params)
