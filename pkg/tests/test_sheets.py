"""Sheet view: corner boxes, box increments, lattice checks, duality."""

import math

import numpy as np
import pytest

from levyfield import (Characteristics, Density, JumpComponent, Region,
                       SamplerConfig, preset, sample_field)
from levyfield.characteristics import DriftComponent
from levyfield.funcs import GaussianFunction, ProductBump
from levyfield.integrate import integrate
from levyfield.kernels import CompoundPoissonKernel, DiscreteJumps
from levyfield.regions import Box
from levyfield.sheets import (SheetRealization, box_increment, duality_check,
                              lamp_grid_check, sheet_from_field)

WIN2 = Region.from_intervals([(-1.0, 1.0), (-1.0, 1.0)])


def planar(seed=4, rate=25.0, **kw):
    kw.setdefault("window", WIN2)
    kw.setdefault("eps", 0.0)
    real = sample_field(preset("impulsive", rate=rate, dim=2),
                        SamplerConfig(seed=seed, **kw))
    return real, sheet_from_field(real)


def test_sheet_vanishes_on_the_axes():
    _, sheet = planar()
    assert sheet.value(1.0, [0.0, 0.5]) == 0.0
    assert sheet.value(0.3, [-0.7, 0.0]) == 0.0
    with pytest.raises(ValueError):
        sheet.value(2.0, [0.0, 0.5])  # past the horizon, degenerate or not
    with pytest.raises(ValueError):
        sheet.value(1.0, [0.5])


def test_orthant_signs_against_raw_jump_records():
    real, sheet = planar(seed=9)
    t = 0.8
    n = int(np.searchsorted(real.jump_times, t, side="right"))
    g1, g2 = real.jump_locations[:n, 0], real.jump_locations[:n, 1]
    sizes = real.jump_sizes[:n]

    def hand(x1, x2):
        f1 = np.where((g1 > 0) & (g1 <= x1), 1.0, 0.0) if x1 > 0 \
            else np.where((g1 >= x1) & (g1 < 0), -1.0, 0.0)
        f2 = np.where((g2 > 0) & (g2 <= x2), 1.0, 0.0) if x2 > 0 \
            else np.where((g2 >= x2) & (g2 < 0), -1.0, 0.0)
        return float((sizes * f1 * f2).sum())

    for corner in ((0.6, 0.7), (-0.6, 0.7), (0.6, -0.7), (-0.6, -0.7)):
        assert sheet.value(t, corner) == pytest.approx(hand(*corner), abs=1e-12)


def test_sheet_agrees_with_measure_of_corner_box():
    real, sheet = planar(seed=13)
    region = Region.from_box(Box((0.0, 0.0), (0.5, 0.9)))
    assert sheet.value(1.0, [0.5, 0.9]) == pytest.approx(
        real.evaluate(1.0, region), abs=1e-12)


def test_box_increment_round_trip():
    real, sheet = planar(seed=2)
    a, b = (0.1, -0.5), (0.6, 0.2)
    inc = box_increment(sheet, 1.0, a, b)
    want = real.evaluate(1.0, Region.from_box(Box(a, b)))
    assert inc.value == pytest.approx(want, abs=1e-9)
    assert float(inc) == inc.value


def test_box_increment_degenerate_and_invalid():
    _, sheet = planar()
    assert box_increment(sheet, 1.0, (0.2, -0.3), (0.2, 0.4)).value == 0.0
    with pytest.raises(ValueError):
        box_increment(sheet, 1.0, (0.5, 0.0), (0.2, 0.4))
    with pytest.raises(ValueError):
        box_increment(sheet, 1.0, (0.1,), (0.2, 0.4))


def test_box_increment_splits_at_a_plane():
    _, sheet = planar(seed=6)
    whole = box_increment(sheet, 1.0, (-0.4, -0.2), (0.8, 0.7)).value
    left = box_increment(sheet, 1.0, (-0.4, -0.2), (0.3, 0.7)).value
    right = box_increment(sheet, 1.0, (0.3, -0.2), (0.8, 0.7)).value
    assert whole == pytest.approx(left + right, abs=1e-9)


def test_corner_grid_fast_path_matches_point_queries():
    # constant drift + compensator: eligible for the vectorized lattice
    real = sample_field(
        preset("balan-stable", alpha=1.5, p=0.7, q=0.3, dim=2),
        SamplerConfig(seed=10, window=WIN2, eps=2e-2))
    sheet = sheet_from_field(real)
    axes = [np.linspace(-0.9, 0.9, 7), np.linspace(-0.8, 0.8, 5)]
    grid = sheet.corner_grid(1.0, axes)
    for i, x1 in enumerate(axes[0]):
        for j, x2 in enumerate(axes[1]):
            assert grid[i, j] == pytest.approx(
                sheet.value(1.0, [x1, x2]), rel=1e-10, abs=1e-12)
    with pytest.raises(ValueError):
        sheet.corner_grid(1.0, [axes[0]])


def test_corner_grid_fallback_with_varying_drift():
    chars = Characteristics(
        1, gamma=DriftComponent(Density(lambda x: 1.0 + x[:, 0] ** 2)),
        nu=JumpComponent(CompoundPoissonKernel(
            8.0, DiscreteJumps((1.0, -1.0), (0.5, 0.5)))))
    real = sample_field(chars, SamplerConfig(
        seed=3, window=Region.from_intervals([(-1.0, 1.0)]), eps=0.0))
    sheet = sheet_from_field(real)
    from levyfield.sheets import _fast_grid
    assert _fast_grid(real, 1.0, [np.array([0.5])], 0.0) is None
    x = 0.6
    n = int(np.searchsorted(real.jump_times, 1.0, side="right"))
    locs = real.jump_locations[:n, 0]
    jumps = float(real.jump_sizes[:n][(locs > 0) & (locs <= x)].sum())
    want = (x + x ** 3 / 3.0) + jumps  # t = 1 times the drift integral
    assert sheet.corner_grid(1.0, [np.array([x])])[0] == pytest.approx(want, rel=1e-10)


def test_lamp_grid_check_clean_realization():
    _, sheet = planar(seed=17, rate=30.0)
    grid = [np.linspace(-1.0, 1.0, 21)] * 2
    report = lamp_grid_check(sheet, 1.0, grid)
    assert report.passed and report.checked > 0
    # one-point grid: nothing to reconcile, vacuous pass
    tiny = lamp_grid_check(sheet, 1.0, [np.array([0.5]), np.array([0.5])])
    assert tiny.passed and tiny.checked == 0


def test_lamp_grid_check_flags_wrong_sided_sheet():
    class WrongSide(SheetRealization):
        # miscount jumps sitting exactly on the query coordinates
        def value(self, t, x, t0=0.0):
            x = np.asarray(x, dtype=float).reshape(-1)
            return super().value(t, x - 1e-9 * np.sign(x), t0)

    real, _ = planar(seed=17, rate=30.0)
    bad = WrongSide(real)
    report = lamp_grid_check(bad, 1.0, [np.linspace(-1.0, 1.0, 21)] * 2)
    assert not report.passed
    assert any(v.side == "at" for v in report.violations)
    assert max(abs(v.delta) for v in report.violations) > 0.5


def line_field(seed=5, rate=10.0):
    return sample_field(
        preset("impulsive", rate=rate),
        SamplerConfig(seed=seed, window=Region.from_intervals([(-1.0, 1.0)]),
                      eps=0.0))


def test_duality_error_shrinks_at_second_order():
    real = line_field()
    f = ProductBump(center=(0.0,), radius=(0.5,))
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    errs = np.array([duality_check(real, f, 1.0, h).error for h in hs])
    assert np.all(np.diff(errs) < 0.0)
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope > 1.5
    res = duality_check(real, f, 1.0, 0.025)
    assert res.rhs == pytest.approx(integrate(real, f, 1.0).value, rel=1e-12)
    assert res.quad_estimate > 0.0 and res.cells > 0


def test_duality_in_the_plane():
    real, _ = planar(seed=8, rate=6.0)
    f = ProductBump(center=(0.0, 0.0), radius=(0.4, 0.4))
    coarse = duality_check(real, f, 1.0, 0.1).error
    fine = duality_check(real, f, 1.0, 0.05).error
    assert fine < coarse


def test_duality_guards():
    real = line_field()
    f = ProductBump(center=(0.0,), radius=(0.5,))
    with pytest.raises(ValueError):
        duality_check(real, f, 1.0, 0.0)
    with pytest.raises(ValueError):
        duality_check(real, GaussianFunction(center=(0.0,), scale=0.2), 1.0, 0.1)
    with pytest.raises(ValueError):
        duality_check(real, ProductBump(center=(0.0,), radius=(1.0,)), 1.0, 0.1)
    soft = sample_field(
        preset("balan-stable", alpha=1.5),
        SamplerConfig(seed=1, window=Region.from_intervals([(-1.0, 1.0)]),
                      eps=1e-2, small_jump_mode="gaussian-substitute"))
    with pytest.raises(ValueError):
        duality_check(soft, f, 1.0, 0.1)
