"""Release gate: one test per numbered criterion, run with ``pytest -v``.

Each test prints as its own pass/fail line.  Criterion 3 appears twice: the
decaying-target form is kept as a strict expected failure (spectral positivity
forces a growing Laplace transform; see the twin test), so a change in sampler
behavior flips the suite red either way.
"""

import time

import numpy as np
import pytest
import scipy.stats as sps

from levyfield import (PolynomialDecay, ProductBump, Region, SamplerConfig,
                       SheetRealization, SimpleFunction, besov_classify,
                       box_increment, duality_check, empirical_cf,
                       integrate_simple, lm_membership, preset, sample_field,
                       sample_marginals, sample_stable_marginal_oracle,
                       stable_symbol_constant)
from levyfield.characteristics import (Characteristics, Density,
                                       DiffusionComponent, DriftComponent,
                                       JumpComponent)
from levyfield.cli import main
from levyfield.kernels import (CompoundPoissonKernel, DiscreteJumps,
                               StableKernel, UniformJumps)
from levyfield.regions import Box
from levyfield.verify import (OnbCounterexampleSpec, embedding_inequality_check,
                              independence_test, onb_counterexample,
                              paired_evaluations)

UNIT = Region.from_intervals([(0.0, 1.0)])


def test_criterion_01_stable_cf_match():
    # alpha = 3/2, symmetric: CF of M(1, [0,1]) is exp(-sqrt(2*pi) |u|^1.5).
    n = 100_000
    eps = 1e-3
    us = np.array([0.25, 0.5, 1.0, 2.0])
    start = time.perf_counter()
    cfg = SamplerConfig(seed=2, window=UNIT, horizon=1.0, eps=eps,
                        small_jump_mode="gaussian-substitute", replicates=n)
    x = sample_marginals(preset("balan-stable", alpha=1.5), cfg, UNIT)
    ecf, radius = empirical_cf(x, us)
    elapsed = time.perf_counter() - start
    # The Gaussian stand-in for jumps below eps perturbs the CF by at most the
    # third absolute moment of the clipped jump measure:
    #   |u|^3/6 * int_{|y|<eps} |y|^3 nu(dy) = |u|^3/6 * eps^{3-a} * a/(3-a).
    bias = us ** 3 / 6.0 * eps ** 1.5
    target = np.exp(-stable_symbol_constant(1.5) * us ** 1.5)
    dev = np.abs(ecf - target)
    assert np.all(dev <= radius + bias), (dev, radius + bias)
    assert elapsed < 60.0


def test_criterion_02_oracle_equivalence():
    # Marginals assembled jump-by-jump vs direct Chambers-Mallows-Stuck draws
    # of the same stable law; two-sample KS at the 1% level.
    n = 10_000
    for alpha in (0.8, 1.5):
        cfg = SamplerConfig(seed=12, window=UNIT, horizon=1.0, eps=1e-3,
                            small_jump_mode="gaussian-substitute", replicates=n)
        paths = sample_marginals(preset("balan-stable", alpha=alpha), cfg, UNIT)
        scale = stable_symbol_constant(alpha) ** (1.0 / alpha)
        oracle = sample_stable_marginal_oracle(alpha, 0.0, scale, n, 13)
        p = sps.ks_2samp(paths, oracle).pvalue
        assert p > 0.01, (alpha, p)


_SPECTRALLY_POSITIVE_MARGINALS = {}


def _positive_field_marginals():
    """M(1, [0,1]) samples for mytnik-positive(1.5), shared by both 03 tests."""
    key = "mytnik"
    if key not in _SPECTRALLY_POSITIVE_MARGINALS:
        cfg = SamplerConfig(seed=7, window=UNIT, horizon=1.0, eps=1e-3,
                            small_jump_mode="gaussian-substitute",
                            replicates=100_000)
        _SPECTRALLY_POSITIVE_MARGINALS[key] = sample_marginals(
            preset("mytnik-positive", alpha=1.5), cfg, UNIT)
    return _SPECTRALLY_POSITIVE_MARGINALS[key]


def _laplace_deviations(sign):
    x = _positive_field_marginals()
    rows = []
    for u in (0.5, 1.0, 2.0):
        w = np.exp(-u * x)
        se = w.std(ddof=1) / np.sqrt(len(w))
        rows.append((abs(w.mean() - np.exp(sign * u ** 1.5)), 3.0 * se))
    return rows


@pytest.mark.xfail(strict=True, reason=(
    "a spectrally positive integrand has no negative jumps, so exp(-u M) "
    "averages above 1 and E[exp(-u M(1,A))] grows like exp(+u^1.5 leb(A)); "
    "the decaying target exp(-u^1.5) is unattainable for this field -- the "
    "twin test pins the attained transform"))
def test_criterion_03_laplace_transform_decaying_target():
    for dev, tol in _laplace_deviations(-1.0):
        assert dev <= tol


def test_criterion_03_laplace_transform_positive_exponent():
    # Attained law: E[exp(-u M(1, [0,1]))] = exp(+u^1.5) within 3 MC standard
    # errors of the exponential-tilt estimator at every u probed.
    for dev, tol in _laplace_deviations(1.0):
        assert dev <= tol, (dev, tol)


def test_criterion_04_control_measure_constant():
    rng = np.random.default_rng(99)
    for _ in range(20):
        alpha = rng.uniform(0.2, 1.95)
        if abs(alpha - 1.0) < 0.05:
            alpha = 1.4  # drift coefficient is singular at alpha = 1
        p = rng.uniform(0.0, 1.0)
        beta = 2.0 * p - 1.0
        d = int(rng.integers(1, 4))
        spans = [(lo, lo + w) for lo, w in
                 zip(rng.uniform(-3.0, 1.0, d), rng.uniform(0.1, 3.0, d))]
        region = Region.from_intervals(spans)
        chars = preset("balan-stable", alpha=alpha, p=p, q=1.0 - p, dim=d)
        leb = float(np.prod([hi - lo for lo, hi in spans]))
        want = (abs(beta * alpha / (1.0 - alpha)) + 2.0 / (2.0 - alpha)) * leb
        got = chars.control_measure(region).value
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_criterion_05_pathwise_exactness():
    # Additivity over disjoint regions, simple-function pairing, sheet corner
    # values, and box increments must agree with direct evaluation to floating
    # point on every fixture.
    for i in range(100):
        rng = np.random.default_rng(1000 + i)
        d = 1 + i % 2
        lo = tuple(rng.uniform(-2.0, -0.3, size=d))
        hi = tuple(rng.uniform(0.6, 2.0, size=d))
        window = Region.from_intervals(list(zip(lo, hi)))
        fam = i % 3
        if fam == 0:
            chars = preset("gaussian-white-noise", dim=d)
            eps, mode = 0.0, "gaussian-substitute"
        elif fam == 1:
            chars = preset("impulsive", rate=rng.uniform(3.0, 25.0), dim=d)
            eps, mode = 0.0, "gaussian-substitute"
        else:
            alpha = rng.uniform(0.4, 1.8)
            if abs(alpha - 1.0) < 0.05:
                alpha = 1.2
            chars = preset("balan-stable", alpha=alpha, dim=d)
            eps, mode = rng.uniform(0.05, 0.2), "drop-with-bound"
        horizon = rng.uniform(0.5, 2.0)
        cfg = SamplerConfig(seed=int(rng.integers(1 << 31)), window=window,
                            horizon=horizon, eps=eps, small_jump_mode=mode,
                            replicates=1)
        real = sample_field(chars, cfg)
        t = rng.uniform(0.1, horizon)
        tol = 1e-12 * (1.0 + abs(real.evaluate(t, window)))

        cut = rng.uniform(lo[0] + 0.2, hi[0] - 0.2)
        left = Box(lo, (cut,) + hi[1:])
        right = Box((cut,) + lo[1:], hi)
        a_region, b_region = Region(d, (left,)), Region(d, (right,))
        union = Region(d, (left, right))
        assert (real.evaluate(t, a_region) + real.evaluate(t, b_region)
                == pytest.approx(real.evaluate(t, union), abs=tol))

        coef = rng.uniform(-2.0, 2.0)
        step = SimpleFunction(((coef, a_region),))
        assert integrate_simple(real, step, t) == pytest.approx(
            coef * real.evaluate(t, a_region), abs=tol * (1.0 + abs(coef)))

        sheet = SheetRealization(real)
        x = tuple(rng.uniform(0.1, 0.9) * np.asarray(hi))
        corner = Region.from_intervals([(0.0, xi) for xi in x])
        assert sheet.value(t, x) == pytest.approx(
            real.evaluate(t, corner), abs=tol)

        a = tuple(rng.uniform(np.asarray(lo) + 0.05, np.asarray(x) - 0.05))
        box_region = Region.from_intervals(list(zip(a, x)))
        assert box_increment(sheet, t, a, x).value == pytest.approx(
            real.evaluate(t, box_region), abs=tol)


def test_criterion_06_duality_convergence():
    # Pairing a sampled path against the mixed derivative of a bump and
    # pairing its sheet against the bump itself must agree as the quadrature
    # mesh shrinks, at second order, for finite-activity fields in d = 1, 2.
    hs = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
    for d, rate, seed in ((1, 10.0, 61), (2, 6.0, 3)):
        window = Region.from_intervals([(-1.0, 1.0)] * d)
        cfg = SamplerConfig(seed=seed, window=window, horizon=1.0, eps=0.0,
                            small_jump_mode="gaussian-substitute", replicates=1)
        real = sample_field(preset("impulsive", rate=rate, dim=d), cfg)
        f = ProductBump(center=(0.0,) * d, radius=(0.5,) * d)
        errs = [duality_check(real, f, 1.0, h).error for h in hs]
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert slope >= 1.8, (d, slope, errs)
        assert errs[-1] < 1e-6, (d, errs)


def test_criterion_07_independence_suite():
    chars = preset("impulsive", rate=20.0)
    cfg = SamplerConfig(seed=5, window=UNIT, horizon=1.0, eps=0.0,
                        small_jump_mode="gaussian-substitute", replicates=1)
    halves = (Region.from_intervals([(0.0, 0.5)]),
              Region.from_intervals([(0.5, 1.0)]))
    va, vb = paired_evaluations(chars, cfg, *halves, 2000)
    assert independence_test(va, vb, seed=11).decision == "pass"

    overlapping = (Region.from_intervals([(0.0, 0.6)]),
                   Region.from_intervals([(0.4, 1.0)]))
    va, vb = paired_evaluations(chars, cfg, *overlapping, 2000)
    planted = independence_test(va, vb, seed=11)
    assert planted.decision == "fail" and planted.statistic < 0.01

    # Basis-expansion pair: coefficients against two trig partial sums look
    # dependent when built from one path (K = 8, N = 1e4) and independent
    # when each arm gets its own path.
    shared = onb_counterexample(OnbCounterexampleSpec(truncation=8),
                                10_000, seed=0)
    assert shared.decision == "fail" and shared.statistic < 0.01
    control = onb_counterexample(OnbCounterexampleSpec(truncation=8,
                                                       shared=False),
                                 10_000, seed=0)
    assert control.decision == "pass"


def test_criterion_08_membership_grid():
    # Shell classifier vs the closed-form rule for (1+|x|^2)^{-r}: member
    # exactly when 2 r alpha > d.  Points with |2 r alpha - d| <= 0.2 sit too
    # close to the boundary for a finite shell ladder and are skipped.
    checked = 0
    for alpha in np.linspace(0.3, 1.9, 10):
        for r in np.linspace(0.2, 3.0, 5):
            for d in (1, 2):
                margin = 2.0 * r * alpha - d
                if abs(margin) <= 0.2:
                    continue
                chars = preset("balan-stable", alpha=float(alpha), dim=d)
                res = lm_membership(chars, PolynomialDecay(float(r), dim=d))
                want = "member" if margin > 0 else "non-member"
                assert res.verdict == want, (alpha, r, d, res)
                checked += 1
    assert checked == 93


def test_criterion_09_embedding_inequality():
    # max(|pairing|, modular norm) <= drift + 11 * quadratic + 9 * jump terms
    # on randomized finite-control-measure fixtures.
    rng = np.random.default_rng(2024)
    with np.errstate(over="ignore"):  # 1/|f| thresholds where f = 0
        for i in range(50):
            kind = i % 3
            if kind == 0:
                alpha = rng.uniform(0.3, 1.9)
                p = rng.uniform(0.0, 1.0)
                kern = StableKernel(alpha, p, 1.0 - p,
                                    scale=rng.uniform(0.3, 2.0))
            elif kind == 1:
                vals = rng.uniform(-2.0, 2.0, size=3)
                kern = CompoundPoissonKernel(
                    rng.uniform(0.5, 4.0),
                    DiscreteJumps(tuple(vals), tuple(rng.dirichlet(np.ones(3)))))
            else:
                a = rng.uniform(0.1, 1.0)
                kern = CompoundPoissonKernel(
                    rng.uniform(0.5, 4.0),
                    UniformJumps(a, a + rng.uniform(0.5, 2.0)))
            d = 1 + i % 2
            chars = Characteristics(
                d,
                gamma=DriftComponent(Density(rng.uniform(-1.0, 1.0))),
                sigma=DiffusionComponent(Density(rng.uniform(0.0, 1.0))),
                nu=JumpComponent(kern))
            if i % 2 == 0:
                c = rng.uniform(-0.5, 0.5, size=d)
                radius = rng.uniform(0.2, 0.8, size=d)
                f = ProductBump(center=tuple(c), radius=tuple(radius))
                domain = Region.from_intervals(
                    [(ci - ri, ci + ri) for ci, ri in zip(c, radius)])
            else:
                cuts = np.sort(rng.uniform(-1.0, 1.0, size=4))
                f = SimpleFunction(tuple(
                    (float(rng.uniform(-2.0, 2.0)),
                     Region.from_intervals([(cuts[j], cuts[j + 1])] * d))
                    for j in range(3)))
                domain = Region.from_intervals([(cuts[0], cuts[-1])] * d)
            rep = embedding_inequality_check(chars, f, domain)
            assert rep.decision == "pass", (i, rep)


def test_criterion_10_besov_classifier():
    # Reference rule, written out independently: membership needs strict
    # smoothness tau < d(1/alpha - 1) and strict weight decay
    # rho < -d / min(p, alpha); one strict violation puts the field outside.
    def reference(alpha, d, p, tau, rho):
        room_tau = d * (1.0 / alpha - 1.0) - tau
        room_rho = -d / min(p, alpha) - rho
        if room_tau < 0.0 or room_rho < 0.0:
            return "outside"
        if room_tau > 0.0 and room_rho > 0.0:
            return "inside"
        return "boundary-indeterminate"

    alphas = (0.3, 0.7, 1.0, 1.3, 1.7, 1.9)
    ps = (0.5, 1.5, 2, 4, np.inf)
    deltas = (-0.4, 0.0, 0.4)
    for alpha in alphas:
        for d in (1, 2, 3):
            for p in ps:
                smooth_edge = d * (1.0 / alpha - 1.0)
                weight_edge = -d / min(p, alpha)
                for dt in deltas:
                    for dr in deltas:
                        tau, rho = smooth_edge + dt, weight_edge + dr
                        assert besov_classify(alpha, d, p, tau, rho) \
                            == reference(alpha, d, p, tau, rho)
                # Verdict can only move inside -> boundary -> outside as
                # either index grows with the other one held fixed.
                rank = {"inside": 0, "boundary-indeterminate": 1, "outside": 2}
                for rho in (weight_edge - 0.5, weight_edge, weight_edge + 0.5):
                    got = [rank[besov_classify(alpha, d, p, tau, rho)]
                           for tau in np.linspace(smooth_edge - 1.0,
                                                  smooth_edge + 1.0, 9)]
                    assert got == sorted(got)
                for tau in (smooth_edge - 0.5, smooth_edge, smooth_edge + 0.5):
                    got = [rank[besov_classify(alpha, d, p, tau, rho)]
                           for rho in np.linspace(weight_edge - 1.0,
                                                  weight_edge + 1.0, 9)]
                    assert got == sorted(got)


REPLAY_CONFIG = """\
schema: 1
seed: 29
characteristics: {preset: impulsive, params: {rate: 8.0}}
sampler: {window: [[-1.0, 1.0]], eps: 0.0}
tasks:
  - {kind: sample, replicates: 2, formats: [jsonl, frames]}
  - {kind: sheet, axes: [{lo: -0.5, hi: 0.5, n: 4}]}
  - {kind: integrate, function: {type: gaussian, center: [0.0], scale: 0.3}}
  - {kind: verify-cf, u: [0.5, 1.0], n: 1000, region: [[0.0, 1.0]]}
  - {kind: verify-independence, region_a: [[-1.0, 0.0]],
     region_b: [[0.0, 1.0]], n: 500}
  - {kind: verify-duality, h: 0.01, tolerance: 1.0e-3,
     function: {type: bump, center: [0.0], radius: 0.4}}
  - {kind: check-integrability, function: {type: bump, center: [0.0], radius: 0.4}}
  - {kind: check-tempered, r_max: 8.0}
  - {kind: classify-besov, alpha: 1.5, p: 2, tau: -1.0, rho_growth: -2.0}
  - {kind: counterexample, n: 500}
"""


def test_criterion_11_replay_determinism(tmp_path, monkeypatch):
    # Every task kind once, two runs, trees compared byte for byte.
    monkeypatch.delenv("LEVY_FIELD_OUTPUT", raising=False)
    cfg = tmp_path / "replay.yaml"
    cfg.write_text(REPLAY_CONFIG)
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg), "--output", str(first)]) == 0
    assert main(["run", str(cfg), "--output", str(second)]) == 0
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    assert "manifest.json" in names and "reports.jsonl" in names
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name
