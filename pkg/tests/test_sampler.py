"""Path sampler: Levy-Ito structure, laws of marginals, reproducibility."""

import math

import numpy as np
import pytest
import scipy.stats as sps

from levyfield import (Density, InfiniteActivityError, JumpComponent, Region,
                       SamplerConfig, StableKernel, interval, preset,
                       sample_field, sample_marginals,
                       sample_spectrally_positive, sample_stable_marginal_oracle,
                       stable_symbol_constant)
from levyfield.sampler import OutOfWindowError

WIN = Region.from_intervals([(0.0, 1.0)])
IMP = preset("impulsive", rate=20.0)


def cfg(seed, **kw):
    kw.setdefault("window", WIN)
    kw.setdefault("eps", 0.0)
    return SamplerConfig(seed=seed, **kw)


def test_jump_counts_are_poisson():
    counts = np.array([len(sample_field(IMP, cfg(0), replicate=k).jump_times)
                       for k in range(600)])
    mean, var = counts.mean(), counts.var(ddof=1)
    assert abs(mean - 20.0) < 4 * math.sqrt(20.0 / 600)
    # index of dispersion ~ 1 for Poisson
    assert 0.8 < var / mean < 1.25


def test_jump_times_and_locations_uniform():
    times, locs = [], []
    for k in range(300):
        real = sample_field(IMP, cfg(1), replicate=k)
        times.extend(real.jump_times)
        locs.extend(real.jump_locations[:, 0])
    assert sps.kstest(times, "uniform").pvalue > 0.01
    assert sps.kstest(locs, "uniform").pvalue > 0.01


def test_evaluate_additive_over_disjoint_regions():
    real = sample_field(IMP, cfg(2))
    a = Region.from_intervals([(0.0, 0.37)])
    b = Region.from_intervals([(0.37, 1.0)])
    both = Region(1, (interval(0.0, 0.37), interval(0.37, 1.0)))
    assert real.evaluate(1.0, a) + real.evaluate(1.0, b) == pytest.approx(
        real.evaluate(1.0, both), abs=1e-12)


def test_components_sum_to_evaluate():
    chars = preset("balan-stable", alpha=1.5)
    config = cfg(3, eps=1e-2)
    real = sample_field(chars, config)
    parts = real.components(0.8, WIN)
    total = (parts["drift"] + parts["large_jumps"] + parts["small_jumps"]
             - parts["compensator"] + parts["gaussian"] + parts["substitute"])
    assert total == pytest.approx(real.evaluate(0.8, WIN), abs=1e-12)
    assert parts["small_jump_bound"] >= 0.0


def test_time_slicing():
    real = sample_field(IMP, cfg(4))
    full = real.evaluate(1.0, WIN)
    first = real.evaluate(0.6, WIN)
    rest = real.evaluate(1.0, WIN, t0=0.6)
    assert first + rest == pytest.approx(full, abs=1e-12)


def test_out_of_window_rejected():
    real = sample_field(IMP, cfg(5))
    with pytest.raises(OutOfWindowError):
        real.evaluate(1.0, Region.from_intervals([(0.5, 1.5)]))
    with pytest.raises(OutOfWindowError):
        sample_marginals(IMP, cfg(5, replicates=10),
                         Region.from_intervals([(-1.0, 0.5)]))


def test_infinite_activity_needs_truncation():
    chars = preset("balan-stable", alpha=1.2)
    with pytest.raises(InfiniteActivityError):
        sample_field(chars, cfg(6, eps=0.0))


def test_replicates_deterministic_and_distinct():
    r1 = sample_field(IMP, cfg(7), replicate=3)
    r2 = sample_field(IMP, cfg(7), replicate=3)
    r3 = sample_field(IMP, cfg(7), replicate=4)
    np.testing.assert_array_equal(r1.jump_times, r2.jump_times)
    np.testing.assert_array_equal(r1.jump_sizes, r2.jump_sizes)
    assert not np.array_equal(r1.jump_times, r3.jump_times)


def test_impulsive_marginal_is_skellam():
    # +-1 jumps with p=1/2 at rate 20: M(1,(0,1]) = N+ - N-, Skellam(10,10)
    vals = sample_marginals(IMP, cfg(8, replicates=4000))
    k = np.arange(-30, 31)
    pmf = sps.skellam.pmf(k, 10.0, 10.0)
    obs = np.array([(vals == ki).sum() for ki in k])
    keep = pmf * len(vals) >= 5
    stat = ((obs[keep] - len(vals) * pmf[keep]) ** 2 / (len(vals) * pmf[keep])).sum()
    # add the tail bucket implicitly via dof slack
    assert sps.chi2(df=keep.sum() - 1).sf(stat) > 0.005


def test_marginals_match_paths_in_law():
    chars = preset("balan-stable", alpha=1.5)
    fast = sample_marginals(chars, cfg(9, eps=1e-2, replicates=1500))
    slow = np.array([sample_field(chars, cfg(10, eps=1e-2), replicate=k)
                     .evaluate(1.0, WIN) for k in range(1500)])
    assert sps.ks_2samp(fast, slow).pvalue > 0.01


def test_gaussian_substitute_adds_back_small_jump_variance():
    chars = preset("balan-stable", alpha=1.5)
    kern = chars.nu.kernel
    dropped = sample_marginals(chars, cfg(11, eps=0.1, replicates=6000))
    repaired = sample_marginals(
        chars, cfg(11, eps=0.1, replicates=6000,
                   small_jump_mode="gaussian-substitute"))
    extra = np.var(repaired) - np.var(dropped)
    want = kern.second_moment_below(0.1)
    # variances of heavy-tailed sums are noisy; clip the tails first
    lo, hi = np.quantile(np.concatenate([dropped, repaired]), [0.001, 0.999])
    dv = np.var(np.clip(repaired, lo, hi)) - np.var(np.clip(dropped, lo, hi))
    assert dv == pytest.approx(want, rel=0.25)


def test_small_jump_bound_shrinks_with_eps():
    chars = preset("balan-stable", alpha=1.5)
    bounds = [sample_field(chars, cfg(12, eps=e)).small_jump_bound(1.0, WIN)
              for e in (0.1, 0.01, 0.001)]
    assert bounds[0] > bounds[1] > bounds[2] > 0.0


def test_oracle_alpha_two_is_gaussian():
    x = sample_stable_marginal_oracle(2.0, 0.0, 1.0, 5000, seed=13)
    assert sps.kstest(x, "norm", args=(0.0, math.sqrt(2.0))).pvalue > 0.01


def test_oracle_stability_under_convolution():
    # (X1 + X2) / 2^{1/a} has the same law as X for a symmetric stable law
    a = 1.3
    x = sample_stable_marginal_oracle(a, 0.0, 1.0, 20000, seed=14)
    y = sample_stable_marginal_oracle(a, 0.0, 1.0, 20000, seed=15)
    z = (x + y) / 2 ** (1 / a)
    w = sample_stable_marginal_oracle(a, 0.0, 1.0, 20000, seed=16)
    assert sps.ks_2samp(z, w).pvalue > 0.01


def test_oracle_rejects_bad_parameters():
    with pytest.raises(ValueError):
        sample_stable_marginal_oracle(2.5, 0.0, 1.0, 10, seed=0)
    with pytest.raises(ValueError):
        sample_stable_marginal_oracle(1.0, 0.5, 1.0, 10, seed=0)
    with pytest.raises(ValueError):
        sample_stable_marginal_oracle(1.5, 0.0, -1.0, 10, seed=0)


def test_spectrally_positive_laplace_transform():
    x = sample_spectrally_positive(1.5, 1.0, WIN, 40000, seed=17)
    for u in (0.3, 0.7):
        emp = np.exp(-u * x).mean()
        se = np.exp(-u * x).std(ddof=1) / math.sqrt(len(x))
        assert abs(emp - math.exp(u ** 1.5)) < 4 * se


def test_marginal_stream_is_separate_from_paths():
    # same seed: marginal draws must not be pathwise coupled to sample_field
    chars = preset("impulsive", rate=5.0)
    m = sample_marginals(chars, cfg(18, replicates=1))
    p = sample_field(chars, cfg(18)).evaluate(1.0, WIN)
    # equality would hint the streams collide; allow the fluke of equal values
    # only through the discrete atom at equal jump counts
    assert m.shape == (1,)
    assert np.isfinite(m[0]) and np.isfinite(p)
