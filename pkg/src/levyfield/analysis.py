"""Integrability and classification analytics built on the characteristics triple.

The central object is the pointwise modular

    Phi(u, x) = sup_{|c| <= 1} |U(c u, x)| + u^2 g(x) + int (1 ^ |u y|^2) rho(x, dy)

with densities taken against the control measure.  A function f is integrable
against the random measure exactly when ``int Phi(|f(x)|, x) lambda(dx)`` is
finite, so membership testing reduces to quadrature with divergence detection.
Internally everything is computed unnormalized (against Lebesgue), which avoids
dividing by the control density under the integral sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .characteristics import Characteristics
from .funcs import PolynomialDecay
from .kernels import CompoundPoissonKernel, DiscreteJumps, JumpKernel, StableKernel
from .quadrature import box_integral
from .regions import Box, Region

SUP_TOL = 1e-9


class UndefinedDensityError(ValueError):
    """The control measure has no mass at the queried point."""


# --------------------------------------------------------------------------
# Drift correction term U and its sup over the truncation parameter
# --------------------------------------------------------------------------

def truncation_drift(kernel: JumpKernel, v) -> np.ndarray:
    """``G(v) = int (tau(v y) - v tau(y)) k(dy)`` with ``tau(y) = y ^ sgn(y)``.

    Odd in v, and identically zero for symmetric kernels.  Finite for every
    Levy kernel: the indicator mismatch lives on an annulus away from 0.
    """
    v = np.asarray(v, dtype=float)
    scalar = v.ndim == 0
    v = np.atleast_1d(v)
    if kernel.symmetric:
        out = np.zeros_like(v)
    elif isinstance(kernel, StableKernel):
        a = kernel.alpha
        mag = np.abs(v)
        out = (kernel.scale * kernel.beta / (1.0 - a)
               * np.sign(v) * (mag ** a - mag))
    elif isinstance(kernel, CompoundPoissonKernel) and isinstance(kernel.jumps, DiscreteJumps):
        sizes, probs = kernel.jumps._arr()
        prod = v[:, None] * sizes[None, :]
        gap = np.clip(prod, -1.0, 1.0) - v[:, None] * np.clip(sizes, -1.0, 1.0)[None, :]
        out = kernel.rate * gap @ probs
    else:
        out = v * kernel.indicator_moment_diff(v)
        tp1, tn1 = kernel.tail_masses(1.0)
        for i, vi in np.ndenumerate(v):
            if vi != 0.0:
                tp, tn = kernel.tail_masses(1.0 / abs(vi))
                out[i] += np.sign(vi) * (tp - tn) - vi * (tp1 - tn1)
    return float(out[0]) if scalar else out


def _sup_stable(a0, mod, kern: StableKernel, u):
    """Exact sup of |A v + B v^alpha| on [0, u]: endpoint or stationary point."""
    a = kern.alpha
    b_coef = mod * kern.scale * kern.beta / (1.0 - a) if a != 1.0 else np.zeros_like(mod)
    a_coef = a0 - b_coef
    best = np.abs(a_coef * u + b_coef * u ** a)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(b_coef != 0.0, -a_coef / (a * b_coef), -1.0)
        vstar = np.where(ratio > 0.0, ratio ** (1.0 / (a - 1.0)), 0.0)
    keep = (vstar > 0.0) & (vstar < u)
    inner = np.where(keep, np.abs(a_coef * vstar + b_coef * vstar ** a), 0.0)
    return np.maximum(best, inner)


def _sup_refined(a0, mod, kern, u, max_level=11):
    """Dyadic-grid sup of |a0 v + mod G(v)|, refined until Cauchy."""
    out = np.zeros_like(u)
    for start in range(0, u.size, 256):
        sl = slice(start, start + 256)
        prev = None
        cur = np.zeros(u[sl].shape)
        for m in range(4, max_level + 1):
            c = np.linspace(0.0, 1.0, 2 ** m + 1)[1:]
            v = u[sl, None] * c[None, :]
            g = np.asarray(truncation_drift(kern, v.ravel())).reshape(v.shape)
            cur = np.abs(a0[sl, None] * v + mod[sl, None] * g).max(axis=1)
            if prev is not None and np.all(np.abs(cur - prev) <= SUP_TOL * (1.0 + cur)):
                break
            prev = cur
        out[sl] = cur
    return out


def drift_correction_sup(chars: Characteristics, x: np.ndarray, u) -> np.ndarray:
    """``sup_{0 <= v <= u} |v a0(x) + m(x) G(v)|`` — Lebesgue-normalized.

    The supremand is odd in v, so [0, u] suffices.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    u = np.broadcast_to(np.abs(np.asarray(u, dtype=float)), (x.shape[0],)).astype(float)
    a0 = chars.drift_density(x)
    kern = chars.nu.kernel if chars.nu is not None else None
    if kern is None or kern.symmetric:
        return np.abs(a0) * u
    mod = chars.jump_modulation(x)
    if isinstance(kern, StableKernel):
        return _sup_stable(a0, mod, kern, u)
    if isinstance(kern, CompoundPoissonKernel) and isinstance(kern.jumps, DiscreteJumps):
        sizes, _ = kern.jumps._arr()
        breaks = np.unique(1.0 / np.abs(sizes[sizes != 0.0]))
        cand = np.minimum(np.concatenate([breaks, [np.inf]])[None, :], u[:, None])
        g = np.asarray(truncation_drift(kern, cand.ravel())).reshape(cand.shape)
        return np.abs(a0[:, None] * cand + mod[:, None] * g).max(axis=1)
    return _sup_refined(a0, mod, kern, u)


# --------------------------------------------------------------------------
# The modular
# --------------------------------------------------------------------------

def modular_integrand(chars: Characteristics, f):
    """Vectorized ``x -> Phi(|f(x)|, x) * control_density(x)``.

    Integrating this against Lebesgue gives the membership integral
    ``int Phi(|f|, x) lambda(dx)`` (atom contributions handled separately).
    """
    kern = chars.nu.kernel if chars.nu is not None else None

    def integrand(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        u = np.abs(f(x))
        out = drift_correction_sup(chars, x, u)
        out += u * u * chars.diffusion_density(x)
        if kern is not None:
            out += chars.jump_modulation(x) * kern.compact_moment(u)
        return out

    return integrand


def _atom_modular(chars: Characteristics, f) -> float:
    """Sum of ``Phi(|f(p)|, p) * lambda({p})`` over all atoms."""
    total = 0.0
    gamma_atoms = chars.gamma.atoms if chars.gamma is not None else ()
    sigma_atoms = chars.sigma.atoms if chars.sigma is not None else ()
    merged: dict[tuple[float, ...], list[float]] = {}
    for a in gamma_atoms:
        merged.setdefault(a.point, [0.0, 0.0])[0] += a.weight
    for a in sigma_atoms:
        merged.setdefault(a.point, [0.0, 0.0])[1] += a.weight
    for point, (wg, ws) in merged.items():
        fu = abs(float(f(np.asarray(point)[None, :])[0]))
        total += abs(fu * wg) + fu * fu * ws
    return total


def phi_m(chars: Characteristics, u: float, x) -> float:
    """The modular ``Phi(u, x)`` with densities taken against the control measure."""
    if u < 0:
        raise ValueError("u must be nonnegative")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape != (1, chars.dim):
        raise ValueError("x must be a single point of the right dimension")
    point = tuple(float(c) for c in x[0])
    wg = sum(a.weight for a in (chars.gamma.atoms if chars.gamma else ()) if a.point == point)
    ws = sum(a.weight for a in (chars.sigma.atoms if chars.sigma else ()) if a.point == point)
    mass = abs(wg) + ws
    if mass > 0.0:
        # At an atom the jump part carries no mass; only drift/Gaussian weights.
        return (abs(u * wg) + u * u * ws) / mass
    ell = float(chars.control_density(x)[0])
    if not np.isfinite(ell) or ell <= 0.0:
        raise UndefinedDensityError(f"control measure has no density at {point}")
    val = float(drift_correction_sup(chars, x, u)[0])
    val += u * u * float(chars.diffusion_density(x)[0])
    if chars.nu is not None:
        val += float(chars.jump_modulation(x)[0]) * float(chars.nu.kernel.compact_moment(u))
    return val / ell


# --------------------------------------------------------------------------
# Membership
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MembershipResult:
    """Verdict of the membership integral, with the evidence that produced it."""

    verdict: str                      # member | non-member | indeterminate
    value: float | None = None        # the integral, when finite
    error: float | None = None
    shells: tuple[float, ...] = ()
    note: str = ""

    def __bool__(self) -> bool:
        return self.verdict == "member"


def _integrate_region(integrand, region: Region) -> tuple[float, float]:
    val = err = 0.0
    for b in region.boxes:
        v, e = box_integral(integrand, b)
        val += v
        err += e
    return val, err


def _shell_boxes(dim: int, k: int) -> list[Box]:
    inner = Box((-2.0 ** k,) * dim, (2.0 ** k,) * dim)
    outer = Box((-2.0 ** (k + 1),) * dim, (2.0 ** (k + 1),) * dim)
    return outer.subtract(inner)


def lm_membership(chars: Characteristics, f, domain: Region | None = None, *,
                  max_shells: int = 48, min_shells: int = 6,
                  decay_ratio: float = 0.98, growth_ratio: float = 1.02) -> MembershipResult:
    """Decide whether ``int Phi(|f|, x) lambda(dx)`` over the domain is finite.

    ``domain=None`` means all of R^d; unbounded integrals are resolved shell by
    shell over dyadic sup-norm annuli, declaring membership only when the shell
    sequence decays geometrically (the tail is then bounded by a geometric
    series) and non-membership only when it grows geometrically.  Anything
    less clear-cut is reported as indeterminate, never silently as member.
    """
    if getattr(f, "dim", chars.dim) != chars.dim:
        raise ValueError("function dimension does not match characteristics")
    integrand = modular_integrand(chars, f)
    atoms = _atom_modular(chars, f)

    support = getattr(f, "support_region", None)
    if domain is not None:
        bounded = domain if support is None else domain.intersect(support)
    elif support is not None:
        bounded = support
    else:
        bounded = None

    if bounded is not None:
        if bounded.is_empty:
            return MembershipResult("member", atoms, 0.0, note="empty effective domain")
        try:
            val, err = _integrate_region(integrand, bounded)
        except ArithmeticError:
            return MembershipResult("indeterminate",
                                    note="integrand not finite on the domain")
        if err > max(1e-6 * abs(val), 1e-8):
            return MembershipResult("indeterminate", note=(
                f"quadrature did not converge (value {val:.6g}, error {err:.3g})"))
        return MembershipResult("member", val + atoms, err)

    # Unbounded domain: core cube plus dyadic shells.
    core_val, core_err = _integrate_region(
        integrand, Region.from_box(Box((-1.0,) * chars.dim, (1.0,) * chars.dim)))
    total, err = core_val + atoms, core_err
    shells: list[float] = []
    ratios: list[float] = []
    for k in range(max_shells):
        sk = 0.0
        try:
            for b in _shell_boxes(chars.dim, k):
                v, e = box_integral(integrand, b)
                sk += v
                err += e
        except ArithmeticError:
            sk = np.inf
        shells.append(sk)
        if not np.isfinite(sk):
            if len(ratios) >= 2 and min(ratios[-2:]) > growth_ratio:
                return MembershipResult("non-member", shells=tuple(shells), note=(
                    f"integrand overflowed at shell {k} after geometric growth"))
            return MembershipResult("indeterminate", shells=tuple(shells),
                                    note=f"integrand not finite on shell {k}")
        if len(shells) >= 2:
            prev = shells[-2]
            ratios.append(sk / prev if prev > 0.0 else (np.inf if sk > 0.0 else 0.0))
        total += sk
        if len(shells) >= 2 and max(shells[-2:]) <= 1e-12 * (1.0 + total):
            return MembershipResult("member", total, err + sk, tuple(shells),
                                    note="tail numerically zero")
        if len(ratios) >= 4:
            last = ratios[-4:]
            if max(last) <= decay_ratio and k + 1 >= min_shells:
                r = max(last)
                tail = sk * r / (1.0 - r)
                return MembershipResult("member", total + tail, err + tail,
                                        tuple(shells), note="geometric tail bound")
            if min(last) >= growth_ratio:
                return MembershipResult("non-member", shells=tuple(shells), note=(
                    f"shell integrals grow geometrically (last ratio {last[-1]:.3g})"))
    return MembershipResult("indeterminate", shells=tuple(shells),
                            note=f"no verdict after {max_shells} shells")


# --------------------------------------------------------------------------
# Temperedness
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TemperedResult:
    tempered: bool
    r: float | None
    membership: MembershipResult | None
    attempts: tuple[tuple[float, str], ...]
    note: str = ""


def tempered_test(chars: Characteristics, r_max: float = 64.0) -> TemperedResult:
    """Search ``r in {1/2, 1, 2, 4, ...}`` for ``(1 + |x|^2)^{-r}`` membership.

    A miss is reported as "not tempered up to r_max" — the bounded search can
    never prove non-temperedness.
    """
    attempts: list[tuple[float, str]] = []
    r = 0.5
    while r <= r_max:
        res = lm_membership(chars, PolynomialDecay(r, chars.dim))
        attempts.append((r, res.verdict))
        if res.verdict == "member":
            return TemperedResult(True, r, res, tuple(attempts))
        r *= 2.0
    return TemperedResult(False, None, None, tuple(attempts),
                          note=f"not tempered up to r_max={r_max:g}")


# --------------------------------------------------------------------------
# Stationarity
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StationarityResult:
    stationary: bool
    drift: float | None = None
    gaussian_variance: float | None = None
    modulation: float | None = None
    kernel: JumpKernel | None = None
    witness: tuple | None = None      # (point a, point b, component name)


def _probe_points(dim: int) -> np.ndarray:
    vals = [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0] if dim <= 3 else [0.0, 1.0, -2.0]
    grids = np.meshgrid(*([np.asarray(vals)] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def stationarity_check(chars: Characteristics, tol: float = 1e-9) -> StationarityResult:
    """Constant densities and no atoms <=> spatially homogeneous law."""
    for comp, name in ((chars.gamma, "gamma atom"), (chars.sigma, "sigma atom")):
        if comp is not None and comp.atoms:
            p = comp.atoms[0].point
            return StationarityResult(False, witness=(p, p, name))
    pts = _probe_points(chars.dim)
    fields = (("drift density", chars.drift_density),
              ("gaussian density", chars.diffusion_density),
              ("jump modulation", chars.jump_modulation))
    consts = []
    for name, fn in fields:
        vals = fn(pts)
        lo, hi = int(np.argmin(vals)), int(np.argmax(vals))
        if vals[hi] - vals[lo] > tol * (1.0 + np.abs(vals).max()):
            return StationarityResult(
                False, witness=(tuple(pts[lo]), tuple(pts[hi]), name))
        consts.append(float(vals[0]))
    return StationarityResult(
        True, drift=consts[0], gaussian_variance=consts[1], modulation=consts[2],
        kernel=chars.nu.kernel if chars.nu is not None else None)


# --------------------------------------------------------------------------
# Besov classification
# --------------------------------------------------------------------------

def besov_classify(alpha: float, dim: int, p: float, tau: float,
                   rho_growth: float) -> str:
    """Weighted-Besov verdict for the stationary symmetric stable field.

    Inside iff tau < d(1/alpha - 1) and rho_growth < -d/(p ^ alpha), outside
    on a strict violation of either, boundary-indeterminate on equality.
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (0, 2)")
    if dim < 1 or int(dim) != dim:
        raise ValueError("dim must be a positive integer")
    if not (p == np.inf or 0.0 < p < 2.0 or (p > 0 and p == int(p) and int(p) % 2 == 0)):
        raise ValueError("p must lie in (0,2), be a positive even integer, or be inf")
    if not (np.isfinite(tau) and np.isfinite(rho_growth)):
        raise ValueError("tau and rho_growth must be finite")
    smooth_edge = dim * (1.0 / alpha - 1.0)
    weight_edge = -dim / min(p, alpha)
    if tau > smooth_edge or rho_growth > weight_edge:
        return "outside"
    if tau < smooth_edge and rho_growth < weight_edge:
        return "inside"
    return "boundary-indeterminate"
