"""Pathwise stochastic integrals against a sampled field and their laws.

``integrate_simple`` is the defining linear combination over disjoint regions;
``integrate`` extends it to smooth integrands pathwise: drift and compensator
by quadrature, jumps by direct summation, and the white-noise pairing by
midpoint sums over a dyadically refined cell mesh (the mesh is exactly a
simple-function approximation, and cell values stay additive under
refinement, so the limit is the defining one).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import lm_membership
from .characteristics import Characteristics
from .funcs import IndicatorFunction, SimpleFunction
from .kernels import JumpKernel
from .quadrature import box_integral
from .regions import Box, Region

_PUSH_GRID_DECADES = (-8, 8)
_PUSH_PER_DECADE = 8


class NotIntegrableError(ValueError):
    """The integrand is not in the membership class of the measure."""


@dataclass(frozen=True)
class IntegralValue:
    value: float
    error: float

    def __float__(self) -> float:
        return self.value


def integrate_simple(real, f: SimpleFunction, t: float,
                     region: Region | None = None) -> float:
    """``sum_k coef_k M(t, region & A_k)`` evaluated pathwise-exactly."""
    region = real.config.window if region is None else region
    total = 0.0
    for coef, part in f.terms:
        piece = region.intersect(part)
        if not piece.is_empty:
            total += coef * real.evaluate(t, piece)
    return total


def _region_quad(fn, region: Region) -> tuple[float, float]:
    val = err = 0.0
    for b in region.boxes:
        v, e = box_integral(fn, b)
        val += v
        err += e
    return val, err


def _pairing(field, f, t: float, box: Box, max_level: int,
             tol: float) -> tuple[float, float]:
    """Midpoint pairing sum against white-noise cells, dyadically refined."""
    prev = None
    err = np.inf
    value = 0.0
    for level in range(max_level + 1):
        edges = [np.linspace(lo, hi, 2 ** level + 1)
                 for lo, hi in zip(box.lo, box.hi)]
        cells = field.grid_values(t, box, edges)
        centers = [0.5 * (e[:-1] + e[1:]) for e in edges]
        pts = np.stack(np.meshgrid(*centers, indexing="ij"), axis=-1).reshape(-1, box.dim)
        value = float((f(pts) * cells.ravel()).sum())
        if prev is not None:
            err = abs(value - prev)
            if err <= max(tol, 1e-12 * abs(value)):
                break
        prev = value
    return value, err if np.isfinite(err) else 0.0


def integrate(real, f, t: float, region: Region | None = None, *,
              check_membership: bool = False, pairing_tol: float = 1e-9,
              max_level: int | None = None) -> IntegralValue:
    """Pathwise ``int f dM(t, .)`` over the window (or a sub-region)."""
    chars: Characteristics = real.chars
    region = real.config.window if region is None else region
    support = getattr(f, "support_region", None)
    domain = region if support is None else region.intersect(support)
    if check_membership:
        verdict = lm_membership(chars, f, None if support is None else domain)
        if verdict.verdict == "non-member":
            raise NotIntegrableError(f"integrand is not integrable: {verdict.note}")
    if domain.is_empty:
        return IntegralValue(0.0, 0.0)
    real._check_query(t, domain, 0.0)
    if max_level is None:
        max_level = {1: 8, 2: 6}.get(chars.dim, 4)

    value = err = 0.0
    # drift
    if chars.gamma is not None:
        v, e = _region_quad(lambda x: f(x) * chars.drift_density(x), domain)
        for point, wg, _ in chars.atoms_in(domain):
            v += float(f(np.asarray(point)[None, :])[0]) * wg
        value += t * v
        err += t * e
    # jumps and their compensator
    if chars.nu is not None:
        i1 = int(np.searchsorted(real.jump_times, t, side="right"))
        locs = real.jump_locations[:i1]
        mask = domain.contains(locs)
        value += float((f(locs[mask]) * real.jump_sizes[:i1][mask]).sum()) \
            if mask.any() else 0.0
        eps = real.config.eps
        if eps < 1.0:
            rate = chars.nu.kernel.annulus_first_moment(eps, 1.0)
            if rate != 0.0:
                v, e = _region_quad(lambda x: f(x) * chars.jump_modulation(x), domain)
                value -= t * rate * v
                err += t * abs(rate) * e
    # white-noise pairings
    for field in (real.gaussian, real.substitute):
        if field is None or getattr(field, "_sigma", None) is None:
            continue
        for b in domain.boxes:
            v, e = _pairing(field, f, t, b, max_level, pairing_tol)
            value += v
            err += e
    return IntegralValue(value, err)


def cylindrical_action(real, f, t: float) -> IntegralValue:
    """``L(t)f`` — the integral of f against the measure at time t."""
    if isinstance(f, SimpleFunction):
        return IntegralValue(integrate_simple(real, f, t), 0.0)
    return integrate(real, f, t)


# --------------------------------------------------------------------------
# Cylindrical characteristics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PushforwardMixture:
    """Image of the jump measure as a weighted mixture of scaled kernels."""

    parts: tuple[tuple[float, JumpKernel], ...]

    def compact_mass(self) -> float:
        return sum(w * k.quad_mass() for w, k in self.parts)

    def tail_mass(self, s: float) -> float:
        return sum(w * k.tail_mass(s) for w, k in self.parts)


@dataclass(frozen=True)
class PushforwardTable:
    """Tail-mass tabulation of the image measure on a log grid."""

    s_grid: np.ndarray        # increasing, positive
    tails: np.ndarray         # mu({|v| > s}) at the grid points

    def tail_mass(self, s: float) -> float:
        if s >= self.s_grid[-1]:
            return 0.0
        if s <= self.s_grid[0]:
            return float(self.tails[0])
        return float(np.exp(np.interp(np.log(s), np.log(self.s_grid),
                                      np.log(np.maximum(self.tails, 1e-300)))))

    def compact_mass(self) -> float:
        """``int (s^2 ^ 1) d mu = int_0^1 2 s mu(|v| > s) ds`` from the table."""
        total = 0.0
        grid, tails = self.s_grid, self.tails
        for a, b, ta, tb in zip(grid[:-1], grid[1:], tails[:-1], tails[1:]):
            if a >= 1.0:
                break
            if ta <= 0.0 or tb <= 0.0:
                continue
            # log-log power interpolation on [a, b], integrated up to min(b, 1)
            g = np.log(tb / ta) / np.log(b / a)
            top = min(b, 1.0)
            if abs(g + 2.0) < 1e-9:
                total += 2.0 * ta * a ** (-g) * np.log(top / a)
            else:
                total += 2.0 * ta * a ** (-g) * (top ** (g + 2.0) - a ** (g + 2.0)) / (g + 2.0)
        # power continuation below the grid
        if tails[0] > 0.0 and tails[1] > 0.0 and grid[0] < 1.0:
            g = np.log(tails[1] / tails[0]) / np.log(grid[1] / grid[0])
            if g + 2.0 > 1e-9:
                total += 2.0 * tails[0] * grid[0] ** 2 / (g + 2.0)
        return float(total)


@dataclass(frozen=True)
class CylindricalCharacteristics:
    a: float
    qf: float
    pushforward: PushforwardMixture | PushforwardTable
    a_error: float = 0.0
    qf_error: float = 0.0


def _expanding_quad(fn, dim: int, tol: float = 1e-10) -> tuple[float, float]:
    """Integral over R^d by expanding cubes, for decaying integrands."""
    val, err = _region_quad(fn, Region.from_box(Box((-1.0,) * dim, (1.0,) * dim)))
    for k in range(30):
        inner = Box((-2.0 ** k,) * dim, (2.0 ** k,) * dim)
        outer = Box((-2.0 ** (k + 1),) * dim, (2.0 ** (k + 1),) * dim)
        inc = 0.0
        for b in outer.subtract(inner):
            v, e = box_integral(fn, b)
            inc += v
            err += e
        val += inc
        if abs(inc) <= max(tol, 1e-8 * abs(val)):
            return val, err
    raise ArithmeticError("correction integral did not converge on expanding cubes")


def cylindrical_characteristics(chars: Characteristics, f) -> CylindricalCharacteristics:
    """The triple (a(f), <Qf,f>, image of nu under (x,y) -> f(x)y)."""
    if isinstance(f, IndicatorFunction):
        f = SimpleFunction(((1.0, f.region),))
    simple = isinstance(f, SimpleFunction)
    support = f.support_region if simple else getattr(f, "support_region", None)

    def quad(fn):
        if support is not None:
            return _region_quad(fn, support)
        return _expanding_quad(fn, chars.dim)

    # a(f) = int f d gamma + int m(x) f(x) int y (1{|f y|<=1} - 1{|y|<=1}) nu
    a_val = a_err = 0.0
    if chars.gamma is not None:
        v, e = quad(lambda x: f(x) * chars.drift_density(x))
        a_val, a_err = v, e
        for atom in chars.gamma.atoms:
            a_val += float(f(np.asarray(atom.point)[None, :])[0]) * atom.weight
    if chars.nu is not None:
        kern = chars.nu.kernel

        def corr(x):
            fx = f(x)
            return chars.jump_modulation(x) * fx * kern.indicator_moment_diff(fx)

        v, e = quad(corr)
        a_val += v
        a_err += e
    # qf
    qf_val = qf_err = 0.0
    if chars.sigma is not None:
        v, e = quad(lambda x: f(x) ** 2 * chars.diffusion_density(x))
        qf_val, qf_err = v, e
        for atom in chars.sigma.atoms:
            qf_val += float(f(np.asarray(atom.point)[None, :])[0]) ** 2 * atom.weight
    if qf_val < -1e-9:
        raise ArithmeticError("quadratic form came out negative")
    qf_val = max(qf_val, 0.0)
    # pushforward
    if chars.nu is None:
        push = PushforwardMixture(())
    elif simple:
        parts = []
        for coef, part in f.terms:
            if coef == 0.0:
                continue
            mass, _ = chars.nu.spatial_mass(part)
            parts.append((mass, chars.nu.kernel.scale_image(coef)))
        push = PushforwardMixture(tuple(parts))
    else:
        lo, hi = _PUSH_GRID_DECADES
        s_grid = np.logspace(lo, hi, (hi - lo) * _PUSH_PER_DECADE + 1)
        kern = chars.nu.kernel
        tails = np.empty_like(s_grid)
        for j, s in enumerate(s_grid):
            def tail_at(x, s=s):
                fx = f(x)
                out = np.zeros(len(fx))
                nz = fx != 0.0
                if nz.any():
                    with np.errstate(over="ignore"):  # s/|f| -> inf means tail 0
                        out[nz] = np.array([kern.tail_mass(s / abs(v)) for v in fx[nz]])
                return out * chars.jump_modulation(x)

            tails[j], _ = quad(tail_at)
        push = PushforwardTable(s_grid, tails)
    if not np.isfinite(push.compact_mass()):
        raise ArithmeticError("pushforward has infinite truncated second moment")
    return CylindricalCharacteristics(a_val, qf_val, push, a_err, qf_err)


# --------------------------------------------------------------------------
# Empirical characteristic function
# --------------------------------------------------------------------------

def empirical_cf(samples, u_grid) -> tuple[np.ndarray, float]:
    """``(1/n) sum exp(i u X_j)`` per u, with Hoeffding-type radius 2/sqrt(n)."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples")
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    out = np.empty(u.shape, dtype=complex)
    step = max(1, int(2e7 // max(x.size, 1)))
    for j0 in range(0, u.size, step):
        block = u[j0:j0 + step]
        out[j0:j0 + step] = np.exp(1j * block[:, None] * x[None, :]).mean(axis=1)
    return out, 2.0 / np.sqrt(x.size)
