"""Characteristics of a time-homogeneous measure-valued Levy noise.

The noise is described by a triple (gamma, Sigma, nu) over a spatial domain:

* ``gamma`` — a signed drift measure: Lebesgue density plus finitely many
  signed atoms,
* ``Sigma`` — a nonnegative diffusion measure of the same shape,
* ``nu``   — a jump intensity ``m(x) dx (x) kernel(dy)``: a spatially
  modulated one-dimensional jump kernel.

Set evaluations of the noise at time t are infinitely divisible with triple
``(t gamma(A), t Sigma(A), t nu(A, .))``.  The module computes the control
measure, the Levy symbol of set/function evaluations, and the Laplace
exponent where it exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .kernels import JumpKernel, kernel_from_config
from .quadrature import box_integral, region_integral
from .regions import Box, Region


class DivergentControlMeasureError(ArithmeticError):
    """The control measure of the requested region is not finite."""


class SymbolDivergentError(ArithmeticError):
    """The jump integral of a Levy symbol failed to converge absolutely."""


@dataclass(frozen=True)
class Atom:
    point: tuple[float, ...]
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(c) for c in self.point))
        object.__setattr__(self, "weight", float(self.weight))
        if not all(np.isfinite(self.point)) or not np.isfinite(self.weight):
            raise ValueError("atom point and weight must be finite")


class Density:
    """Spatial density: a nonnegative-or-signed constant or a callable on (n, d)."""

    def __init__(self, value: float | Callable):
        if callable(value):
            self.fn = value
            self.const = None
        else:
            self.const = float(value)
            self.fn = None

    @property
    def is_constant(self) -> bool:
        return self.const is not None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.is_constant:
            return np.full(x.shape[0], self.const)
        return np.asarray(self.fn(x), dtype=float).reshape(x.shape[0])

    def integral(self, region: Region, absolute: bool = False) -> tuple[float, float]:
        """(integral over the region, quadrature error bound)."""
        if self.is_constant:
            c = abs(self.const) if absolute else self.const
            return c * region.volume, 0.0
        if absolute:
            return region_integral(lambda p: np.abs(self(p)), region)
        return region_integral(self, region)

    def to_config(self):
        if not self.is_constant:
            raise ValueError("callable densities are code-only; cannot serialize")
        return self.const


def _as_density(value) -> Density:
    return value if isinstance(value, Density) else Density(value)


@dataclass(frozen=True)
class DriftComponent:
    """Signed measure: density + atoms."""

    density: Density = field(default_factory=lambda: Density(0.0))
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "density", _as_density(self.density))
        object.__setattr__(self, "atoms", tuple(self.atoms))

    def measure(self, region: Region) -> float:
        val, _ = self.density.integral(region)
        return val + sum(a.weight for a in self.atoms
                         if region.contains(np.asarray(a.point))[0])

    def total_variation(self, region: Region) -> tuple[float, float]:
        val, err = self.density.integral(region, absolute=True)
        val += sum(abs(a.weight) for a in self.atoms
                   if region.contains(np.asarray(a.point))[0])
        return val, err


@dataclass(frozen=True)
class DiffusionComponent(DriftComponent):
    """Nonnegative measure: density + atoms with weights >= 0."""

    def __post_init__(self):
        super().__post_init__()
        if any(a.weight < 0 for a in self.atoms):
            raise ValueError("diffusion atoms must have nonnegative weights")
        if self.density.is_constant and self.density.const < 0:
            raise ValueError("diffusion density must be nonnegative")


@dataclass(frozen=True)
class JumpComponent:
    """Jump intensity ``modulation(x) dx (x) kernel(dy)``."""

    kernel: JumpKernel
    modulation: Density = field(default_factory=lambda: Density(1.0))

    def __post_init__(self):
        object.__setattr__(self, "modulation", _as_density(self.modulation))
        if self.modulation.is_constant and self.modulation.const < 0:
            raise ValueError("jump modulation must be nonnegative")

    def spatial_mass(self, region: Region) -> tuple[float, float]:
        return self.modulation.integral(region)


@dataclass(frozen=True)
class ControlMeasureValue:
    """Control-measure evaluation split into its three contributions."""

    drift_tv: float
    gaussian_mass: float
    jump_mass: float
    error_bound: float = 0.0

    @property
    def value(self) -> float:
        return self.drift_tv + self.gaussian_mass + self.jump_mass


@dataclass(frozen=True)
class LevySymbolValue:
    """Levy symbol of an integral evaluation, with tracked contributions.

    ``value = t * (i u drift_integral - u^2/2 gaussian_integral + jump_integral)``.
    """

    value: complex
    drift_integral: float
    gaussian_integral: float
    jump_integral: complex
    u: float
    t: float

    @property
    def cf(self) -> complex:
        """Characteristic-function value ``exp(value)``."""
        return complex(np.exp(self.value))


@dataclass(frozen=True)
class Characteristics:
    """The (gamma, Sigma, nu) triple over R^d."""

    dim: int
    gamma: DriftComponent | None = None
    sigma: DiffusionComponent | None = None
    nu: JumpComponent | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.gamma is None and self.sigma is None and self.nu is None:
            raise ValueError("at least one characteristic component is required")

    # --- structure -----------------------------------------------------
    @property
    def atomless(self) -> bool:
        for comp in (self.gamma, self.sigma):
            if comp is not None and comp.atoms:
                return False
        return True

    def atoms_in(self, region: Region) -> list[tuple[tuple[float, ...], float, float]]:
        """(point, gamma weight, sigma weight) for atoms inside the region."""
        merged: dict[tuple[float, ...], list[float]] = {}
        if self.gamma is not None:
            for a in self.gamma.atoms:
                if region.contains(np.asarray(a.point))[0]:
                    merged.setdefault(a.point, [0.0, 0.0])[0] += a.weight
        if self.sigma is not None:
            for a in self.sigma.atoms:
                if region.contains(np.asarray(a.point))[0]:
                    merged.setdefault(a.point, [0.0, 0.0])[1] += a.weight
        return [(p, w[0], w[1]) for p, w in merged.items()]

    # --- densities -----------------------------------------------------
    def drift_density(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        if self.gamma is None:
            return np.zeros(x.shape[0])
        return self.gamma.density(x)

    def diffusion_density(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        if self.sigma is None:
            return np.zeros(x.shape[0])
        return self.sigma.density(x)

    def jump_modulation(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        if self.nu is None:
            return np.zeros(x.shape[0])
        return self.nu.modulation(x)

    def control_density(self, x: np.ndarray) -> np.ndarray:
        """Lebesgue density of the control measure (atoms excluded)."""
        out = np.abs(self.drift_density(x)) + self.diffusion_density(x)
        if self.nu is not None:
            out = out + self.jump_modulation(x) * self.nu.kernel.quad_mass()
        return out

    # --- measures ------------------------------------------------------
    def gamma_measure(self, region: Region) -> float:
        return 0.0 if self.gamma is None else self.gamma.measure(region)

    def sigma_measure(self, region: Region) -> float:
        return 0.0 if self.sigma is None else self.sigma.measure(region)

    def control_measure(self, region: Region) -> ControlMeasureValue:
        """``|gamma|_TV(A) + Sigma(A) + int_A int (1 ^ y^2) nu``."""
        if region.dim != self.dim:
            raise ValueError("region dimension mismatch")
        err = 0.0
        try:
            if self.gamma is not None:
                drift_tv, e = self.gamma.total_variation(region)
                err += e
            else:
                drift_tv = 0.0
            gaussian = self.sigma_measure(region)
            if self.nu is not None:
                mass, e = self.nu.spatial_mass(region)
                jump = mass * self.nu.kernel.quad_mass()
                err += e * self.nu.kernel.quad_mass()
            else:
                jump = 0.0
        except ArithmeticError as exc:
            raise DivergentControlMeasureError(str(exc)) from exc
        for v in (drift_tv, gaussian, jump):
            if not np.isfinite(v):
                raise DivergentControlMeasureError(
                    "control measure is not finite on the region")
        return ControlMeasureValue(drift_tv, gaussian, jump, err)

    # --- symbols -------------------------------------------------------
    def levy_symbol(self, f, u: float, t: float = 1.0,
                    eps: float = 0.0) -> LevySymbolValue:
        """Levy symbol of ``int f dM(t, .)`` at frequency u.

        ``f`` is a simple function (terms of (coefficient, region)) or a test
        function with bounded support.  With ``eps > 0`` the jump integral is
        restricted to ``|y| > eps``, matching a truncated simulation.
        """
        u = float(u)
        t = float(t)
        drift = gauss = 0.0
        jump = 0.0 + 0.0j
        terms = getattr(f, "terms", None)
        if terms is not None:
            for coef, region in terms:
                drift += coef * self.gamma_measure(region)
                gauss += coef * coef * self.sigma_measure(region)
                if self.nu is not None and u != 0.0:
                    mass, _ = self.nu.spatial_mass(region)
                    jump += mass * self.nu.kernel.cf_integrand(u * coef, eps)
        else:
            support = getattr(f, "support_region", None)
            if support is None or support.is_empty:
                raise ValueError(
                    "levy_symbol needs a simple function or a test function "
                    "with bounded support")
            if self.gamma is not None:
                for b in support.boxes:
                    drift += box_integral(
                        lambda p: np.asarray(f(p)) * self.gamma.density(p), b)[0]
                for a in self.gamma.atoms:
                    if support.contains(np.asarray(a.point))[0]:
                        drift += a.weight * float(np.asarray(f(np.asarray(a.point)[None, :]))[0])
            if self.sigma is not None:
                for b in support.boxes:
                    gauss += box_integral(
                        lambda p: np.asarray(f(p)) ** 2 * self.sigma.density(p), b)[0]
                for a in self.sigma.atoms:
                    if support.contains(np.asarray(a.point))[0]:
                        gauss += a.weight * float(np.asarray(f(np.asarray(a.point)[None, :]))[0]) ** 2
            if self.nu is not None and u != 0.0:
                kern = self.nu.kernel
                for b in support.boxes:
                    def jr(p):
                        c = u * np.asarray(f(p))
                        return self.nu.modulation(p) * np.real(kern.cf_integrand(c, eps))

                    def ji(p):
                        c = u * np.asarray(f(p))
                        return self.nu.modulation(p) * np.imag(kern.cf_integrand(c, eps))

                    jump += box_integral(jr, b)[0]
                    if not kern.symmetric:
                        jump += 1j * box_integral(ji, b)[0]
        if not (np.isfinite(drift) and np.isfinite(gauss)
                and np.isfinite(jump.real) and np.isfinite(jump.imag)):
            raise SymbolDivergentError("symbol integrals failed to converge")
        value = t * (1j * u * drift - 0.5 * u * u * gauss + jump)
        return LevySymbolValue(complex(value), drift, gauss, complex(jump), u, t)

    def laplace_exponent(self, region: Region, u: float, t: float = 1.0) -> float:
        """``log E[e^{-u M(t, A)}]`` where it exists (light negative tail)."""
        u = float(u)
        val = -u * self.gamma_measure(region) \
            + 0.5 * u * u * self.sigma_measure(region)
        if self.nu is not None and u != 0.0:
            mass, _ = self.nu.spatial_mass(region)
            val += mass * float(self.nu.kernel.laplace_integrand(u))
        return t * val

    # --- serialization -------------------------------------------------
    def to_config(self) -> dict:
        def comp(c: DriftComponent | None):
            if c is None:
                return None
            out = {"density": c.density.to_config()}
            if c.atoms:
                out["atoms"] = [{"point": list(a.point), "weight": a.weight}
                                for a in c.atoms]
            return out

        cfg: dict = {"dimension": self.dim}
        if self.gamma is not None:
            cfg["gamma"] = comp(self.gamma)
        if self.sigma is not None:
            cfg["sigma"] = comp(self.sigma)
        if self.nu is not None:
            cfg["nu"] = {"kernel": self.nu.kernel.to_config(),
                         "modulation": self.nu.modulation.to_config()}
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "Characteristics":
        def comp(block, klass):
            if block is None:
                return None
            atoms = tuple(Atom(tuple(a["point"]), a["weight"])
                          for a in block.get("atoms", ()))
            return klass(Density(block.get("density", 0.0)), atoms)

        nu = None
        if "nu" in cfg:
            nu = JumpComponent(kernel_from_config(cfg["nu"]["kernel"]),
                               Density(cfg["nu"].get("modulation", 1.0)))
        return cls(
            dim=int(cfg["dimension"]),
            gamma=comp(cfg.get("gamma"), DriftComponent),
            sigma=comp(cfg.get("sigma"), DiffusionComponent),
            nu=nu,
        )
