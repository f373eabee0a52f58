"""White-noise Gaussian component of a field realization.

Values live on a tensor grid of (time x space) cells per window box.  Each
root cell value is N(0, mass); query boundaries that fall inside a cell
trigger a conditional split: the left share of a cell with value v and
sub-masses (m_l, m_r) is drawn from N(v m_l/m, m_l m_r/m) and the right share
is defined as v minus the left share.  Additivity over the grid is therefore
exact by construction, no matter how often the grid is refined.

Refinement draws are consumed from the realization's dedicated stream in
insertion order, so identical query sequences replay bit-identically.
"""

from __future__ import annotations

import math

import numpy as np

from .characteristics import DiffusionComponent
from .quadrature import box_integral
from .regions import Box, Region


class WhiteNoiseField:
    """Gaussian part ``W((t0, t1] x A)`` of a sampled field."""

    def __init__(self, sigma: DiffusionComponent | None, window: Region,
                 horizon: float, seed_seq: np.random.SeedSequence):
        self._sigma = sigma
        self._window = window
        self._horizon = float(horizon)
        self._rng = np.random.default_rng(seed_seq)
        self._patches: list[dict] = []
        if sigma is None:
            return
        for box in window.boxes:
            smass = np.array(self._space_mass(box)).reshape((1,) * box.dim)
            mass = self._horizon * float(smass.ravel()[0])
            value = self._rng.normal(0.0, math.sqrt(mass)) if mass > 0.0 else 0.0
            self._patches.append({
                "box": box,
                "axes": [np.array([0.0, self._horizon])]
                        + [np.array([lo, hi]) for lo, hi in zip(box.lo, box.hi)],
                "values": np.full((1,) * (1 + box.dim), value),
                "smass": smass,
            })

    # -- masses ----------------------------------------------------------
    def _space_mass(self, box: Box) -> float:
        dens = self._sigma.density
        if dens.is_constant:
            m = dens.const * box.volume
        else:
            m, _ = box_integral(dens, box)
        for a in self._sigma.atoms:
            if box.contains(np.asarray(a.point)[None, :])[0]:
                m += a.weight
        if m < -1e-12:
            raise ValueError("gaussian intensity integrated to a negative mass")
        return max(m, 0.0)

    def _cell_box(self, patch: dict, space_idx: tuple[int, ...]) -> Box:
        axes = patch["axes"]
        lo = tuple(axes[i + 1][j] for i, j in enumerate(space_idx))
        hi = tuple(axes[i + 1][j + 1] for i, j in enumerate(space_idx))
        return Box(lo, hi)

    # -- refinement ------------------------------------------------------
    def _insert(self, axis: int, coord: float) -> None:
        for patch in self._patches:
            planes = patch["axes"][axis]
            if not planes[0] < coord < planes[-1]:
                continue
            j = int(np.searchsorted(planes, coord))
            if planes[j] == coord:
                continue
            values = patch["values"]
            sl = [slice(None)] * values.ndim
            sl[axis] = slice(j - 1, j)
            v = values[tuple(sl)]
            if axis == 0:
                t_lo, t_hi = planes[j - 1], planes[j]
                frac = (coord - t_lo) / (t_hi - t_lo)
                ratio = frac
                var = patch["smass"][None, ...] * ((coord - t_lo) * (t_hi - coord)
                                                   / (t_hi - t_lo))
            else:
                k = axis - 1
                ssl = [slice(None)] * patch["smass"].ndim
                ssl[k] = slice(j - 1, j)
                sm = patch["smass"][tuple(ssl)]
                dens = self._sigma.density
                if dens.is_constant and not self._sigma.atoms:
                    lo_c, hi_c = planes[j - 1], planes[j]
                    sm_l = sm * ((coord - lo_c) / (hi_c - lo_c))
                else:
                    sm_l = np.empty_like(sm)
                    for idx in np.ndindex(sm.shape):
                        full = list(idx)
                        full[k] = j - 1
                        cell = self._cell_box(patch, tuple(full))
                        left = Box(cell.lo,
                                   tuple(coord if i == k else h
                                         for i, h in enumerate(cell.hi)))
                        sm_l[idx] = self._space_mass(left)
                sm_r = sm - sm_l
                with np.errstate(divide="ignore", invalid="ignore"):
                    ratio = np.where(sm > 0.0, sm_l / sm, 0.0)[None, ...]
                    var = np.where(sm > 0.0, sm_l * sm_r / sm, 0.0)[None, ...]
                dt = np.diff(patch["axes"][0]).reshape((-1,) + (1,) * (values.ndim - 1))
                var = np.maximum(var, 0.0) * dt
                new_smass = np.concatenate(
                    [patch["smass"][tuple(_upto(k, j - 1, sm))], sm_l, sm_r,
                     patch["smass"][tuple(_beyond(k, j, sm))]], axis=k)
                patch["smass"] = new_smass
            z = self._rng.standard_normal(v.shape)
            v_left = v * ratio + np.sqrt(var) * z
            v_right = v - v_left
            before = [slice(None)] * values.ndim
            before[axis] = slice(0, j - 1)
            after = [slice(None)] * values.ndim
            after[axis] = slice(j, None)
            patch["values"] = np.concatenate(
                [values[tuple(before)], v_left, v_right, values[tuple(after)]],
                axis=axis)
            patch["axes"][axis] = np.insert(planes, j, coord)

    def _ensure_planes(self, t0: float, t1: float, boxes) -> None:
        self._insert(0, t0)
        self._insert(0, t1)
        for b in boxes:
            for i in range(b.dim):
                self._insert(i + 1, b.lo[i])
                self._insert(i + 1, b.hi[i])

    # -- queries ---------------------------------------------------------
    def value(self, t1: float, region: Region | Box, t0: float = 0.0) -> float:
        """``W((t0, t1] x region)``, exact over the refined grid."""
        if self._sigma is None or t1 <= t0:
            return 0.0
        boxes = region.boxes if isinstance(region, Region) else (region,)
        self._ensure_planes(t0, t1, boxes)
        total = 0.0
        for patch in self._patches:
            for b in boxes:
                piece = patch["box"].intersect(b)
                if piece is None:
                    continue
                idx = [_span(patch["axes"][0], t0, t1)]
                idx += [_span(patch["axes"][i + 1], piece.lo[i], piece.hi[i])
                        for i in range(piece.dim)]
                total += float(patch["values"][tuple(idx)].sum())
        return total

    def grid_values(self, t1: float, box: Box, edges: list[np.ndarray],
                    t0: float = 0.0) -> np.ndarray:
        """Cell values of ``W((t0,t1] x .)`` over a tensor mesh inside one box.

        ``edges[i]`` are the mesh edge coordinates along space axis i
        (including both endpoints).  The box must lie inside a single window
        part.
        """
        shape = tuple(len(e) - 1 for e in edges)
        if self._sigma is None or t1 <= t0:
            return np.zeros(shape)
        self._ensure_planes(t0, t1, (box,))
        for i, e in enumerate(edges):
            for c in e:
                self._insert(i + 1, float(c))
        for patch in self._patches:
            if patch["box"].intersect(box) is None:
                continue
            if not all(patch["box"].lo[i] <= box.lo[i] and box.hi[i] <= patch["box"].hi[i]
                       for i in range(box.dim)):
                raise ValueError("mesh box must lie within a single window part")
            arr = patch["values"][_span(patch["axes"][0], t0, t1)].sum(axis=0)
            for i, e in enumerate(edges):
                planes = patch["axes"][i + 1]
                lo = int(np.searchsorted(planes, e[0]))
                starts = np.searchsorted(planes, e[:-1]) - lo
                arr = np.add.reduceat(
                    arr[(slice(None),) * i + (slice(lo, int(np.searchsorted(planes, e[-1]))),)],
                    starts, axis=i)
            return arr
        return np.zeros(shape)


def _span(planes: np.ndarray, lo: float, hi: float) -> slice:
    return slice(int(np.searchsorted(planes, lo)), int(np.searchsorted(planes, hi)))


def _upto(axis: int, j: int, ref: np.ndarray) -> tuple:
    sl = [slice(None)] * ref.ndim
    sl[axis] = slice(0, j)
    return tuple(sl)


def _beyond(axis: int, j: int, ref: np.ndarray) -> tuple:
    sl = [slice(None)] * ref.ndim
    sl[axis] = slice(j, None)
    return tuple(sl)
