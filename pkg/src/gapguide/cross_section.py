"""Waveguide cross-sections: the transverse domain of the defect strip.

A cross-section is a bounded domain in 1D (interval, scalar-analog path) or
2D.  It provides membership tests, boundary distances, and boundary-crossing
fractions along segments, which the finite-difference solvers in
:mod:`gapguide.xsection` use for curved-boundary stencil corrections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import UnsupportedGeometryError, ValidationError


class CrossSection:
    """Base class.  Subclasses are immutable value objects."""

    ndim: int

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean membership for points of shape (..., ndim)."""
        raise NotImplementedError

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def inradius(self) -> float:
        raise NotImplementedError

    def diameter(self) -> float:
        lo, hi = self.bbox()
        return float(np.linalg.norm(hi - lo))

    def scale(self, l: float) -> "CrossSection":
        raise NotImplementedError

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        """Distance to the boundary, positive inside, negative outside."""
        raise NotImplementedError

    def check_simply_connected(self) -> None:
        """Raise UnsupportedGeometryError if the domain has holes or pieces."""
        # analytic shapes are convex; masks override

    def crossing(self, q: np.ndarray, p: np.ndarray, tol: float = 1e-13) -> float:
        """Fraction t in (0, 1] where segment q -> p first leaves the domain.

        q must be inside and p outside; default is bisection on `contains`.
        """
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        a, b = 0.0, 1.0
        for _ in range(80):
            m = 0.5 * (a + b)
            if self.contains(q + m * (p - q)):
                a = m
            else:
                b = m
            if b - a < tol:
                break
        return 0.5 * (a + b)


@dataclass(frozen=True)
class Interval(CrossSection):
    """1D cross-section (-half_width, half_width), for the scalar path."""

    half_width: float = 1.0
    center: float = 0.0
    ndim = 1

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValidationError("interval half_width must be positive")

    def contains(self, points):
        x = np.asarray(points, dtype=float)
        if x.ndim and x.shape[-1] == 1:
            x = x[..., 0]
        return np.abs(x - self.center) < self.half_width

    def bbox(self):
        c, w = self.center, self.half_width
        return np.array([c - w]), np.array([c + w])

    def inradius(self):
        return self.half_width

    def scale(self, l):
        return Interval(self.half_width * l, self.center * l)

    def boundary_distance(self, points):
        x = np.asarray(points, dtype=float)
        if x.ndim and x.shape[-1] == 1:
            x = x[..., 0]
        return self.half_width - np.abs(x - self.center)


@dataclass(frozen=True)
class Disk(CrossSection):
    radius: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)
    ndim = 2

    def __post_init__(self):
        if self.radius <= 0:
            raise ValidationError("disk radius must be positive")

    def contains(self, points):
        d = np.asarray(points, dtype=float) - np.asarray(self.center)
        return np.sum(d * d, axis=-1) < self.radius**2

    def bbox(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def inradius(self):
        return self.radius

    def scale(self, l):
        return Disk(self.radius * l, tuple(np.asarray(self.center) * l))

    def boundary_distance(self, points):
        d = np.asarray(points, dtype=float) - np.asarray(self.center)
        return self.radius - np.sqrt(np.sum(d * d, axis=-1))

    def crossing(self, q, p, tol=1e-13):
        # exact: first root of |q + t (p - q)| = R on the segment
        c = np.asarray(self.center, dtype=float)
        q = np.asarray(q, dtype=float) - c
        p = np.asarray(p, dtype=float) - c
        d = p - q
        a = d @ d
        b = 2.0 * (q @ d)
        cc = q @ q - self.radius**2
        disc = b * b - 4 * a * cc
        if disc < 0:
            raise ValidationError("segment does not cross the circle")
        return float((-b + np.sqrt(disc)) / (2 * a))


@dataclass(frozen=True)
class Rect(CrossSection):
    """Axis-aligned rectangle with given half-widths."""

    half_widths: tuple[float, float] = (1.0, 1.0)
    center: tuple[float, float] = (0.0, 0.0)
    ndim = 2

    def __post_init__(self):
        if any(w <= 0 for w in self.half_widths):
            raise ValidationError("rectangle half_widths must be positive")

    def contains(self, points):
        d = np.abs(np.asarray(points, dtype=float) - np.asarray(self.center))
        return np.all(d < np.asarray(self.half_widths), axis=-1)

    def bbox(self):
        c = np.asarray(self.center)
        w = np.asarray(self.half_widths)
        return c - w, c + w

    def inradius(self):
        return float(min(self.half_widths))

    def scale(self, l):
        w = tuple(np.asarray(self.half_widths) * l)
        return Rect(w, tuple(np.asarray(self.center) * l))

    def boundary_distance(self, points):
        d = np.abs(np.asarray(points, dtype=float) - np.asarray(self.center))
        m = np.asarray(self.half_widths) - d
        return np.min(m, axis=-1)


class MaskSection(CrossSection):
    """Cross-section rasterized as a 0/1 cell mask."""

    ndim = 2

    def __init__(self, mask: np.ndarray, spacing: float, origin=(0.0, 0.0)):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 2 or not mask.any():
            raise ValidationError("mask must be a non-empty 2D boolean array")
        self.mask = mask
        self.spacing = float(spacing)
        self.origin = tuple(float(o) for o in origin)
        # distance (in cells) from each inside cell to the nearest outside cell
        self._edt = ndimage.distance_transform_edt(mask)

    @classmethod
    def from_ascii(cls, text: str, spacing: float = None) -> "MaskSection":
        """Parse an ASCII 0/1 grid; rows are lines, first line is the top row."""
        rows = [line for line in text.splitlines() if line.strip()]
        arr = np.array([[c == "1" for c in row.strip()] for row in rows])
        # file rows top-to-bottom -> grid axis 1 descending; transpose to (x, y)
        mask = arr[::-1].T
        if spacing is None:
            spacing = 2.0 / max(mask.shape)
        lo = -0.5 * spacing * np.asarray(mask.shape)
        return cls(mask, spacing, origin=tuple(lo))

    def _indices(self, points):
        pts = np.asarray(points, dtype=float)
        return np.floor((pts - np.asarray(self.origin)) / self.spacing).astype(int)

    def contains(self, points):
        idx = self._indices(points)
        ok = np.all((idx >= 0) & (idx < np.asarray(self.mask.shape)), axis=-1)
        out = np.zeros(ok.shape, dtype=bool)
        sel = idx[ok] if ok.ndim else (idx if ok else None)
        if ok.ndim == 0:
            return bool(ok) and bool(self.mask[idx[0], idx[1]])
        out[ok] = self.mask[sel[..., 0], sel[..., 1]]
        return out

    def bbox(self):
        lo = np.asarray(self.origin)
        return lo, lo + self.spacing * np.asarray(self.mask.shape)

    def inradius(self):
        return float(self._edt.max()) * self.spacing

    def scale(self, l):
        return MaskSection(self.mask, self.spacing * l,
                           origin=tuple(np.asarray(self.origin) * l))

    def boundary_distance(self, points):
        idx = self._indices(points)
        n = np.asarray(self.mask.shape)
        idx = np.clip(idx, 0, n - 1)
        d = self._edt[idx[..., 0], idx[..., 1]] * self.spacing
        inside = self.contains(points)
        return np.where(inside, d, -self.spacing)

    def check_simply_connected(self):
        _, npieces = ndimage.label(self.mask)
        if npieces != 1:
            raise UnsupportedGeometryError(f"mask has {npieces} connected pieces")
        pad = np.pad(~self.mask, 1, constant_values=True)
        _, nholes = ndimage.label(pad)
        if nholes != 1:
            raise UnsupportedGeometryError("mask has interior holes")
