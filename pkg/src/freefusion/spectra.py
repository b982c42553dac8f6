"""Spectral measures on the real line.

Densities are stored on explicit grids (:class:`SpectralDensity`), scalar
Cauchy transforms are computed either in closed form (Marchenko-Pastur) or by
exact integration of the piecewise-linear interpolant of a tabulated density,
and densities are recovered from transforms by Stieltjes inversion.

Sign convention: ``G(z) = int rho(x) / (z - x) dx`` so that ``Im G < 0`` in
the upper half-plane and ``rho(x) = -Im G(x + i0) / pi``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ContractError, NumericError, ParseError

__all__ = [
    "SpectralDensity",
    "MpParams",
    "mp_density",
    "cauchy_transform",
    "mp_cauchy_closed",
    "stieltjes_invert",
    "ks_distance",
    "DEFAULT_EPS",
    "SUPPORT_CUTOFF",
]

DEFAULT_EPS = 1e-4
DEFAULT_GRID_POINTS = 4096
# relative to the density maximum; see support_from_values
SUPPORT_CUTOFF = 1e-3


@dataclass(frozen=True)
class SpectralDensity:
    """A probability density tabulated on an ascending grid.

    Attributes
    ----------
    grid : ndarray
        Ascending abscissae.
    values : ndarray
        Non-negative density values at ``grid``.
    support : tuple of float
        ``(lo, hi)``; the density is zero outside it.
    """

    grid: np.ndarray
    values: np.ndarray
    support: tuple = field(default=(np.nan, np.nan))

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ContractError("grid and values must be 1-d vectors of equal length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise ContractError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise NumericError("density values must be finite")
        if np.any(values < 0):
            raise ContractError("density values must be non-negative")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        lo, hi = self.support
        if np.isnan(lo) or np.isnan(hi):
            lo, hi = support_from_values(grid, values)
        object.__setattr__(self, "support", (float(lo), float(hi)))

    def mass(self) -> float:
        return float(np.trapezoid(self.values, self.grid))

    def moment(self, k: int = 1) -> float:
        return float(np.trapezoid(self.grid**k * self.values, self.grid))

    def cdf(self, x) -> np.ndarray:
        """Cumulative distribution at ``x`` (trapezoid rule, normalized to 1)."""
        inc = np.diff(self.grid) * (self.values[1:] + self.values[:-1]) / 2
        cum = np.concatenate([[0.0], np.cumsum(inc)])
        cum /= cum[-1]
        return np.interp(x, self.grid, cum, left=0.0, right=1.0)

    def __call__(self, x) -> np.ndarray:
        return np.interp(x, self.grid, self.values, left=0.0, right=0.0)

    def check(self, mass_tol: float = 0.01) -> None:
        """Raise ``ContractError`` if the unit-mass invariant fails."""
        m = self.mass()
        if abs(m - 1.0) > mass_tol:
            raise ContractError(f"density mass {m:.6f} outside 1 +/- {mass_tol}")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "rho"])
            for x, r in zip(self.grid, self.values):
                w.writerow([repr(float(x)), repr(float(r))])

    @classmethod
    def from_csv(cls, path) -> "SpectralDensity":
        rows = _read_csv_rows(path)
        if not rows or [c.strip() for c in rows[0]] != ["x", "rho"]:
            raise ParseError(f"{path}: expected header 'x,rho'", row=1)
        data = []
        for i, row in enumerate(rows[1:], start=2):
            if len(row) != 2:
                raise ParseError(f"{path}: row {i} has {len(row)} cells, expected 2", row=i)
            data.append([_parse_float(c, path, i, j + 1) for j, c in enumerate(row)])
        if len(data) < 2:
            raise ParseError(f"{path}: need at least two data rows")
        arr = np.asarray(data)
        try:
            return cls(arr[:, 0], arr[:, 1])
        except (ContractError, NumericError) as exc:
            raise ParseError(f"{path}: {exc}") from exc


def _read_csv_rows(path):
    with open(path, newline="") as fh:
        return [row for row in csv.reader(fh) if row]


def _parse_float(cell, path, row, col):
    try:
        return float(cell)
    except ValueError:
        raise ParseError(
            f"{path}: non-numeric cell {cell!r} at row {row}, column {col}",
            row=row, col=col,
        ) from None


def support_from_values(grid, values, rel_cutoff: float = SUPPORT_CUTOFF):
    """Smallest interval containing every grid point where the density
    exceeds ``rel_cutoff`` times its peak level.

    The peak level is the maximum, capped at twice the density-weighted mean
    ``int rho^2 / int rho`` so that an integrable edge singularity (the
    Marchenko-Pastur law at ``c = 1``) does not swamp the rest of the curve.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    vmax = values.max()
    if vmax <= 0:
        return float(grid[0]), float(grid[-1])
    level = min(vmax, 2 * np.trapezoid(values**2, grid) / np.trapezoid(values, grid))
    idx = np.nonzero(values > rel_cutoff * level)[0]
    return float(grid[idx[0]]), float(grid[idx[-1]])


@dataclass(frozen=True)
class MpParams:
    """Marchenko-Pastur parameters: entry variance ``sigma2`` and ratio ``c = N/T``."""

    sigma2: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ContractError(f"sigma2 must be > 0, got {self.sigma2}")
        if not (0 < self.c <= 1):
            raise ContractError(f"c must lie in (0, 1], got {self.c}")

    @property
    def lower(self) -> float:
        return self.sigma2 * (1 - np.sqrt(self.c)) ** 2

    @property
    def upper(self) -> float:
        return self.sigma2 * (1 + np.sqrt(self.c)) ** 2

    @property
    def mean(self) -> float:
        return self.sigma2

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        a, b = self.lower, self.upper
        out = np.zeros_like(x)
        inside = (x > a) & (x < b)
        xi = x[inside]
        out[inside] = np.sqrt((b - xi) * (xi - a)) / (2 * np.pi * self.sigma2 * self.c * xi)
        return out


def _edge_clustered_grid(a: float, b: float, n: int) -> np.ndarray:
    # twice-applied cosine map: node spacing ~ u^4 at both ends, so the
    # sqrt (and, at c = 1, 1/sqrt) edge behaviour integrates accurately
    u = np.linspace(0.0, 1.0, n)
    phi = lambda s: (1 - np.cos(np.pi * s)) / 2
    x = a + (b - a) * phi(phi(u))
    x[0], x[-1] = a, b
    return x


def mp_density(p: MpParams, grid_points: int = DEFAULT_GRID_POINTS) -> SpectralDensity:
    """Marchenko-Pastur density tabulated on ``grid_points`` nodes over ``[a, b]``.

    Nodes cluster at both edges. At ``c = 1`` the density diverges at 0; the
    node sitting exactly on the edge is given the value 0.
    """
    if grid_points < 64:
        raise ContractError(f"grid_points must be >= 64, got {grid_points}")
    x = _edge_clustered_grid(p.lower, p.upper, grid_points)
    x = np.unique(x)  # the first nodes can coincide in floating point
    return SpectralDensity(x, p.pdf(x), support=(p.lower, p.upper))


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def cauchy_transform(d: SpectralDensity, z):
    """Cauchy transform of a tabulated density.

    The density is replaced by its piecewise-linear interpolant, which is then
    integrated against ``1 / (z - x)`` exactly on every grid segment, so the
    result stays accurate as ``Im z`` approaches 0. Vectorized over ``z``.
    """
    zz = _as_complex(z)
    if np.any(zz.imag <= 0):
        raise ContractError("cauchy_transform requires Im z > 0")
    return _piecewise_linear_cauchy(d.grid, d.values, zz)


def _piecewise_linear_cauchy(x, r, z, chunk: int = 256):
    shape = z.shape
    zf = z.reshape(-1)
    x0, h = x[:-1], np.diff(x)
    r0, r1 = r[:-1], r[1:]
    out = np.empty(zf.shape, dtype=complex)
    for s in range(0, zf.size, chunk):
        zc = zf[s:s + chunk, None]
        q = h / (zc - x0)
        L = -np.log1p(-q)  # int_{x0}^{x1} dx / (z - x)
        small = np.abs(q) < 1e-3
        qs = np.where(small, q, 0)
        series = qs / 2 + qs**2 / 3 + qs**3 / 4 + qs**4 / 5
        # weight of the right-hand node: (1/h) int (x - x0) / (z - x) dx
        A1 = np.where(small, series, L / np.where(small, 1, q) - 1)
        A0 = L - A1
        out[s:s + chunk] = (r0 * A0 + r1 * A1).sum(axis=1)
    return out.reshape(shape)


def _mp_cauchy(p: MpParams, z):
    # valid off the cut [a, b] in both half-planes; G(conj z) = conj G(z)
    z = _as_complex(z)
    root = np.sqrt(z - p.lower) * np.sqrt(z - p.upper)
    return 2.0 / ((z - p.sigma2 * (1 - p.c)) + root)


def mp_cauchy_closed(p: MpParams, z):
    """Closed-form Cauchy transform of the Marchenko-Pastur law.

    Root of ``c s2 z G^2 - (z - s2 (1 - c)) G + 1 = 0`` with the square root
    taken as ``sqrt(z - a) sqrt(z - b)`` (cut on ``[a, b]``), written as
    ``2 / (z - s2 (1 - c) + sqrt(...))`` to avoid cancellation at large ``|z|``.
    """
    zz = _as_complex(z)
    if np.any(zz.imag <= 0):
        raise ContractError("mp_cauchy_closed requires Im z > 0")
    g = _mp_cauchy(p, zz)
    if np.any(g.imag >= 0):
        bad = zz[g.imag >= 0].ravel()[0]
        raise NumericError(f"branch failure: Im G >= 0 at z = {bad}")
    return g


def stieltjes_invert(
    g: Callable,
    grid,
    eps: float = DEFAULT_EPS,
    support_cutoff: float = SUPPORT_CUTOFF,
) -> SpectralDensity:
    """Recover a density from its Cauchy transform.

    ``rho(x) = max(0, -Im g(x + i eps) / pi)``. No renormalization is
    applied. ``g`` should accept a complex array; scalar-only callables are
    evaluated point by point.
    """
    x = np.asarray(grid, dtype=float)
    if not (0 < eps <= 0.1):
        raise ContractError(f"eps must lie in (0, 0.1], got {eps}")
    z = x + 1j * eps
    try:
        gz = _as_complex(g(z))
        if gz.shape != z.shape:
            raise ValueError
    except (TypeError, ValueError):
        gz = np.array([complex(g(zi)) for zi in z])
    bad = ~np.isfinite(gz)
    if np.any(bad):
        raise NumericError(f"transform is not finite at x = {x[bad][0]!r}")
    rho = np.maximum(0.0, -gz.imag / np.pi)
    return SpectralDensity(x, rho, support=support_from_values(x, rho, support_cutoff))


def ks_distance(samples, d: SpectralDensity) -> float:
    """Kolmogorov-Smirnov distance between samples and a tabulated density."""
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    n = s.size
    if n == 0:
        raise ContractError("no samples")
    F = d.cdf(s)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(n) / n
    return float(max(upper.max(), lower.max()))
