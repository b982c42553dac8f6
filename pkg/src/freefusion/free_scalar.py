"""Free additive convolution of two measures through subordination.

For free self-adjoint ``x`` and ``y`` the Cauchy transform of ``x + y``
satisfies ``G_{x+y}(b) = G_x(w1(b)) = G_y(w2(b))`` where ``w1`` is the
attracting fixed point of ``f_b(w) = h_y(h_x(w) + b) + b`` and
``h(w) = 1 / G(w) - w``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractError, ConvergenceError, NumericError, SingularityError
from .spectra import (
    DEFAULT_EPS,
    SUPPORT_CUTOFF,
    MpParams,
    SpectralDensity,
    _mp_cauchy,
    _piecewise_linear_cauchy,
    stieltjes_invert,
)

__all__ = [
    "ScalarTransform",
    "as_transform",
    "h_transform",
    "subordinate_pair",
    "asd_p1",
    "default_grid_p1",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
DEFAULT_GRID_POINTS = 2000
IM_SLACK = 1e-12


@dataclass(frozen=True)
class ScalarTransform:
    """Cauchy transform of a probability measure on the real line.

    ``eval`` maps complex arrays to complex arrays of the same shape. Callers
    only pass points with ``Im z > 0``; transforms built by :func:`as_transform`
    are also defined in the lower half-plane through ``G(conj z) = conj G(z)``.
    """

    eval: Callable
    label: str = ""

    def __call__(self, z):
        return self.eval(np.asarray(z, dtype=complex))


def _reflected(g):
    def ev(z):
        z = np.asarray(z, dtype=complex)
        lower = z.imag < 0
        if not np.any(lower):
            return g(z)
        w = np.where(lower, z.conj(), z)
        out = g(w)
        return np.where(lower, np.conj(out), out)
    return ev


def as_transform(obj) -> ScalarTransform:
    """Wrap ``MpParams``, ``SpectralDensity`` or a callable as a ScalarTransform."""
    if isinstance(obj, ScalarTransform):
        return obj
    if isinstance(obj, MpParams):
        return ScalarTransform(lambda z: _mp_cauchy(obj, z), f"MP(sigma2={obj.sigma2}, c={obj.c})")
    if isinstance(obj, SpectralDensity):
        return ScalarTransform(
            _reflected(lambda z: _piecewise_linear_cauchy(obj.grid, obj.values, z)),
            "tabulated density",
        )
    if callable(obj):
        return ScalarTransform(obj, getattr(obj, "__name__", ""))
    raise ContractError(f"cannot build a Cauchy transform from {type(obj).__name__}")


def h_transform(g, w):
    """``h(w) = 1 / g(w) - w``."""
    g = as_transform(g)
    w = np.asarray(w, dtype=complex)
    gw = g(w)
    if np.any(gw == 0):
        raise SingularityError("Cauchy transform vanishes; h is undefined", det=0.0)
    return 1.0 / gw - w


def subordinate_pair(gx, gy, b, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Subordination functions ``(w1, w2)`` at ``b`` (scalar or array).

    ``w1`` is obtained by plain iteration of ``f_b`` from ``w = b`` until
    successive iterates differ by less than ``tol``; ``w2 = h_x(w1) + b`` is
    then the fixed point of the mirrored map ``h_x(h_y(w) + b) + b``.

    Raises
    ------
    ConvergenceError
        If some point has not converged after ``max_iter`` steps. The
        exception carries the worst residual and the offending ``b``.
    NumericError
        If ``Im w_j < Im b`` at the returned point.
    """
    gx, gy = as_transform(gx), as_transform(gy)
    b_arr = np.asarray(b, dtype=complex)
    scalar = b_arr.ndim == 0
    bf = b_arr.reshape(-1)
    if np.any(bf.imag <= 0):
        raise ContractError("subordination requires Im b > 0")

    def step(w, bb):
        u = h_transform(gx, w) + bb
        return h_transform(gy, u) + bb

    w = bf.copy()
    active = np.arange(bf.size)
    resid = np.full(bf.size, np.inf)
    for _ in range(max_iter):
        wa, ba = w[active], bf[active]
        new = step(wa, ba)
        d = np.abs(new - wa)
        w[active] = new
        resid[active] = d
        active = active[d >= tol]
        if active.size == 0:
            break
    else:
        worst = active[np.argmax(resid[active])]
        raise ConvergenceError(
            f"subordination did not converge in {max_iter} iterations at "
            f"b = {bf[worst]} (residual {resid[worst]:.3e})",
            residual=float(resid[worst]),
            where=bf[active],
        )

    w1 = w
    w2 = h_transform(gx, w1) + bf
    slack = IM_SLACK * np.maximum(1.0, np.abs(bf))
    if np.any(w1.imag < bf.imag - slack) or np.any(w2.imag < bf.imag - slack):
        raise NumericError("subordination function left the region Im w >= Im b")
    if scalar:
        return complex(w1[0]), complex(w2[0])
    return w1.reshape(b_arr.shape), w2.reshape(b_arr.shape)


def sum_transform(gx, gy, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> ScalarTransform:
    """Cauchy transform of the free sum, evaluated through subordination."""
    gx, gy = as_transform(gx), as_transform(gy)

    def ev(z):
        w1, w2 = subordinate_pair(gx, gy, z, tol=tol, max_iter=max_iter)
        # average of the two equal expressions keeps the result symmetric
        return 0.5 * (gx(w1) + gy(w2))

    return ScalarTransform(ev, f"({gx.label}) + ({gy.label})")


def _upper_edge(p) -> float:
    if isinstance(p, MpParams):
        return p.upper
    if isinstance(p, SpectralDensity):
        return p.support[1]
    raise ContractError("default grid needs MpParams or SpectralDensity inputs")


def default_grid_p1(p0, p1, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Uniform grid over ``[0, (sqrt(b0) + sqrt(b1))^2 + 1]``."""
    top = (np.sqrt(_upper_edge(p0)) + np.sqrt(_upper_edge(p1))) ** 2 + 1.0
    return np.linspace(0.0, top, points)


def asd_p1(
    p0,
    p1,
    grid=None,
    eps: float = DEFAULT_EPS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    support_cutoff: float = SUPPORT_CUTOFF,
) -> SpectralDensity:
    """Limiting spectral density of ``S0 + S1`` for free ``S0``, ``S1``.

    Parameters
    ----------
    p0, p1 : MpParams or SpectralDensity or ScalarTransform
        Laws of the two summands.
    grid : array_like, optional
        Abscissae; defaults to :func:`default_grid_p1` (needs MpParams or
        densities).
    eps : float
        Height above the real axis at which the transform is inverted.
    """
    x = default_grid_p1(p0, p1) if grid is None else np.asarray(grid, dtype=float)
    g = sum_transform(p0, p1, tol=tol, max_iter=max_iter)
    try:
        return stieltjes_invert(g, x, eps=eps, support_cutoff=support_cutoff)
    except ConvergenceError as exc:
        xs = np.real(np.atleast_1d(exc.where))
        raise ConvergenceError(
            f"{exc} (grid abscissae {xs[:5].tolist()}...)", residual=exc.residual, where=xs
        ) from exc
