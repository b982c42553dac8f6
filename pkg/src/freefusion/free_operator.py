"""Spectral density of ``S0 S1 + S1 S0`` through a 3x3 linearization.

The polynomial is replaced by the self-adjoint block operator

    L = b0 (x) 1 + b1 (x) S0 + b2 (x) S1

whose M3(C)-valued Cauchy transform is computed by operator-valued
subordination. The (1, 1) entry of ``G_L(diag(z, i eps, i eps))`` tends to the
scalar transform of the polynomial as ``eps -> 0``.

Operator points are complex arrays with trailing shape ``(3, 3)``; every
function here is batched over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractError, ConvergenceError, NumericError
from .free_scalar import as_transform
from .numerics import mat3_inverse, trapezoid_weights
from .spectra import (
    DEFAULT_EPS,
    SUPPORT_CUTOFF,
    MpParams,
    SpectralDensity,
    stieltjes_invert,
)

__all__ = [
    "Linearization",
    "OperatorTransform",
    "linearize_p2",
    "lambda_eps",
    "imag_part",
    "is_operator_point",
    "tensor_cauchy",
    "tensor_transform",
    "operator_h",
    "operator_subordinate",
    "cauchy_L",
    "asd_p2",
    "default_grid_p2",
]

LAMBDA_EPS = 1e-6
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 200_000
DEFAULT_GRID_POINTS = 2000
PSD_SLACK = 1e-8
# eigenvector conditioning above which the spectral reduction is abandoned
COND_LIMIT = 1e8


@dataclass(frozen=True)
class Linearization:
    """Coefficients of ``L = b0 (x) 1 + b1 (x) S0 + b2 (x) S1``."""

    b0: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("b0", "b1", "b2"):
            m = np.asarray(getattr(self, name), dtype=float)
            if m.shape != (3, 3) or not np.array_equal(m, m.T):
                raise ContractError(f"{name} must be a real symmetric 3x3 matrix")
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    def swapped(self) -> "Linearization":
        return Linearization(self.b0, self.b2, self.b1)

    def block(self, A, B) -> np.ndarray:
        """The concrete ``3n x 3n`` matrix ``L`` for order-``n`` inputs A, B."""
        n = np.asarray(A).shape[0]
        eye = np.eye(n)
        return np.kron(self.b0, eye) + np.kron(self.b1, A) + np.kron(self.b2, B)


def linearize_p2() -> Linearization:
    """Linearization of ``P2(S0, S1) = S0 S1 + S1 S0``.

    ``L = [[0, S0, S1], [S0, 0, -1], [S1, -1, 0]]``; the Schur complement of
    the lower 2x2 block of ``Lambda(z) - L`` is ``z - P2``.
    """
    b0 = np.zeros((3, 3))
    b0[1, 2] = b0[2, 1] = -1.0
    b1 = np.zeros((3, 3))
    b1[0, 1] = b1[1, 0] = 1.0
    b2 = np.zeros((3, 3))
    b2[0, 2] = b2[2, 0] = 1.0
    return Linearization(b0, b1, b2)


def imag_part(b) -> np.ndarray:
    """Hermitian imaginary part ``(b - b*) / 2i``."""
    b = np.asarray(b, dtype=complex)
    return (b - np.swapaxes(b, -1, -2).conj()) / 2j


def is_operator_point(b, tol: float = 0.0) -> bool:
    """True when ``Im b`` is positive definite for every matrix in the batch."""
    ev = np.linalg.eigvalsh(imag_part(b))
    return bool(np.all(ev > tol))


def lambda_eps(z, eps: float = LAMBDA_EPS) -> np.ndarray:
    """``diag(z, i eps, i eps)``; a real ``z`` is lifted to ``z + i eps``."""
    if not eps > 0:
        raise ContractError(f"eps must be > 0, got {eps}")
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < 0):
        raise ContractError("lambda_eps requires Im z >= 0")
    z = np.where(z.imag == 0, z + 1j * eps, z)
    out = np.zeros(z.shape + (3, 3), dtype=complex)
    out[..., 0, 0] = z
    out[..., 1, 1] = 1j * eps
    out[..., 2, 2] = 1j * eps
    return out


@dataclass(frozen=True)
class OperatorTransform:
    """M3(C)-valued Cauchy transform ``b -> E[(b - X)^-1]``."""

    eval: Callable
    label: str = ""

    def __call__(self, b):
        return self.eval(np.asarray(b, dtype=complex))


def _tensor_cauchy_spectral(bj, g, b):
    # (b - t bj)^-1 = b^-1 (1 - t K)^-1 with K = bj b^-1 = V diag(k) V^-1, so
    # the integral reduces to int rho(t) / (1 - t k) dt = G(1/k) / k per eigenvalue
    binv = mat3_inverse(b)
    K = bj @ binv
    kappa, V = np.linalg.eig(K)
    if np.any(np.linalg.cond(V) > COND_LIMIT):
        return None
    nz = np.abs(kappa) > 1e-12 * np.maximum(1.0, np.abs(kappa).max(axis=-1, keepdims=True))
    ks = np.where(nz, kappa, 1.0)
    gk = np.where(nz, g(1.0 / ks) / ks, 1.0)
    return binv @ (V * gk[..., None, :]) @ np.linalg.inv(V)


def _tensor_cauchy_quadrature(bj, d: SpectralDensity, b):
    t = d.grid
    w = trapezoid_weights(t) * d.values
    m = b[..., None, :, :] - t[:, None, None] * bj
    return np.einsum("k,...kij->...ij", w, np.linalg.inv(m))


def tensor_cauchy(bj, d, b, method: str = "spectral"):
    """Cauchy transform of ``bj (x) S`` at operator point(s) ``b``.

    ``int (b - t bj)^-1 rho(t) dt`` over the law of ``S``.

    Parameters
    ----------
    bj : (3, 3) real symmetric array
    d : SpectralDensity, MpParams or ScalarTransform
        Law of ``S``.
    b : complex array, shape ``(..., 3, 3)``
        Points with positive definite imaginary part.
    method : {"spectral", "quadrature"}
        ``"spectral"`` diagonalizes ``bj b^-1`` and evaluates the scalar
        transform of ``d`` at the reciprocal eigenvalues (exact for any
        law). ``"quadrature"`` applies trapezoid weights on the density grid
        and needs a SpectralDensity. The spectral route falls back to
        quadrature on ill-conditioned eigenbases when it can.
    """
    bj = np.asarray(bj, dtype=float)
    b = np.asarray(b, dtype=complex)
    if method == "quadrature":
        if not isinstance(d, SpectralDensity):
            raise ContractError("quadrature needs a tabulated SpectralDensity")
        return _tensor_cauchy_quadrature(bj, d, b)
    if method != "spectral":
        raise ContractError(f"unknown method {method!r}")
    if not np.any(bj):
        return mat3_inverse(b)
    out = _tensor_cauchy_spectral(bj, as_transform(d), b)
    if out is None:
        if isinstance(d, SpectralDensity):
            return _tensor_cauchy_quadrature(bj, d, b)
        raise NumericError("defective eigenbasis in tensor Cauchy transform")
    return out


def tensor_transform(bj, d, label: str = "") -> OperatorTransform:
    g = as_transform(d)
    bj = np.asarray(bj, dtype=float)
    return OperatorTransform(lambda b: tensor_cauchy(bj, g, b), label or f"b (x) {g.label}")


def operator_h(g: OperatorTransform, b) -> np.ndarray:
    """``h(b) = g(b)^-1 - b``."""
    b = np.asarray(b, dtype=complex)
    return mat3_inverse(g(b)) - b


def operator_subordinate(
    gx: OperatorTransform,
    gy: OperatorTransform,
    b,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> np.ndarray:
    """Fixed point ``w1`` of ``w -> h_y(h_x(w) + b) + b`` in the M3 upper half-plane.

    Iterates from ``w = b`` until the entrywise sup-norm step is below
    ``tol``. Raises ``ConvergenceError`` (with the residual) on
    non-convergence and ``NumericError`` if ``Im w1 - Im b`` is not positive
    semidefinite to within 1e-8.
    """
    b = np.asarray(b, dtype=complex)
    single = b.ndim == 2
    bf = b.reshape(-1, 3, 3)
    w = bf.copy()
    active = np.arange(len(bf))
    resid = np.full(len(bf), np.inf)
    for _ in range(max_iter):
        wa, ba = w[active], bf[active]
        u = operator_h(gx, wa) + ba
        new = operator_h(gy, u) + ba
        d = np.abs(new - wa).max(axis=(1, 2))
        w[active] = new
        resid[active] = d
        active = active[d >= tol]
        if active.size == 0:
            break
    else:
        worst = active[np.argmax(resid[active])]
        raise ConvergenceError(
            f"operator subordination did not converge in {max_iter} iterations "
            f"(residual {resid[worst]:.3e}); consider a larger inversion height",
            residual=float(resid[worst]),
            where=bf[active],
        )
    gap = np.linalg.eigvalsh(imag_part(w) - imag_part(bf))
    if np.any(gap < -PSD_SLACK):
        raise NumericError("Im w1 - Im b is not positive semidefinite")
    return w[0] if single else w.reshape(b.shape)


def cauchy_L(
    lin: Linearization,
    d0,
    d1,
    b,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> np.ndarray:
    """M3-valued Cauchy transform of the linearization at ``b``.

    ``G_L(b) = G_{b1 S0 + b2 S1}(b - b0)``, the latter by subordination of the
    two tensor summands.
    """
    gx = tensor_transform(lin.b1, d0)
    gy = tensor_transform(lin.b2, d1)
    shifted = np.asarray(b, dtype=complex) - lin.b0
    w1 = operator_subordinate(gx, gy, shifted, tol=tol, max_iter=max_iter)
    return gx(w1)


def p2_transform(
    d0,
    d1,
    lin: Linearization | None = None,
    eps: float = LAMBDA_EPS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
):
    """Scalar Cauchy transform ``z -> [G_L(Lambda_eps(z))]_11``."""
    lin = linearize_p2() if lin is None else lin

    def ev(z):
        z = np.asarray(z, dtype=complex)
        return cauchy_L(lin, d0, d1, lambda_eps(z, eps), tol=tol, max_iter=max_iter)[..., 0, 0]

    return ev


def _norm_bound(p) -> float:
    if isinstance(p, MpParams):
        return p.upper
    if isinstance(p, SpectralDensity):
        return max(abs(p.support[0]), abs(p.support[1]))
    raise ContractError("default grid needs MpParams or SpectralDensity inputs")


def default_grid_p2(
    p0,
    p1,
    points: int = DEFAULT_GRID_POINTS,
    eps: float = LAMBDA_EPS,
    tol: float = DEFAULT_TOL,
    margin: float = 0.10,
) -> np.ndarray:
    """Grid covering the support of ``S0 S1 + S1 S0`` with a 10% margin.

    ``S0 S1 + S1 S0 = ((S0 + S1)^2 - (S0 - S1)^2) / 2`` bounds the spectrum
    by ``[-max(n0, n1)^2 / 2, (n0 + n1)^2 / 2]``. A coarse inversion over that
    interval locates the support, which is then widened by ``margin``.
    """
    n0, n1 = _norm_bound(p0), _norm_bound(p1)
    coarse = np.linspace(-max(n0, n1) ** 2 / 2, (n0 + n1) ** 2 / 2, 400)
    d = stieltjes_invert(p2_transform(p0, p1, eps=eps, tol=tol), coarse, eps=1e-3)
    lo, hi = d.support
    pad = margin * (hi - lo)
    return np.linspace(lo - pad, hi + pad, points)


def asd_p2(
    p0,
    p1,
    grid=None,
    delta: float = DEFAULT_EPS,
    eps: float = LAMBDA_EPS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    lin: Linearization | None = None,
    support_cutoff: float = SUPPORT_CUTOFF,
) -> SpectralDensity:
    """Limiting spectral density of ``S0 S1 + S1 S0`` for free ``S0``, ``S1``.

    Parameters
    ----------
    p0, p1 : MpParams, SpectralDensity or ScalarTransform
        Laws of ``S0`` and ``S1``.
    grid : array_like, optional
        Abscissae; :func:`default_grid_p2` when omitted.
    delta : float
        Inversion height: the transform is evaluated at ``x + i delta``.
    eps : float
        Regularization of the lower diagonal slots of ``Lambda_eps``.
    """
    x = default_grid_p2(p0, p1, eps=eps, tol=tol) if grid is None else np.asarray(grid, dtype=float)
    g = p2_transform(p0, p1, lin=lin, eps=eps, tol=tol, max_iter=max_iter)
    try:
        return stieltjes_invert(g, x, eps=delta, support_cutoff=support_cutoff)
    except ConvergenceError as exc:
        xs = np.real(np.atleast_1d(exc.where)[..., 0, 0]) + 0.0
        raise ConvergenceError(
            f"{exc} (grid abscissae {xs[:5].tolist()}...)", residual=exc.residual, where=xs
        ) from exc
