"""Small numerical kernels shared by the rest of the package.

Hermitian eigenvalues, batched 3x3 complex inverses, weighted quadrature and
reproducible Gaussian streams.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractError, NumericError, SingularityError

__all__ = [
    "RngStream",
    "hermitian_eigenvalues",
    "mat3_inverse",
    "gaussian_matrix",
    "trapezoid_weights",
    "integrate_weighted",
]

HERMITIAN_ATOL = 1e-12
SINGULAR_DET = 1e-300


@dataclass(frozen=True)
class RngStream:
    """Seed plus stream id; identical pairs reproduce identical draws.

    Distinct stream ids are spawned children of the same ``SeedSequence``
    so Monte Carlo trials can run in any order.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)

    def trial_generator(self, trial: int) -> np.random.Generator:
        """Generator for Monte Carlo trial ``trial`` of this stream."""
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), int(trial)))
        return np.random.Generator(np.random.PCG64(ss))


def _is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return bool(np.all(np.abs(m - m.conj().T) <= atol * scale))


def hermitian_eigenvalues(m, check: bool = True) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in ascending order.

    Backed by LAPACK's tridiagonal reduction followed by implicit QL/QR
    sweeps (``numpy.linalg.eigvalsh``).

    Raises
    ------
    ContractError
        If ``m`` is not square or not Hermitian within 1e-12 (relative to
        its largest entry).
    NumericError
        If the eigensolver fails to converge.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {m.shape}")
    if check and not _is_hermitian(m):
        raise ContractError("matrix is not Hermitian")
    try:
        return np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"eigensolver did not converge for matrix of order {m.shape[0]}"
        ) from exc


def mat3_inverse(m) -> np.ndarray:
    """Inverse of a 3x3 complex matrix, or of a stack of them (``(..., 3, 3)``).

    Raises ``SingularityError`` when any determinant magnitude is at or
    below 1e-300.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape[-2:] != (3, 3):
        raise ContractError(f"expected trailing shape (3, 3), got {m.shape}")
    det = np.abs(np.linalg.det(m))
    if np.any(~(det > SINGULAR_DET)):
        raise SingularityError(
            f"singular 3x3 matrix (|det| = {float(np.min(det)):.3e})",
            det=float(np.min(det)),
        )
    return np.linalg.inv(m)


def gaussian_matrix(rng: RngStream | np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """``rows x cols`` matrix of i.i.d. standard normal draws."""
    if rows < 1 or cols < 1:
        raise ContractError(f"rows and cols must be >= 1, got {rows}, {cols}")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return gen.standard_normal((rows, cols))


def trapezoid_weights(nodes) -> np.ndarray:
    """Composite trapezoid weights for (possibly non-uniform) nodes."""
    x = np.asarray(nodes, dtype=float)
    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def integrate_weighted(f: Callable, nodes, weights=None):
    """Return ``sum_i weights[i] * f(nodes[i])``.

    ``f`` may return scalars or arrays (e.g. 3x3 matrices) per node; it is
    called once with the whole node vector when it vectorizes, otherwise
    node by node. ``weights`` defaults to composite trapezoid weights.
    """
    x = np.asarray(nodes, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ContractError("nodes must be a 1-d vector with at least two entries")
    if np.any(np.diff(x) <= 0):
        raise ContractError("nodes must be strictly increasing")
    w = trapezoid_weights(x) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != x.shape:
        raise ContractError(
            f"length mismatch: {x.size} nodes vs {w.size} weights"
        )
    if weights is not None and np.any(w <= 0):
        raise ContractError("weights must be positive")

    try:
        vals = np.asarray(f(x))
        if vals.shape[:1] != x.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.asarray([f(xi) for xi in x])
    return np.tensordot(w, vals, axes=(0, 0))
