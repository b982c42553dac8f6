"""Monte Carlo empirical spectra of (fused) sample covariance matrices.

Each trial injects a little white noise into the measurement windows,
standardizes every row, forms the covariances ``S = V V^T / T``, evaluates
the fusion polynomial and collects its eigenvalues.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DegenerateRowError, ParseError
from .numerics import RngStream, hermitian_eigenvalues

__all__ = [
    "PolyId",
    "Histogram",
    "check_data_matrix",
    "standardize",
    "add_noise",
    "covariance",
    "eval_polynomial",
    "trial_eigenvalues",
    "empirical_spectrum",
]

DEFAULT_TRIALS = 100
DEFAULT_ETA = 0.01
DEFAULT_BINS = 100
RANGE_MARGIN = 0.02


class PolyId(str, enum.Enum):
    """Fusion polynomial: P0(S0, S1) = S1, P1 = S0 + S1, P2 = S0 S1 + S1 S0."""

    P0 = "p0"
    P1 = "p1"
    P2 = "p2"

    @classmethod
    def parse(cls, value) -> "PolyId":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ContractError(f"unknown polynomial {value!r}; expected p0, p1 or p2") from None


def check_data_matrix(V) -> np.ndarray:
    """Validate an ``N x T`` measurement window (finite, ``N, T >= 2``)."""
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] < 2 or V.shape[1] < 2:
        raise ContractError(f"data matrix must be 2-d with N, T >= 2, got shape {V.shape}")
    if not np.all(np.isfinite(V)):
        raise ContractError("data matrix has non-finite entries")
    return V


def standardize(V, trial=None) -> np.ndarray:
    """Rows to mean 0 and unbiased (ddof=1) sample variance 1."""
    V = check_data_matrix(V)
    centered = V - V.mean(axis=1, keepdims=True)
    sd = centered.std(axis=1, ddof=1, keepdims=True)
    flat = np.nonzero(sd[:, 0] <= 1e-300)[0]
    if flat.size:
        raise DegenerateRowError(int(flat[0]), trial=trial)
    return centered / sd


def add_noise(V, eta: float, rng) -> np.ndarray:
    """``V + eta * G`` with ``G`` i.i.d. standard normal drawn from ``rng``."""
    if not eta > 0:
        raise ContractError(f"eta must be > 0, got {eta}")
    V = check_data_matrix(V)
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return V + eta * gen.standard_normal(V.shape)


def covariance(V) -> np.ndarray:
    """``V V^T / T`` for an ``N x T`` window."""
    V = check_data_matrix(V)
    S = V @ V.T / V.shape[1]
    return (S + S.T) / 2


def eval_polynomial(poly, S0, S1) -> np.ndarray:
    poly = PolyId.parse(poly)
    S0 = np.asarray(S0)
    S1 = np.asarray(S1)
    if S0.shape != S1.shape:
        raise ContractError(f"order mismatch: {S0.shape} vs {S1.shape}")
    if poly is PolyId.P0:
        return S1.copy()
    if poly is PolyId.P1:
        return S0 + S1
    prod = S0 @ S1
    return prod + prod.T.conj()


@dataclass(frozen=True)
class Histogram:
    """Eigenvalue histogram; ``density`` integrates to 1 over the bins.

    ``samples`` keeps the raw eigenvalues when the histogram was built from
    them (it is not serialized).
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    samples: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts)
        if edges.ndim != 1 or edges.size != counts.size + 1 or counts.size < 1:
            raise ContractError("need k + 1 ascending bin edges for k counts")
        if np.any(np.diff(edges) <= 0):
            raise ContractError("bin edges must be strictly increasing")
        if np.any(counts < 0) or not np.all(counts == np.round(counts)):
            raise ContractError("counts must be non-negative integers")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.total * np.diff(self.bin_edges))

    @property
    def centers(self) -> np.ndarray:
        return (self.bin_edges[1:] + self.bin_edges[:-1]) / 2

    @classmethod
    def from_samples(cls, samples, bins: int = DEFAULT_BINS, hist_range=None) -> "Histogram":
        s = np.asarray(samples, dtype=float).ravel()
        if s.size == 0:
            raise ContractError("no samples")
        if hist_range is None:
            lo, hi = s.min(), s.max()
            pad = RANGE_MARGIN * max(hi - lo, 1e-12)
            hist_range = (lo - pad, hi + pad)
        counts, edges = np.histogram(s, bins=bins, range=hist_range)
        return cls(edges, counts, samples=s)

    def eigenvalues(self) -> np.ndarray:
        """Raw samples if kept, else bin centres repeated by count."""
        if self.samples is not None:
            return self.samples
        return np.repeat(self.centers, self.counts)

    def ks_distance(self, d) -> float:
        """Largest gap between the binned and the reference CDF over the bin edges.

        This is the Kolmogorov-Smirnov distance that binned data support;
        use :func:`freefusion.spectra.ks_distance` on raw samples instead.
        """
        cum = np.concatenate([[0.0], np.cumsum(self.counts)]) / self.total
        return float(np.max(np.abs(cum - d.cdf(self.bin_edges))))

    def to_csv(self, path) -> None:
        dens = self.density
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_lo", "bin_hi", "count", "density"])
            for lo, hi, c, d in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts, dens):
                w.writerow([repr(float(lo)), repr(float(hi)), int(c), repr(float(d))])

    @classmethod
    def from_csv(cls, path) -> "Histogram":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if not rows or [c.strip() for c in rows[0]] != ["bin_lo", "bin_hi", "count", "density"]:
            raise ParseError(f"{path}: expected header 'bin_lo,bin_hi,count,density'", row=1)
        los, his, counts = [], [], []
        for i, row in enumerate(rows[1:], start=2):
            if len(row) != 4:
                raise ParseError(f"{path}: row {i} has {len(row)} cells, expected 4", row=i)
            try:
                los.append(float(row[0]))
                his.append(float(row[1]))
                counts.append(int(row[2]))
            except ValueError:
                raise ParseError(f"{path}: non-numeric cell in row {i}", row=i) from None
        if not counts:
            raise ParseError(f"{path}: no bins")
        if not np.allclose(los[1:], his[:-1], rtol=0, atol=1e-12 * max(1.0, abs(his[-1]))):
            raise ParseError(f"{path}: bins are not contiguous")
        try:
            return cls(np.array(los + [his[-1]]), np.array(counts))
        except ContractError as exc:
            raise ParseError(f"{path}: {exc}") from exc


def trial_eigenvalues(V0, V1, poly, eta: float, gen: np.random.Generator, trial=None) -> np.ndarray:
    """Eigenvalues of one Monte Carlo trial."""
    poly = PolyId.parse(poly)
    if poly is PolyId.P0:
        S = covariance(standardize(add_noise(V1, eta, gen), trial=trial))
        return hermitian_eigenvalues(S, check=False)
    W0 = standardize(add_noise(V0, eta, gen), trial=trial)
    W1 = standardize(add_noise(V1, eta, gen), trial=trial)
    P = eval_polynomial(poly, covariance(W0), covariance(W1))
    return hermitian_eigenvalues(P, check=False)


def empirical_spectrum(
    V0,
    V1=None,
    poly=PolyId.P0,
    trials: int = DEFAULT_TRIALS,
    eta: float = DEFAULT_ETA,
    bins: int = DEFAULT_BINS,
    rng: RngStream | int = 0,
    hist_range=None,
) -> Histogram:
    """Histogram of the eigenvalues of ``poly(S0, S1)`` over ``trials`` trials.

    For ``P0`` only one window is used: ``V1`` if given, otherwise ``V0``.
    Trial ``i`` draws its noise from its own stream (child ``i`` of ``rng``),
    so the result does not depend on evaluation order.
    """
    poly = PolyId.parse(poly)
    if trials < 1:
        raise ContractError(f"trials must be >= 1, got {trials}")
    rng = RngStream(rng) if isinstance(rng, (int, np.integer)) else rng
    V0 = check_data_matrix(V0)
    if poly is PolyId.P0:
        V1 = V0 if V1 is None else check_data_matrix(V1)
    else:
        if V1 is None:
            raise ContractError(f"{poly.name} needs two windows")
        V1 = check_data_matrix(V1)
        if V0.shape != V1.shape:
            raise ContractError(f"windows differ in shape: {V0.shape} vs {V1.shape}")
    eigs = [
        trial_eigenvalues(V0, V1, poly, eta, rng.trial_generator(i), trial=i)
        for i in range(trials)
    ]
    return Histogram.from_samples(np.concatenate(eigs), bins=bins, hist_range=hist_range)
