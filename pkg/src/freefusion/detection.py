"""Outlier test of an empirical spectrum against a theoretical bound.

Eigenvalues that fall more than a small margin outside the support of the
bound are outliers. H0 (no signal) is rejected when their share exceeds a
minimum fraction.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, ParseError
from .spectra import SpectralDensity

__all__ = ["Decision", "DetectionReport", "detect", "severity_rank"]

DEFAULT_MARGIN_FRAC = 0.05
DEFAULT_MIN_FRACTION = 1e-3


class Decision(str, enum.Enum):
    H0 = "H0"
    H1 = "H1"


@dataclass(frozen=True)
class DetectionReport:
    """Outcome of :func:`detect`.

    Excesses are measured from the raw support edges and clamped at 0; the
    margin only decides what counts as an outlier.
    """

    decision: Decision
    outlier_count: int
    outlier_fraction: float
    max_upper_excess: float
    max_lower_excess: float
    support_used: tuple
    outliers: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "decision": self.decision.value,
            "outlier_count": self.outlier_count,
            "outlier_fraction": self.outlier_fraction,
            "max_upper_excess": self.max_upper_excess,
            "max_lower_excess": self.max_lower_excess,
            "support_used": list(self.support_used),
            "outliers": list(self.outliers),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, d: dict) -> "DetectionReport":
        try:
            return cls(
                decision=Decision(d["decision"]),
                outlier_count=int(d["outlier_count"]),
                outlier_fraction=float(d["outlier_fraction"]),
                max_upper_excess=float(d["max_upper_excess"]),
                max_lower_excess=float(d["max_lower_excess"]),
                support_used=tuple(float(v) for v in d["support_used"]),
                outliers=[float(v) for v in d["outliers"]],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed detection report: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "DetectionReport":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc


def _support(bound) -> tuple[float, float]:
    if isinstance(bound, SpectralDensity):
        lo, hi = bound.support
    else:
        lo, hi = bound
    lo, hi = float(lo), float(hi)
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise ContractError(f"degenerate support [{lo}, {hi}]")
    return lo, hi


def detect(
    eigs,
    bound,
    margin_frac: float = DEFAULT_MARGIN_FRAC,
    min_fraction: float = DEFAULT_MIN_FRACTION,
) -> DetectionReport:
    """Test eigenvalues against the support of ``bound``.

    Parameters
    ----------
    eigs : array_like
        All eigenvalues pooled over trials.
    bound : SpectralDensity or (lo, hi)
        Theoretical bound; only its support is used.
    margin_frac : float
        Half-width of the tolerance band as a fraction of the support width.
    min_fraction : float
        H1 is declared when the outlier fraction strictly exceeds this.
    """
    e = np.asarray(eigs, dtype=float).ravel()
    if e.size == 0:
        raise ContractError("no eigenvalues")
    if not np.all(np.isfinite(e)):
        raise ContractError("eigenvalues must be finite")
    if margin_frac < 0 or not 0 <= min_fraction < 1:
        raise ContractError("need margin_frac >= 0 and 0 <= min_fraction < 1")
    lo, hi = _support(bound)
    delta = margin_frac * (hi - lo)
    upper = e > hi + delta
    lower = e < lo - delta
    mask = upper | lower
    count = int(mask.sum())
    frac = count / e.size
    return DetectionReport(
        decision=Decision.H1 if frac > min_fraction else Decision.H0,
        outlier_count=count,
        outlier_fraction=frac,
        max_upper_excess=float(e.max()) - hi if upper.any() else 0.0,
        max_lower_excess=lo - float(e.min()) if lower.any() else 0.0,
        support_used=(lo, hi),
        outliers=np.sort(e[mask]).tolist(),
    )


def severity_rank(reports) -> list:
    """Labels sorted by increasing severity.

    ``reports`` is a mapping or a sequence of ``(label, DetectionReport)``
    pairs. Ties in ``max_upper_excess`` fall back to ``outlier_count`` and
    then to the label.
    """
    items = list(reports.items()) if isinstance(reports, dict) else list(reports)
    if not items:
        raise ContractError("nothing to rank")
    items.sort(key=lambda kv: (kv[1].max_upper_excess, kv[1].outlier_count, str(kv[0])))
    return [label for label, _ in items]
