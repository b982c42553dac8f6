"""Synthetic grid measurements with injected events, and CSV plumbing.

The baseline is ``V = Xi @ P`` with ``P`` i.i.d. standard normal
(``n_nodes x total_samples``) and a fixed mixing matrix
``Xi = I + mixing * G / sqrt(N)``. Events are added on a subset of nodes
from ``onset`` on:

* ``step``: a constant offset ``magnitude``;
* ``ramp``: a linear trend reaching ``magnitude`` at the last sample;
* ``collapse``: a common oscillation ``xi_t`` (one standard normal series
  shared by all target nodes) whose amplitude grows from ``magnitude`` to
  ``5 * magnitude``.

Baseline and event noise come from separate streams of the same seed, so
every scenario generated with a given seed is bit-identical to the reference
before its onset.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ContractError, ParseError
from .numerics import RngStream

__all__ = [
    "Kind",
    "ScenarioSpec",
    "TimeSeries",
    "LabeledScenario",
    "WINDOW_STARTS",
    "WINDOW_LENGTH",
    "generate_scenario",
    "sample_window",
    "load_csv",
    "save_csv",
    "default_battery",
    "load_battery",
    "spec_from_dict",
]

TOTAL_SAMPLES = 5500
N_NODES = 118
WINDOW_LENGTH = 118
DEFAULT_MIXING = 0.1
COLLAPSE_GROWTH = 4.0

# start column of every measurement window; the window is [start, start + 118)
WINDOW_STARTS = {"V0": 100, "V1": 850, "V2": 2200, "V3": 3300, "V4": 3900, "V5": 4400}

_BASELINE_STREAM = 0
_EVENT_STREAM = 1


class Kind(str, enum.Enum):
    REFERENCE = "reference"
    STEP = "step"
    RAMP = "ramp"
    COLLAPSE = "collapse"
    NOISE = "noise"

    @property
    def has_signal(self) -> bool:
        return self in (Kind.STEP, Kind.RAMP, Kind.COLLAPSE)


@dataclass(frozen=True)
class ScenarioSpec:
    """One synthetic scenario.

    ``magnitude`` is in units of the baseline noise standard deviation and
    must be positive exactly for the event kinds.
    """

    kind: Kind
    target_nodes: tuple = ()
    magnitude: float = 0.0
    onset: int = 0
    total_samples: int = TOTAL_SAMPLES
    n_nodes: int = N_NODES
    seed: int = 0
    mixing: float = DEFAULT_MIXING

    def __post_init__(self):
        try:
            kind = Kind(self.kind)
        except ValueError:
            raise ContractError(f"unknown scenario kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        targets = tuple(sorted({int(i) for i in self.target_nodes}))
        object.__setattr__(self, "target_nodes", targets)
        if self.n_nodes < 2 or self.total_samples < 2:
            raise ContractError("n_nodes and total_samples must be >= 2")
        if targets and (targets[0] < 0 or targets[-1] >= self.n_nodes):
            raise ContractError(f"target nodes must lie in [0, {self.n_nodes})")
        if not 0 <= self.onset < self.total_samples:
            raise ContractError(f"onset {self.onset} outside [0, {self.total_samples})")
        if not np.isfinite(self.magnitude) or self.magnitude < 0:
            raise ContractError(f"magnitude must be finite and >= 0, got {self.magnitude}")
        if kind.has_signal:
            if self.magnitude == 0 or not targets:
                raise ContractError(f"{kind.value} needs a positive magnitude and target nodes")
        elif self.magnitude != 0:
            raise ContractError(f"{kind.value} scenarios carry no signal; magnitude must be 0")
        if not 0 <= self.seed < 2**64:
            raise ContractError("seed must be a 64-bit unsigned integer")
        if self.mixing < 0:
            raise ContractError("mixing must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["target_nodes"] = list(self.target_nodes)
        return d


def spec_from_dict(d: dict) -> ScenarioSpec:
    """Build a ScenarioSpec from a JSON object with the same field names."""
    if not isinstance(d, dict):
        raise ContractError("scenario spec must be a JSON object")
    allowed = set(ScenarioSpec.__dataclass_fields__)
    unknown = set(d) - allowed
    if unknown:
        raise ContractError(f"unknown scenario fields: {sorted(unknown)}")
    if "kind" not in d:
        raise ContractError("scenario spec needs a 'kind'")
    try:
        return ScenarioSpec(**d)
    except TypeError as exc:
        raise ContractError(f"bad scenario spec: {exc}") from exc


@dataclass(frozen=True)
class TimeSeries:
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2:
            raise ContractError("time series must be 2-d (nodes x samples)")
        if not np.all(np.isfinite(a)):
            raise ContractError("time series has non-finite entries")
        object.__setattr__(self, "entries", a)

    @property
    def n_nodes(self) -> int:
        return self.entries.shape[0]

    @property
    def total_samples(self) -> int:
        return self.entries.shape[1]


def mixing_matrix(n: int, mixing: float, gen: np.random.Generator) -> np.ndarray:
    return np.eye(n) + mixing * gen.standard_normal((n, n)) / np.sqrt(n)


def generate_scenario(spec: ScenarioSpec) -> TimeSeries:
    n, total = spec.n_nodes, spec.total_samples
    gen = RngStream(spec.seed, _BASELINE_STREAM).generator()
    xi = mixing_matrix(n, spec.mixing, gen)
    V = xi @ gen.standard_normal((n, total))
    if not spec.kind.has_signal:
        return TimeSeries(V)

    t = np.arange(spec.onset, total)
    progress = (t - spec.onset) / (total - spec.onset)
    rows = list(spec.target_nodes)
    if spec.kind is Kind.STEP:
        signal = np.full(t.size, spec.magnitude)
    elif spec.kind is Kind.RAMP:
        signal = spec.magnitude * progress
    else:
        common = RngStream(spec.seed, _EVENT_STREAM).generator().standard_normal(total)
        signal = spec.magnitude * (1 + COLLAPSE_GROWTH * progress) * common[spec.onset:]
    V[rows, spec.onset:] += signal
    return TimeSeries(V)


def sample_window(ts, start: int, length: int = WINDOW_LENGTH) -> np.ndarray:
    """Columns ``[start, start + length)`` of a time series (a copy)."""
    a = ts.entries if isinstance(ts, TimeSeries) else np.asarray(ts, dtype=float)
    if length < 1 or start < 0 or start + length > a.shape[1]:
        raise ContractError(
            f"window [{start}, {start + length}) outside [0, {a.shape[1]})"
        )
    return a[:, start:start + length].copy()


def save_csv(m, path) -> None:
    """Write a matrix as headerless CSV at 17 significant digits."""
    a = np.asarray(m.entries if isinstance(m, TimeSeries) else m, dtype=float)
    if a.ndim != 2:
        raise ContractError("only 2-d matrices can be saved")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in a:
            w.writerow([format(v, ".17g") for v in row])


def load_csv(path) -> np.ndarray:
    """Read a headerless numeric CSV (rows = nodes, columns = samples)."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ParseError(f"{path}: empty file")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(
                f"{path}: row {i} has {len(row)} columns, expected {width}", row=i
            )
        for j, cell in enumerate(row, start=1):
            try:
                out[i - 1, j - 1] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric cell {cell!r} at row {i}, column {j}", row=i, col=j
                ) from None
    return out


@dataclass(frozen=True)
class LabeledScenario:
    """A scenario together with the window that is analysed."""

    label: str
    spec: ScenarioSpec
    window_start: int
    window_length: int = WINDOW_LENGTH

    def window(self) -> np.ndarray:
        return sample_window(generate_scenario(self.spec), self.window_start, self.window_length)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "window_start": self.window_start,
            "window_length": self.window_length,
            **self.spec.to_dict(),
        }


# label -> (kind, targets, magnitude, onset, window)
_BATTERY = {
    "reference": (Kind.REFERENCE, (), 0.0, 0, "V0"),
    "step": (Kind.STEP, range(0, 25), 5.0, 901, "V1"),
    "rampA": (Kind.RAMP, range(20, 40), 70.0, 1918, "V2"),
    "rampB": (Kind.RAMP, range(50, 75), 55.0, 3118, "V3"),
    "collapse": (Kind.COLLAPSE, range(70, 110), 3.0, 3908, "V4"),
    "noise": (Kind.NOISE, (), 0.0, 0, "V5"),
}


def default_battery(seed: int = 0) -> list[LabeledScenario]:
    """The six standard scenarios (reference, step, two ramps, collapse, noise), all sharing ``seed``."""
    return [
        LabeledScenario(
            label,
            ScenarioSpec(kind, tuple(targets), mag, onset, seed=seed),
            WINDOW_STARTS[win],
        )
        for label, (kind, targets, mag, onset, win) in _BATTERY.items()
    ]


def load_battery(path) -> list[LabeledScenario]:
    """Read a JSON list of scenarios.

    Each entry holds the ScenarioSpec fields plus ``label`` and
    ``window_start`` (and optionally ``window_length``). Exactly one entry
    must be labelled ``reference``.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if isinstance(doc, dict):
        doc = doc.get("scenarios", doc)
    if not isinstance(doc, list) or not doc:
        raise ContractError(f"{path}: expected a non-empty list of scenarios")
    out = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise ContractError(f"{path}: scenario {i} is not an object")
        entry = dict(entry)
        try:
            label = str(entry.pop("label"))
            start = int(entry.pop("window_start"))
        except KeyError as exc:
            raise ContractError(f"{path}: scenario {i} lacks {exc}") from None
        length = int(entry.pop("window_length", WINDOW_LENGTH))
        spec = spec_from_dict(entry)
        if start < 0 or start + length > spec.total_samples:
            raise ContractError(f"{path}: window of scenario {label!r} is out of range")
        out.append(LabeledScenario(label, spec, start, length))
    labels = [s.label for s in out]
    if len(set(labels)) != len(labels):
        raise ContractError(f"{path}: duplicate scenario labels")
    if labels.count("reference") != 1:
        raise ContractError(f"{path}: exactly one scenario must be labelled 'reference'")
    return out
