"""Datasets, CSV ingestion and the embedded example data."""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidData

# copper in wholemeal flour (ppm), 24 measurements
COPPER = (
    2.20, 2.20, 2.40, 2.40, 2.50, 2.70, 2.80, 2.90,
    3.03, 3.03, 3.10, 3.37, 3.40, 3.40, 3.40, 3.50,
    3.60, 3.70, 3.70, 3.70, 3.70, 3.77, 5.28, 28.95,
)

# polonium decay counts (value, frequency), n = 2608
POLONIUM = (
    (0, 57), (1, 203), (2, 383), (3, 525), (4, 532), (5, 408), (6, 273), (7, 139),
    (8, 45), (9, 27), (10, 10), (11, 4), (12, 0), (13, 1), (14, 1),
)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observations stored as sorted distinct ``values`` with ``counts``.

    Raw samples and frequency tables share this representation; frequency
    tables are never expanded.
    """

    values: np.ndarray
    counts: np.ndarray
    label: str = ""
    tabulated: bool = False

    def __post_init__(self):
        if self.values.shape != self.counts.shape or self.values.ndim != 1:
            raise InvalidData("values and counts must be 1-d arrays of equal length")
        if np.any(self.counts < 0):
            raise InvalidData("negative counts")
        if np.any(np.diff(self.values) <= 0):
            raise InvalidData("frequency values must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise InvalidData("non-finite observation")
        if self.n < 2:
            raise InvalidData(f"need at least 2 observations, got {self.n}")

    @classmethod
    def from_observations(cls, obs, label: str = "") -> "Dataset":
        obs = np.asarray(obs, dtype=float).ravel()
        if obs.size == 0:
            raise InvalidData("empty dataset")
        values, counts = np.unique(obs, return_counts=True)
        return cls(values, counts.astype(float), label)

    @classmethod
    def from_table(cls, rows, label: str = "") -> "Dataset":
        rows = list(rows)
        if not rows:
            raise InvalidData("empty frequency table")
        values = np.array([float(v) for v, _ in rows])
        counts = np.array([float(c) for _, c in rows])
        return cls(values, counts, label, tabulated=True)

    @property
    def n(self) -> int:
        return int(round(float(np.sum(self.counts))))

    @property
    def weights(self) -> np.ndarray:
        return self.counts / np.sum(self.counts)

    def observations(self) -> np.ndarray:
        """Expanded sorted sample (only for small data and tests)."""
        return np.repeat(self.values, self.counts.astype(int))

    def mean(self) -> float:
        return float(np.dot(self.weights, self.values))

    def quantile_sorted(self, p: float) -> float:
        """Sample median-style quantile of the expanded sample (central pair averaged)."""
        cum = np.cumsum(self.counts)
        n = cum[-1]
        pos = p * (n - 1)  # zero-based position in the sorted sample
        lo_i, hi_i = int(np.floor(pos)), int(np.ceil(pos))
        lo = self.values[np.searchsorted(cum, lo_i + 1)]
        hi = self.values[np.searchsorted(cum, hi_i + 1)]
        return float(lo + (hi - lo) * (pos - lo_i))

    def shifted(self, t: float) -> "Dataset":
        return Dataset(self.values + t, self.counts, self.label, self.tabulated)

    def scaled(self, s: float) -> "Dataset":
        return Dataset(self.values * s, self.counts, self.label, self.tabulated)


def digest(ds: Dataset) -> str:
    payload = np.stack([ds.values, ds.counts]).tobytes()
    return hashlib.sha256(payload).hexdigest()


EMBEDDED = {
    "copper": lambda: Dataset.from_observations(COPPER, "copper"),
    "polonium": lambda: Dataset.from_table(POLONIUM, "polonium"),
}


def embedded(name: str) -> Dataset:
    try:
        return EMBEDDED[name]()
    except KeyError:
        raise InvalidData(f"unknown embedded dataset {name!r}; have {sorted(EMBEDDED)}") from None


def parse_csv(text: str, label: str = "") -> Dataset:
    """Parse a one-column (observations) or two-column (value,count) CSV.

    A header row of non-numeric cells is skipped.  Raises :class:`InvalidData`
    with the offending line number.
    """
    rows = []
    width = None
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c.strip() for c in row if c.strip() != ""]
        if not cells or cells[0].startswith("#"):
            continue
        try:
            nums = [float(c) for c in cells]
        except ValueError:
            if not rows and width is None:
                width = len(cells)  # header
                continue
            raise InvalidData(f"line {lineno}: cannot parse {','.join(cells)!r}") from None
        if len(nums) not in (1, 2):
            raise InvalidData(f"line {lineno}: expected 1 or 2 columns, got {len(nums)}")
        if rows and len(nums) != len(rows[0]):
            raise InvalidData(f"line {lineno}: inconsistent number of columns")
        if len(nums) == 2 and nums[1] < 0:
            raise InvalidData(f"line {lineno}: negative count {nums[1]:g}")
        rows.append(nums)
    if not rows:
        raise InvalidData("no observations found")
    if len(rows[0]) == 1:
        return Dataset.from_observations([r[0] for r in rows], label)
    rows.sort(key=lambda r: r[0])
    return Dataset.from_table([(v, c) for v, c in rows], label)


def ingest(source: str) -> Dataset:
    """Load ``embedded:<name>`` or a CSV file path."""
    if source.startswith("embedded:"):
        return embedded(source.split(":", 1)[1])
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidData(f"cannot read {source}: {exc.strerror}") from None
    return parse_csv(text, label=path.name)
