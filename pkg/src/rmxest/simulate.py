"""Contaminated samplers and a Monte Carlo risk comparator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .data import Dataset
from .errors import InvalidParameter, InvalidTangent, RmxError
from .expectation import expect
from .families import ParametricFamily
from .onestep import EstimationReport, roptest_pipeline, shift_within_bound
from .start import median_mad, mle, start_estimate

Contaminant = Union[float, Callable[[np.random.Generator, int], np.ndarray]]


@dataclass(frozen=True)
class ContaminationScenario:
    """``n`` i.i.d. draws from ``(1 - s) P_theta + s Q``.

    ``contaminant`` is a Dirac location (float) or a sampler ``(rng, size) -> array``.
    """

    family: ParametricFamily
    theta: tuple
    s: float
    contaminant: Contaminant
    n: int
    seed: int | None = 0

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise InvalidParameter(f"contamination fraction must lie in [0, 1], got {self.s}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameter(f"sample size must be a positive integer, got {self.n}")
        object.__setattr__(self, "theta", tuple(self.family.check(self.theta).tolist()))


def _draw_contaminant(contaminant: Contaminant, rng, size) -> np.ndarray:
    if callable(contaminant):
        return np.asarray(contaminant(rng, size), dtype=float).reshape(size)
    return np.full(size, float(contaminant))


def draw_contaminated(scenario: ContaminationScenario, rng: np.random.Generator):
    """Raw draws and the mask of contaminated positions."""
    n = int(scenario.n)
    mask = rng.uniform(size=n) < scenario.s
    x = scenario.family.sample(scenario.theta, rng, n)
    m = int(mask.sum())
    if m:
        x[mask] = _draw_contaminant(scenario.contaminant, rng, m)
    return x, mask


def sample_contaminated(scenario: ContaminationScenario, rng: np.random.Generator | None = None
                        ) -> Dataset:
    """Dataset from the contaminated law; deterministic given the scenario seed."""
    rng = rng if rng is not None else np.random.default_rng(scenario.seed)
    x, _ = draw_contaminated(scenario, rng)
    return Dataset.from_observations(x, label="contaminated")


@dataclass(frozen=True)
class Tangent:
    """Bounded tangent ``q`` with known ``inf`` and ``sup`` over the support."""

    q: Callable[[np.ndarray], np.ndarray]
    inf: float
    sup: float


def sample_simple_perturbation(family: ParametricFamily, theta, tangent: Tangent, r: float, n: int,
                               seed=None, size: int | None = None, mean_tol: float = 1e-8
                               ) -> Dataset:
    """Draws from ``(1 + r n^-1/2 q) dP_theta`` by acceptance-rejection.

    ``n`` sets the perturbation scale; ``size`` draws are returned (default ``n``).
    """
    theta = family.check(theta)
    lo, hi = float(tangent.inf), float(tangent.sup)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise InvalidTangent("tangent must be bounded with inf <= sup")
    if lo < -1.0:
        raise InvalidTangent(f"inf q = {lo} < -1 is outside the contamination tangent class")
    if r < 0 or n < 1:
        raise InvalidTangent("need r >= 0 and n >= 1")
    if math.sqrt(n) < -r * lo:
        raise InvalidTangent("perturbed density would be negative: sqrt(n) < -r inf q")
    mean = float(expect(family, theta, lambda x: np.asarray(tangent.q(x), dtype=float)))
    if abs(mean) > mean_tol:
        raise InvalidTangent(f"tangent is not centered: E q = {mean:.3g}")
    size = int(n if size is None else size)
    rng = np.random.default_rng(seed)
    delta = r / math.sqrt(n)
    envelope = 1.0 + delta * max(hi, 0.0)
    out = np.empty(size)
    filled = 0
    while filled < size:
        batch = max(64, int(1.2 * (size - filled) * envelope))
        x = family.sample(theta, rng, batch)
        accept = rng.uniform(size=batch) * envelope <= 1.0 + delta * np.asarray(tangent.q(x), float)
        take = x[accept][: size - filled]
        out[filled:filled + take.size] = take
        filled += take.size
    return Dataset.from_observations(out, label="perturbed")


# ---------------------------------------------------------------------------
# Monte Carlo comparison
# ---------------------------------------------------------------------------

# an estimator maps a dataset to an estimate or to a full one-step report
Estimator = Callable[[Dataset], Union[np.ndarray, EstimationReport]]


@dataclass(frozen=True)
class MCRow:
    label: str
    n_mse: float
    se: float
    used: int
    failures: int
    shift_violations: int

    @property
    def flagged(self) -> bool:
        """Failures were excluded from the mean."""
        return self.failures > 0


@dataclass(frozen=True)
class MCTable:
    scenario: ContaminationScenario
    reps: int
    seed: int
    rows: tuple = field(default_factory=tuple)

    def row(self, label: str) -> MCRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)


def mc_compare(scenario: ContaminationScenario, estimators: Sequence[tuple[str, Estimator]],
               reps: int = 1000, seed: int = 0, min_reps: int = 100) -> MCTable:
    """Empirical ``n |theta_hat - theta|^2`` per estimator with MC standard errors.

    Replication ``i`` draws from its own stream spawned from ``seed``; losses
    are accumulated in replication order, so equal seeds give equal tables.
    """
    if reps < min_reps:
        raise InvalidParameter(f"need at least {min_reps} replications, got {reps}")
    labels = [lab for lab, _ in estimators]
    if len(set(labels)) != len(labels):
        raise InvalidParameter("estimator labels must be unique")
    theta = np.asarray(scenario.theta)
    n = int(scenario.n)
    losses = {lab: [] for lab in labels}
    failures = dict.fromkeys(labels, 0)
    violations = dict.fromkeys(labels, 0)
    for child in np.random.SeedSequence(seed).spawn(reps):
        rng = np.random.default_rng(child)
        x, _ = draw_contaminated(scenario, rng)
        try:
            data = Dataset.from_observations(x, label="mc")
        except RmxError:
            for lab in labels:
                failures[lab] += 1
            continue
        for lab, est in estimators:
            try:
                out = est(data)
            except (RmxError, ValueError, FloatingPointError):
                failures[lab] += 1
                continue
            if isinstance(out, EstimationReport):
                if not shift_within_bound(out):
                    violations[lab] += 1
                out = out.final
            est_theta = np.asarray(out, dtype=float)
            if not np.all(np.isfinite(est_theta)):
                failures[lab] += 1
                continue
            losses[lab].append(n * float(np.sum((est_theta - theta) ** 2)))
    rows = []
    for lab in labels:
        arr = np.asarray(losses[lab])
        if arr.size:
            mean = float(arr.mean())
            se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else math.inf
        else:
            mean = se = math.nan
        rows.append(MCRow(lab, mean, se, int(arr.size), failures[lab], violations[lab]))
    return MCTable(scenario=scenario, reps=reps, seed=seed, rows=tuple(rows))


# ---------------------------------------------------------------------------
# standard estimators
# ---------------------------------------------------------------------------


def rmx_estimator(family: ParametricFamily, eps_lo: float, eps_up: float, nb: str = "contamination",
                  start_method: str = "cvm") -> Estimator:
    def est(data):
        return roptest_pipeline(family, data, eps_lo, eps_up, nb, start_method)

    return est


def standard_estimators(family: ParametricFamily, names: Sequence[str], eps_lo: float = 0.05,
                        eps_up: float = 0.20, nb: str = "contamination",
                        rmx_start: str = "cvm") -> list[tuple[str, Estimator]]:
    """Named estimators: ``mle``, ``mean-sd``, ``median-mad``, ``cvm``, ``rmx``."""
    table = {
        "mle": lambda d: mle(family, d),
        "cvm": lambda d: start_estimate("cvm", family, d),
        "median-mad": lambda d: np.array(median_mad(d)),
        "rmx": rmx_estimator(family, eps_lo, eps_up, nb, rmx_start),
    }
    if family.name == "normal-loc-scale":
        table["mean-sd"] = table["mle"]
    out = []
    for name in names:
        if name not in table:
            raise InvalidParameter(f"unknown estimator {name!r} for {family.name}; have {sorted(table)}")
        if name == "median-mad" and family.name != "normal-loc-scale":
            raise InvalidParameter("median-mad is only available for the normal location-scale model")
        out.append((name, table[name]))
    return out
