"""Classical and minmax-MSE influence curves and their risks.

Contamination (any k)::

    psi = A (L - z) w,   w = min(1, b / |A (L - z)|)
    r^2 b = E(|A (L - z)| - b)_+,   0 = E (L - z) w,   A^-1 = E (L - z)(L - z)' w

Total variation (k = 1)::

    psi = c v A L ^ (c + b),   r^2 b = E(c - A L)_+ = E(A L - (c + b))_+,   E psi L = 1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import RankDeficiency, SolverFailure, UnsupportedDimension
from .expectation import DEFAULT as DEFAULT_EXPECTATION
from .expectation import ExpectationConfig, expect, lattice_nodes, sign_changes, sup_abs
from .families import ParametricFamily, as_theta

CONTAMINATION = "contamination"
TOTAL_VARIATION = "total-variation"
_ALIASES = {"c": CONTAMINATION, "v": TOTAL_VARIATION, CONTAMINATION: CONTAMINATION,
            TOTAL_VARIATION: TOTAL_VARIATION}

# flat centering intervals wider than this trigger the theta perturbation
FLAT_WIDTH = 1e-6
THETA_NUDGE = 1e-8


def neighborhood(name: str) -> str:
    try:
        return _ALIASES[name]
    except KeyError:
        raise ValueError(f"unknown neighborhood {name!r}; use 'c' or 'v'") from None


@dataclass(frozen=True)
class SolverConfig:
    rel_change: float = 1e-10
    residual_tol: float = 1e-8
    max_sweeps: int = 200
    damping: float = 0.5
    damping_after: int = 20
    expectation: ExpectationConfig = DEFAULT_EXPECTATION


DEFAULT_SOLVER = SolverConfig()


def safe_inverse(mat: np.ndarray, what: str = "matrix") -> np.ndarray:
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if not np.all(np.isfinite(mat)) or np.linalg.cond(mat) > 1e12:
        raise RankDeficiency(f"{what} is numerically singular")
    inv = np.linalg.solve(mat, np.eye(mat.shape[0]))
    return 0.5 * (inv + inv.T)


@dataclass(frozen=True, eq=False)
class InfluenceCurve:
    """Evaluable IC with its Lagrange multipliers.

    ``kind`` is ``"classical"``, ``"optimal"`` or ``"approximate"`` (the
    total-variation reduction).  ``b`` is infinite for classical ICs of models
    with unbounded scores.  ``c`` is set only for exact total-variation ICs.
    """

    family: ParametricFamily
    theta: np.ndarray
    neighborhood: str
    radius: float
    A: np.ndarray
    z: np.ndarray
    b: float
    c: float | None = None
    kind: str = "optimal"
    theta_shift: float = 0.0

    @property
    def k(self) -> int:
        return self.family.dim_param

    @property
    def a(self) -> np.ndarray:
        return self.A @ self.z

    @property
    def clipped(self) -> bool:
        return math.isfinite(self.b)

    def standardized(self, x) -> np.ndarray:
        """``A (L(x) - z)`` (or ``A L(x)`` for total variation)."""
        lam = self.family.scores(self.theta, x)
        return (lam - self.z) @ self.A.T

    def weight(self, x) -> np.ndarray:
        y = self.standardized(x)
        if self.c is not None:
            y1 = y[..., 0]
            psi = np.clip(y1, self.c, self.c + self.b)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(y1 == 0, 1.0, psi / np.where(y1 == 0, 1.0, y1))
        if not self.clipped:
            return np.ones(y.shape[:-1])
        norm = np.sqrt(np.sum(y * y, axis=-1))
        with np.errstate(divide="ignore"):
            return np.minimum(1.0, self.b / norm)

    def __call__(self, x) -> np.ndarray:
        return self.eval(x)

    def eval(self, x) -> np.ndarray:
        y = self.standardized(x)
        if self.c is not None:
            return np.clip(y, self.c, self.c + self.b)
        if not self.clipped:
            return y
        return y * self.weight(x)[..., None]

    def kinks(self, config: ExpectationConfig | None = None) -> np.ndarray:
        """Points where the IC is not smooth (for quadrature breakpoints)."""
        if self.family.support.is_lattice or not self.clipped:
            return np.empty(0)
        if self.c is not None:
            lo = sign_changes(self.family, self.theta, lambda x: self.standardized(x)[:, 0] - self.c, config)
            hi = sign_changes(
                self.family, self.theta, lambda x: self.standardized(x)[:, 0] - self.c - self.b, config
            )
            return np.concatenate([lo, hi])
        return sign_changes(
            self.family,
            self.theta,
            lambda x: np.sqrt(np.sum(self.standardized(x) ** 2, axis=-1)) - self.b,
            config,
        )

    def bounds(self) -> tuple[float, float]:
        """Lower and upper clip values for k = 1 (``(-b, b)`` or ``(c, c + b)``)."""
        if self.c is not None:
            return self.c, self.c + self.b
        return -self.b, self.b


@dataclass(frozen=True)
class RiskReport:
    neighborhood: str
    radius: float
    variance: float
    bias_bound: float
    mse: float
    tr_A: float | None = None
    approximate: bool = False
    residuals: dict = field(default_factory=dict)
    sweeps: int = 0

    def __post_init__(self):
        if self.mse < self.variance:
            raise ValueError("MSE below variance")


# ---------------------------------------------------------------------------
# classical IC
# ---------------------------------------------------------------------------


def classical_ic(family: ParametricFamily, theta) -> InfluenceCurve:
    theta = family.check(theta)
    inv = safe_inverse(family.fisher(theta), "Fisher information")
    return InfluenceCurve(
        family=family,
        theta=theta,
        neighborhood=CONTAMINATION,
        radius=0.0,
        A=inv,
        z=np.zeros(family.dim_param),
        b=math.inf if not family.scores_bounded else _sup_classical(family, theta, inv),
        kind="classical",
    )


def _sup_classical(family, theta, inv):
    return sup_abs(family, theta, lambda x: family.scores(theta, x) @ inv.T)


def _classical_report(ic: InfluenceCurve, nb: str) -> RiskReport:
    tr = float(np.trace(ic.A))
    return RiskReport(neighborhood=nb, radius=0.0, variance=tr, bias_bound=ic.b, mse=tr, tr_A=tr)


# ---------------------------------------------------------------------------
# contamination solver
# ---------------------------------------------------------------------------


class _Model:
    """Cached score evaluations for one ``(family, theta)``."""

    def __init__(self, family, theta, cfg: ExpectationConfig):
        self.family = family
        self.theta = theta
        self.cfg = cfg
        self.k = family.dim_param
        self.lattice = family.support.is_lattice
        if self.lattice:
            # fixed summation nodes: scores are evaluated once per solve
            self.nodes, self.probs = lattice_nodes(family, theta, cfg)
            self.node_scores = family.scores(theta, self.nodes)

    def scores(self, x):
        if self.lattice and x is self.nodes:
            return self.node_scores
        return self.family.scores(self.theta, x)

    def E(self, f, breakpoints=None):
        if self.lattice:
            vals = np.asarray(f(self.nodes), dtype=float)
            if vals.ndim == 1:
                return float(self.probs @ vals)
            return (self.probs @ vals.reshape(vals.shape[0], -1)).reshape(vals.shape[1:])
        return expect(self.family, self.theta, f, self.cfg, breakpoints)

    def crossings(self, g):
        return sign_changes(self.family, self.theta, g, self.cfg)


def _norm(y):
    return np.sqrt(np.sum(y * y, axis=-1))


def _clip_weight(y, b):
    n = _norm(y)
    with np.errstate(divide="ignore"):
        return np.minimum(1.0, b / n)


def _solve_clip(m: _Model, A, z, r, b0=None):
    """Root ``b`` of ``r^2 b = E(|A(L - z)| - b)_+`` by safeguarded Newton."""

    def Y(x):
        return _norm((m.scores(x) - z) @ A.T)

    def h(b):
        bps = None if m.lattice else m.crossings(lambda x: Y(x) - b)
        vals = m.E(lambda x: np.stack([np.maximum(Y(x) - b, 0.0), (Y(x) > b).astype(float)], -1), bps)
        return vals[0] - r * r * b, -vals[1] - r * r

    mean_y, _ = h(0.0)
    lo, hi = 0.0, mean_y / (r * r)  # h(hi) <= 0 since E(Y - b)_+ <= EY
    b = b0 if (b0 is not None and lo < b0 < hi) else 0.5 * hi
    for _ in range(100):
        val, der = h(b)
        if val > 0:
            lo = b
        else:
            hi = b
        if abs(val) <= 1e-15 * max(1.0, r * r * b):
            return b
        step = b - val / der
        if not lo < step < hi:
            step = 0.5 * (lo + hi)
        if abs(step - b) <= 1e-14 * max(b, 1e-300) or hi - lo <= 1e-14 * hi:
            return step
        b = step
    return b


def _center_1d(m: _Model, A, b, z0):
    """Root of ``z -> E clip(A(L - z), -b, b)`` for k = 1; flags flat roots."""
    a = abs(float(A[0, 0]))
    half = b / a

    def F(zv):
        def f(x):
            lam = m.scores(x)[:, 0]
            return np.clip(lam - zv, -half, half)

        bps = None
        if not m.lattice:
            bps = np.concatenate(
                [m.crossings(lambda x: m.scores(x)[:, 0] - zv - half),
                 m.crossings(lambda x: m.scores(x)[:, 0] - zv + half)]
            )
        return float(m.E(f, bps))

    # E clip(L - z) is decreasing in z; L has mean zero
    lo = float(z0) - max(half, 1.0)
    hi = float(z0) + max(half, 1.0)
    while F(lo) < 0:
        lo -= 2.0 * (hi - lo)
    while F(hi) > 0:
        hi += 2.0 * (hi - lo)
    flo, fhi = F(lo), F(hi)
    if flo == 0.0:
        root = lo
    elif fhi == 0.0:
        root = hi
    else:
        root = brentq(F, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    flat = abs(F(root - FLAT_WIDTH / 2)) < 1e-14 and abs(F(root + FLAT_WIDTH / 2)) < 1e-14
    return np.array([root]), flat


def _contamination_sweeps(family, theta, r, cfg: SolverConfig, start=None):
    m = _Model(family, theta, cfg.expectation)
    k = m.k
    info = family.fisher(theta)
    if start is None:
        A = safe_inverse(info, "Fisher information")
        z = np.zeros(k)
        b = None
    else:
        A, z, b = (np.array(start[0]), np.array(start[1]), start[2])
    history = []
    prev_change = math.inf
    stalls = 0
    flat = False
    for sweep in range(1, cfg.max_sweeps + 1):
        b_new = _solve_clip(m, A, z, r, b)
        if k == 1:
            z_new, flat = _center_1d(m, A, b_new, z[0])
        else:
            def wts(x, A=A, z=z, b=b_new):
                lam = m.scores(x)
                w = _clip_weight((lam - z) @ A.T, b)
                return np.concatenate([lam * w[:, None], w[:, None]], axis=1)

            bps = _kinks(m, A, z, b_new)
            v = m.E(wts, bps)
            z_new = v[:k] / v[k]
        bps = _kinks(m, A, z_new, b_new)

        def outer(x, A=A, z=z_new, b=b_new):
            d = m.scores(x) - z
            w = _clip_weight(d @ A.T, b)
            return d[:, :, None] * d[:, None, :] * w[:, None, None]

        A_new = safe_inverse(m.E(outer, bps), "standardizing matrix")
        if stalls >= cfg.damping_after:
            A_new = cfg.damping * A + (1 - cfg.damping) * A_new
            z_new = cfg.damping * z + (1 - cfg.damping) * z_new
        change = max(
            float(np.max(np.abs(A_new - A)) / np.max(np.abs(A))),
            float(np.max(np.abs(z_new - z)) / max(1.0, float(np.max(np.abs(z))))),
            abs(b_new - b) / b_new if b is not None else math.inf,
        )
        history.append(change)
        stalls = stalls + 1 if change >= prev_change else 0
        prev_change = change
        A, z, b = A_new, z_new, b_new
        if change < cfg.rel_change:
            b = _solve_clip(m, A, z, r, b)
            return A, z, b, sweep, history, flat
    raise SolverFailure(
        f"contamination solver did not converge in {cfg.max_sweeps} sweeps at r={r}",
        history=history,
    )


def _kinks(m: _Model, A, z, b):
    if m.lattice:
        return None
    return m.crossings(lambda x: _norm((m.scores(x) - z) @ A.T) - b)


def contamination_residuals(ic: InfluenceCurve, config: ExpectationConfig | None = None) -> dict:
    """Relative residuals of the three defining equations at ``ic``."""
    fam, th, A, z, b, r = ic.family, ic.theta, ic.A, ic.z, ic.b, ic.radius
    k = fam.dim_param
    bps = ic.kinks(config)

    def f(x):
        d = fam.scores(th, x) - z
        y = d @ A.T
        n = _norm(y)
        w = np.minimum(1.0, b / n)
        cols = [np.maximum(n - b, 0.0)[:, None], d * w[:, None], (_norm(d) * w)[:, None],
                (d[:, :, None] * d[:, None, :] * w[:, None, None]).reshape(len(x), -1)]
        return np.concatenate(cols, axis=1)

    v = expect(fam, th, f, config, bps)
    pos, cent, scale, outer = v[0], v[1:1 + k], v[1 + k], v[2 + k:].reshape(k, k)
    return {
        "clip": abs(pos - r * r * b) / (r * r * b),
        "centering": float(np.linalg.norm(cent) / scale),
        "standardization": float(np.max(np.abs(A @ outer - np.eye(k)))),
    }


def _finish_contamination(family, theta, r, A, z, b, sweeps, cfg, shift=0.0):
    ic = InfluenceCurve(
        family=family, theta=theta, neighborhood=CONTAMINATION, radius=r,
        A=A, z=z, b=b, kind="optimal", theta_shift=shift,
    )
    tr = float(np.trace(A))
    # E|psi|^2 = tr A - r^2 b^2 holds exactly at the solution; computed directly here
    var = float(expect(family, theta, lambda x: np.sum(ic.eval(x) ** 2, axis=-1),
                       cfg.expectation, ic.kinks(cfg.expectation)))
    report = RiskReport(
        neighborhood=CONTAMINATION, radius=r, variance=var, bias_bound=b,
        mse=var + r * r * b * b, tr_A=tr,
        residuals=contamination_residuals(ic, cfg.expectation), sweeps=sweeps,
    )
    return ic, report


@lru_cache(maxsize=2048)
def _solve_contamination_cached(family, theta_key, r, cfg, start):
    theta = np.asarray(theta_key)
    start = None if start is None else (np.asarray(start[0]).reshape(family.dim_param, -1),
                                        np.asarray(start[1]), start[2])
    shift = 0.0
    A, z, b, sweeps, history, flat = _contamination_sweeps(family, theta, r, cfg, start)
    if flat:
        # non-unique centering on a lattice: move off the exceptional theta
        shift = THETA_NUDGE
        theta = theta + THETA_NUDGE
        A, z, b, sweeps, history, flat = _contamination_sweeps(family, theta, r, cfg, (A, z, b))
        if flat:
            raise SolverFailure(
                "degenerate centering persists after theta perturbation",
                history=history, suggestion=theta.tolist(),
            )
    return _finish_contamination(family, theta, r, A, z, b, sweeps, cfg, shift)


def _start_key(start):
    if start is None:
        return None
    A, z, b = start
    return (tuple(np.asarray(A, float).ravel().tolist()), tuple(np.asarray(z, float).tolist()), float(b))


def solve_contamination_ic(family: ParametricFamily, theta, r: float,
                           config: SolverConfig | None = None, start=None):
    """Minmax-MSE IC on contamination neighborhoods of radius ``r``.

    Returns ``(InfluenceCurve, RiskReport)``; ``r == 0`` gives the classical IC.
    ``start`` optionally warm-starts the iteration with ``(A, z, b)``.
    """
    cfg = config or DEFAULT_SOLVER
    theta = family.check(theta)
    r = float(r)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if r == 0:
        ic = classical_ic(family, theta)
        return ic, _classical_report(ic, CONTAMINATION)
    if family.location_scale:
        return _location_scale_transform(family, theta, r, cfg)
    return _solve_contamination_cached(family, tuple(theta.tolist()), r, cfg, _start_key(start))


def _location_scale_transform(family, theta, r, cfg):
    """Solve at the standard member and map multipliers to ``theta``.

    With ``L_theta(x) = L_0(u) / sigma`` for ``u = (x - mu) / sigma``:
    ``A_theta = sigma^2 A_0``, ``z_theta = z_0 / sigma``, ``b_theta = sigma b_0``.
    """
    std = family.standard_theta()
    ic0, rep0 = _solve_contamination_cached(family, tuple(std.tolist()), r, cfg, None)
    s = family.scale(theta)
    ic = replace(ic0, theta=theta, A=ic0.A * s * s, z=ic0.z / s, b=ic0.b * s)
    rep = replace(rep0, variance=rep0.variance * s * s, bias_bound=rep0.bias_bound * s,
                  mse=rep0.mse * s * s, tr_A=rep0.tr_A * s * s)
    return ic, rep


# ---------------------------------------------------------------------------
# total variation solver (k = 1)
# ---------------------------------------------------------------------------


def _tv_inner(m: _Model, a, r):
    """Given standardization ``a``, solve for the clip pair ``(c, b)``."""
    r2 = r * r

    def u(x):
        return a * m.scores(x)[:, 0]

    def pos(level, upper):
        g = (lambda x: u(x) - level) if upper else (lambda x: level - u(x))
        bps = None if m.lattice else m.crossings(g)
        return float(m.E(lambda x: np.maximum(g(x), 0.0), bps))

    def b_of(c):
        return pos(c, upper=False) / r2

    def resid(c):
        b = b_of(c)
        return pos(c + b, upper=True) - r2 * b

    lo = -1.0
    while resid(lo) <= 0:
        lo *= 2.0
        if lo < -1e12:
            raise SolverFailure("total-variation lower clip bracket not found")
    c = brentq(resid, lo, 0.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return c, b_of(c)


def _tv_fisher_gap(m: _Model, a, c, b):
    def f(x):
        lam = m.scores(x)[:, 0]
        return np.clip(a * lam, c, c + b) * lam

    bps = None
    if not m.lattice:
        bps = np.concatenate([m.crossings(lambda x: a * m.scores(x)[:, 0] - c),
                              m.crossings(lambda x: a * m.scores(x)[:, 0] - c - b)])
    return float(m.E(f, bps)) - 1.0


def tv_residuals(ic: InfluenceCurve, config: ExpectationConfig | None = None) -> dict:
    fam, th, r = ic.family, ic.theta, ic.radius
    a, c, b = float(ic.A[0, 0]), ic.c, ic.b
    bps = ic.kinks(config)

    def f(x):
        lam = fam.scores(th, x)[:, 0]
        u = a * lam
        return np.stack([np.maximum(c - u, 0.0), np.maximum(u - c - b, 0.0),
                         np.clip(u, c, c + b) * lam, np.clip(u, c, c + b)], -1)

    v = expect(fam, th, f, config, bps)
    r2b = r * r * b
    return {
        "lower": abs(v[0] - r2b) / r2b,
        "upper": abs(v[1] - r2b) / r2b,
        "fisher": abs(v[2] - 1.0),
        "centering": abs(v[3]),
    }


def solve_totalvariation_ic(family: ParametricFamily, theta, r: float,
                            config: SolverConfig | None = None):
    """Exact minmax-MSE IC on total-variation neighborhoods (k = 1 only)."""
    cfg = config or DEFAULT_SOLVER
    if family.dim_param != 1:
        raise UnsupportedDimension(
            "exact total-variation solution exists only for k = 1; use tv_by_reduction"
        )
    theta = family.check(theta)
    r = float(r)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if r == 0:
        ic = replace(classical_ic(family, theta), neighborhood=TOTAL_VARIATION)
        return ic, _classical_report(ic, TOTAL_VARIATION)
    return _solve_tv_cached(family, tuple(theta.tolist()), r, cfg)


@lru_cache(maxsize=2048)
def _solve_tv_cached(family, theta_key, r, cfg):
    theta = np.asarray(theta_key)
    m = _Model(family, theta, cfg.expectation)
    a0 = float(safe_inverse(family.fisher(theta))[0, 0])
    evals = []

    def gap(a):
        c, b = _tv_inner(m, a, r)
        g = _tv_fisher_gap(m, a, c, b)
        evals.append((a, g))
        return g

    lo, hi = a0, 2.0 * a0
    g_lo = gap(lo)
    while g_lo > 0:
        lo *= 0.5
        g_lo = gap(lo)
    g_hi = gap(hi)
    while g_hi < 0:
        lo, g_lo = hi, g_hi
        hi *= 2.0
        g_hi = gap(hi)
        if hi > 1e12 * a0:
            raise SolverFailure("total-variation standardization bracket not found", history=evals)
    a = brentq(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    c, b = _tv_inner(m, a, r)
    ic = InfluenceCurve(
        family=family, theta=theta, neighborhood=TOTAL_VARIATION, radius=r,
        A=np.array([[a]]), z=np.zeros(1), b=b, c=c, kind="optimal",
    )
    var = float(expect(family, theta, lambda x: ic.eval(x)[:, 0] ** 2, cfg.expectation,
                       ic.kinks(cfg.expectation)))
    report = RiskReport(
        neighborhood=TOTAL_VARIATION, radius=r, variance=var, bias_bound=b,
        mse=var + r * r * b * b, tr_A=a,
        residuals=tv_residuals(ic, cfg.expectation), sweeps=len(evals),
    )
    return ic, report


def tv_by_reduction(family: ParametricFamily, theta, r: float, config: SolverConfig | None = None):
    """Approximate total-variation IC: the contamination solution at radius 2r."""
    ic, rep = solve_contamination_ic(family, theta, 2.0 * float(r), config)
    if float(r) == 0:
        return replace(ic, neighborhood=TOTAL_VARIATION), replace(rep, neighborhood=TOTAL_VARIATION)
    ic = replace(ic, neighborhood=TOTAL_VARIATION, radius=float(r), kind="approximate")
    # omega_v <= 2 omega_c = 2b, so the bound below equals tr A at radius 2r
    rep = replace(rep, neighborhood=TOTAL_VARIATION, radius=float(r),
                  bias_bound=2.0 * ic.b, mse=rep.variance + (2.0 * r * ic.b) ** 2,
                  approximate=True)
    return ic, rep


def solve_ic(family, theta, r, nb: str = CONTAMINATION, config: SolverConfig | None = None,
             start=None):
    """Dispatch to the exact solver for the neighborhood type.

    Total variation with k > 1 falls back to :func:`tv_by_reduction`.
    ``start`` warm-starts the contamination iteration and is ignored otherwise.
    """
    nb = neighborhood(nb)
    if nb == CONTAMINATION:
        if family.location_scale:
            start = None  # solved once at the standard member
        return solve_contamination_ic(family, theta, r, config, start)
    if family.dim_param == 1:
        return solve_totalvariation_ic(family, theta, r, config)
    return tv_by_reduction(family, theta, r, config)


# ---------------------------------------------------------------------------
# bias and risk
# ---------------------------------------------------------------------------


def omega(psi, nb: str = CONTAMINATION, family: ParametricFamily | None = None, theta=None,
          config: ExpectationConfig | None = None) -> float:
    """Standardized infinitesimal bias ``omega_c`` or ``omega_v`` (k = 1).

    Solver-produced ICs report their multipliers directly; raw functions need
    ``family`` and ``theta`` and are evaluated on the sup grid.
    """
    nb = neighborhood(nb)
    if isinstance(psi, InfluenceCurve):
        if not psi.clipped:
            return math.inf
        if nb == CONTAMINATION:
            if psi.c is None:
                return psi.b
            return max(abs(psi.c), abs(psi.c + psi.b))
        if psi.k != 1:
            raise UnsupportedDimension("omega_v is implemented for k = 1 only")
        if psi.c is not None:
            return psi.b
        return _sup_minus_inf(psi.family, psi.theta, psi.eval, config)
    if family is None or theta is None:
        raise ValueError("raw functions need family and theta")
    if nb == CONTAMINATION:
        return sup_abs(family, theta, psi, config)
    return _sup_minus_inf(family, theta, psi, config)


def _sup_minus_inf(family, theta, f, config):
    def scalar(x):
        v = np.asarray(f(x), dtype=float)
        if v.ndim > 1:
            if v.shape[1] != 1:
                raise UnsupportedDimension("omega_v is implemented for k = 1 only")
            v = v[:, 0]
        return v

    top = sup_abs(family, theta, lambda x: np.maximum(scalar(x), 0.0), config)
    bottom = sup_abs(family, theta, lambda x: np.maximum(-scalar(x), 0.0), config)
    if top == 0.0:
        top = -sup_abs(family, theta, lambda x: np.minimum(scalar(x), 0.0), config)
    if bottom == 0.0:
        bottom = -sup_abs(family, theta, lambda x: np.minimum(-scalar(x), 0.0), config)
    return top + bottom


def mse_of(psi: InfluenceCurve, r: float, nb: str = CONTAMINATION,
           config: ExpectationConfig | None = None) -> RiskReport:
    """Maximum asymptotic MSE ``E|psi|^2 + r^2 omega^2`` of ``psi`` at radius ``r``."""
    nb = neighborhood(nb)
    r = float(r)
    if psi.kind == "classical":
        var = float(np.trace(psi.A))
    else:
        var = float(expect(psi.family, psi.theta, lambda x: np.sum(psi.eval(x) ** 2, axis=-1),
                           config, psi.kinks(config)))
    if nb == TOTAL_VARIATION and psi.kind == "approximate":
        w = 2.0 * psi.b
    else:
        w = omega(psi, nb, config=config)
    if r == 0:
        mse = var
    else:
        mse = math.inf if math.isinf(w) else var + r * r * w * w
    return RiskReport(neighborhood=nb, radius=r, variance=var, bias_bound=w, mse=mse)
