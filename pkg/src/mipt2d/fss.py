"""Finite-size-scaling collapse and related regressions.

Observations (L, p, delta, sigma) are rescaled as
x = (p - p_c) * L**(1/nu), y = delta * L**(-gamma); three objective
functions score how well the rescaled data falls on a single curve, and a
from-scratch Nelder-Mead simplex minimizes them over (p_c, nu). Error bars
are the half-widths of the region where the objective stays below twice
its minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class FitFailureError(RuntimeError):
    pass


@dataclass(frozen=True)
class DataPoint:
    """One averaged observation of a diagnostic at a given system size."""

    L: int
    p: float
    delta: float
    sigma: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be at least one")
        if self.count > 1 and not self.sigma > 0:
            raise ValueError("sigma must be positive when count > 1")


@dataclass(frozen=True)
class ScalingFitResult:
    p_c: float
    nu: float
    gamma: float
    epsilon: float
    p_c_width: float
    nu_width: float
    method: str
    n_evaluations: int = 0
    converged: bool = True
    width_unbounded: bool = False


@dataclass
class SurvivalFit:
    tau: dict  # (L, p) -> decay timescale
    windows: dict  # (L, p) -> (t_lo, t_hi)
    p_c: float
    nu: float
    residual: float
    log_floor: float


def scale_points(points, p_c: float, nu: float, gamma: float = 0.0):
    """Rescale and stable-sort by the scaled tuning variable.

    Returns parallel arrays (x, y, sigma, L, p) sorted by x. Ties (which
    occur whenever a grid value hits p_c exactly) are broken by (L, p) so
    the ordering, and hence every objective, is independent of input order.
    """
    if not nu > 0:
        raise ValueError("nu must be positive")
    pts = list(points)
    x = np.array([(q.p - p_c) * q.L ** (1.0 / nu) for q in pts])
    y = np.array([q.delta * q.L ** (-gamma) for q in pts])
    sig = np.array([q.sigma for q in pts])
    Ls = np.array([q.L for q in pts])
    ps = np.array([q.p for q in pts])
    order = np.lexsort((ps, Ls, x))
    return x[order], y[order], sig[order], Ls[order], ps[order]


def unscale_points(x, y, Ls, p_c: float, nu: float, gamma: float = 0.0):
    """Inverse of the rescaling, for round-trip checks."""
    p = np.asarray(x) / np.asarray(Ls, dtype=float) ** (1.0 / nu) + p_c
    delta = np.asarray(y) * np.asarray(Ls, dtype=float) ** gamma
    return p, delta


def objective_nearest(points, p_c: float, nu: float, gamma: float = 0.0) -> float:
    """Mean squared residual of each interior point against the straight
    line through its two scaled neighbors. Uses no error estimates."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least three points")
    x, y, _, _, _ = scale_points(pts, p_c, nu, gamma)
    resid = 0.0
    m = len(x)
    for i in range(1, m - 1):
        dx = x[i + 1] - x[i - 1]
        if dx == 0.0:
            ytil = 0.5 * (y[i - 1] + y[i + 1])
        else:
            ytil = y[i - 1] + (y[i + 1] - y[i - 1]) / dx * (x[i] - x[i - 1])
        resid += (y[i] - ytil) ** 2
    return resid / (m - 2)


def _sigma_filtered(points):
    pts = [q for q in points if q.count >= 2]
    if not pts:
        raise ValueError("no points with a defined error estimate")
    return pts


def objective_multilevel(points, p_c: float, nu: float, gamma: float = 0.0,
                         neighbors_per_level: int = 2) -> float:
    """For each point, regress against the nearest scaled points from every
    larger system size; mean of squared sigma-normalized deviations."""
    pts = _sigma_filtered(points)
    sizes = sorted({q.L for q in pts})
    if len(sizes) < 2:
        raise ValueError("need at least two distinct system sizes")
    x, y, sig, Ls, _ = scale_points(pts, p_c, nu, gamma)
    total = 0.0
    used = 0
    for i in range(len(x)):
        larger = [Lp for Lp in sizes if Lp > Ls[i]]
        if not larger:
            continue
        xs_ref, ys_ref = [], []
        for Lp in larger:
            mask = Ls == Lp
            xs_l = x[mask]
            ys_l = y[mask]
            below = np.nonzero(xs_l <= x[i])[0]
            above = np.nonzero(xs_l > x[i])[0]
            take = []
            if below.size:
                take.append(below[np.argmax(xs_l[below])])
            if above.size:
                take.append(above[np.argmin(xs_l[above])])
            if len(take) < min(neighbors_per_level, xs_l.size):
                order = np.argsort(np.abs(xs_l - x[i]), kind="stable")
                take = list(order[:neighbors_per_level])
            for j in take[:neighbors_per_level]:
                xs_ref.append(xs_l[j])
                ys_ref.append(ys_l[j])
        if len(xs_ref) < 2:
            continue
        xs_ref = np.array(xs_ref)
        ys_ref = np.array(ys_ref)
        dx = xs_ref - xs_ref.mean()
        den = (dx**2).sum()
        if den == 0.0:
            ytil = ys_ref.mean()
        else:
            slope = (dx * (ys_ref - ys_ref.mean())).sum() / den
            ytil = ys_ref.mean() + slope * (x[i] - xs_ref.mean())
        total += ((y[i] - ytil) / sig[i]) ** 2
        used += 1
    if used == 0:
        raise ValueError("no point has a larger system size to regress against")
    return total / used


def objective_polynomial(points, p_c: float, nu: float, gamma: float = 0.0,
                         degree: int = 8) -> float:
    """Sigma-weighted least-squares polynomial fit to all scaled data;
    returns the summed squared weighted residual (no averaging)."""
    pts = _sigma_filtered(points)
    if len(pts) <= degree + 1:
        raise ValueError("not enough points for the polynomial degree")
    x, y, sig, _, _ = scale_points(pts, p_c, nu, gamma)
    span = max(abs(x[0]), abs(x[-1]), 1e-300)
    xs = x / span  # rescale for conditioning; same polynomial family
    w = 1.0 / sig
    design = np.vander(xs, degree + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(design * w[:, None], y * w, rcond=None)
    resid = (y - design @ coeffs) * w
    return float((resid**2).sum())


OBJECTIVES = {
    "nearest": objective_nearest,
    "multilevel": objective_multilevel,
    "polynomial": objective_polynomial,
}


def nelder_mead(objective, initial, step=None, diameter_tol=1e-5,
                max_evaluations=10**4):
    """Minimize with a from-scratch Nelder-Mead simplex.

    Standard reflection/expansion/contraction/shrink updates; stops when
    the simplex diameter drops below diameter_tol or the evaluation budget
    runs out. Returns (best_x, best_f, n_evals, converged). NaN objective
    values abort with FitFailureError; +inf is tolerated as a penalty.
    """
    x0 = np.asarray(initial, dtype=float)
    d = x0.size
    if not np.all(np.isfinite(x0)):
        raise FitFailureError("initial guess is not finite")
    if step is None:
        step = np.where(np.abs(x0) > 1e-12, 0.1 * np.abs(x0), 0.05)
    else:
        step = np.broadcast_to(np.asarray(step, dtype=float), x0.shape).copy()
    evals = 0

    def call(x):
        nonlocal evals
        evals += 1
        v = float(objective(x))
        if math.isnan(v):
            raise FitFailureError(f"objective returned NaN at {x.tolist()}")
        return v

    simplex = [x0.copy()]
    for i in range(d):
        v = x0.copy()
        v[i] += step[i]
        simplex.append(v)
    values = [call(v) for v in simplex]

    alpha, gamma_e, rho, shrink = 1.0, 2.0, 0.5, 0.5
    while evals < max_evaluations:
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        diam = max(np.max(np.abs(simplex[i] - simplex[0]))
                   for i in range(1, d + 1))
        if diam < diameter_tol:
            break
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = call(xr)
        if fr < values[0]:
            xe = centroid + gamma_e * (xr - centroid)
            fe = call(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            if fr < values[-1]:
                xc = centroid + rho * (xr - centroid)
            else:
                xc = centroid + rho * (worst - centroid)
            fc = call(xc)
            if fc < min(fr, values[-1]):
                simplex[-1], values[-1] = xc, fc
            else:
                for i in range(1, d + 1):
                    simplex[i] = simplex[0] + shrink * (simplex[i] - simplex[0])
                    values[i] = call(simplex[i])
    best = int(np.argmin(values))
    if not math.isfinite(values[best]):
        raise FitFailureError("no finite objective value found")
    converged = evals < max_evaluations
    return simplex[best], values[best], evals, converged


def error_widths(objective_1d_pair, minimum, eps_min, search_span,
                 rel_tol=1e-9, max_expand=60):
    """Half-widths of the interval where the objective stays below twice
    its minimum, one per axis.

    objective_1d_pair: (f_axis0, f_axis1), each mapping a scalar offset
    from the minimum along its axis to the objective value. Crossings are
    bracketed by geometric expansion and then located by bisection; a
    crossing that never appears within the expansion limit flags the width
    as unbounded (inf).
    """
    if not eps_min > 0:
        raise FitFailureError("error widths need a positive objective minimum")
    target = 2.0 * eps_min
    widths = []
    unbounded = False
    for axis, f in enumerate(objective_1d_pair):
        span = search_span[axis]
        bounds = []
        for sign in (+1.0, -1.0):
            lo, hi = 0.0, None
            t = span
            for _ in range(max_expand):
                v = f(sign * t)
                if math.isfinite(v) and v < target:
                    lo = t
                    t *= 2.0
                else:
                    hi = t
                    break
            if hi is None:
                bounds.append(math.inf)
                continue
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if hi - lo <= rel_tol * max(hi, 1e-30):
                    break
                v = f(sign * mid)
                if math.isfinite(v) and v < target:
                    lo = mid
                else:
                    hi = mid
            bounds.append(0.5 * (lo + hi))
        if math.isinf(bounds[0]) or math.isinf(bounds[1]):
            widths.append(math.inf)
            unbounded = True
        else:
            widths.append(0.5 * (bounds[0] + bounds[1]))
    return widths[0], widths[1], unbounded


def fit_scaling(points, method: str, initial=(0.5, 1.0), gamma: float = 0.0,
                step=None, width_span=None) -> ScalingFitResult:
    """Full pipeline: objective + Nelder-Mead + twice-minimum error widths."""
    if method not in OBJECTIVES:
        raise ValueError(f"unknown method {method!r}")
    fn = OBJECTIVES[method]

    def wrapped(v):
        pc, nu = float(v[0]), float(v[1])
        if nu <= 1e-3 or nu > 50:
            return math.inf
        try:
            return fn(points, pc, nu, gamma)
        except (ValueError, FloatingPointError):
            return math.inf

    best, eps, evals, converged = nelder_mead(wrapped, np.asarray(initial, float),
                                              step=step)
    pc, nu = float(best[0]), float(best[1])
    if width_span is None:
        width_span = (max(1e-4, 0.01 * max(abs(pc), 0.05)), max(1e-4, 0.02 * nu))
    f0 = lambda t: wrapped((pc + t, nu))
    f1 = lambda t: wrapped((pc, nu + t))
    if eps > 0:
        pw, nw, unbounded = error_widths((f0, f1), (pc, nu), eps, width_span)
    else:
        pw, nw, unbounded = width_span[0], width_span[1], True
    return ScalingFitResult(pc, nu, gamma, eps, pw, nw, method, evals,
                            converged, unbounded)


# ---------------------------------------------------------------------------
# survival-time analysis

def decay_window(times, values, lo_frac: float = 0.2, hi_frac: float = 0.8):
    """Window of times whose log-value sits in the middle of the log range.

    Keeps samples with log v between min + lo_frac * range and
    min + hi_frac * range, computed over strictly positive values.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    pos = v > 0
    if pos.sum() < 2:
        raise ValueError("need at least two positive samples")
    logv = np.log(v[pos])
    tpos = t[pos]
    lo = logv.min() + lo_frac * (logv.max() - logv.min())
    hi = logv.min() + hi_frac * (logv.max() - logv.min())
    mask = (logv >= lo) & (logv <= hi)
    if mask.sum() < 2:
        mask = np.ones_like(logv, dtype=bool)
    return tpos[mask], np.exp(logv[mask])


def fit_decay_tau(times, values, window=None) -> tuple:
    """Exponential survival time: tau = -1 / slope of log(values) vs time.

    `window` overrides the automatic log-range window with explicit
    (t_lo, t_hi) bounds; values inside must be strictly positive.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if window is not None:
        t_lo, t_hi = window
        mask = (t >= t_lo) & (t <= t_hi)
        t, v = t[mask], v[mask]
        if t.size < 2:
            raise ValueError("window contains fewer than two samples")
        if np.any(v <= 0):
            raise ValueError("series must be strictly positive inside the window")
    else:
        t, v = decay_window(t, v)
    logv = np.log(v)
    dt = t - t.mean()
    den = (dt**2).sum()
    if den == 0:
        raise ValueError("degenerate time window")
    slope = (dt * (logv - logv.mean())).sum() / den
    if slope >= 0:
        raise ValueError("series does not decay inside the window")
    return -1.0 / slope, (float(t.min()), float(t.max()))


def survival_timescale(L, p, p_c: float, nu: float, log_floor: float = 1.0):
    """The collapse timescale |p - p_c|^(-nu) * L^3 * log L (floored log)."""
    L = np.asarray(L, dtype=float)
    p = np.asarray(p, dtype=float)
    logf = np.maximum(np.log(L), log_floor)
    return np.abs(p - p_c) ** (-nu) * L**3 * logf


def fit_survival(series, window=None, initial=(0.5, 1.0),
                 log_floor: float = 1.0) -> SurvivalFit:
    """Extract tau(L, p) from decay series and fit the collapse law.

    `series` maps (L, p) -> (times, values). After per-series slope fits,
    (p_c, nu) minimize the relative misfit of tau against
    a * |p - p_c|^(-nu) L^3 log L with the prefactor solved in closed form.
    """
    taus = {}
    windows = {}
    for key, (t, v) in series.items():
        tau, win = fit_decay_tau(t, v, window=window)
        taus[key] = tau
        windows[key] = win
    keys = sorted(taus)
    Ls = np.array([k[0] for k in keys], dtype=float)
    ps = np.array([k[1] for k in keys], dtype=float)
    tau_arr = np.array([taus[k] for k in keys])

    def resid(v):
        pc, nu = float(v[0]), float(v[1])
        if nu <= 1e-3 or nu > 50 or np.any(np.abs(ps - pc) < 1e-12):
            return math.inf
        u = survival_timescale(Ls, ps, pc, nu, log_floor)
        den = (u**2 / tau_arr**2).sum()
        if den == 0 or not np.isfinite(den):
            return math.inf
        a = (u / tau_arr).sum() / den
        return float((((tau_arr - a * u) / tau_arr) ** 2).mean())

    best, eps, _, _ = nelder_mead(resid, np.asarray(initial, float))
    return SurvivalFit(taus, windows, float(best[0]), float(best[1]),
                       eps, log_floor)


# ---------------------------------------------------------------------------
# critical-profile regression

def profile_variable(L: int, l) -> np.ndarray:
    """The chord variable log((L/pi) * sin(pi*l/L)) for cut widths l."""
    l = np.asarray(l, dtype=float)
    return np.log((L / math.pi) * np.sin(math.pi * l / L))


def fit_profile(values, L: int, model: str = "linear-log"):
    """Least-squares fit of a cut profile S(l), l = 1..L-1.

    linear-log fits const + c6 * u(l); quadratic-log adds a u^2 term.
    Returns (coefficients, summed squared residual).
    """
    v = np.asarray(values, dtype=float)
    if L < 8:
        raise ValueError("profiles need L >= 8")
    if v.shape[0] != L - 1:
        raise ValueError(f"expected {L - 1} values, got {v.shape[0]}")
    u = profile_variable(L, np.arange(1, L))
    if model == "linear-log":
        design = np.column_stack([np.ones_like(u), u])
    elif model == "quadratic-log":
        design = np.column_stack([np.ones_like(u), u, u**2])
    else:
        raise ValueError(f"unknown model {model!r}")
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise FitFailureError("degenerate design matrix")
    coeffs, *_ = np.linalg.lstsq(design, v, rcond=None)
    resid = v - design @ coeffs
    return coeffs, float((resid**2).sum())
