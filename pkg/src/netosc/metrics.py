"""Norms, trajectory distances, Gronwall-type constants and rate fitting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .graphon import ResolutionError

__all__ = [
    "discrete_l2",
    "vector_norm",
    "sup_time_distance",
    "gronwall_constant",
    "horizon_coefficient",
    "admissible_horizon",
    "energy_budget",
    "ConvergenceSeries",
    "fit_rate",
    "series_to_csv",
    "series_summary",
    "write_series_summary",
]


def vector_norm(u: np.ndarray) -> float:
    """Discrete L2 norm (n^-1 sum u_i^2)^(1/2); matches the L2(I) norm of the step embedding."""
    u = np.asarray(u, dtype=np.float64)
    return float(np.sqrt(np.mean(u**2)))


def discrete_l2(u: np.ndarray, v: np.ndarray) -> float:
    """Discrete L2 distance between two equal-length vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    return float(np.sqrt(np.mean((u - v) ** 2)))


def sup_time_distance(a: Trajectory, b: Trajectory) -> float:
    """Largest L2(I) distance of the step embeddings over the shared time grid.

    The grids must coincide (same dt, same step count).  Different state
    resolutions are compared on the common refinement, so one must divide
    the other.
    """
    if a.dt != b.dt or a.states.shape[0] != b.states.shape[0]:
        raise ValueError(
            f"time grids differ: (dt={a.dt}, rows={a.states.shape[0]}) vs "
            f"(dt={b.dt}, rows={b.states.shape[0]})"
        )
    sa, sb = a.states, b.states
    na, nb = a.n, b.n
    if na != nb:
        if na % nb != 0 and nb % na != 0:
            raise ResolutionError(f"state resolutions {na} and {nb} do not nest")
        m = max(na, nb)
        if na < m:
            sa = np.repeat(sa, m // na, axis=1)
        if nb < m:
            sb = np.repeat(sb, m // nb, axis=1)
    per_step = np.sqrt(np.mean((sa - sb) ** 2, axis=1))
    return float(per_step.max())


def gronwall_constant(L_f: float, L_D: float, W1: float, W2: float) -> float:
    """Growth rate of the squared deviation between sampled and averaged runs."""
    if min(L_f, L_D, W1, W2) < 0.0:
        raise ValueError("Gronwall constant inputs must be nonnegative")
    return L_f + L_D * (2.0 + 1.5 * W1 + 0.5 * W2) + 0.5


def horizon_coefficient(L: float, gamma: float) -> float:
    """Upper bound (1 - 2 gamma) / L on the log-horizon coefficient."""
    if L <= 0.0:
        raise ValueError(f"rate constant L must be positive, got {L}")
    if not (0.0 <= gamma < 0.5):
        raise ValueError(f"gamma must lie in [0, 0.5), got {gamma}")
    return (1.0 - 2.0 * gamma) / L


def admissible_horizon(L: float, gamma: float, n: int) -> float:
    """Horizon C ln(n) with the largest admissible coefficient (diagnostic)."""
    return horizon_coefficient(L, gamma) * math.log(n)


def energy_budget(L_f: float, F: float, W_l2: float, g_norm: float, T: float) -> float:
    """A-priori cap e^(C3 T) (||g||^2 + C4) on the squared state norm.

    C3 = 2 (L_f + F + ||W||), C4 = 2 (F + ||W||); g_norm is the L2(I) norm of
    the initial profile.
    """
    c3 = 2.0 * (L_f + F + W_l2)
    c4 = 2.0 * (F + W_l2)
    return math.exp(c3 * T) * (g_norm**2 + c4)


@dataclass(frozen=True)
class ConvergenceSeries:
    """Error-vs-resolution data with its fitted log-log rate."""

    ns: np.ndarray
    errors: np.ndarray
    fitted_slope: float
    fitted_intercept: float
    residual: float

    def __post_init__(self):
        ns = np.asarray(self.ns, dtype=np.float64)
        errors = np.asarray(self.errors, dtype=np.float64)
        if ns.ndim != 1 or ns.shape != errors.shape:
            raise ValueError("resolutions and errors must be matching 1-D arrays")
        if np.any(np.diff(ns) <= 0.0):
            raise ValueError("resolutions must be strictly increasing")
        if not np.all(np.isfinite(errors)) or np.any(errors < 0.0):
            raise ValueError("errors must be finite and nonnegative")
        object.__setattr__(self, "ns", ns)
        object.__setattr__(self, "errors", errors)


def fit_rate(ns, errors) -> ConvergenceSeries:
    """Ordinary least squares of log(error) against log(n).

    Non-positive errors are excluded from the fit; at least three positive
    points are required.
    """
    ns = np.asarray(ns, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if ns.shape != errors.shape or ns.ndim != 1:
        raise ValueError("resolutions and errors must be matching 1-D arrays")
    pos = errors > 0.0
    if int(pos.sum()) < 3:
        raise ValueError(f"need at least 3 positive errors to fit a rate, got {int(pos.sum())}")
    x = np.log(ns[pos])
    y = np.log(errors[pos])
    coeffs, res, *_ = np.polyfit(x, y, 1, full=True)
    slope, intercept = float(coeffs[0]), float(coeffs[1])
    residual = float(np.sqrt(res[0])) if res.size else 0.0
    return ConvergenceSeries(
        ns=ns, errors=errors, fitted_slope=slope, fitted_intercept=intercept, residual=residual
    )


def series_to_csv(series: ConvergenceSeries, path) -> None:
    """CSV rows 'n,error'."""
    with open(path, "w") as fh:
        fh.write("n,error\n")
        for n, e in zip(series.ns, series.errors):
            fh.write(f"{int(n)},{e:.17g}\n")


def series_summary(series: ConvergenceSeries, target_exponent: float | None = None) -> dict:
    return {
        "slope": series.fitted_slope,
        "intercept": series.fitted_intercept,
        "residual": series.residual,
        "target_exponent": target_exponent,
    }


def write_series_summary(
    series: ConvergenceSeries, path, target_exponent: float | None = None
) -> None:
    with open(path, "w") as fh:
        json.dump(series_summary(series, target_exponent), fh, indent=2, sort_keys=True)
        fh.write("\n")
