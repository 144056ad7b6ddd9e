"""Right-hand sides and a fixed-step RK4 integrator for coupled phase models.

Three backends share one interaction form sum_j k_ij D(u_j - u_i):

* random graph: weights a_ij from a sampled graph, scaled by 1/(n alpha_n);
* averaged: the deterministic expectation kernel, scaled by 1/n;
* degree-normalized: realized weights scaled by the inverse node degree.

Phases are integrated on the real line (never reduced mod 2pi): the coupling
is periodic, so the dynamics are unchanged, while norms of trajectory
differences stay meaningful without unwrapping.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .graphon import QuadratureError, StepGraphon
from .sampling import WeightedGraph, degrees

__all__ = [
    "CouplingFunction",
    "Forcing",
    "RandomGraphBackend",
    "AveragedBackend",
    "DegreeNormalizedBackend",
    "ModelSpec",
    "Trajectory",
    "IntegrationError",
    "sine_coupling",
    "zero_forcing",
    "constant_forcing",
    "rhs",
    "build_U",
    "initial_from_g",
    "kernel_stats",
    "stability_dt_max",
    "integrate",
    "trajectory_to_csv",
    "write_trajectory",
    "read_trajectory",
]

_TRJ_MAGIC = b"TRJ1"

_GL1_X, _GL1_W = np.polynomial.legendre.leggauss(16)


class IntegrationError(RuntimeError):
    """Integration produced a non-finite state or broke an energy budget."""


# ---------------------------------------------------------------------------
# model ingredients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CouplingFunction:
    """2pi-periodic interaction profile with |D| <= 1 and known Lipschitz constant."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    lipschitz_const: float
    periodic: bool = True
    name: str = "custom"


def sine_coupling() -> CouplingFunction:
    return CouplingFunction(evaluator=np.sin, lipschitz_const=1.0, periodic=True, name="sine")


@dataclass(frozen=True)
class Forcing:
    """Per-node drive f(u, t), Lipschitz in u; f0_bound = max_t |f(0, t)|."""

    evaluator: Callable[[np.ndarray, float], np.ndarray]
    lipschitz_u: float
    f0_bound: float
    name: str = "custom"


def zero_forcing() -> Forcing:
    return Forcing(lambda u, t: np.zeros_like(u), 0.0, 0.0, "zero")


def constant_forcing(omega: float) -> Forcing:
    omega = float(omega)
    return Forcing(
        lambda u, t: np.full_like(u, omega), 0.0, abs(omega), f"constant({omega!r})"
    )


@dataclass(frozen=True)
class RandomGraphBackend:
    graph: WeightedGraph
    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def n(self) -> int:
        return self.graph.n


@dataclass(frozen=True)
class AveragedBackend:
    kernel: StepGraphon

    @property
    def n(self) -> int:
        return self.kernel.n


@dataclass(frozen=True)
class DegreeNormalizedBackend:
    graph: WeightedGraph

    def __post_init__(self):
        in_deg, _ = degrees(self.graph)
        dead = np.nonzero(in_deg <= 0.0)[0]
        if dead.size:
            listed = ", ".join(str(i + 1) for i in dead[:10])
            raise ValueError(f"degree normalization undefined: zero-degree nodes [{listed}]")
        object.__setattr__(self, "_inv_degrees", 1.0 / in_deg)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def inv_degrees(self) -> np.ndarray:
        return self._inv_degrees


Backend = RandomGraphBackend | AveragedBackend | DegreeNormalizedBackend


@dataclass(frozen=True)
class ModelSpec:
    forcing: Forcing
    coupling: CouplingFunction
    backend: Backend
    n: int

    def __post_init__(self):
        if self.backend.n != self.n:
            raise ValueError(f"backend dimension {self.backend.n} does not match n={self.n}")


@dataclass(frozen=True)
class Trajectory:
    """States on the uniform grid t_k = k dt, one row per step, phases unreduced."""

    dt: float
    states: np.ndarray

    def __post_init__(self):
        st = np.asarray(self.states, dtype=np.float64)
        if st.ndim != 2 or st.shape[0] < 1:
            raise ValueError(f"states must be a (K+1, n) array, got shape {st.shape}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "states", st)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.states.shape[0]) * self.dt


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------


def _coupling_sum(M, u: np.ndarray, D: CouplingFunction) -> np.ndarray:
    """sum_j M[i, j] D(u_j - u_i) for every node i.

    The sine coupling expands through the angle-difference identity into two
    matrix-vector products; generic couplings fall back to explicit pairwise
    evaluation (blocked for dense kernels, per-entry for sparse ones).
    """
    if D.evaluator is np.sin:
        s, c = np.sin(u), np.cos(u)
        return c * (M @ s) - s * (M @ c)
    n = u.shape[0]
    if sp.issparse(M):
        csr = M.tocsr()
        row_of = np.repeat(np.arange(n), np.diff(csr.indptr))
        terms = csr.data * D.evaluator(u[csr.indices] - u[row_of])
        return np.bincount(row_of, weights=terms, minlength=n)
    out = np.empty(n)
    block = max(1, 2_000_000 // max(n, 1))
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        diff = u[None, :] - u[lo:hi, None]
        out[lo:hi] = (M[lo:hi] * D.evaluator(diff)).sum(axis=1)
    return out


def rhs(spec: ModelSpec, u: np.ndarray, t: float) -> np.ndarray:
    """Model derivative at state u and time t."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (spec.n,):
        raise ValueError(f"state has shape {u.shape}, expected ({spec.n},)")
    b = spec.backend
    if isinstance(b, AveragedBackend):
        coup = _coupling_sum(b.kernel.values, u, spec.coupling) / spec.n
    elif isinstance(b, RandomGraphBackend):
        coup = _coupling_sum(b.graph.weights, u, spec.coupling) / (spec.n * b.alpha)
    elif isinstance(b, DegreeNormalizedBackend):
        coup = _coupling_sum(b.graph.weights, u, spec.coupling) * b.inv_degrees
    else:
        raise TypeError(f"unknown backend {type(b).__name__}")
    return spec.forcing.evaluator(u, t) + coup


def build_U(bar: StepGraphon) -> np.ndarray:
    """Averaged kernel of the degree-normalized model.

    Divides each row i of the symmetric expectation kernel by the mean of its
    i-th column, so every row mean of the result is exactly 1.
    """
    if not bar.symmetric:
        raise ValueError("degree-normalized averaging needs a symmetric kernel")
    col_means = bar.values.mean(axis=0)
    dead = np.nonzero(col_means <= 0.0)[0]
    if dead.size:
        listed = ", ".join(str(i + 1) for i in dead[:10])
        raise ValueError(f"zero column sum at nodes [{listed}]")
    return bar.values / col_means[:, None]


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


def _gl_interval(g, a, b):
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    h = 0.5 * (b - a)
    xs = a[:, None] + h[:, None] * (_GL1_X[None, :] + 1.0)
    vals = np.asarray(g(xs), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("non-finite initial-profile value during quadrature")
    return h * (vals @ _GL1_W)


def _adapt_interval(g, a, b, budget, depth, label):
    coarse = float(_gl_interval(g, a, b)[0])
    mid = 0.5 * (a + b)
    fine = float(_gl_interval(g, a, mid)[0]) + float(_gl_interval(g, mid, b)[0])
    if abs(fine - coarse) <= budget:
        return fine
    if depth >= 12:
        raise QuadratureError(f"initial-profile quadrature did not converge on {label}")
    half = budget / 2.0
    return _adapt_interval(g, a, mid, half, depth + 1, label) + _adapt_interval(
        g, mid, b, half, depth + 1, label
    )


def initial_from_g(g: Callable[[np.ndarray], np.ndarray], n: int) -> np.ndarray:
    """Cell averages of a square-integrable profile g on the n-cell mesh."""
    if n < 1:
        raise ValueError(f"resolution must be positive, got {n}")
    lo = np.arange(n) / n
    hi = np.arange(1, n + 1) / n
    coarse = _gl_interval(g, lo, hi)
    mid = 0.5 * (lo + hi)
    fine = _gl_interval(g, lo, mid) + _gl_interval(g, mid, hi)
    ok = np.abs(fine - coarse) <= 1e-10 * np.maximum(np.abs(fine), 1e-12)
    out = fine.copy()
    for i in np.nonzero(~ok)[0]:
        budget = 1e-10 * max(abs(fine[i]), 1e-12)
        out[i] = _adapt_interval(g, lo[i], hi[i], budget, 0, f"cell {i + 1} of {n}")
    return n * out


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def kernel_stats(backend: Backend) -> tuple[float, float]:
    """(L2 norm, largest row mean) of the backend's effective step kernel."""
    if isinstance(backend, AveragedBackend):
        v = backend.kernel.values
        return float(np.sqrt(np.mean(v**2))), float(v.mean(axis=1).max())
    if isinstance(backend, RandomGraphBackend):
        w = backend.graph.weights
        n = backend.graph.n
        inv = 1.0 / backend.alpha
        if sp.issparse(w):
            sq = float((w.data.astype(float) ** 2).sum())
            row = np.asarray(w.sum(axis=1)).ravel()
        else:
            sq = float((w**2).sum())
            row = w.sum(axis=1)
        return inv * math.sqrt(sq) / n, inv * float(row.max()) / n
    if isinstance(backend, DegreeNormalizedBackend):
        # kernel entries n a_ij / d_i have unit row means by construction
        inv_deg = backend.inv_degrees
        w = backend.graph.weights
        if sp.issparse(w):
            sq = float(((sp.diags(inv_deg) @ w).power(2)).sum())
        else:
            sq = float(((inv_deg[:, None] * w) ** 2).sum())
        return math.sqrt(sq), 1.0
    raise TypeError(f"unknown backend {type(backend).__name__}")


def stability_dt_max(spec: ModelSpec) -> float:
    """Largest admissible RK4 step: 0.1 over the coupled Lipschitz scale."""
    k_l2, w2 = kernel_stats(spec.backend)
    lip = spec.forcing.lipschitz_u + spec.coupling.lipschitz_const * (k_l2 + w2) + 1.0
    return 0.1 / lip


def integrate(
    spec: ModelSpec,
    u0: np.ndarray,
    T: float,
    dt: float | None = None,
    norm_budget: float | None = None,
) -> Trajectory:
    """Classical RK4 on the uniform grid covering [0, T].

    dt defaults to the stability rule and may only be lowered below it.  If
    norm_budget is given, the squared discrete L2 norm of the state is
    checked against it after every step.
    """
    u0 = np.asarray(u0, dtype=np.float64)
    if u0.shape != (spec.n,):
        raise ValueError(f"initial state has shape {u0.shape}, expected ({spec.n},)")
    if not T > 0.0:
        raise ValueError(f"horizon T must be positive, got {T}")
    dt_cap = stability_dt_max(spec)
    if dt is None:
        dt = dt_cap
    elif not (0.0 < dt <= dt_cap * (1.0 + 1e-12)):
        raise ValueError(f"dt={dt} outside (0, {dt_cap:.3e}] allowed by the stability rule")
    steps = max(1, math.ceil(T / dt - 1e-9))
    states = np.empty((steps + 1, spec.n))
    u = u0.copy()
    states[0] = u
    sixth = dt / 6.0
    half = dt / 2.0
    for k in range(steps):
        t = k * dt
        k1 = rhs(spec, u, t)
        k2 = rhs(spec, u + half * k1, t + half)
        k3 = rhs(spec, u + half * k2, t + half)
        k4 = rhs(spec, u + dt * k3, t + dt)
        u = u + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(u)):
            raise IntegrationError(f"non-finite state at step {k + 1} (t={t + dt:.6g})")
        if norm_budget is not None and float(np.mean(u**2)) > norm_budget:
            raise IntegrationError(
                f"energy bound exceeded at step {k + 1}: "
                f"{float(np.mean(u**2)):.6g} > {norm_budget:.6g}"
            )
        states[k + 1] = u
    return Trajectory(dt=dt, states=states)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def trajectory_to_csv(traj: Trajectory, path, stride: int = 1) -> None:
    """CSV with header t,u_1,...,u_n; one row per saved step."""
    if stride < 1:
        raise ValueError(f"stride must be positive, got {stride}")
    header = "t," + ",".join(f"u_{i}" for i in range(1, traj.n + 1))
    idx = np.arange(0, traj.states.shape[0], stride)
    block = np.column_stack([idx * traj.dt, traj.states[idx]])
    np.savetxt(path, block, delimiter=",", header=header, comments="", fmt="%.17g")


def write_trajectory(traj: Trajectory, path) -> None:
    """Binary format: 'TRJ1', u32 n, u64 rows, f64 dt, row-major f64 states."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIQd", _TRJ_MAGIC, traj.n, traj.states.shape[0], traj.dt))
        fh.write(traj.states.astype("<f8").tobytes())


def read_trajectory(path) -> Trajectory:
    with open(path, "rb") as fh:
        header = fh.read(24)
        if len(header) != 24:
            raise ValueError(f"truncated trajectory file: {path}")
        magic, n, rows, dt = struct.unpack("<4sIQd", header)
        if magic != _TRJ_MAGIC:
            raise ValueError(f"bad magic {magic!r} in {path}")
        data = np.frombuffer(fh.read(8 * n * rows), dtype="<f8")
        if data.size != n * rows:
            raise ValueError(f"truncated trajectory payload in {path}")
    return Trajectory(dt=dt, states=data.reshape(rows, n).copy())
