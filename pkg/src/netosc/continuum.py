"""Nonlocal coupling operators and the Galerkin route to the continuum limit.

The continuum model du/dt = f(u, t) + K(u) with
K(u)(x) = integral of W(x, y) D(u(y) - u(x)) dy is solved by projecting onto
piecewise-constant functions: the coefficient system is exactly the averaged
oscillator model with the cell-average kernel, so a fine-resolution solve is
the working stand-in for the continuum solution.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .dynamics import (
    AveragedBackend,
    CouplingFunction,
    Forcing,
    ModelSpec,
    Trajectory,
    _coupling_sum,
    initial_from_g,
    integrate,
    read_trajectory,
    write_trajectory,
)
from .graphon import Graphon, ResolutionError, StepGraphon, project

__all__ = [
    "StepFunction",
    "apply_K",
    "galerkin_solve",
    "restrict",
    "prolong",
    "reference_solution",
]


@dataclass(frozen=True)
class StepFunction:
    """A piecewise-constant function on the n-cell mesh, one value per cell."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError(f"step function needs a 1-D value vector, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("step function values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    def l2(self) -> float:
        """L2(I) norm; equals the discrete norm of the coefficient vector."""
        return float(np.sqrt(np.mean(self.values**2)))


def apply_K(
    W: Graphon | StepGraphon, D: CouplingFunction, v: StepFunction
) -> StepFunction:
    """Nonlocal coupling operator applied to a step function.

    A step kernel must match the resolution of v; an analytic kernel is
    reduced to cell averages at that resolution first (the exact projection
    of the operator's output onto the mesh).
    """
    if isinstance(W, StepGraphon):
        if W.n != v.n:
            raise ResolutionError(f"kernel resolution {W.n} does not match function resolution {v.n}")
        kernel = W
    else:
        kernel = project(W, v.n)
    vals = _coupling_sum(kernel.values, v.values, D) / v.n
    return StepFunction(vals)


def galerkin_solve(
    W: Graphon,
    f: Forcing,
    D: CouplingFunction,
    g: Callable[[np.ndarray], np.ndarray],
    N: int,
    T: float,
    dt: float | None = None,
    norm_budget: float | None = None,
) -> Trajectory:
    """Coefficient trajectory of the N-dimensional projected continuum model."""
    spec = ModelSpec(forcing=f, coupling=D, backend=AveragedBackend(project(W, N)), n=N)
    u0 = initial_from_g(g, N)
    return integrate(spec, u0, T, dt=dt, norm_budget=norm_budget)


def restrict(u: StepFunction, n: int) -> StepFunction:
    """Block means onto a coarser mesh; n must divide the resolution of u."""
    if n < 1 or u.n % n != 0:
        raise ResolutionError(f"{n} does not divide resolution {u.n}")
    k = u.n // n
    return StepFunction(u.values.reshape(n, k).mean(axis=1))


def prolong(u: StepFunction, N: int) -> StepFunction:
    """Replicate values onto a finer mesh; exact isometry in L2(I)."""
    if N < u.n or N % u.n != 0:
        raise ResolutionError(f"{N} is not a multiple of resolution {u.n}")
    return StepFunction(np.repeat(u.values, N // u.n))


def reference_solution(
    W: Graphon,
    f: Forcing,
    D: CouplingFunction,
    g: Callable[[np.ndarray], np.ndarray],
    g_id: str,
    N: int,
    T: float,
    dt: float,
    cache_dir: "str | Path | None" = None,
    norm_budget: float | None = None,
) -> Trajectory:
    """Fine-resolution projected solve, cached on disk by content key.

    The cache key hashes the identifiers of the kernel, initial profile,
    forcing and coupling together with (N, T, dt), so a cached file is only
    reused for the identical problem.
    """
    if cache_dir is None:
        return galerkin_solve(W, f, D, g, N, T, dt, norm_budget=norm_budget)
    key_src = "|".join([W.name, g_id, f.name, D.name, str(N), repr(float(T)), repr(float(dt))])
    key = hashlib.sha256(key_src.encode()).hexdigest()[:32]
    cache = Path(cache_dir)
    cache.mkdir(parents=True, exist_ok=True)
    path = cache / f"ref_{key}.trj"
    if path.exists():
        traj = read_trajectory(path)
        if traj.n == N:
            return traj
    traj = galerkin_solve(W, f, D, g, N, T, dt, norm_budget=norm_budget)
    write_trajectory(traj, path)
    return traj
