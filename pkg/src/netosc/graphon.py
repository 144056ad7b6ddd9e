"""Kernels on the unit square and their piecewise-constant cell reductions.

A kernel ("graphon") W is a nonnegative measurable function on [0,1]^2 that
encodes the limiting connectivity of a graph sequence.  The unit interval is
partitioned into n uniform cells I_i = ((i-1)/n, i/n]; reducing W to the
n-by-n matrix of cell averages yields a step kernel that drives finite
oscillator networks and Galerkin systems.  Unbounded kernels are capped at a
level 1/alpha before reduction so that the cell averages can serve as
Bernoulli edge probabilities after rescaling.

Built-in kernels carry exact cell integrals (plain and capped); adaptive
Gauss-Legendre quadrature is the fallback for user-supplied evaluators.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Graphon",
    "StepGraphon",
    "QuadratureError",
    "ResolutionError",
    "cell_average",
    "project",
    "truncate_project",
    "l2_distance",
    "l2_norm",
    "degree_bounds",
    "constant",
    "erdos_renyi",
    "power_law",
    "small_world",
    "write_step_graphon",
    "read_step_graphon",
    "step_graphon_to_csv",
]

#: relative tolerance for the adaptive cell quadrature
QUAD_REL_TOL = 1e-8
#: maximum dyadic refinement depth before quadrature gives up
QUAD_MAX_DEPTH = 12

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)

_SGW_MAGIC = b"SGW1"


class QuadratureError(RuntimeError):
    """Cell quadrature failed to converge or met a non-finite evaluation."""


class ResolutionError(ValueError):
    """Two uniform meshes are incompatible (neither refines the other)."""


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Graphon:
    """An analytic kernel on the unit square.

    Parameters
    ----------
    evaluator : callable
        Vectorized map (x, y) -> W(x, y) for arrays in [0, 1].  Values must
        be nonnegative wherever finite.
    symmetric : bool
        Declares W(x, y) = W(y, x).  Required for undirected constructions.
    cell_integrator : callable, optional
        Exact integral of W over I_{n,i} x I_{n,j}; signature ``(n, i, j)``
        with 1-based cell indices, broadcasting over index arrays.
    l2_norm_hint : float, optional
        Exact L2(I^2) norm of W, when known in closed form.
    truncated_cell_integrator : callable, optional
        Exact integral of min(cap, W) over a cell; signature ``(n, i, j, cap)``.
    step_source : StepGraphon, optional
        Set when this kernel is the piecewise-constant lift of a step kernel;
        enables exact block-mean projections.
    name : str
        Stable identifier used in cache keys and experiment records.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    symmetric: bool = False
    cell_integrator: Callable | None = None
    l2_norm_hint: float | None = None
    truncated_cell_integrator: Callable | None = None
    step_source: "StepGraphon | None" = None
    name: str = "custom"

    def __call__(self, x, y):
        return self.evaluator(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


@dataclass(frozen=True)
class StepGraphon:
    """A piecewise-constant kernel: one nonnegative value per mesh cell."""

    values: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1] or vals.shape[0] < 1:
            raise ValueError(f"step kernel needs a square matrix, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("step kernel entries must be finite")
        if np.any(vals < 0.0):
            raise ValueError("step kernel entries must be nonnegative")
        if self.symmetric and not np.array_equal(vals, vals.T):
            raise ValueError("step kernel marked symmetric but matrix is not exactly symmetric")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def l2(self) -> float:
        """Exact L2(I^2) norm of the step function."""
        return float(np.sqrt(np.mean(self.values**2)))

    def as_graphon(self) -> Graphon:
        """Lift to a Graphon with exact overlap-based cell integrals."""
        return _lift_step(self)


# ---------------------------------------------------------------------------
# quadrature fallback
# ---------------------------------------------------------------------------


def _panel(f, x0, x1, y0, y1, label):
    hx = 0.5 * (x1 - x0)
    hy = 0.5 * (y1 - y0)
    xs = x0 + hx * (_GL_X + 1.0)
    ys = y0 + hy * (_GL_X + 1.0)
    vals = np.asarray(f(xs[:, None], ys[None, :]), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(f"non-finite kernel value while integrating {label}")
    return hx * hy * float(_GL_W @ vals @ _GL_W)


def _refine(f, x0, x1, y0, y1, budget, depth, label):
    coarse = _panel(f, x0, x1, y0, y1, label)
    xm = 0.5 * (x0 + x1)
    ym = 0.5 * (y0 + y1)
    quads = ((x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1))
    fine = [_panel(f, *q, label) for q in quads]
    if abs(sum(fine) - coarse) <= budget:
        return sum(fine)
    if depth >= QUAD_MAX_DEPTH:
        raise QuadratureError(
            f"quadrature did not converge for {label} within {QUAD_MAX_DEPTH} refinement levels"
        )
    return sum(
        _refine(f, *q, budget=budget / 4.0, depth=depth + 1, label=label) for q in quads
    )


def _quad_cell_integral(f, x0, x1, y0, y1, label, rel_tol=QUAD_REL_TOL):
    first = _panel(f, x0, x1, y0, y1, label)
    budget = rel_tol * max(abs(first), 1e-12)
    return _refine(f, x0, x1, y0, y1, budget=budget, depth=0, label=label)


# ---------------------------------------------------------------------------
# cell reductions
# ---------------------------------------------------------------------------


def _check_cell_index(n, i, j):
    if n < 1:
        raise ValueError(f"resolution must be positive, got {n}")
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"cell index ({i}, {j}) out of range for resolution {n}")


def cell_average(W: Graphon, n: int, i: int, j: int) -> float:
    """Average of W over the cell I_{n,i} x I_{n,j} (1-based indices)."""
    _check_cell_index(n, i, j)
    src = W.step_source
    if src is not None:
        if n % src.n == 0:
            scale = n // src.n
            return float(src.values[(i - 1) // scale, (j - 1) // scale])
        if src.n % n == 0:
            k = src.n // n
            return float(src.values[(i - 1) * k : i * k, (j - 1) * k : j * k].mean())
    if W.cell_integrator is not None:
        return float(n * n * W.cell_integrator(n, i, j))
    x0, x1 = (i - 1) / n, i / n
    y0, y1 = (j - 1) / n, j / n
    label = f"cell ({i}, {j}) at resolution {n}"
    return n * n * _quad_cell_integral(W.evaluator, x0, x1, y0, y1, label)


def _mirror_upper(m: np.ndarray) -> np.ndarray:
    return np.triu(m) + np.triu(m, 1).T


_CHUNK_ROWS = 256


def project(W: Graphon, n: int) -> StepGraphon:
    """L2-projection of W onto the n-resolution step kernels (cell averages)."""
    if n < 1:
        raise ValueError(f"resolution must be positive, got {n}")
    src = W.step_source
    if src is not None and n % src.n == 0:
        k = n // src.n
        vals = np.repeat(np.repeat(src.values, k, axis=0), k, axis=1)
        return StepGraphon(vals, symmetric=W.symmetric)
    if src is not None and src.n % n == 0:
        k = src.n // n
        vals = src.values.reshape(n, k, n, k).mean(axis=(1, 3))
        return StepGraphon(vals, symmetric=W.symmetric)
    if W.cell_integrator is not None:
        idx = np.arange(1, n + 1)
        if n <= _CHUNK_ROWS:
            vals = n * n * np.asarray(W.cell_integrator(n, idx[:, None], idx[None, :]), dtype=float)
        else:
            vals = np.empty((n, n))
            for lo in range(0, n, _CHUNK_ROWS):
                hi = min(lo + _CHUNK_ROWS, n)
                vals[lo:hi] = n * n * W.cell_integrator(n, idx[lo:hi, None], idx[None, :])
    else:
        vals = np.empty((n, n))
        for i in range(1, n + 1):
            j_start = i if W.symmetric else 1
            for j in range(j_start, n + 1):
                vals[i - 1, j - 1] = cell_average(W, n, i, j)
    if W.symmetric:
        vals = _mirror_upper(vals)
    return StepGraphon(vals, symmetric=W.symmetric)


def truncate_project(W: Graphon, n: int, alpha: float) -> StepGraphon:
    """Cell averages of the capped kernel min(1/alpha, W)."""
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if n < 1:
        raise ValueError(f"resolution must be positive, got {n}")
    cap = 1.0 / alpha
    src = W.step_source
    if src is not None and n % src.n == 0:
        k = n // src.n
        capped = np.minimum(src.values, cap)
        vals = np.repeat(np.repeat(capped, k, axis=0), k, axis=1)
        return StepGraphon(vals, symmetric=W.symmetric)
    if src is not None and src.n % n == 0:
        k = src.n // n
        capped = np.minimum(src.values, cap)
        vals = capped.reshape(n, k, n, k).mean(axis=(1, 3))
        return StepGraphon(vals, symmetric=W.symmetric)
    if W.truncated_cell_integrator is not None:
        idx = np.arange(1, n + 1)
        if n <= _CHUNK_ROWS:
            vals = n * n * np.asarray(
                W.truncated_cell_integrator(n, idx[:, None], idx[None, :], cap), dtype=float
            )
        else:
            vals = np.empty((n, n))
            for lo in range(0, n, _CHUNK_ROWS):
                hi = min(lo + _CHUNK_ROWS, n)
                vals[lo:hi] = n * n * W.truncated_cell_integrator(
                    n, idx[lo:hi, None], idx[None, :], cap
                )
    else:
        capped_eval = lambda x, y: np.minimum(cap, W.evaluator(x, y))  # noqa: E731
        vals = np.empty((n, n))
        for i in range(1, n + 1):
            j_start = i if W.symmetric else 1
            for j in range(j_start, n + 1):
                x0, x1 = (i - 1) / n, i / n
                y0, y1 = (j - 1) / n, j / n
                label = f"capped cell ({i}, {j}) at resolution {n}"
                vals[i - 1, j - 1] = n * n * _quad_cell_integral(capped_eval, x0, x1, y0, y1, label)
    if W.symmetric:
        vals = _mirror_upper(vals)
    return StepGraphon(vals, symmetric=W.symmetric)


def degree_bounds(S: StepGraphon) -> tuple[float, float]:
    """Discrete row/column degree statistics of a step kernel.

    Returns (W1_hat, W2_hat): the largest column mean and the largest row
    mean of the cell matrix.  Finite uniform bounds on these along a kernel
    sequence are what keeps node degrees of order alpha_n * n.
    """
    col_means = S.values.mean(axis=0)
    row_means = S.values.mean(axis=1)
    return float(col_means.max()), float(row_means.max())


def l2_norm(W: Graphon | StepGraphon) -> float:
    """L2(I^2) norm: exact for step kernels, hint or quadrature otherwise."""
    if isinstance(W, StepGraphon):
        return W.l2()
    if W.l2_norm_hint is not None:
        return float(W.l2_norm_hint)
    sq = lambda x, y: np.asarray(W.evaluator(x, y), dtype=float) ** 2  # noqa: E731
    total = 0.0
    base = 4
    for i in range(base):
        for j in range(base):
            total += _quad_cell_integral(
                sq, i / base, (i + 1) / base, j / base, (j + 1) / base,
                f"norm panel ({i + 1}, {j + 1})",
            )
    return float(np.sqrt(total))


def l2_distance(A: StepGraphon, B: "Graphon | StepGraphon") -> float:
    """L2(I^2) distance between a step kernel and another kernel.

    Step-vs-step requires one mesh to refine the other and is computed
    exactly on the common refinement.  Step-vs-analytic expands
    ||A - B||^2 = ||A||^2 - 2<A, B> + ||B||^2 with the cross term taken
    from exact (or adaptively integrated) cell integrals of B.
    """
    if isinstance(B, StepGraphon):
        na, nb = A.n, B.n
        if na % nb != 0 and nb % na != 0:
            raise ResolutionError(f"resolutions {na} and {nb} do not nest")
        m = max(na, nb)
        av = np.repeat(np.repeat(A.values, m // na, axis=0), m // na, axis=1)
        bv = np.repeat(np.repeat(B.values, m // nb, axis=0), m // nb, axis=1)
        return float(np.sqrt(np.mean((av - bv) ** 2)))
    b_cells = project(B, A.n)
    cross = float(np.mean(A.values * b_cells.values))
    b2 = l2_norm(B) ** 2
    a2 = float(np.mean(A.values**2))
    return float(np.sqrt(max(b2 - 2.0 * cross + a2, 0.0)))


# ---------------------------------------------------------------------------
# built-in kernels
# ---------------------------------------------------------------------------


def constant(c: float) -> Graphon:
    """The constant kernel W == c."""
    if not (np.isfinite(c) and c >= 0.0):
        raise ValueError(f"constant kernel needs a finite nonnegative value, got {c}")
    c = float(c)

    def ev(x, y):
        return np.full(np.broadcast(x, y).shape, c)

    def cell(n, i, j):
        area = 1.0 / (n * n)
        return np.broadcast_to(np.asarray(c * area), np.broadcast(i, j).shape).copy()

    def cell_trunc(n, i, j, cap):
        v = min(c, cap) / (n * n)
        return np.broadcast_to(np.asarray(v), np.broadcast(i, j).shape).copy()

    return Graphon(
        evaluator=ev,
        symmetric=True,
        cell_integrator=cell,
        l2_norm_hint=c,
        truncated_cell_integrator=cell_trunc,
        step_source=StepGraphon(np.array([[c]]), symmetric=True),
        name=f"constant({c!r})",
    )


def erdos_renyi() -> Graphon:
    """The dense-limit kernel of the (sparse) Erdos-Renyi family: W == 1."""
    g = constant(1.0)
    return Graphon(
        evaluator=g.evaluator,
        symmetric=True,
        cell_integrator=g.cell_integrator,
        l2_norm_hint=1.0,
        truncated_cell_integrator=g.truncated_cell_integrator,
        step_source=g.step_source,
        name="erdos_renyi",
    )


def power_law(beta: float) -> Graphon:
    """W(x, y) = (1-beta)^2 (x y)^(-beta): the power-law degree kernel.

    The kernel is integrably singular along the axes; every cell integral,
    plain or capped, is evaluated from the x^(1-beta) antiderivative (the
    capped level set {W >= cap} is the region under a hyperbola, which keeps
    the capped integral in closed form as well).
    """
    if not (0.0 < beta < 1.0):
        raise ValueError(f"power-law exponent must lie in (0, 1), got {beta}")
    beta = float(beta)
    pre = (1.0 - beta) ** 2
    q = 1.0 - beta

    def ev(x, y):
        with np.errstate(divide="ignore"):
            return pre * (x * y) ** (-beta)

    def _p(t):
        return t**q

    def cell(n, i, j):
        i = np.asarray(i, dtype=float)
        j = np.asarray(j, dtype=float)
        dx = _p(i / n) - _p((i - 1) / n)
        dy = _p(j / n) - _p((j - 1) / n)
        return dx * dy

    def cell_trunc(n, i, j, cap):
        i = np.asarray(i, dtype=float)
        j = np.asarray(j, dtype=float)
        x0, x1 = (i - 1) / n, i / n
        y0, y1 = (j - 1) / n, j / n
        m = (pre / cap) ** (1.0 / beta)
        full = (_p(x1) - _p(x0)) * (_p(y1) - _p(y0))
        area = (x1 - x0) * (y1 - y0)
        # split of the x-range by where the hyperbola x*y = m crosses the cell
        with np.errstate(divide="ignore"):
            a = np.clip(m / y1, x0, x1)
            b = np.where(y0 > 0.0, np.clip(np.divide(m, y0, where=y0 > 0.0), x0, x1), x1)
        logba = np.where(a > 0.0, np.log(np.where(a > 0.0, b / np.where(a > 0.0, a, 1.0), 1.0)), 0.0)
        area_cap = (a - x0) * (y1 - y0) + m * logba - y0 * (b - a)
        int_w_cap = (
            (_p(a) - _p(x0)) * (_p(y1) - _p(y0))
            + q * m**q * logba
            - _p(y0) * (_p(b) - _p(a))
        )
        partial = cap * area_cap + (full - int_w_cap)
        out = np.where(m >= x1 * y1, cap * area, np.where(m <= x0 * y0, full, partial))
        return out

    hint = pre / (1.0 - 2.0 * beta) if beta < 0.5 else None
    return Graphon(
        evaluator=ev,
        symmetric=True,
        cell_integrator=cell,
        l2_norm_hint=hint,
        truncated_cell_integrator=cell_trunc,
        name=f"power_law(beta={beta!r})",
    )


def small_world(p: float, r: float) -> Graphon:
    """Ring-band kernel: 1-p inside the circular band of half-width r, p outside."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"rewiring level p must lie in [0, 1], got {p}")
    if not (0.0 < r <= 0.5):
        raise ValueError(f"band half-width r must lie in (0, 0.5], got {r}")
    p = float(p)
    r = float(r)

    def ev(x, y):
        d = np.abs(x - y)
        band = np.minimum(d, 1.0 - d) <= r
        return np.where(band, 1.0 - p, p)

    def _halfplane(c, x0, x1, y0, y1):
        # area of {(x, y) in cell : y - x <= c}
        a = np.clip(y0 - c, x0, x1)
        b = np.clip(y1 - c, x0, x1)
        return 0.5 * ((b + c - y0) ** 2 - (a + c - y0) ** 2) + (y1 - y0) * (x1 - b)

    def _band_area(n, i, j):
        i = np.asarray(i, dtype=float)
        j = np.asarray(j, dtype=float)
        x0, x1 = (i - 1) / n, i / n
        y0, y1 = (j - 1) / n, j / n
        cell_area = (x1 - x0) * (y1 - y0)
        near = _halfplane(r, x0, x1, y0, y1) - _halfplane(-r, x0, x1, y0, y1)
        wrap = (cell_area - _halfplane(1.0 - r, x0, x1, y0, y1)) + _halfplane(
            r - 1.0, x0, x1, y0, y1
        )
        return cell_area, near + wrap

    def cell_trunc(n, i, j, cap):
        v_in = min(1.0 - p, cap)
        v_out = min(p, cap)
        cell_area, band = _band_area(n, i, j)
        return v_out * cell_area + (v_in - v_out) * band

    def cell(n, i, j):
        return cell_trunc(n, i, j, math.inf)

    hint = float(np.sqrt(p * p + (1.0 - 2.0 * p) * 2.0 * r))
    return Graphon(
        evaluator=ev,
        symmetric=True,
        cell_integrator=cell,
        l2_norm_hint=hint,
        truncated_cell_integrator=cell_trunc,
        name=f"small_world(p={p!r}, r={r!r})",
    )


def _lift_step(S: StepGraphon) -> Graphon:
    n = S.n
    vals = S.values
    full_cache: dict[int, np.ndarray] = {}

    def ev(x, y):
        xi = np.clip(np.ceil(np.asarray(x, dtype=float) * n).astype(int), 1, n) - 1
        yj = np.clip(np.ceil(np.asarray(y, dtype=float) * n).astype(int), 1, n) - 1
        return vals[xi, yj]

    def _overlap(m):
        # O[k, l] = |I_{m,k+1} ∩ I_{n,l+1}|
        mk = np.arange(m, dtype=float)
        nl = np.arange(n, dtype=float)
        lo = np.maximum(mk[:, None] / m, nl[None, :] / n)
        hi = np.minimum((mk[:, None] + 1.0) / m, (nl[None, :] + 1.0) / n)
        return np.clip(hi - lo, 0.0, None)

    def _full(m, matrix):
        o = _overlap(m)
        return o @ matrix @ o.T

    def cell(m, i, j):
        if m not in full_cache:
            full_cache[m] = _full(m, vals)
        return full_cache[m][np.asarray(i) - 1, np.asarray(j) - 1]

    def cell_trunc(m, i, j, cap):
        capped = _full(m, np.minimum(vals, cap))
        return capped[np.asarray(i) - 1, np.asarray(j) - 1]

    digest = hashlib.sha256(vals.tobytes()).hexdigest()[:12]
    return Graphon(
        evaluator=ev,
        symmetric=S.symmetric,
        cell_integrator=cell,
        l2_norm_hint=S.l2(),
        truncated_cell_integrator=cell_trunc,
        step_source=S,
        name=f"step(n={n}, sha={digest})",
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def write_step_graphon(S: StepGraphon, path) -> None:
    """Binary format: magic 'SGW1', u32 n, u8 symmetric, n^2 little-endian f64."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIB", _SGW_MAGIC, S.n, 1 if S.symmetric else 0))
        fh.write(S.values.astype("<f8").tobytes())


def read_step_graphon(path) -> StepGraphon:
    with open(path, "rb") as fh:
        header = fh.read(9)
        if len(header) != 9:
            raise ValueError(f"truncated step-kernel file: {path}")
        magic, n, sym = struct.unpack("<4sIB", header)
        if magic != _SGW_MAGIC:
            raise ValueError(f"bad magic {magic!r} in {path}")
        data = np.frombuffer(fh.read(8 * n * n), dtype="<f8")
        if data.size != n * n:
            raise ValueError(f"truncated step-kernel payload in {path}")
    return StepGraphon(data.reshape(n, n).copy(), symmetric=bool(sym))


def step_graphon_to_csv(S: StepGraphon, path) -> None:
    np.savetxt(path, S.values, delimiter=",", fmt="%.17g")
