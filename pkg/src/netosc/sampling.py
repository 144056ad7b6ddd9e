"""Deterministic weighted graphs and Bernoulli random graphs from a kernel.

Edge weights follow the matrix convention a[i, j] = weight of the edge
j -> i, so row sums are in-degrees.  Random graphs draw each edge
independently with probability alpha_n * <min(1/alpha_n, W)>_cell, where
alpha_n = n^(-gamma) controls sparsity (gamma = 0 is the dense case and
then requires W <= 1).

Sampling uses the counter-based Philox generator keyed by (seed, trial_id);
each matrix row reserves its own counter range, so draws are reproducible
bit-for-bit regardless of evaluation order or worker count.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numpy.random import Generator, Philox

from .graphon import Graphon, StepGraphon, project, truncate_project

__all__ = [
    "SampleConfig",
    "WeightedGraph",
    "deterministic_graph",
    "edge_probabilities",
    "sample_random",
    "degrees",
    "expected_degrees",
    "write_edge_list",
    "write_graph",
    "read_graph",
]

_WGR_MAGIC = b"WGR1"


@dataclass(frozen=True)
class SampleConfig:
    """Parameters of one random-graph draw.

    gamma sets the sparsity scale alpha_n = n^(-gamma).  Any gamma in [0, 1)
    yields a valid graph model (the averaging theory additionally needs
    gamma < 0.5, which the experiment configs enforce where it matters).
    trial_id selects an independent stream for ensemble runs.
    """

    n: int
    gamma: float = 0.0
    directed: bool = False
    seed: int = 0
    trial_id: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"graph size must be positive, got {self.n}")
        if not (0.0 <= self.gamma < 1.0):
            raise ValueError(f"sparsity exponent gamma must lie in [0, 1), got {self.gamma}")
        if self.seed < 0 or self.trial_id < 0:
            raise ValueError("seed and trial_id must be nonnegative")

    @property
    def alpha(self) -> float:
        return float(self.n) ** (-self.gamma)


@dataclass(frozen=True)
class WeightedGraph:
    """Adjacency data of a finite weighted graph.

    weights is dense for deterministic graphs and CSR for sampled binary
    graphs; binary=True guarantees every stored entry is exactly 0 or 1.
    """

    n: int
    directed: bool
    weights: "np.ndarray | sp.csr_matrix"
    binary: bool

    def __post_init__(self):
        w = self.weights
        if w.shape != (self.n, self.n):
            raise ValueError(f"weight matrix shape {w.shape} does not match n={self.n}")

    def dense(self) -> np.ndarray:
        w = self.weights
        return w.toarray() if sp.issparse(w) else w

    def edge_count(self) -> int:
        w = self.weights
        if sp.issparse(w):
            return int(w.nnz)
        return int(np.count_nonzero(w))


def deterministic_graph(W: Graphon, n: int, directed: bool) -> WeightedGraph:
    """Complete weighted graph whose weights are the cell averages of W."""
    if not directed and not W.symmetric:
        raise ValueError("undirected deterministic graph requires a symmetric kernel")
    step = project(W, n)
    return WeightedGraph(n=n, directed=directed, weights=step.values, binary=False)


def edge_probabilities(W: Graphon, cfg: SampleConfig) -> np.ndarray:
    """Bernoulli success matrix alpha_n * <min(1/alpha_n, W)> per cell."""
    if not cfg.directed and not W.symmetric:
        raise ValueError("undirected sampling requires a symmetric kernel")
    n, alpha = cfg.n, cfg.alpha
    if cfg.gamma == 0.0:
        plain = project(W, n)
        if np.any(plain.values > 1.0 + 1e-12):
            i, j = np.unravel_index(int(np.argmax(plain.values)), plain.values.shape)
            raise ValueError(
                f"dense sampling (gamma=0) needs cell averages <= 1; "
                f"cell ({i + 1}, {j + 1}) has average {plain.values[i, j]:.6g}"
            )
        probs = np.minimum(plain.values, 1.0)
    else:
        probs = alpha * truncate_project(W, n, alpha).values
    bad = probs > 1.0 + 1e-12
    if np.any(bad):
        i, j = np.unravel_index(int(np.argmax(probs)), probs.shape)
        raise ValueError(f"edge probability {probs[i, j]:.6g} > 1 at cell ({i + 1}, {j + 1})")
    np.clip(probs, 0.0, 1.0, out=probs)
    return probs


def _row_uniforms(seed: int, trial_id: int, row: int, n: int) -> np.ndarray:
    # one Philox counter block yields 4 doubles; give each row its own range
    blocks_per_row = (n + 3) // 4
    bg = Philox(key=[seed, trial_id])
    bg.advance(row * blocks_per_row)
    return Generator(bg).random(n)


def sample_random(W: Graphon, cfg: SampleConfig) -> WeightedGraph:
    """Draw a Bernoulli graph from W under cfg; binary CSR storage.

    Directed graphs draw every ordered pair independently; undirected graphs
    draw each unordered pair once (loops from the diagonal cell) and mirror.
    Identical (W, cfg) always produce a bit-identical graph.
    """
    probs = edge_probabilities(W, cfg)
    n = cfg.n
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    for i in range(n):
        u = _row_uniforms(cfg.seed, cfg.trial_id, i, n)
        if cfg.directed:
            hit = np.nonzero(u < probs[i])[0]
        else:
            hit = i + np.nonzero(u[i:] < probs[i, i:])[0]
        rows.append(np.full(hit.size, i, dtype=np.int64))
        cols.append(hit.astype(np.int64))
    ri = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    ci = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    data = np.ones(ri.size)
    a = sp.coo_matrix((data, (ri, ci)), shape=(n, n)).tocsr()
    if not cfg.directed:
        upper_off = sp.triu(a, k=1)
        a = (a + upper_off.T).tocsr()
    a.sum_duplicates()
    return WeightedGraph(n=n, directed=cfg.directed, weights=a, binary=True)


def degrees(G: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """(in_deg, out_deg): row sums and column sums of the weight matrix."""
    w = G.weights
    if sp.issparse(w):
        in_deg = np.asarray(w.sum(axis=1)).ravel()
        out_deg = np.asarray(w.sum(axis=0)).ravel()
    else:
        in_deg = w.sum(axis=1)
        out_deg = w.sum(axis=0)
    return in_deg, out_deg


def expected_degrees(W: Graphon, cfg: SampleConfig) -> tuple[np.ndarray, np.ndarray]:
    """Expected (in, out) degrees: alpha_n times row/column sums of the capped cell matrix."""
    bar = truncate_project(W, cfg.n, cfg.alpha)
    e_in = cfg.alpha * bar.values.sum(axis=1)
    e_out = cfg.alpha * bar.values.sum(axis=0)
    return e_in, e_out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _edge_triples(G: WeightedGraph):
    """Yield (i, j, w) with 1-based matrix indices; undirected pairs once (i <= j)."""
    w = G.weights
    coo = sp.coo_matrix(w) if sp.issparse(w) else sp.coo_matrix(np.asarray(w))
    order = np.lexsort((coo.col, coo.row))
    for k in order:
        i, j, v = int(coo.row[k]), int(coo.col[k]), float(coo.data[k])
        if not G.directed and j < i:
            continue
        yield i + 1, j + 1, v


def write_edge_list(G: WeightedGraph, path) -> None:
    """Text edge list, one edge per line: 'i j' (binary) or 'i j weight'."""
    with open(path, "w") as fh:
        for i, j, v in _edge_triples(G):
            if G.binary:
                fh.write(f"{i} {j}\n")
            else:
                fh.write(f"{i} {j} {v:.17g}\n")


def write_graph(G: WeightedGraph, path) -> None:
    """Binary format: 'WGR1', u32 n, u8 directed, u8 binary, u64 edges, (u32,u32,f64) triples."""
    triples = list(_edge_triples(G))
    with open(path, "wb") as fh:
        fh.write(
            struct.pack(
                "<4sIBBQ", _WGR_MAGIC, G.n, 1 if G.directed else 0, 1 if G.binary else 0,
                len(triples),
            )
        )
        for i, j, v in triples:
            fh.write(struct.pack("<IId", i, j, v))


def read_graph(path) -> WeightedGraph:
    with open(path, "rb") as fh:
        header = fh.read(18)
        if len(header) != 18:
            raise ValueError(f"truncated graph file: {path}")
        magic, n, directed, binary, count = struct.unpack("<4sIBBQ", header)
        if magic != _WGR_MAGIC:
            raise ValueError(f"bad magic {magic!r} in {path}")
        payload = fh.read(16 * count)
        if len(payload) != 16 * count:
            raise ValueError(f"truncated graph payload in {path}")
    rows = np.empty(count, dtype=np.int64)
    cols = np.empty(count, dtype=np.int64)
    vals = np.empty(count)
    for k in range(count):
        i, j, v = struct.unpack_from("<IId", payload, 16 * k)
        rows[k], cols[k], vals[k] = i - 1, j - 1, v
    directed = bool(directed)
    binary = bool(binary)
    if not directed:
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    if binary:
        weights = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    else:
        dense = np.zeros((n, n))
        dense[rows, cols] = vals
        weights = dense
    return WeightedGraph(n=int(n), directed=directed, weights=weights, binary=binary)
