"""Worked operation examples with independently derived expected values.

Every derived value here was recomputed from its stated independent oracle
(closed-form antiderivatives, hand evaluation of the sums, brute-force
double loops, overlap integration, synthetic regressions) before being
frozen into the assertions.  The registry is shared: unit modules
parametrize over their own slice, and the acceptance suite replays the
whole table.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from netosc.continuum import StepFunction, apply_K, galerkin_solve, prolong, restrict
from netosc.dynamics import (
    AveragedBackend,
    CouplingFunction,
    Forcing,
    ModelSpec,
    RandomGraphBackend,
    Trajectory,
    build_U,
    constant_forcing,
    initial_from_g,
    integrate,
    rhs,
    sine_coupling,
    zero_forcing,
)
from netosc.experiments import ExperimentConfig, run_avg_compare, run_degree_law
from netosc.graphon import (
    StepGraphon,
    cell_average,
    constant,
    degree_bounds,
    erdos_renyi,
    l2_distance,
    power_law,
    project,
    small_world,
    truncate_project,
)
from netosc.metrics import (
    discrete_l2,
    fit_rate,
    gronwall_constant,
    sup_time_distance,
    vector_norm,
)
from netosc.sampling import (
    SampleConfig,
    WeightedGraph,
    degrees,
    deterministic_graph,
    edge_probabilities,
    expected_degrees,
    sample_random,
)

EXAMPLES: dict[str, callable] = {}


def example(name):
    def register(fn):
        EXAMPLES[name] = fn
        return fn

    return register


def names_for(prefix: str) -> list[str]:
    return sorted(n for n in EXAMPLES if n.startswith(prefix))


SQ2 = math.sqrt(2.0)


def _zero_kernel(n):
    return StepGraphon(np.zeros((n, n)), symmetric=True)


def _ones_graph(n, loops=True):
    m = np.ones((n, n))
    if not loops:
        np.fill_diagonal(m, 0.0)
    return WeightedGraph(n=n, directed=True, weights=sp.csr_matrix(m), binary=True)


# ---------------------------------------------------------------------------
# graphon.cell_average
# ---------------------------------------------------------------------------


@example("graphon.cell_average.constant")
def _():
    W = constant(2.5)
    for n, i, j in [(1, 1, 1), (3, 2, 3), (7, 7, 1)]:
        assert cell_average(W, n, i, j) == 2.5


@example("graphon.cell_average.power_law_n1")
def _():
    # (1-b)^2 ((1-0)/(1-b))^2 = 1 for b = 0.5
    assert abs(cell_average(power_law(0.5), 1, 1, 1) - 1.0) < 1e-14


@example("graphon.cell_average.power_law_n2")
def _():
    # 4 (1-b)^2 (int_0^1/2 x^-1/2 dx)^2 = 4 * 1/4 * 2 = 2 for b = 0.5
    assert abs(cell_average(power_law(0.5), 2, 1, 1) - 2.0) < 1e-14


# ---------------------------------------------------------------------------
# graphon.project
# ---------------------------------------------------------------------------


@example("graphon.project.all_ones")
def _():
    S = project(constant(1.0), 4)
    assert np.array_equal(S.values, np.ones((4, 4)))


@example("graphon.project.idempotent_on_lift")
def _():
    S = StepGraphon(np.array([[0.3, 0.7, 0.1], [0.7, 0.9, 0.4], [0.1, 0.4, 0.2]]), symmetric=True)
    again = project(S.as_graphon(), 3)
    assert np.array_equal(again.values, S.values)


@example("graphon.project.power_law_matrix")
def _():
    # per-cell antiderivative: entries (2, 2sqrt(2)-2; 2sqrt(2)-2, (2-sqrt(2))^2)
    S = project(power_law(0.5), 2)
    expected = np.array([[2.0, 2.0 * SQ2 - 2.0], [2.0 * SQ2 - 2.0, (2.0 - SQ2) ** 2]])
    assert np.allclose(S.values, expected, rtol=0, atol=1e-13)


# ---------------------------------------------------------------------------
# graphon.truncate_project
# ---------------------------------------------------------------------------


@example("graphon.truncate_project.inactive")
def _():
    S = truncate_project(constant(1.0), 3, 0.5)
    assert np.array_equal(S.values, np.ones((3, 3)))


@example("graphon.truncate_project.bounded_equals_project")
def _():
    W = small_world(0.3, 0.2)  # sup W = 0.7 < 1/alpha
    assert np.array_equal(truncate_project(W, 5, 1.0).values, project(W, 5).values)


@example("graphon.truncate_project.capped_constant")
def _():
    S = truncate_project(constant(5.0), 2, 0.25)
    assert np.array_equal(S.values, np.full((2, 2), 4.0))


# ---------------------------------------------------------------------------
# graphon.l2_distance
# ---------------------------------------------------------------------------


@example("graphon.l2_distance.projection_of_constant")
def _():
    W = constant(1.0)
    assert l2_distance(project(W, 5), W) == 0.0


@example("graphon.l2_distance.zeros_vs_one")
def _():
    assert abs(l2_distance(_zero_kernel(2), constant(1.0)) - 1.0) < 1e-15


@example("graphon.l2_distance.power_law_monotone")
def _():
    # independent oracle: per-cell closed forms of int W and int W^2 summed
    # in an explicit loop, then dist^2 = sum_cells int (W - S_ij)^2
    beta = 0.4
    W = power_law(beta)
    q = 1.0 - beta
    pre4 = (1.0 - beta) ** 4
    dists = []
    for n in (4, 16, 64, 256):
        S = project(W, n)
        e = np.arange(n + 1) / n
        dq = e[1:] ** q - e[:-1] ** q
        d2q = e[1:] ** (1 - 2 * beta) - e[:-1] ** (1 - 2 * beta)
        int_w = np.outer(dq, dq)
        int_w2 = pre4 * np.outer(d2q, d2q) / (1.0 - 2.0 * beta) ** 2
        area = 1.0 / (n * n)
        oracle = math.sqrt(float((int_w2 - 2.0 * S.values * int_w + S.values**2 * area).sum()))
        got = l2_distance(S, W)
        assert abs(got - oracle) < 1e-10
        dists.append(got)
    assert all(b < a for a, b in zip(dists, dists[1:]))


# ---------------------------------------------------------------------------
# graphon.degree_bounds
# ---------------------------------------------------------------------------


@example("graphon.degree_bounds.all_ones")
def _():
    for n in (1, 4, 9):
        assert degree_bounds(project(constant(1.0), n)) == (1.0, 1.0)


@example("graphon.degree_bounds.symmetric")
def _():
    rng = np.random.default_rng(5)
    m = rng.random((6, 6))
    S = StepGraphon(m + m.T, symmetric=True)
    w1, w2 = degree_bounds(S)
    assert w1 == w2


@example("graphon.degree_bounds.power_law_unbounded")
def _():
    W = power_law(0.5)
    w1_small = degree_bounds(project(W, 8))[0]
    w1_large = degree_bounds(project(W, 64))[0]
    assert np.isfinite(w1_large) and w1_large > w1_small


# ---------------------------------------------------------------------------
# sampling.deterministic_graph
# ---------------------------------------------------------------------------


@example("sampling.deterministic_graph.all_ones")
def _():
    G = deterministic_graph(constant(1.0), 3, directed=False)
    assert np.array_equal(G.dense(), np.ones((3, 3))) and not G.binary


@example("sampling.deterministic_graph.zero")
def _():
    G = deterministic_graph(constant(0.0), 4, directed=True)
    assert G.edge_count() == 0


@example("sampling.deterministic_graph.power_law_matches_project")
def _():
    G = deterministic_graph(power_law(0.5), 2, directed=False)
    assert np.array_equal(G.dense(), project(power_law(0.5), 2).values)


# ---------------------------------------------------------------------------
# sampling.sample_random
# ---------------------------------------------------------------------------


@example("sampling.sample_random.empty")
def _():
    for seed in (0, 123):
        G = sample_random(constant(0.0), SampleConfig(n=12, gamma=0.3, seed=seed))
        assert G.edge_count() == 0


@example("sampling.sample_random.er_probability")
def _():
    probs = edge_probabilities(erdos_renyi(), SampleConfig(n=10, gamma=0.5))
    assert np.allclose(probs, 10.0**-0.5, rtol=0, atol=1e-15)
    assert abs(probs[0, 0] - 0.31623) < 5e-6


@example("sampling.sample_random.undirected_symmetric")
def _():
    for seed in (1, 77):
        G = sample_random(small_world(0.3, 0.2), SampleConfig(n=20, gamma=0.2, seed=seed))
        d = G.dense()
        assert np.array_equal(d, d.T)


# ---------------------------------------------------------------------------
# sampling.degrees
# ---------------------------------------------------------------------------


@example("sampling.degrees.complete")
def _():
    in_deg, out_deg = degrees(_ones_graph(3))
    assert np.array_equal(in_deg, [3, 3, 3]) and np.array_equal(out_deg, [3, 3, 3])


@example("sampling.degrees.empty")
def _():
    G = WeightedGraph(n=3, directed=True, weights=sp.csr_matrix((3, 3)), binary=True)
    in_deg, out_deg = degrees(G)
    assert np.array_equal(in_deg, [0, 0, 0]) and np.array_equal(out_deg, [0, 0, 0])


@example("sampling.degrees.single_edge")
def _():
    m = np.zeros((2, 2))
    m[0, 1] = 1.0  # edge 2 -> 1
    G = WeightedGraph(n=2, directed=True, weights=sp.csr_matrix(m), binary=True)
    in_deg, out_deg = degrees(G)
    assert np.array_equal(in_deg, [1, 0]) and np.array_equal(out_deg, [0, 1])


# ---------------------------------------------------------------------------
# sampling.expected_degrees
# ---------------------------------------------------------------------------


@example("sampling.expected_degrees.er_sqrt_n")
def _():
    e_in, e_out = expected_degrees(erdos_renyi(), SampleConfig(n=100, gamma=0.5))
    assert np.allclose(e_in, 10.0, rtol=0, atol=1e-12)
    assert np.allclose(e_out, 10.0, rtol=0, atol=1e-12)


@example("sampling.expected_degrees.zero")
def _():
    e_in, e_out = expected_degrees(constant(0.0), SampleConfig(n=10, gamma=0.3))
    assert not e_in.any() and not e_out.any()


@example("sampling.expected_degrees.power_law_slope")
def _():
    cfg = SampleConfig(n=256, gamma=0.4)
    e_in, _ = expected_degrees(power_law(0.3), cfg)
    slope = np.polyfit(np.log(np.arange(1, 257)), np.log(e_in), 1)[0]
    assert abs(slope - (-0.3)) <= 0.05
    # direct-summation oracle for one node, from the capped closed form
    bar = truncate_project(power_law(0.3), 256, cfg.alpha)
    assert abs(e_in[17] - cfg.alpha * bar.values[17].sum()) < 1e-12


# ---------------------------------------------------------------------------
# dynamics.rhs
# ---------------------------------------------------------------------------


@example("dynamics.rhs.synchronized_is_fixed")
def _():
    u = np.full(6, 0.7)
    backends = [
        AveragedBackend(project(erdos_renyi(), 6)),
        RandomGraphBackend(_ones_graph(6), 1.0),
    ]
    for b in backends:
        spec = ModelSpec(zero_forcing(), sine_coupling(), b, 6)
        assert np.array_equal(rhs(spec, u, 0.0), np.zeros(6))


@example("dynamics.rhs.two_node_hand_value")
def _():
    G = _ones_graph(2, loops=False)
    spec = ModelSpec(zero_forcing(), sine_coupling(), RandomGraphBackend(G, 1.0), 2)
    out = rhs(spec, np.array([0.0, math.pi / 2.0]), 0.0)
    assert np.allclose(out, [0.5, -0.5], rtol=0, atol=1e-15)


@example("dynamics.rhs.averaged_matches_complete_graph")
def _():
    rng = np.random.default_rng(3)
    spec_avg = ModelSpec(zero_forcing(), sine_coupling(), AveragedBackend(project(constant(1.0), 9)), 9)
    spec_rand = ModelSpec(zero_forcing(), sine_coupling(), RandomGraphBackend(_ones_graph(9), 1.0), 9)
    for _ in range(5):
        u = rng.uniform(-math.pi, math.pi, 9)
        assert np.allclose(rhs(spec_avg, u, 0.0), rhs(spec_rand, u, 0.0), rtol=0, atol=1e-13)


# ---------------------------------------------------------------------------
# dynamics.build_U
# ---------------------------------------------------------------------------


@example("dynamics.build_U.constant_kernel")
def _():
    U = build_U(StepGraphon(np.full((5, 5), 3.0), symmetric=True))
    assert np.allclose(U, 1.0, rtol=0, atol=1e-15)


@example("dynamics.build_U.row_means_one")
def _():
    # forced by the formula and symmetry: every row mean is exactly 1.
    # (Column means equal 1 only for kernels with constant column sums;
    # see the constant-kernel example above for that regime.)
    rng = np.random.default_rng(11)
    for _ in range(5):
        m = rng.random((7, 7)) + 0.05
        U = build_U(StepGraphon(m + m.T, symmetric=True))
        assert np.allclose(U.mean(axis=1), 1.0, rtol=0, atol=1e-12)
    U = build_U(StepGraphon(np.full((4, 4), 0.6), symmetric=True))
    assert np.allclose(U.mean(axis=0), 1.0, rtol=0, atol=1e-12)
    assert np.allclose(U.mean(axis=1), 1.0, rtol=0, atol=1e-12)


@example("dynamics.build_U.power_law_brute_force")
def _():
    bar = truncate_project(power_law(0.3), 8, 8.0**-0.4)
    U = build_U(bar)
    n = 8
    for i in range(n):
        for j in range(n):
            denom = sum(bar.values[k, i] for k in range(n)) / n
            assert abs(U[i, j] - bar.values[i, j] / denom) < 1e-12


# ---------------------------------------------------------------------------
# dynamics.initial_from_g
# ---------------------------------------------------------------------------


@example("dynamics.initial_from_g.constant")
def _():
    out = initial_from_g(lambda x: np.full_like(x, 1.25), 6)
    assert np.allclose(out, 1.25, rtol=0, atol=1e-13)


@example("dynamics.initial_from_g.linear")
def _():
    out = initial_from_g(lambda x: np.asarray(x), 2)
    assert np.allclose(out, [0.25, 0.75], rtol=0, atol=1e-13)


@example("dynamics.initial_from_g.ramp")
def _():
    out = initial_from_g(lambda x: 2.0 * math.pi * np.asarray(x), 4)
    assert np.allclose(out, math.pi * np.array([0.25, 0.75, 1.25, 1.75]), rtol=0, atol=1e-12)


# ---------------------------------------------------------------------------
# dynamics.integrate
# ---------------------------------------------------------------------------


@example("dynamics.integrate.rigid_rotation")
def _():
    spec = ModelSpec(
        constant_forcing(0.8), sine_coupling(), AveragedBackend(project(erdos_renyi(), 5)), 5
    )
    traj = integrate(spec, np.full(5, 0.3), 1.0, dt=0.01)
    expected = 0.3 + 0.8 * traj.times[-1]
    assert np.allclose(traj.states[-1], expected, rtol=0, atol=1e-10)


@example("dynamics.integrate.exponential_decay")
def _():
    f = Forcing(lambda u, t: -u, 1.0, 0.0, "linear_decay")
    spec = ModelSpec(f, sine_coupling(), AveragedBackend(_zero_kernel(4)), 4)
    traj = integrate(spec, np.ones(4), 1.0, dt=0.01)
    assert np.abs(traj.states[-1] - math.exp(-traj.times[-1])).max() < 1e-8


@example("dynamics.integrate.order_four")
def _():
    # Richardson comparison against a dt/16 reference on coupled dynamics
    spec = ModelSpec(
        zero_forcing(), sine_coupling(), AveragedBackend(project(small_world(0.2, 0.25), 8)), 8
    )
    u0 = initial_from_g(lambda x: 2.0 * math.pi * np.asarray(x), 8)
    ref = integrate(spec, u0, 1.0, dt=0.02 / 16.0)
    dev = []
    for dt in (0.02, 0.01):
        traj = integrate(spec, u0, 1.0, dt=dt)
        dev.append(np.abs(traj.states[-1] - ref.states[-1]).max())
    factor = dev[0] / dev[1]
    assert 12.0 <= factor <= 20.0


# ---------------------------------------------------------------------------
# continuum.apply_K
# ---------------------------------------------------------------------------


@example("continuum.apply_K.constant_state")
def _():
    out = apply_K(project(power_law(0.4), 6), sine_coupling(), StepFunction(np.full(6, 2.0)))
    assert np.array_equal(out.values, np.zeros(6))


@example("continuum.apply_K.hand_value")
def _():
    kernel = StepGraphon(np.ones((2, 2)), symmetric=True)
    out = apply_K(kernel, sine_coupling(), StepFunction(np.array([0.0, math.pi / 2.0])))
    assert np.allclose(out.values, [0.5, -0.5], rtol=0, atol=1e-15)
    spec = ModelSpec(zero_forcing(), sine_coupling(), AveragedBackend(kernel), 2)
    assert np.array_equal(out.values, rhs(spec, np.array([0.0, math.pi / 2.0]), 0.0))


@example("continuum.apply_K.lipschitz_bound")
def _():
    W = power_law(0.4)
    bar = truncate_project(W, 32, 32.0**-0.45)
    w_l2 = 1.8  # (1-beta)^2 / (1-2 beta) at beta = 0.4
    rng = np.random.default_rng(21)
    for _ in range(100):
        u = StepFunction(rng.uniform(-math.pi, math.pi, 32))
        v = StepFunction(rng.uniform(-math.pi, math.pi, 32))
        lhs = discrete_l2(
            apply_K(bar, sine_coupling(), u).values, apply_K(bar, sine_coupling(), v).values
        )
        assert lhs <= 2.0 * 1.0 * w_l2 * discrete_l2(u.values, v.values) + 1e-12


# ---------------------------------------------------------------------------
# continuum.galerkin_solve
# ---------------------------------------------------------------------------


@example("continuum.galerkin_solve.decoupled")
def _():
    f = Forcing(lambda u, t: -u, 1.0, 0.0, "linear_decay")
    g = lambda x: 2.0 * math.pi * np.asarray(x)  # noqa: E731
    traj = galerkin_solve(constant(0.0), f, sine_coupling(), g, 8, 1.0, dt=0.01)
    expected = initial_from_g(g, 8) * math.exp(-traj.times[-1])
    assert np.abs(traj.states[-1] - expected).max() < 1e-8


@example("continuum.galerkin_solve.bitwise_step_kernel")
def _():
    rng = np.random.default_rng(8)
    m = rng.random((6, 6))
    S = StepGraphon(0.5 * (m + m.T), symmetric=True)
    g = lambda x: np.cos(2.0 * math.pi * np.asarray(x))  # noqa: E731
    via_galerkin = galerkin_solve(S.as_graphon(), zero_forcing(), sine_coupling(), g, 6, 0.5, dt=0.01)
    spec = ModelSpec(zero_forcing(), sine_coupling(), AveragedBackend(S), 6)
    direct = integrate(spec, initial_from_g(g, 6), 0.5, dt=0.01)
    assert np.array_equal(via_galerkin.states, direct.states)


@example("continuum.galerkin_solve.constant_profile_fixed_point")
def _():
    g = lambda x: np.full_like(np.asarray(x, dtype=float), 0.9)  # noqa: E731
    traj = galerkin_solve(small_world(0.2, 0.2), zero_forcing(), sine_coupling(), g, 8, 0.5, dt=0.01)
    assert np.allclose(traj.states, 0.9, rtol=0, atol=1e-12)


# ---------------------------------------------------------------------------
# continuum.restrict / prolong
# ---------------------------------------------------------------------------


@example("continuum.restrict.block_means")
def _():
    out = restrict(StepFunction(np.array([1.0, 1.0, 3.0, 3.0])), 2)
    assert np.array_equal(out.values, [1.0, 3.0])


@example("continuum.restrict.identity")
def _():
    u = StepFunction(np.array([0.2, -1.0, 4.0]))
    assert np.array_equal(restrict(u, 3).values, u.values)


@example("continuum.restrict.contraction")
def _():
    rng = np.random.default_rng(13)
    for _ in range(20):
        u = StepFunction(rng.normal(size=12))
        assert restrict(u, 4).l2() <= u.l2() + 1e-14


@example("continuum.prolong.replicate")
def _():
    out = prolong(StepFunction(np.array([1.0, 3.0])), 4)
    assert np.array_equal(out.values, [1.0, 1.0, 3.0, 3.0])


@example("continuum.prolong.isometry")
def _():
    rng = np.random.default_rng(14)
    for _ in range(20):
        u = StepFunction(rng.normal(size=6))
        assert prolong(u, 24).l2() == u.l2()


@example("continuum.prolong.left_inverse")
def _():
    rng = np.random.default_rng(15)
    u = StepFunction(rng.normal(size=5))
    assert np.array_equal(restrict(prolong(u, 20), 5).values, u.values)


# ---------------------------------------------------------------------------
# metrics.discrete_l2
# ---------------------------------------------------------------------------


@example("metrics.discrete_l2.unit_offset")
def _():
    for n in (1, 5, 17):
        assert discrete_l2(np.zeros(n), np.ones(n)) == 1.0


@example("metrics.discrete_l2.zero")
def _():
    u = np.array([0.3, -2.0, 5.5])
    assert discrete_l2(u, u) == 0.0


@example("metrics.discrete_l2.three_four")
def _():
    # sqrt((3^2 + 4^2)/2) = sqrt(12.5)
    got = discrete_l2(np.array([3.0, 4.0]), np.zeros(2))
    assert abs(got - math.sqrt(12.5)) < 1e-15
    assert abs(got - 3.53553) < 1e-5


# ---------------------------------------------------------------------------
# metrics.sup_time_distance
# ---------------------------------------------------------------------------


@example("metrics.sup_time_distance.identical")
def _():
    traj = Trajectory(dt=0.1, states=np.arange(12.0).reshape(4, 3))
    assert sup_time_distance(traj, traj) == 0.0


@example("metrics.sup_time_distance.constant_shift")
def _():
    states = np.arange(12.0).reshape(4, 3)
    a = Trajectory(dt=0.1, states=states)
    b = Trajectory(dt=0.1, states=states + 0.75)
    assert abs(sup_time_distance(a, b) - 0.75) < 1e-15


@example("metrics.sup_time_distance.cross_resolution_overlap_oracle")
def _():
    rng = np.random.default_rng(19)
    a = Trajectory(dt=0.05, states=rng.normal(size=(6, 4)))
    b = Trajectory(dt=0.05, states=rng.normal(size=(6, 8)))
    # overlap-integration oracle: integrate the squared difference of the two
    # step embeddings cell by cell on the fine mesh
    worst = 0.0
    for k in range(6):
        acc = 0.0
        for cell in range(8):
            mid = (cell + 0.5) / 8.0
            coarse_val = a.states[k, min(int(mid * 4), 3)]
            acc += (coarse_val - b.states[k, cell]) ** 2 * (1.0 / 8.0)
        worst = max(worst, math.sqrt(acc))
    got = sup_time_distance(a, b)
    assert abs(got - worst) < 1e-12
    per_step = max(
        discrete_l2(prolong(StepFunction(a.states[k]), 8).values, b.states[k]) for k in range(6)
    )
    assert abs(got - per_step) < 1e-15


# ---------------------------------------------------------------------------
# metrics.gronwall_constant
# ---------------------------------------------------------------------------


@example("metrics.gronwall_constant.floor")
def _():
    assert gronwall_constant(0.0, 0.0, 0.0, 0.0) == 0.5


@example("metrics.gronwall_constant.all_ones")
def _():
    assert gronwall_constant(1.0, 1.0, 1.0, 1.0) == 5.5


@example("metrics.gronwall_constant.mixed")
def _():
    assert gronwall_constant(0.0, 1.0, 2.0, 0.0) == 5.5


# ---------------------------------------------------------------------------
# metrics.fit_rate
# ---------------------------------------------------------------------------


@example("metrics.fit_rate.exact_geometric")
def _():
    series = fit_rate([100.0, 200.0, 400.0], [1.0, 0.5, 0.25])
    assert abs(series.fitted_slope - (-1.0)) < 1e-12


@example("metrics.fit_rate.flat")
def _():
    series = fit_rate([10.0, 100.0, 1000.0], [0.7, 0.7, 0.7])
    assert abs(series.fitted_slope) < 1e-12


@example("metrics.fit_rate.noisy_quarter")
def _():
    rng = np.random.default_rng(23)
    ns = np.array([50.0, 100.0, 200.0, 400.0, 800.0, 1600.0])
    errors = 3.0 * ns**-0.25 * (1.0 + 0.01 * rng.standard_normal(ns.size))
    series = fit_rate(ns, errors)
    assert abs(series.fitted_slope - (-0.25)) <= 0.05


# ---------------------------------------------------------------------------
# experiment-level examples
# ---------------------------------------------------------------------------


@example("experiments.avg_compare.dense_complete_zero_error")
def _():
    # gamma=0 with W == 1: every Bernoulli succeeds, so the sampled system IS
    # the averaged system; the deviation is zero up to summation-order
    # roundoff between the sparse and dense coupling evaluations.
    W = erdos_renyi()
    g = lambda x: 2.0 * math.pi * np.asarray(x)  # noqa: E731
    n = 24
    graph = sample_random(W, SampleConfig(n=n, gamma=0.0, seed=4))
    assert graph.edge_count() == n * n
    u0 = initial_from_g(g, n)
    rand = integrate(
        ModelSpec(zero_forcing(), sine_coupling(), RandomGraphBackend(graph, 1.0), n),
        u0, 0.5, dt=0.005,
    )
    avg = integrate(
        ModelSpec(zero_forcing(), sine_coupling(), AveragedBackend(project(W, n)), n),
        u0, 0.5, dt=0.005,
    )
    assert sup_time_distance(rand, avg) <= 1e-10


@example("experiments.avg_compare.decoupled_zero_error")
def _():
    cfg = ExperimentConfig(
        kind="avg-compare", graphon="constant", c=0.0, gamma=0.25,
        ns=(8, 16, 32), T=0.5, dt=0.01, trials=2, seed=3,
    )
    record = run_avg_compare(cfg)
    assert all(row["error"] == 0.0 for row in record.rows)
    assert record.passed and record.fit is None


@example("experiments.galerkin_sweep.projection_error_only")
def _():
    # W == 0 and f == 0: every resolution holds its initial profile, so the
    # distance to the reference is exactly the initial projection gap
    from netosc.experiments import run_galerkin_sweep

    cfg = ExperimentConfig(
        kind="galerkin-sweep", graphon="constant", c=0.0, gamma=0.25,
        ns=(4, 8, 16), n_ref=64, T=0.25, dt=0.05, trials=1, seed=0,
    )
    record = run_galerkin_sweep(cfg)
    g = lambda x: 2.0 * math.pi * np.asarray(x)  # noqa: E731
    ref0 = initial_from_g(g, 64)
    for row in record.rows:
        n = row["n"]
        gap = discrete_l2(np.repeat(initial_from_g(g, n), 64 // n), ref0)
        assert abs(row["error"] - gap) < 1e-12
    errs = [row["error"] for row in record.rows]
    assert all(b < a for a, b in zip(errs, errs[1:]))


@example("experiments.galerkin_sweep.step_kernel_floor_zero")
def _():
    # a step kernel solved at its own resolution reproduces the reference
    # bitwise: the cap is inactive and both solves share one code path
    rng = np.random.default_rng(31)
    m = rng.random((8, 8)) * 0.9
    S = StepGraphon(0.5 * (m + m.T), symmetric=True)
    W = S.as_graphon()
    g = lambda x: 2.0 * math.pi * np.asarray(x)  # noqa: E731
    ref = galerkin_solve(W, zero_forcing(), sine_coupling(), g, 8, 0.5, dt=0.01)
    bar = truncate_project(W, 8, 8.0**-0.45)
    spec = ModelSpec(zero_forcing(), sine_coupling(), AveragedBackend(bar), 8)
    sweep = integrate(spec, initial_from_g(g, 8), 0.5, dt=0.01)
    assert sup_time_distance(sweep, ref) == 0.0


@example("experiments.e2e.projection_error_only")
def _():
    from netosc.experiments import run_e2e

    cfg = ExperimentConfig(
        kind="e2e-converge", graphon="constant", c=0.0, gamma=0.25,
        ns=(4, 8, 16), n_ref=64, T=0.25, dt=0.05, trials=1, seed=0,
    )
    record = run_e2e(cfg)
    g = lambda x: 2.0 * math.pi * np.asarray(x)  # noqa: E731
    ref0 = initial_from_g(g, 64)
    for row in record.rows:
        n = row["n"]
        gap = discrete_l2(np.repeat(initial_from_g(g, n), 64 // n), ref0)
        assert abs(row["error"] - gap) < 1e-12


@example("experiments.e2e.dense_triangle_inequality")
def _():
    from netosc.experiments import run_e2e, run_galerkin_sweep

    base = dict(
        graphon="erdos_renyi", gamma=0.0, ns=(8, 16), n_ref=32,
        T=0.3, dt=0.01, trials=1, seed=6,
    )
    e2e = run_e2e(ExperimentConfig(kind="e2e-converge", **base))
    avg = run_avg_compare(ExperimentConfig(kind="avg-compare", **base))
    swp = run_galerkin_sweep(ExperimentConfig(kind="galerkin-sweep", **base))
    for k, n in enumerate(base["ns"]):
        total = e2e.rows[k]["error"]
        parts = avg.rows[k]["error"] + swp.rows[k]["error"]
        assert total <= parts + 1e-10


@example("experiments.degree_law.er_mean")
def _():
    cfg = ExperimentConfig(
        kind="degree-law", graphon="erdos_renyi", gamma=0.5, ns=(100,), trials=200, seed=17,
    )
    record = run_degree_law(cfg)
    assert record.passed
    assert abs(record.aggregates["expected_mean_degree"] - 10.0) < 1e-9


@example("experiments.degree_law.zero_kernel")
def _():
    graph = sample_random(constant(0.0), SampleConfig(n=50, gamma=0.4, seed=2))
    in_deg, out_deg = degrees(graph)
    assert not in_deg.any() and not out_deg.any()
