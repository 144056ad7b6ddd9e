"""Phase-oscillator dynamics on graph sequences with a common kernel limit.

Subpackage map:

* graphon      - kernels on the unit square, cell averages, capped reductions
* sampling     - deterministic and Bernoulli random graphs from a kernel
* dynamics     - model right-hand sides and the fixed-step RK4 integrator
* continuum    - nonlocal coupling operator and fine-mesh reference solves
* metrics      - discrete norms, trajectory distances, rate fitting
* experiments  - config-driven convergence studies behind the CLI
"""

from .continuum import StepFunction, apply_K, galerkin_solve, prolong, restrict
from .dynamics import (
    AveragedBackend,
    CouplingFunction,
    DegreeNormalizedBackend,
    Forcing,
    ModelSpec,
    RandomGraphBackend,
    Trajectory,
    build_U,
    initial_from_g,
    integrate,
    rhs,
    sine_coupling,
    zero_forcing,
)
from .experiments import ExperimentConfig, ExperimentRecord, run_experiment
from .graphon import (
    Graphon,
    StepGraphon,
    cell_average,
    constant,
    degree_bounds,
    erdos_renyi,
    l2_distance,
    l2_norm,
    power_law,
    project,
    small_world,
    truncate_project,
)
from .metrics import (
    ConvergenceSeries,
    discrete_l2,
    fit_rate,
    gronwall_constant,
    sup_time_distance,
    vector_norm,
)
from .sampling import (
    SampleConfig,
    WeightedGraph,
    degrees,
    deterministic_graph,
    expected_degrees,
    sample_random,
)

__version__ = "0.1.0"
