"""Weighted optimal impact-angle guidance.

Closed-form guidance gains for arbitrary feasible weighting functions,
planar engagement simulation, and independent optimality verification.
"""

from .engagement import (
    DivergenceError,
    InfeasibleWeightError,
    NonFiniteStateError,
    Scenario,
    SingularGeometryError,
    TerminalMetrics,
    TrajectoryRecord,
    initial_linear_state,
    linear_state_from_nonlinear,
    realized_cost,
    scenario_weight,
    simulate,
    trajectory_csv_lines,
    write_trajectory_csv,
)
from .gains import (
    AnalyticPathUnavailableError,
    DegenerateMomentsError,
    GainPair,
    MomentTriple,
    equivalent_gains,
    gain_pair,
    gram_determinant,
    moments_analytic,
    moments_quadrature,
)
from .guidance import (
    AngleGuidanceState,
    HoldLastCommand,
    LinearGuidanceState,
    clip_acceleration,
    command_angles,
    command_linear,
    command_predictive_form,
    linear_state_from_angles,
    pn_baseline,
)
from .oracle import (
    BoundaryData,
    SchwarzSolution,
    cost_at_lambda,
    discrete_optimal,
    schwarz_command,
    schwarz_cost,
    sequence_cost,
    state_transition,
)
from .quadrature import QuadratureError, integrate
from .weighting import (
    FAMILIES,
    FeasibilityReport,
    WeightFamily,
    WeightSpec,
    check_feasible,
    exponential_weight,
    family_weight,
    power_tgo_weight,
    register_family,
    uniform_weight,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticPathUnavailableError",
    "AngleGuidanceState",
    "BoundaryData",
    "DegenerateMomentsError",
    "DivergenceError",
    "FAMILIES",
    "FeasibilityReport",
    "GainPair",
    "HoldLastCommand",
    "InfeasibleWeightError",
    "LinearGuidanceState",
    "MomentTriple",
    "NonFiniteStateError",
    "QuadratureError",
    "Scenario",
    "SchwarzSolution",
    "SingularGeometryError",
    "TerminalMetrics",
    "TrajectoryRecord",
    "WeightFamily",
    "WeightSpec",
    "check_feasible",
    "clip_acceleration",
    "command_angles",
    "command_linear",
    "command_predictive_form",
    "cost_at_lambda",
    "discrete_optimal",
    "equivalent_gains",
    "exponential_weight",
    "family_weight",
    "gain_pair",
    "gram_determinant",
    "initial_linear_state",
    "integrate",
    "linear_state_from_angles",
    "linear_state_from_nonlinear",
    "moments_analytic",
    "moments_quadrature",
    "pn_baseline",
    "power_tgo_weight",
    "realized_cost",
    "register_family",
    "scenario_weight",
    "schwarz_command",
    "schwarz_cost",
    "sequence_cost",
    "simulate",
    "state_transition",
    "trajectory_csv_lines",
    "uniform_weight",
    "write_trajectory_csv",
]
