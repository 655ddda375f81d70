"""Closed-loop planar engagement simulation.

Two kinematics modes share one guidance loop:

- linear: double integrator in the impact-course frame (lateral distance
  y and lateral velocity v), fixed final time tf, exact time-to-go
  tf - t. This is the model the guidance law is optimal for.
- nonlinear: constant-speed point mass in the inertial plane
  (x_dot = V cos gamma, y_dot = V sin gamma, gamma_dot = a/V), stationary
  target, time-to-go estimated as range / V. The run ends at closest
  approach, refined by quadratic interpolation of squared range.

The command is recomputed at every step start from the current state
(receding evaluation of the gains) and held constant across the step;
below the tgo floor the last command is frozen. State derivatives are
integrated with fixed-step RK4 by default (explicit Euler is available
for convergence studies).

Record convention: one TrajectoryRecord per step start plus a final
record; running_cost accumulates the weighted energy by the trapezoidal
rule over the records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, TextIO

from .gains import equivalent_gains
from .guidance import (
    HoldLastCommand,
    LinearGuidanceState,
    clip_acceleration,
    command_linear,
)
from .weighting import WeightSpec, family_weight

KINEMATICS_MODES = ("linear", "nonlinear")
INTEGRATORS = ("rk4", "euler")

CSV_HEADER = "t,x,y,gamma_M,sigma,tgo,a_M,running_cost"


class SingularGeometryError(ValueError):
    """Missile and target are coincident; LOS angle is undefined."""


class InfeasibleWeightError(RuntimeError):
    """inv_w came out negative while accumulating the weighted cost."""


class DivergenceError(RuntimeError):
    """Range increased for a sustained window; carries the partial run."""

    def __init__(self, message: str, records: list["TrajectoryRecord"]):
        super().__init__(message)
        self.records = records


class NonFiniteStateError(RuntimeError):
    """The integrated state stopped being finite."""

    def __init__(self, message: str, records: list["TrajectoryRecord"]):
        super().__init__(message)
        self.records = records


@dataclass(frozen=True)
class Scenario:
    """Complete configuration of one engagement run.

    Angles in radians. For linear mode tf is required; for nonlinear mode
    it defaults to initial range / speed and also anchors the weighting
    function's time domain.
    """

    missile_pos: tuple[float, float]
    gamma_m0: float
    v_m: float
    target_pos: tuple[float, float]
    gamma_f: float
    weight_family: str = "uniform"
    weight_params: Mapping[str, float] = field(default_factory=dict)
    kinematics: str = "linear"
    dt: float = 1e-3
    tf: float | None = None
    integrator: str = "rk4"
    tgo_min: float = 1e-3
    a_max: float | None = None

    def __post_init__(self):
        if not self.v_m > 0.0:
            raise ValueError(f"missile speed must be positive, got {self.v_m}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.kinematics not in KINEMATICS_MODES:
            raise ValueError(f"kinematics must be one of {KINEMATICS_MODES}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}")
        if self.kinematics == "linear" and self.tf is None:
            raise ValueError("linear mode requires an explicit tf")
        if self.tf is not None and not self.tf > 0.0:
            raise ValueError(f"tf must be positive, got {self.tf}")
        if self.a_max is not None and self.a_max < 0.0:
            raise ValueError(f"a_max must be non-negative, got {self.a_max}")
        if not self.initial_range > 0.0:
            raise ValueError("initial range must be positive")

    @property
    def initial_range(self) -> float:
        return math.hypot(
            self.target_pos[0] - self.missile_pos[0],
            self.target_pos[1] - self.missile_pos[1],
        )

    @property
    def resolved_tf(self) -> float:
        if self.tf is not None:
            return self.tf
        return self.initial_range / self.v_m


@dataclass(frozen=True)
class TrajectoryRecord:
    """One logged step of a run; times strictly increase across records."""

    t: float
    x: float
    y: float
    gamma_m: float
    sigma: float
    tgo: float
    a_m: float
    running_cost: float


@dataclass(frozen=True)
class TerminalMetrics:
    """End-of-run summary."""

    miss_distance: float
    impact_angle_error: float
    total_cost: float
    flight_time: float
    peak_accel: float


CommandFn = Callable[[LinearGuidanceState], float]


def scenario_weight(sc: Scenario) -> WeightSpec:
    """Build the scenario's WeightSpec on [0, resolved tf]."""
    return family_weight(sc.weight_family, 0.0, sc.resolved_tf, sc.weight_params)


def linear_state_from_nonlinear(
    missile_xy: Sequence[float],
    gamma_m: float,
    target_xy: Sequence[float],
    gamma_f: float,
    v_m: float,
) -> LinearGuidanceState:
    """Map inertial geometry to the lateral guidance state.

    LOS angle from geometry, tgo = range / V, then the angle map
    y = V tgo (gamma_f - sigma), v = V (gamma_M - gamma_f).

    Raises:
        SingularGeometryError: zero range.
    """
    dx = target_xy[0] - missile_xy[0]
    dy = target_xy[1] - missile_xy[1]
    rng = math.hypot(dx, dy)
    if rng == 0.0:
        raise SingularGeometryError("missile and target are coincident")
    sigma = math.atan2(dy, dx)
    tgo = rng / v_m
    return LinearGuidanceState(
        y=v_m * tgo * (gamma_f - sigma), v=v_m * (gamma_m - gamma_f), tgo=tgo
    )


def initial_linear_state(sc: Scenario) -> LinearGuidanceState:
    """Lateral state at t = 0 implied by the scenario geometry.

    Linear mode pins tgo to tf (the linearization assumes range = V tgo);
    nonlinear mode uses the range/speed estimate.
    """
    if sc.kinematics == "linear":
        dx = sc.target_pos[0] - sc.missile_pos[0]
        dy = sc.target_pos[1] - sc.missile_pos[1]
        sigma0 = math.atan2(dy, dx)
        tgo0 = sc.resolved_tf
        return LinearGuidanceState(
            y=sc.v_m * tgo0 * (sc.gamma_f - sigma0),
            v=sc.v_m * (sc.gamma_m0 - sc.gamma_f),
            tgo=tgo0,
        )
    return linear_state_from_nonlinear(
        sc.missile_pos, sc.gamma_m0, sc.target_pos, sc.gamma_f, sc.v_m
    )


def _rk4_step(f, t: float, y: tuple, dt: float) -> tuple:
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, tuple(yi + 0.5 * dt * ki for yi, ki in zip(y, k1)))
    k3 = f(t + 0.5 * dt, tuple(yi + 0.5 * dt * ki for yi, ki in zip(y, k2)))
    k4 = f(t + dt, tuple(yi + dt * ki for yi, ki in zip(y, k3)))
    return tuple(
        yi + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
        for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
    )


def _euler_step(f, t: float, y: tuple, dt: float) -> tuple:
    k = f(t, y)
    return tuple(yi + dt * ki for yi, ki in zip(y, k))


def _stepper(sc: Scenario):
    return _rk4_step if sc.integrator == "rk4" else _euler_step


def _cost_integrand(w: WeightSpec, t: float, u: float) -> float:
    """0.5 W(t) u^2 with W = 1/inv_w, tolerant of endpoint zeros.

    inv_w is evaluated at min(t, tf) so a run overshooting the weight
    horizon keeps a defined integrand. An exact zero (allowed endpoint
    behaviour of e.g. the power family) contributes the integrand's limit
    along guided trajectories, which is 0; negative values mean the
    weight is genuinely infeasible.

    Raises:
        InfeasibleWeightError: inv_w < 0.
    """
    inv = float(w.inv_w(min(t, w.tf)))
    if inv < 0.0:
        raise InfeasibleWeightError(f"inv_w({t}) = {inv} is negative")
    if inv == 0.0:
        return 0.0
    return 0.5 * u * u / inv


def realized_cost(trajectory: Sequence[TrajectoryRecord], w: WeightSpec) -> float:
    """Trapezoidal weighted energy cost of a recorded trajectory.

    Raises:
        ValueError: empty trajectory or non-increasing times.
        InfeasibleWeightError: negative inv_w at a record time.
    """
    if not trajectory:
        raise ValueError("trajectory is empty")
    total = 0.0
    prev_t = trajectory[0].t
    prev_q = _cost_integrand(w, prev_t, trajectory[0].a_m)
    for rec in trajectory[1:]:
        if rec.t <= prev_t:
            raise ValueError(f"record times must strictly increase at t={rec.t}")
        q = _cost_integrand(w, rec.t, rec.a_m)
        total += 0.5 * (prev_q + q) * (rec.t - prev_t)
        prev_t, prev_q = rec.t, q
    return total


def simulate(
    sc: Scenario, command_override: CommandFn | None = None
) -> tuple[list[TrajectoryRecord], TerminalMetrics]:
    """Run the closed-loop engagement.

    Args:
        sc: Scenario configuration.
        command_override: Optional replacement for the optimal command,
            called with the current lateral state whenever tgo is above
            the floor (used for baselines and gain-perturbation studies).

    Returns:
        (trajectory records, terminal metrics).

    Raises:
        DivergenceError: range increased for a sustained window
            (nonlinear mode); carries the partial trajectory.
        NonFiniteStateError: integration produced non-finite state.
        InfeasibleWeightError: negative inv_w during cost accumulation.
    """
    w = scenario_weight(sc)
    if sc.kinematics == "linear":
        return _simulate_linear(sc, w, command_override)
    return _simulate_nonlinear(sc, w, command_override)


def _guided_command(
    sc: Scenario, w: WeightSpec, state: LinearGuidanceState, override: CommandFn | None
) -> float:
    if override is not None:
        return override(state)
    k = equivalent_gains(w, w.tf - state.tgo)
    return command_linear(k, state, tgo_min=sc.tgo_min)


def _simulate_linear(
    sc: Scenario, w: WeightSpec, override: CommandFn | None
) -> tuple[list[TrajectoryRecord], TerminalMetrics]:
    tf = sc.resolved_tf
    n_steps = max(1, round(tf / sc.dt))
    step = _stepper(sc)

    s0 = initial_linear_state(sc)
    y, v = s0.y, s0.v
    u_held = 0.0
    sigma = sc.gamma_f - y / (sc.v_m * tf)
    records: list[TrajectoryRecord] = []
    running = 0.0
    prev_q = 0.0
    peak = 0.0

    for k in range(n_steps + 1):
        t = k * tf / n_steps
        tgo = tf - t
        if not (math.isfinite(y) and math.isfinite(v)):
            raise NonFiniteStateError(f"non-finite state at t={t}", records)
        if tgo >= sc.tgo_min:
            try:
                u = _guided_command(sc, w, LinearGuidanceState(y, v, tgo), override)
            except HoldLastCommand:
                u = u_held
            sigma = sc.gamma_f - y / (sc.v_m * tgo)
        else:
            u = u_held
        u = clip_acceleration(u, sc.a_max)
        u_held = u
        peak = max(peak, abs(u))

        q = _cost_integrand(w, t, u)
        if records:
            running += 0.5 * (prev_q + q) * (t - records[-1].t)
        prev_q = q
        records.append(
            TrajectoryRecord(
                t=t,
                x=sc.v_m * t,
                y=y,
                gamma_m=sc.gamma_f + v / sc.v_m,
                sigma=sigma,
                tgo=tgo,
                a_m=u,
                running_cost=running,
            )
        )
        if k == n_steps:
            break
        y, v = step(lambda _t, s: (s[1], u), t, (y, v), tf / n_steps)

    metrics = TerminalMetrics(
        miss_distance=abs(y),
        impact_angle_error=v / sc.v_m,
        total_cost=running,
        flight_time=tf,
        peak_accel=peak,
    )
    return records, metrics


def _refine_closest_approach(
    ts: Sequence[float], r2s: Sequence[float]
) -> tuple[float, float]:
    """Vertex of the parabola through three (t, range^2) samples."""
    ta, tb, tc = ts
    ra, rb, rc = r2s
    curv = ra - 2.0 * rb + rc
    if curv <= 0.0:
        return tb, rb
    t_star = tb + 0.5 * (tc - tb) * (ra - rc) / curv
    t_star = min(max(t_star, ta), tc)
    s = (t_star - tb) / (tc - tb)
    r2 = rb + 0.5 * s * (rc - ra) + 0.5 * s * s * curv
    return t_star, max(r2, 0.0)


def _simulate_nonlinear(
    sc: Scenario, w: WeightSpec, override: CommandFn | None
) -> tuple[list[TrajectoryRecord], TerminalMetrics]:
    tf = sc.resolved_tf
    dt = sc.dt
    step = _stepper(sc)
    tx, ty = sc.target_pos
    x, y, gamma = sc.missile_pos[0], sc.missile_pos[1], sc.gamma_m0
    v_m = sc.v_m

    r0 = sc.initial_range
    near_threshold = max(100.0 * v_m * dt, 1e-3 * r0)
    t_cap = 3.0 * tf
    span = w.span
    # Within one step of impact the LOS angle is about to flip; commanding
    # there only injects a spike, so the hold window is at least one step.
    tgo_floor = max(sc.tgo_min, dt)

    records: list[TrajectoryRecord] = []
    running = 0.0
    prev_q = 0.0
    peak = 0.0
    u_held = 0.0
    min_range = math.inf
    t_at_min = 0.0
    r2_history: list[tuple[float, float]] = []

    def append_record(u: float, sigma: float, tgo: float) -> None:
        nonlocal running, prev_q, peak
        peak = max(peak, abs(u))
        q = _cost_integrand(w, t, u)
        if records:
            running += 0.5 * (prev_q + q) * (t - records[-1].t)
        prev_q = q
        records.append(
            TrajectoryRecord(
                t=t,
                x=x,
                y=y,
                gamma_m=gamma,
                sigma=sigma,
                tgo=tgo,
                a_m=u,
                running_cost=running,
            )
        )

    t = 0.0
    while True:
        dx, dy = tx - x, ty - y
        rng = math.hypot(dx, dy)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(gamma)):
            raise NonFiniteStateError(f"non-finite state at t={t}", records)
        if rng == 0.0:
            raise SingularGeometryError(f"zero range at t={t}")
        sigma = math.atan2(dy, dx)
        tgo = min(rng / v_m, span * (1.0 - 1e-12))

        r2_history.append((t, rng * rng))
        if len(r2_history) > 3:
            r2_history.pop(0)
        if rng < min_range:
            min_range = rng
            t_at_min = t

        # Termination checks run before a fresh command is computed so the
        # sample just past closest approach never re-commands off a flipped
        # LOS angle.
        if len(r2_history) == 3:
            (_, ra), (_, rb), (_, rc) = r2_history
            if ra >= rb < rc and math.sqrt(rb) <= near_threshold:
                append_record(u_held, sigma, tgo)
                break
        if t - t_at_min > 0.25 * tf and rng > 1.05 * min_range:
            append_record(u_held, sigma, tgo)
            raise DivergenceError(
                f"range increasing since t={t_at_min:.6g} (now {rng:.6g} m, "
                f"min {min_range:.6g} m)",
                records,
            )
        if t > t_cap:
            append_record(u_held, sigma, tgo)
            raise DivergenceError(
                f"no interception by t={t:.6g} (cap {t_cap:.6g})", records
            )

        if tgo >= tgo_floor:
            state = LinearGuidanceState(
                y=v_m * tgo * (sc.gamma_f - sigma),
                v=v_m * (gamma - sc.gamma_f),
                tgo=tgo,
            )
            try:
                u = _guided_command(sc, w, state, override)
            except HoldLastCommand:
                u = u_held
        else:
            u = u_held
        u = clip_acceleration(u, sc.a_max)
        u_held = u
        append_record(u, sigma, tgo)

        x, y, gamma = step(
            lambda _t, s: (v_m * math.cos(s[2]), v_m * math.sin(s[2]), u / v_m),
            t,
            (x, y, gamma),
            dt,
        )
        t += dt

    ts = [p[0] for p in r2_history]
    r2s = [p[1] for p in r2_history]
    t_star, r2_star = _refine_closest_approach(ts, r2s)
    gamma_star = _interp_gamma(records, t_star)

    metrics = TerminalMetrics(
        miss_distance=math.sqrt(r2_star),
        impact_angle_error=gamma_star - sc.gamma_f,
        total_cost=running,
        flight_time=t_star,
        peak_accel=peak,
    )
    return records, metrics


def _interp_gamma(records: Sequence[TrajectoryRecord], t_star: float) -> float:
    for a, b in zip(records[:-1], records[1:]):
        if a.t <= t_star <= b.t:
            frac = (t_star - a.t) / (b.t - a.t)
            return a.gamma_m + frac * (b.gamma_m - a.gamma_m)
    return records[-1].gamma_m


def trajectory_csv_lines(records: Iterable[TrajectoryRecord]) -> list[str]:
    """Format records as CSV lines (12 significant digits)."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                format(v, ".12g")
                for v in (r.t, r.x, r.y, r.gamma_m, r.sigma, r.tgo, r.a_m, r.running_cost)
            )
        )
    return lines


def write_trajectory_csv(records: Iterable[TrajectoryRecord], fp: TextIO) -> None:
    fp.write("\n".join(trajectory_csv_lines(records)) + "\n")
