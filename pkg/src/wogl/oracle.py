"""Independent optimality checks for the weighted guidance law.

Two routes to the same minimum are implemented so they can arbitrate each
other:

1. The Cauchy-Schwarz route: combining the two terminal constraints with
   a multiplier lambda turns the weighted energy cost into a family of
   lower bounds; the bound is tight for a command proportional to
   (h1 - lambda h2) inv_w, and maximizing over lambda yields both the
   open-loop optimal command and the minimum cost in closed form.

2. A brute-force discrete oracle: zero-order-hold discretization of the
   double integrator with the exact transition matrix, minimum weighted
   quadratic cost subject to the two terminal constraints, solved as a
   weighted least-norm problem via a 2x2 Lagrange system. Its error is
   purely from control discretization and vanishes as steps grow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gains import DegenerateMomentsError, MomentTriple, gram_determinant
from .guidance import LinearGuidanceState
from .weighting import WeightSpec, eval_inv_w


@dataclass(frozen=True)
class BoundaryData:
    """Terminal-constraint data for the remaining interval [t, tf].

    f1 is the zero-effort miss (y + tgo v), f2 the lateral velocity. The
    kernels h1(tau) = -(tf - tau) and h2(tau) = -1 weight the command's
    influence on the two terminal states.
    """

    f1: float
    f2: float
    tf: float

    @classmethod
    def from_state(cls, s: LinearGuidanceState, tf: float) -> "BoundaryData":
        return cls(f1=s.y + s.tgo * s.v, f2=s.v, tf=tf)

    def h1(self, tau):
        return -(self.tf - np.asarray(tau, dtype=float))

    def h2(self, tau):
        return -np.ones_like(np.asarray(tau, dtype=float))


@dataclass(frozen=True)
class SchwarzSolution:
    """Closed-form optimum of the constrained weighted energy problem.

    Attributes:
        lambda_star: Multiplier making the Schwarz bound tight; nan when
            its denominator f1 g2 - f2 g12 vanishes (the cost is still
            well defined through the quadratic form).
        k_scale: Command scale; the optimal command is
            k_scale (h1 - lambda_star h2) inv_w.
        j_min: Minimum cost.
        lambda_denominator: f1 g2 - f2 g12, recorded so callers can see
            whether lambda_star was formed.
    """

    lambda_star: float
    k_scale: float
    j_min: float
    lambda_denominator: float


def state_transition(tgo: float) -> np.ndarray:
    """Transition matrix of the double integrator over a horizon tgo."""
    if tgo < 0.0:
        raise ValueError(f"tgo must be >= 0, got {tgo}")
    return np.array([[1.0, tgo], [0.0, 1.0]])


def cost_at_lambda(bd: BoundaryData, m: MomentTriple, lam: float) -> float:
    """Schwarz lower bound on the cost for a given multiplier lambda.

    (f1 - lam f2)^2 / (2 (g1 - 2 lam g12 + lam^2 g2)); its maximum over
    lam equals the minimum cost.
    """
    num = bd.f1 - lam * bd.f2
    den = m.g1 - 2.0 * lam * m.g12 + lam * lam * m.g2
    return num * num / (2.0 * den)


def schwarz_cost(bd: BoundaryData, m: MomentTriple) -> SchwarzSolution:
    """Optimal multiplier, command scale, and minimum cost.

    The minimum cost is evaluated through the constraint-Gram quadratic
    form (g2 f1^2 - 2 g12 f1 f2 + g1 f2^2) / (2 det), which equals the
    multiplier expression in the generic case and remains valid when the
    multiplier's denominator vanishes.

    Raises:
        DegenerateMomentsError: non-positive Gram determinant.
    """
    det = gram_determinant(m)
    if det <= 0.0:
        raise DegenerateMomentsError(f"gram determinant {det} is not positive")
    f1, f2 = bd.f1, bd.f2
    denom = f1 * m.g2 - f2 * m.g12
    if denom != 0.0:
        lambda_star = (f1 * m.g12 - f2 * m.g1) / denom
        j_min = cost_at_lambda(bd, m, lambda_star)
    else:
        lambda_star = math.nan
        j_min = (m.g2 * f1 * f1 - 2.0 * m.g12 * f1 * f2 + m.g1 * f2 * f2) / (2.0 * det)
    k_scale = denom / det
    return SchwarzSolution(
        lambda_star=lambda_star,
        k_scale=k_scale,
        j_min=j_min,
        lambda_denominator=denom,
    )


def schwarz_command(
    bd: BoundaryData, m: MomentTriple, w: WeightSpec, t: float
) -> Callable[[float], float]:
    """Open-loop optimal command over [t, tf) as a function of tau.

    u(tau) = [f1 h1 g2 - g12 (f2 h1 + f1 h2) + f2 h2 g1] inv_w(tau) / det.
    The g12 cross terms pair f1 with h2 and f2 with h1; this grouping is
    the one consistent with both the feedback-gain reduction and the
    discrete oracle. At tau = t the value equals the state-feedback
    command.

    Raises:
        DegenerateMomentsError: non-positive Gram determinant.
        ValueError: t outside [t0, tf).
    """
    det = gram_determinant(m)
    if det <= 0.0:
        raise DegenerateMomentsError(f"gram determinant {det} is not positive")
    if not w.t0 <= t < w.tf:
        raise ValueError(f"evaluation time {t} outside [{w.t0}, {w.tf})")
    f1, f2 = bd.f1, bd.f2
    g1, g12, g2 = m.g1, m.g12, m.g2

    def u(tau):
        h1 = bd.h1(tau)
        h2 = bd.h2(tau)
        num = f1 * h1 * g2 - g12 * (f2 * h1 + f1 * h2) + f2 * h2 * g1
        return num * np.asarray(w.inv_w(tau), dtype=float) / det

    return u


def discrete_constraint_system(
    state: LinearGuidanceState, w: WeightSpec, steps: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Discretize the terminal-constraint problem with exact ZOH dynamics.

    Each step's constant command contributes its column of the 2 x N
    constraint matrix; with midpoint times tau_k the exact contribution
    is dt [tf - tau_k, 1]^T. Returns (B, tau_mid, d, dt) where d holds the
    per-step cost weights W(tau_k) dt.
    """
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    if state.tgo <= 0.0:
        raise ValueError(f"tgo must be positive, got {state.tgo}")
    t = w.tf - state.tgo
    if t < w.t0 - 1e-12 * w.span:
        raise ValueError(f"state horizon tgo={state.tgo} exceeds weight domain {w.span}")
    dt = state.tgo / steps
    tau = t + (np.arange(steps) + 0.5) * dt
    inv_w = eval_inv_w(w, tau)
    if np.any(inv_w <= 0.0) or not np.all(np.isfinite(inv_w)):
        raise ValueError("inv_w must be positive and finite at all midpoint times")
    b = np.vstack([dt * (w.tf - tau), np.full(steps, dt)])
    d = dt / inv_w
    return b, tau, d, dt


def discrete_optimal(
    state: LinearGuidanceState, w: WeightSpec, steps: int
) -> tuple[np.ndarray, float]:
    """Minimum weighted-cost ZOH command sequence hitting both constraints.

    Minimizes 0.5 sum W(tau_k) u_k^2 dt subject to the exact discrete
    transition ending at the origin, via Lagrange multipliers on the 2x2
    constraint Gram system. Returns (command sequence, cost).

    Raises:
        DegenerateMomentsError: singular constraint Gram matrix (cannot
            occur for feasible weights).
        ValueError: bad steps/tgo or infeasible weight values.
    """
    b, _, d, _ = discrete_constraint_system(state, w, steps)
    c = -np.array([state.y + state.tgo * state.v, state.v])
    bd_inv = b / d
    gram = bd_inv @ b.T
    try:
        mu = np.linalg.solve(gram, c)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMomentsError(f"singular constraint Gram matrix: {gram}") from exc
    u = (b.T @ mu) / d
    cost = 0.5 * float(np.dot(d, u * u))
    return u, cost


def sequence_cost(u: np.ndarray, state: LinearGuidanceState, w: WeightSpec) -> float:
    """Weighted cost of a ZOH command sequence on the state's horizon."""
    u = np.asarray(u, dtype=float)
    _, _, d, _ = discrete_constraint_system(state, w, len(u))
    return 0.5 * float(np.dot(d, u * u))
