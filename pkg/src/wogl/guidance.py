"""Acceleration commands from the equivalent gains.

Three algebraically equivalent forms of the same weighted optimal command
are provided, plus a proportional-navigation baseline without the impact
angle constraint:

- command_linear:          -k1 y/tgo^2 - k2 v/tgo
- command_angles:          -(V_M/tgo) [-k1 sigma + k2 gamma_M + (k1-k2) gamma_f]
- command_predictive_form: k1/tgo^2 (y_f - y - v tgo) - (k1-k2)/tgo (v_f - v)

Sign conventions: y and v are the lateral distance and velocity
perpendicular to the desired impact course, sigma_bar = -y/(V_M tgo).

The command is singular at tgo = 0. Below a configurable floor every
command function raises HoldLastCommand so the caller (normally the
simulator loop) can freeze the previous command instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .gains import GainPair

TGO_FLOOR_DEFAULT = 1e-3  # seconds


class HoldLastCommand(Exception):
    """Signal: tgo is below the floor, keep flying the previous command."""

    def __init__(self, tgo: float, floor: float):
        super().__init__(f"tgo={tgo} below floor {floor}; hold last command")
        self.tgo = tgo
        self.floor = floor


@dataclass(frozen=True)
class LinearGuidanceState:
    """Lateral state perpendicular to the desired impact course."""

    y: float    # lateral distance [m]
    v: float    # lateral velocity [m/s]
    tgo: float  # time-to-go [s]

    def __post_init__(self):
        if not (self.tgo >= 0.0 and math.isfinite(self.tgo)):
            raise ValueError(f"tgo must be finite and >= 0, got {self.tgo}")


@dataclass(frozen=True)
class AngleGuidanceState:
    """Engagement state expressed through LOS and flight-path angles."""

    sigma: float    # line-of-sight angle [rad]
    gamma_m: float  # flight-path angle [rad]
    gamma_f: float  # desired impact angle [rad]
    v_m: float      # missile speed [m/s]
    tgo: float      # time-to-go [s]

    def __post_init__(self):
        if not self.v_m > 0.0:
            raise ValueError(f"missile speed must be positive, got {self.v_m}")
        if not (self.tgo >= 0.0 and math.isfinite(self.tgo)):
            raise ValueError(f"tgo must be finite and >= 0, got {self.tgo}")


def linear_state_from_angles(s: AngleGuidanceState) -> LinearGuidanceState:
    """Map the angle state to the lateral state.

    y = V_M tgo (gamma_f - sigma), v = V_M (gamma_M - gamma_f).
    """
    return LinearGuidanceState(
        y=s.v_m * s.tgo * (s.gamma_f - s.sigma),
        v=s.v_m * (s.gamma_m - s.gamma_f),
        tgo=s.tgo,
    )


def _check_floor(tgo: float, tgo_min: float) -> None:
    if tgo < tgo_min:
        raise HoldLastCommand(tgo, tgo_min)


def command_linear(
    k: GainPair, s: LinearGuidanceState, tgo_min: float = TGO_FLOOR_DEFAULT
) -> float:
    """Optimal command from the lateral state: -k1 y/tgo^2 - k2 v/tgo.

    Raises:
        HoldLastCommand: s.tgo below the floor.
    """
    _check_floor(s.tgo, tgo_min)
    return -k.k1 * s.y / (s.tgo * s.tgo) - k.k2 * s.v / s.tgo


def command_angles(
    k: GainPair, s: AngleGuidanceState, tgo_min: float = TGO_FLOOR_DEFAULT
) -> float:
    """Optimal command from LOS / flight-path / impact angles.

    Equivalent to command_linear on the mapped lateral state; written in
    its own angle-coefficient form so the equivalence is a real check:
    -(V_M/tgo) [-k1 sigma + k2 gamma_M + (k1 - k2) gamma_f].

    Raises:
        HoldLastCommand: s.tgo below the floor.
    """
    _check_floor(s.tgo, tgo_min)
    return -(s.v_m / s.tgo) * (
        -k.k1 * s.sigma + k.k2 * s.gamma_m + (k.k1 - k.k2) * s.gamma_f
    )


def command_predictive_form(
    k: GainPair,
    s: LinearGuidanceState,
    y_f: float = 0.0,
    v_f: float = 0.0,
    tgo_min: float = TGO_FLOOR_DEFAULT,
) -> float:
    """Command written on predicted terminal errors.

    k1/tgo^2 (y_f - y - v tgo) - (k1 - k2)/tgo (v_f - v). With
    y_f = v_f = 0 this equals command_linear. Nonzero terminal references
    are accepted, but the optimality guarantee is only claimed for zero.

    Raises:
        HoldLastCommand: s.tgo below the floor.
    """
    _check_floor(s.tgo, tgo_min)
    zem = y_f - s.y - s.v * s.tgo
    return k.k1 / (s.tgo * s.tgo) * zem - (k.k1 - k.k2) / s.tgo * (v_f - s.v)


def pn_baseline(
    s: LinearGuidanceState, nav_gain: float, tgo_min: float = TGO_FLOOR_DEFAULT
) -> float:
    """Linearized proportional navigation on zero-effort miss.

    No impact angle constraint: -N (y + v tgo)/tgo^2. Comparison baseline
    only.

    Raises:
        HoldLastCommand: s.tgo below the floor.
    """
    _check_floor(s.tgo, tgo_min)
    return -nav_gain * (s.y + s.v * s.tgo) / (s.tgo * s.tgo)


def clip_acceleration(a: float, a_max: float | None) -> float:
    """Optional symmetric saturation |a| <= a_max; a_max None means off."""
    if a_max is None:
        return a
    if a_max < 0.0:
        raise ValueError(f"a_max must be non-negative, got {a_max}")
    return max(-a_max, min(a_max, a))
