"""Weighting functions for the weighted energy cost and their feasibility.

A weighting function W(tau) multiplies the squared acceleration command in
the energy cost. Every downstream formula consumes only the inverse
W0 = 1/W, so that is what a WeightSpec stores, together with up to three
antiderivative levels of W0 (W1, W2, W3). When the full stack is supplied
the guidance gains have closed forms; otherwise callers fall back to
adaptive quadrature.

Conventions:
- Times in seconds; W0 is dimensionless.
- Antiderivatives are defined up to additive constants. The catalog
  builders anchor every level to zero at t0, which makes the power family
  with exponent 0 coincide with the uniform family exactly.
- Feasibility requires W0 > 0 and bounded on the open interval (t0, tf);
  endpoint zeros (e.g. the power family at tf) are allowed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

# Fraction of the interval by which feasibility sampling stays off the
# endpoints (endpoint behaviour is checked separately via limit probes).
ENDPOINT_INSET = 1e-9

# Central-difference step for antiderivative consistency, as a fraction of
# the interval length.
FD_STEP_FRACTION = 1e-5

# Normalized residual above which a supplied antiderivative stack is
# considered inconsistent with inv_w.
STACK_RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class WeightSpec:
    """Inverse weighting function with optional antiderivative stack.

    Attributes:
        inv_w: tau -> W0(tau) = 1/W(tau). Should accept scalars; accepting
            numpy arrays as well speeds up batch evaluation.
        t0, tf: Engagement start and final time [s].
        anti1, anti2, anti3: First/second/third antiderivatives of inv_w,
            or None when only the quadrature path is available. A partial
            stack counts as unavailable.
    """

    inv_w: Callable[[float], float]
    t0: float
    tf: float
    anti1: Callable[[float], float] | None = None
    anti2: Callable[[float], float] | None = None
    anti3: Callable[[float], float] | None = None

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.tf)):
            raise ValueError(f"interval bounds must be finite, got ({self.t0}, {self.tf})")
        if not self.tf > self.t0:
            raise ValueError(f"invalid interval: tf={self.tf} must exceed t0={self.t0}")

    @property
    def span(self) -> float:
        return self.tf - self.t0

    @property
    def has_analytic_stack(self) -> bool:
        return self.anti1 is not None and self.anti2 is not None and self.anti3 is not None


@dataclass(frozen=True)
class WeightFamily:
    """Catalog entry: a named constructor of WeightSpec instances."""

    name: str
    builder: Callable[..., WeightSpec]

    def build(self, t0: float, tf: float, **params: float) -> WeightSpec:
        return self.builder(t0, tf, **params)


def uniform_weight(t0: float, tf: float) -> WeightSpec:
    """Equal weighting of the control effort over the whole engagement.

    inv_w is identically 1; the antiderivative stack is (tau-t0)^k / k!.

    Raises:
        ValueError: non-increasing interval.
    """
    if not tf > t0:
        raise ValueError(f"invalid interval: tf={tf} must exceed t0={t0}")

    def inv_w(tau):
        return np.ones_like(np.asarray(tau, dtype=float))

    def anti1(tau):
        return np.asarray(tau, dtype=float) - t0

    def anti2(tau):
        d = np.asarray(tau, dtype=float) - t0
        return 0.5 * d * d

    def anti3(tau):
        d = np.asarray(tau, dtype=float) - t0
        return d * d * d / 6.0

    return WeightSpec(inv_w=inv_w, t0=t0, tf=tf, anti1=anti1, anti2=anti2, anti3=anti3)


def power_tgo_weight(t0: float, tf: float, n: float) -> WeightSpec:
    """Time-to-go power weighting: inv_w(tau) = (tf - tau)^n, n >= 0.

    Increases the weight on acceleration demand toward interception, which
    drives the command to zero at tf. Negative exponents are rejected:
    they make inv_w unbounded at tf, so the guidance gain would blow up.

    Raises:
        ValueError: non-increasing interval, or n < 0.
    """
    if not tf > t0:
        raise ValueError(f"invalid interval: tf={tf} must exceed t0={t0}")
    if n < 0:
        raise ValueError(f"unsupported exponent n={n}: inv_w would be unbounded at tf")
    if n == 0.0:
        return uniform_weight(t0, tf)

    s0 = tf - t0
    c1 = n + 1.0
    c2 = (n + 1.0) * (n + 2.0)
    c3 = (n + 1.0) * (n + 2.0) * (n + 3.0)
    s0_1 = s0 ** (n + 1.0)
    s0_2 = s0 ** (n + 2.0)
    s0_3 = s0 ** (n + 3.0)

    def _s(tau):
        # Clamp to the domain edge so fp dust past tf cannot produce a
        # negative base under a fractional exponent.
        return np.maximum(tf - np.asarray(tau, dtype=float), 0.0)

    def inv_w(tau):
        return _s(tau) ** n

    def anti1(tau):
        return (s0_1 - _s(tau) ** (n + 1.0)) / c1

    def anti2(tau):
        d = np.asarray(tau, dtype=float) - t0
        return s0_1 * d / c1 + (_s(tau) ** (n + 2.0) - s0_2) / c2

    def anti3(tau):
        d = np.asarray(tau, dtype=float) - t0
        return (
            s0_1 * d * d / (2.0 * c1)
            - s0_2 * d / c2
            - (_s(tau) ** (n + 3.0) - s0_3) / c3
        )

    return WeightSpec(inv_w=inv_w, t0=t0, tf=tf, anti1=anti1, anti2=anti2, anti3=anti3)


def _phi1(x):
    """expm1(x)/x, series near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    xs = np.where(small, 0.0, x)
    direct = np.divide(np.expm1(xs), xs, out=np.ones_like(xs), where=~small)
    series = 1.0 + x / 2.0 * (
        1.0 + x / 3.0 * (1.0 + x / 4.0 * (1.0 + x / 5.0 * (1.0 + x / 6.0)))
    )
    return np.where(small, series, direct)


def _phi2(x):
    """(expm1(x) - x)/x^2, series near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    xs = np.where(small, 1.0, x)
    direct = (np.expm1(xs) - xs) / (xs * xs)
    series = 0.5 + x / 6.0 * (
        1.0 + x / 4.0 * (1.0 + x / 5.0 * (1.0 + x / 6.0 * (1.0 + x / 7.0)))
    )
    return np.where(small, series, direct)


def _phi3(x):
    """(expm1(x) - x - x^2/2)/x^3, series near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    xs = np.where(small, 1.0, x)
    direct = (np.expm1(xs) - xs - 0.5 * xs * xs) / (xs * xs * xs)
    series = 1.0 / 6.0 + x / 24.0 * (
        1.0 + x / 5.0 * (1.0 + x / 6.0 * (1.0 + x / 7.0 * (1.0 + x / 8.0)))
    )
    return np.where(small, series, direct)


def exponential_weight(t0: float, tf: float, a: float) -> WeightSpec:
    """Exponential weighting: inv_w(tau) = exp(-a (tf - tau)).

    a > 0 concentrates effort late, a < 0 early, a = 0 reduces to the
    uniform weight exactly. The antiderivative stack is anchored at tf
    (where the values stay of the same order as the local inverse weight)
    and evaluated through expm1-based forms, so it remains accurate for
    any finite a including a -> 0.

    Raises:
        ValueError: non-increasing interval, or non-finite a.
    """
    if not tf > t0:
        raise ValueError(f"invalid interval: tf={tf} must exceed t0={t0}")
    if not math.isfinite(a):
        raise ValueError(f"rate parameter must be finite, got {a}")
    if a == 0.0:
        return uniform_weight(t0, tf)

    def _s(tau):
        return tf - np.asarray(tau, dtype=float)

    def inv_w(tau):
        return np.exp(-a * _s(tau))

    def anti1(tau):
        s = _s(tau)
        return -s * _phi1(-a * s)

    def anti2(tau):
        s = _s(tau)
        return s * s * _phi2(-a * s)

    def anti3(tau):
        s = _s(tau)
        return -s * s * s * _phi3(-a * s)

    return WeightSpec(inv_w=inv_w, t0=t0, tf=tf, anti1=anti1, anti2=anti2, anti3=anti3)


FAMILIES: dict[str, WeightFamily] = {
    "uniform": WeightFamily("uniform", uniform_weight),
    "power_tgo": WeightFamily("power_tgo", power_tgo_weight),
    "exponential": WeightFamily("exponential", exponential_weight),
}


def register_family(name: str, builder: Callable[..., WeightSpec]) -> WeightFamily:
    """Register a custom weight family for use in scenario configs."""
    if name in FAMILIES:
        raise ValueError(f"weight family {name!r} already registered")
    family = WeightFamily(name, builder)
    FAMILIES[name] = family
    return family


def family_weight(
    name: str, t0: float, tf: float, params: Mapping[str, float] | None = None
) -> WeightSpec:
    """Build a WeightSpec from a family name and parameter mapping."""
    try:
        family = FAMILIES[name]
    except KeyError:
        known = ", ".join(sorted(FAMILIES))
        raise ValueError(f"unknown weight family {name!r} (known: {known})") from None
    return family.build(t0, tf, **dict(params or {}))


def eval_inv_w(w: WeightSpec, taus: np.ndarray) -> np.ndarray:
    """Evaluate inv_w on an array, falling back to per-element calls."""
    taus = np.asarray(taus, dtype=float)
    try:
        out = np.asarray(w.inv_w(taus), dtype=float)
    except (TypeError, ValueError):
        return np.array([float(w.inv_w(float(t))) for t in taus.ravel()]).reshape(taus.shape)
    if out.shape != taus.shape:
        out = np.broadcast_to(out, taus.shape).copy()
    return out


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of sampling-based feasibility checks on a WeightSpec.

    Violations are reported here rather than raised so callers can decide
    how to react.

    Attributes:
        samples: Number of grid samples used.
        positive: inv_w > 0 at every interior sample.
        bounded: inv_w finite at every sample and no divergence detected
            when probing toward either endpoint.
        analytic_path: True when all three antiderivatives are supplied.
        stack_residuals: Max normalized central-difference residual per
            antiderivative level, or None without the analytic stack.
        min_inv_w, max_inv_w: Range of inv_w over the sample grid.
    """

    samples: int
    positive: bool
    bounded: bool
    analytic_path: bool
    stack_residuals: tuple[float, float, float] | None
    min_inv_w: float
    max_inv_w: float

    @property
    def stack_consistent(self) -> bool:
        if self.stack_residuals is None:
            return True
        return all(r <= STACK_RESIDUAL_TOL for r in self.stack_residuals)

    @property
    def feasible(self) -> bool:
        return self.positive and self.bounded and self.stack_consistent


def _diverges_toward(fn: Callable[[float], float], anchor: float, direction: float, span: float) -> bool:
    """Probe fn at shrinking offsets from an endpoint; True if it blows up.

    A bounded function plateaus as the offset shrinks (ratio -> 1); power
    divergences keep growing by roughly the offset ratio per decade.
    """
    values = []
    for k in (6, 7, 8, 9):
        v = float(fn(anchor + direction * span * 10.0 ** (-k)))
        if not math.isfinite(v):
            return True
        values.append(abs(v))
    increasing = all(values[i + 1] > values[i] for i in range(len(values) - 1))
    return increasing and values[-1] > 2.0 * values[-2]


def check_feasible(w: WeightSpec, samples: int = 128) -> FeasibilityReport:
    """Check positivity/boundedness of inv_w and antiderivative consistency.

    Samples the open interval (t0, tf) only; endpoint behaviour such as
    inv_w(tf) = 0 for power weights does not count against feasibility,
    but divergence toward an endpoint does.

    Args:
        w: Weight under test.
        samples: Grid size, at least 2.

    Raises:
        ValueError: samples < 2.
    """
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")

    inset = w.span * ENDPOINT_INSET
    grid = np.linspace(w.t0 + inset, w.tf - inset, samples)
    vals = eval_inv_w(w, grid)

    finite = bool(np.all(np.isfinite(vals)))
    positive = finite and bool(np.all(vals > 0.0))
    bounded = finite
    if bounded:
        bounded = not _diverges_toward(w.inv_w, w.t0, +1.0, w.span)
    if bounded:
        bounded = not _diverges_toward(w.inv_w, w.tf, -1.0, w.span)

    residuals = None
    if w.has_analytic_stack:
        h = w.span * FD_STEP_FRACTION
        fd_grid = np.linspace(w.t0 + 2.0 * h, w.tf - 2.0 * h, samples)
        # Third derivatives of the stack levels are inv_w'', inv_w', inv_w;
        # estimate them so the residual test knows its own truncation floor.
        iw_m = eval_inv_w(w, fd_grid - h)
        iw_0 = eval_inv_w(w, fd_grid)
        iw_p = eval_inv_w(w, fd_grid + h)
        d1 = np.abs(iw_p - iw_m) / (2.0 * h)
        d2 = np.abs(iw_p - 2.0 * iw_0 + iw_m) / (h * h)
        residuals = (
            _max_residual(w.anti1, w.inv_w, fd_grid, h, d2),
            _max_residual(w.anti2, w.anti1, fd_grid, h, d1),
            _max_residual(w.anti3, w.anti2, fd_grid, h, np.abs(iw_0)),
        )

    finite_vals = vals[np.isfinite(vals)]
    lo = float(finite_vals.min()) if finite_vals.size else math.nan
    hi = float(finite_vals.max()) if finite_vals.size else math.nan
    return FeasibilityReport(
        samples=samples,
        positive=positive,
        bounded=bounded,
        analytic_path=w.has_analytic_stack,
        stack_residuals=residuals,
        min_inv_w=lo,
        max_inv_w=hi,
    )


def _max_residual(upper, lower, grid: np.ndarray, h: float, scale3: np.ndarray) -> float:
    """Central-difference residual of d(upper)/dtau against lower.

    Normalized by (1 + |lower|) plus the finite-difference method's own
    floor: truncation h^2 |upper'''| / 6 (scale3 estimates |upper'''|) and
    rounding eps |upper| / h, both expressed in tolerance units so values
    <= STACK_RESIDUAL_TOL mean "consistent to the achievable precision".
    """
    eps = np.finfo(float).eps
    worst = 0.0
    for tau, s3 in zip(grid, np.broadcast_to(scale3, grid.shape)):
        up = float(upper(tau + h))
        dn = float(upper(tau - h))
        fd = (up - dn) / (2.0 * h)
        ref = float(lower(tau))
        floor = 4.0 * (
            h * h * s3 / 6.0 + eps * max(abs(up), abs(dn)) / h
        ) / STACK_RESIDUAL_TOL
        worst = max(worst, abs(fd - ref) / (1.0 + abs(ref) + floor))
    return worst
