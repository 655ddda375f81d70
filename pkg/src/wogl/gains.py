"""Moment integrals of the inverse weighting and the equivalent gains.

The guidance command is a state feedback -k1 y/tgo^2 - k2 v/tgo whose
gains are built from three weighted moments of the remaining interval:

    g1  = integral_t^tf (tf - tau)^2 inv_w(tau) dtau
    g12 = integral_t^tf (tf - tau)   inv_w(tau) dtau
    g2  = integral_t^tf              inv_w(tau) dtau

With the antiderivative stack W1, W2, W3 of inv_w these reduce by
integration by parts to

    g1  = -tgo^2 W1(t) - 2 tgo W2(t) + 2 (W3(tf) - W3(t))
    g12 = -tgo W1(t) + W2(tf) - W2(t)
    g2  = W1(tf) - W1(t)

which are invariant to the integration constants of any consistent stack
(the boundary terms at tf vanish through the (tf - tau) factors). Without
a stack, the defining integrals are evaluated by adaptive quadrature.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from .quadrature import integrate
from .weighting import WeightSpec

_EPS = sys.float_info.epsilon


class AnalyticPathUnavailableError(ValueError):
    """The WeightSpec lacks the antiderivative stack the caller needs."""


class DegenerateMomentsError(RuntimeError):
    """g1 g2 - g12^2 <= 0: infeasible or numerically broken weighting."""


@dataclass(frozen=True)
class MomentTriple:
    """Weighted moments over [t, tf]; all positive for tgo > 0."""

    g1: float
    g12: float
    g2: float


@dataclass(frozen=True)
class GainPair:
    """Equivalent guidance gains at a given time-to-go.

    Both gains are dimensionless; for the uniform weight they are exactly
    (6, 4) and for the time-to-go power family ((n+3)(n+2), 2(n+2)),
    independent of tgo.
    """

    k1: float
    k2: float
    tgo: float


def _check_domain(w: WeightSpec, t: float) -> None:
    if not w.t0 <= t < w.tf:
        raise ValueError(f"evaluation time {t} outside [{w.t0}, {w.tf})")


def _analytic_with_condition(w: WeightSpec, t: float) -> tuple[MomentTriple, float]:
    """Moments by integration by parts plus a cancellation estimate.

    The combinations subtract antiderivative values of magnitude up to
    span^k while the result shrinks like tgo^k, so the relative rounding
    error grows like eps * (span/tgo)^k. The returned condition number is
    eps * (largest partial magnitude / result), maximized over the three
    moments.
    """
    tgo = w.tf - t
    w1_t = float(w.anti1(t))
    w2_t = float(w.anti2(t))
    w1_f = float(w.anti1(w.tf))
    w2_f = float(w.anti2(w.tf))
    w3_t = float(w.anti3(t))
    w3_f = float(w.anti3(w.tf))

    g2 = w1_f - w1_t
    g12 = -tgo * w1_t + w2_f - w2_t
    g1 = -tgo * tgo * w1_t - 2.0 * tgo * w2_t + 2.0 * (w3_f - w3_t)

    m2 = max(abs(w1_f), abs(w1_t))
    m12 = max(abs(tgo * w1_t), abs(w2_f), abs(w2_t))
    m1 = max(abs(tgo * tgo * w1_t), 2.0 * abs(tgo * w2_t), 2.0 * abs(w3_f), 2.0 * abs(w3_t))
    tiny = 1e-300
    condition = _EPS * max(
        m2 / max(abs(g2), tiny),
        m12 / max(abs(g12), tiny),
        m1 / max(abs(g1), tiny),
    )
    return MomentTriple(g1=g1, g12=g12, g2=g2), condition


def moments_analytic(w: WeightSpec, t: float) -> MomentTriple:
    """Closed-form moments via the antiderivative stack.

    Raises:
        AnalyticPathUnavailableError: stack not fully supplied.
        ValueError: t outside [t0, tf).
    """
    if not w.has_analytic_stack:
        raise AnalyticPathUnavailableError(
            "weight has no antiderivative stack; use moments_quadrature"
        )
    _check_domain(w, t)
    m, _ = _analytic_with_condition(w, t)
    return m


def moments_quadrature(w: WeightSpec, t: float, tol: float = 1e-10) -> MomentTriple:
    """Moments from the defining integrals by adaptive quadrature.

    Independent of the analytic path; the two agree for any consistent
    antiderivative stack.

    Raises:
        ValueError: t outside [t0, tf) or non-positive tol.
        QuadratureError: refinement budget exhausted (carries the worst
            panel residual).
    """
    _check_domain(w, t)
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    tf = w.tf

    def f1(tau: float) -> float:
        s = tf - tau
        return s * s * float(w.inv_w(tau))

    def f12(tau: float) -> float:
        return (tf - tau) * float(w.inv_w(tau))

    def f2(tau: float) -> float:
        return float(w.inv_w(tau))

    return MomentTriple(
        g1=integrate(f1, t, tf, rel_tol=tol),
        g12=integrate(f12, t, tf, rel_tol=tol),
        g2=integrate(f2, t, tf, rel_tol=tol),
    )


def gram_determinant(m: MomentTriple) -> float:
    """g1 g2 - g12^2; strictly positive for any feasible weight and tgo > 0.

    Callers must treat non-positive values as fatal.
    """
    return m.g1 * m.g2 - m.g12 * m.g12


def gain_pair(m: MomentTriple, w_inv_at_t: float, tgo: float) -> GainPair:
    """Equivalent gains from moments and the inverse weight at the current time.

    Args:
        m: Moments over the remaining interval.
        w_inv_at_t: inv_w evaluated at the current time; must be positive.
        tgo: Time-to-go, must be positive.

    Raises:
        ValueError: non-positive tgo or w_inv_at_t.
        DegenerateMomentsError: non-positive Gram determinant or
            non-finite gains.
    """
    if tgo <= 0.0:
        raise ValueError(f"tgo must be positive, got {tgo}")
    if w_inv_at_t <= 0.0:
        raise ValueError(f"w_inv_at_t must be positive, got {w_inv_at_t}")
    det = gram_determinant(m)
    if det <= 0.0:
        raise DegenerateMomentsError(
            f"gram determinant {det} is not positive for moments {m}"
        )
    tgo2 = tgo * tgo
    tgo3 = tgo2 * tgo
    k1 = (m.g2 * tgo3 - m.g12 * tgo2) / det * w_inv_at_t
    k2 = (m.g1 * tgo + m.g2 * tgo3 - 2.0 * m.g12 * tgo2) / det * w_inv_at_t
    if not (math.isfinite(k1) and math.isfinite(k2)):
        raise DegenerateMomentsError(f"non-finite gains ({k1}, {k2}) from moments {m}")
    return GainPair(k1=k1, k2=k2, tgo=tgo)


# Above this cancellation level the closed-form moments are handed over
# to quadrature (short remaining windows of a long engagement).
_CONDITION_LIMIT = 1e-12


def moments_auto(w: WeightSpec, t: float, quad_tol: float = 1e-10) -> MomentTriple:
    """Moments via whichever path is trustworthy at this time.

    Prefers the closed forms, but they lose digits as tgo shrinks
    relative to the weight's interval; once the estimated cancellation
    exceeds 1e-12 (or the Gram determinant degenerates) the defining
    integrals take over.
    """
    if w.has_analytic_stack:
        _check_domain(w, t)
        m, condition = _analytic_with_condition(w, t)
        if condition <= _CONDITION_LIMIT and gram_determinant(m) > 0.0:
            return m
    return moments_quadrature(w, t, tol=quad_tol)


def equivalent_gains(w: WeightSpec, t: float, quad_tol: float = 1e-10) -> GainPair:
    """Gains at time t, from moments_auto over the remaining interval."""
    m = moments_auto(w, t, quad_tol=quad_tol)
    return gain_pair(m, float(w.inv_w(t)), w.tf - t)
