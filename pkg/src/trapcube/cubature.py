"""Product trapezoid cubature over a square and its two one-sided
modifications.

The plain product trapezoid rule ``C_n`` is corrected with univariate
trace integrals along grid lines to produce two rules with one-signed
error on integrands whose mixed derivative ``D22 f = d^4 f / dx^2 dy^2``
does not change sign:

* ``s_minus`` corrects with the two mid-lines of the square and
  overshoots the integral when ``D22 f >= 0`` (its error constant is
  negative);
* ``s_plus`` corrects with the four boundary edges and undershoots in
  the same situation (positive error constant).

Together they bracket the true integral, which is what
:func:`enclosure` returns.  An integrand declares the sign of its mixed
derivative; the library never tries to detect it by sampling, since
sampling cannot certify a sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from .univariate import Interval, apply, trace_integral, trapezium_rule

__all__ = [
    "TRACE_IDS",
    "Integrand2D",
    "CubatureEstimate",
    "Enclosure",
    "product_trapezoid",
    "s_minus",
    "s_plus",
    "error_constant",
    "enclosure",
    "blending_form_value",
]

#: Identifiers of the six univariate traces of a bivariate integrand:
#: restrictions to the four edges of the square and to its two mid-lines.
TRACE_IDS = ("left", "right", "down", "up", "vertical-mid", "horizontal-mid")

_D22_SIGNS = ("nonnegative", "nonpositive")


@dataclass(frozen=True)
class Integrand2D:
    """A bivariate integrand on the square, with optional certificates.

    Parameters
    ----------
    f : callable
        The integrand, evaluated as ``f(x, y)``.
    d22_sign : {'nonnegative', 'nonpositive'}, optional
        Declared sign of the mixed derivative ``D22 f`` on the open
        square.  Required by every operation that claims one-sidedness
        (enclosures, certified refinement bounds).  The declaration is
        trusted, not verified.
    exact_traces : mapping, optional
        Map from a trace id in :data:`TRACE_IDS` to a supplier returning
        the exact value of that trace integral for a given interval.
        Traces without a supplier fall back to adaptive Romberg
        integration, whose tolerance then enters the error budget.
    """

    f: Callable[[float, float], float]
    d22_sign: Optional[str] = None
    exact_traces: Optional[Mapping[str, Callable[[Interval], float]]] = None

    def __post_init__(self) -> None:
        if self.d22_sign is not None and self.d22_sign not in _D22_SIGNS:
            raise ValueError(
                f"d22_sign must be one of {_D22_SIGNS}, got {self.d22_sign!r}"
            )
        if self.exact_traces is not None:
            unknown = set(self.exact_traces) - set(TRACE_IDS)
            if unknown:
                raise ValueError(f"unknown trace ids: {sorted(unknown)}")


@dataclass(frozen=True)
class CubatureEstimate:
    """Value of one cubature rule application plus its metadata.

    ``trace_err_budget`` is the worst-case perturbation of ``value``
    caused by inexactly known trace integrals: each trace's Romberg
    tolerance scaled by the coefficient it enters the rule with.  It is
    zero for the plain product rule and whenever all traces are exact.
    """

    value: float
    rule: str
    n: int
    trace_err_budget: float = 0.0


@dataclass(frozen=True)
class Enclosure:
    """Certified interval bracketing the true integral.

    ``lower`` comes from the rule that undershoots and ``upper`` from
    the rule that overshoots, given the declared sign of ``D22 f``.
    ``slack`` is the trace-integral inflation applied to both ends; with
    exact traces it is zero and the bracket is sharp up to rounding.
    """

    lower: float
    upper: float
    n_lower: int
    n_upper: int
    slack: float

    def __post_init__(self) -> None:
        if not self.lower <= self.upper:
            raise ValueError(
                f"empty enclosure: lower={self.lower!r} > upper={self.upper!r}"
            )


def _trace_function(f: Callable[[float, float], float], trace_id: str, iv: Interval):
    a, b, m = iv.a, iv.b, iv.midpoint
    if trace_id == "left":
        return lambda t: f(a, t)
    if trace_id == "right":
        return lambda t: f(b, t)
    if trace_id == "down":
        return lambda t: f(t, a)
    if trace_id == "up":
        return lambda t: f(t, b)
    if trace_id == "vertical-mid":
        return lambda t: f(m, t)
    if trace_id == "horizontal-mid":
        return lambda t: f(t, m)
    raise ValueError(f"unknown trace id {trace_id!r}")


def _trace_remainder(
    F: Integrand2D, trace_id: str, iv: Interval, n: int, trace_tol: float
):
    """Trapezium remainder I[g] - Q_n[g] of one trace g, with its budget."""
    g = _trace_function(F.f, trace_id, iv)
    exact = (F.exact_traces or {}).get(trace_id)
    value, budget = trace_integral(g, iv, exact=exact, tol=trace_tol)
    q = apply(trapezium_rule(iv, n), g)
    return value - q, budget


def product_trapezoid(F: Integrand2D, iv: Interval, n: int) -> CubatureEstimate:
    """Tensor-product trapezoid value over the square iv x iv.

    Computes ``h^2 * sum'' f(x_i, y_j)`` where the double-primed sum
    halves the boundary terms (and quarters the corners).  Rows are
    summed with compensated summation and combined in fixed index
    order, so the value is deterministic.

    Raises
    ------
    ValueError
        If the integrand returns a non-finite value; the message names
        the offending grid point.
    """
    rule = trapezium_rule(iv, n)
    nodes, weights = rule.nodes, rule.weights
    f = F.f
    row_sums = []
    for x, wx in zip(nodes, weights):
        terms = []
        for y, wy in zip(nodes, weights):
            v = f(x, y)
            if not math.isfinite(v):
                raise ValueError(
                    f"integrand returned non-finite value {v!r} at grid point ({x!r}, {y!r})"
                )
            terms.append(wy * v)
        row_sums.append(wx * math.fsum(terms))
    return CubatureEstimate(value=math.fsum(row_sums), rule="product_trap", n=n)


def s_minus(
    F: Integrand2D, iv: Interval, n: int, trace_tol: float = 1e-12
) -> CubatureEstimate:
    """Mid-line corrected product trapezoid rule (the overshooting rule).

    The product value is corrected with the trapezium remainders of the
    two mid-line traces, scaled by the interval width:

        C_n[f] + (b - a) * ( (I_v - Q_n[f_v]) + (I_h - Q_n[f_h]) )

    where ``f_v(t) = f(m, t)`` and ``f_h(t) = f(t, m)`` with m the
    interval midpoint.  On integrands with ``D22 f >= 0`` the result is
    an upper bound for the true integral (a lower bound when
    ``D22 f <= 0``).
    """
    base = product_trapezoid(F, iv, n)
    rv, bv = _trace_remainder(F, "vertical-mid", iv, n, trace_tol)
    rh, bh = _trace_remainder(F, "horizontal-mid", iv, n, trace_tol)
    w = iv.width
    return CubatureEstimate(
        value=base.value + w * (rv + rh),
        rule="s_minus",
        n=n,
        trace_err_budget=w * (bv + bh),
    )


def s_plus(
    F: Integrand2D, iv: Interval, n: int, trace_tol: float = 1e-12
) -> CubatureEstimate:
    """Edge corrected product trapezoid rule (the undershooting rule).

    The product value is corrected with the trapezium remainders of the
    four boundary traces, scaled by half the interval width:

        C_n[f] + (b - a)/2 * sum over {left, right, down, up} of
                                   (I_trace - Q_n[trace])

    On integrands with ``D22 f >= 0`` the result is a lower bound for
    the true integral (an upper bound when ``D22 f <= 0``).
    """
    base = product_trapezoid(F, iv, n)
    remainders = []
    budgets = []
    for tid in ("left", "right", "down", "up"):
        r, bud = _trace_remainder(F, tid, iv, n, trace_tol)
        remainders.append(r)
        budgets.append(bud)
    w = 0.5 * iv.width
    return CubatureEstimate(
        value=base.value + w * math.fsum(remainders),
        rule="s_plus",
        n=n,
        trace_err_budget=w * math.fsum(budgets),
    )


def error_constant(rule: str, iv: Interval, n: int) -> float:
    """Exact error constant of a one-sided rule at refinement level n.

    For integrands with continuous mixed derivative the remainder
    equals this constant times ``D22 f`` evaluated at some interior
    point, so the constant's sign is the rule's direction of approach:

        c(s_minus) = -(b-a)^6 / (144 n^2) * (1 + 1/n^2)   (negative),
        c(s_plus)  =  (b-a)^6 / ( 72 n^2) * (1 - 1/(2 n^2))  (positive).
    """
    if n < 1:
        raise ValueError(f"refinement level must be >= 1, got {n}")
    w6 = iv.width**6
    if rule == "s_minus":
        return -(w6 / (144.0 * n * n)) * (1.0 + 1.0 / (n * n))
    if rule == "s_plus":
        return (w6 / (72.0 * n * n)) * (1.0 - 0.5 / (n * n))
    raise ValueError(f"unknown rule {rule!r} (expected 's_minus' or 's_plus')")


def enclosure(
    F: Integrand2D,
    iv: Interval,
    n_plus: int,
    n_minus: int,
    trace_tol: float = 1e-12,
) -> Enclosure:
    """Certified two-sided bracket of the integral of F over iv x iv.

    Requires a declared ``d22_sign``.  For a nonnegative mixed
    derivative the bracket is ``[s_plus - slack, s_minus + slack]``;
    the roles of the two rules swap for a nonpositive declaration.
    The slack is the larger of the two trace-integral budgets, applied
    to both ends, so the interval stays certified under inexact traces.
    """
    if F.d22_sign is None:
        raise ValueError("definiteness not declared: Integrand2D.d22_sign is required")
    low = s_plus(F, iv, n_plus, trace_tol)
    high = s_minus(F, iv, n_minus, trace_tol)
    if F.d22_sign == "nonpositive":
        low, high = high, low
    slack = max(low.trace_err_budget, high.trace_err_budget)
    return Enclosure(
        lower=low.value - slack,
        upper=high.value + slack,
        n_lower=low.n,
        n_upper=high.n,
        slack=slack,
    )


def _blending_interpolant_mid(f, fx, fy, fxy, iv: Interval):
    """Tangent-plane blending interpolant at the double midpoint node.

    Matches f and its first-order data along both mid-lines; its mixed
    derivative D22 vanishes identically, so it is integrated exactly by
    every rule considered here.
    """
    m = iv.midpoint

    def Bf(x: float, y: float) -> float:
        return (
            f(m, y)
            + (x - m) * fx(m, y)
            + f(x, m)
            + (y - m) * fy(x, m)
            - f(m, m)
            - (y - m) * fy(m, m)
            - (x - m) * fx(m, m)
            - (x - m) * (y - m) * fxy(m, m)
        )

    return Bf


def _blending_interpolant_edges(f, iv: Interval):
    """Bilinear-in-each-variable blending interpolant on the four edges."""
    a, b = iv.a, iv.b
    w = iv.width

    def la(t: float) -> float:
        return (b - t) / w

    def lb(t: float) -> float:
        return (t - a) / w

    def Bf(x: float, y: float) -> float:
        return (
            la(x) * f(a, y)
            + lb(x) * f(b, y)
            + la(y) * f(x, a)
            + lb(y) * f(x, b)
            - la(x) * la(y) * f(a, a)
            - la(x) * lb(y) * f(a, b)
            - lb(x) * la(y) * f(b, a)
            - lb(x) * lb(y) * f(b, b)
        )

    return Bf


def blending_form_value(
    F: Integrand2D,
    iv: Interval,
    n: int,
    rule: str,
    trace_tol: float = 1e-12,
    fx: Optional[Callable[[float, float], float]] = None,
    fy: Optional[Callable[[float, float], float]] = None,
    fxy: Optional[Callable[[float, float], float]] = None,
) -> float:
    """Rule value recomputed through its construction route.

    Both one-sided rules arise by the scheme

        S_n[f] = I[Bf] + C_n[f] - C_n[Bf]

    with Bf a blending interpolant of f (a function whose mixed
    derivative vanishes): the double-midpoint-node interpolant for
    's_minus', the four-edge interpolant for 's_plus'.  This evaluator
    builds Bf pointwise, which exercises the cancellation of the
    interpolant's derivative terms numerically instead of assuming it,
    and serves as an independent cross-check of :func:`s_minus` and
    :func:`s_plus`.

    The midpoint-node interpolant carries first-order data, so the
    's_minus' route requires the partial derivatives ``fx``, ``fy``
    and ``fxy`` of the integrand.  Trace integrals are obtained through
    the same :func:`trace_integral` path as the direct rules, so the
    two routes share identical trace values.
    """
    f = F.f
    if rule == "s_minus":
        if fx is None or fy is None or fxy is None:
            raise ValueError(
                "the s_minus construction route needs fx, fy and fxy callables"
            )
        iv_v, bv = trace_integral(
            _trace_function(f, "vertical-mid", iv),
            iv,
            exact=(F.exact_traces or {}).get("vertical-mid"),
            tol=trace_tol,
        )
        iv_h, bh = trace_integral(
            _trace_function(f, "horizontal-mid", iv),
            iv,
            exact=(F.exact_traces or {}).get("horizontal-mid"),
            tol=trace_tol,
        )
        m = iv.midpoint
        w = iv.width
        integral_bf = w * (iv_v + iv_h) - w * w * f(m, m)
        Bf = _blending_interpolant_mid(f, fx, fy, fxy, iv)
    elif rule == "s_plus":
        edge_integrals = []
        for tid in ("left", "right", "down", "up"):
            val, _ = trace_integral(
                _trace_function(f, tid, iv),
                iv,
                exact=(F.exact_traces or {}).get(tid),
                tol=trace_tol,
            )
            edge_integrals.append(val)
        a, b = iv.a, iv.b
        w = 0.5 * iv.width
        corner_sum = f(a, a) + f(a, b) + f(b, a) + f(b, b)
        integral_bf = w * math.fsum(edge_integrals) - w * w * corner_sum
        Bf = _blending_interpolant_edges(f, iv)
    else:
        raise ValueError(f"unknown rule {rule!r} (expected 's_minus' or 's_plus')")

    c_f = product_trapezoid(F, iv, n).value
    c_bf = product_trapezoid(Integrand2D(Bf), iv, n).value
    return integral_bf + c_f - c_bf
