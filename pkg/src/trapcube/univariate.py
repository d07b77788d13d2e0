"""Composite trapezium and midpoint rules, their Peano kernels, and
univariate trace integrals.

The two quadrature rules here are the univariate building blocks of the
modified product cubature rules in :mod:`trapcube.cubature`.  Both have
algebraic degree of precision 1 and a second-order Peano kernel of fixed
sign: nonpositive for the composite trapezium rule, nonnegative for the
midpoint rule.  That sign is what makes the derived cubature rules
one-sided.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

__all__ = [
    "Interval",
    "QuadratureRule",
    "ConvergenceError",
    "trapezium_rule",
    "midpoint_rule",
    "apply",
    "peano_kernel",
    "peano_kernel_integral_k2",
    "trace_integral",
]


@dataclass(frozen=True)
class Interval:
    """A nondegenerate interval [a, b]; the square domain is its product.

    Parameters
    ----------
    a, b : float
        Endpoints with ``a < b`` (strict).
    """

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("interval endpoints must be finite")
        if not self.a < self.b:
            raise ValueError(f"degenerate interval: a={self.a!r} must be < b={self.b!r}")

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a quadrature rule on an interval.

    Nodes are strictly increasing and lie in ``[interval.a, interval.b]``.
    For rules exact on constants the weights sum to the interval width.
    """

    interval: Interval
    nodes: Tuple[float, ...]
    weights: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.weights):
            raise ValueError("nodes and weights must have equal length")
        if len(self.nodes) == 0:
            raise ValueError("rule must have at least one node")
        a, b = self.interval.a, self.interval.b
        prev = None
        for x in self.nodes:
            if not a <= x <= b:
                raise ValueError(f"node {x!r} outside [{a!r}, {b!r}]")
            if prev is not None and not x > prev:
                raise ValueError("nodes must be strictly increasing")
            prev = x


class ConvergenceError(RuntimeError):
    """Raised when an iterative approximation fails to reach its tolerance.

    Attributes
    ----------
    best_estimate : float
        The most accurate value obtained before giving up.
    """

    def __init__(self, message: str, best_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate


def trapezium_rule(iv: Interval, n: int) -> QuadratureRule:
    """Composite trapezium rule with n panels on iv.

    Nodes are the n+1 equispaced points ``a + i*h`` with ``h=(b-a)/n``;
    interior weights are h, the two end weights h/2.

    Examples
    --------
    >>> r = trapezium_rule(Interval(0.0, 1.0), 4)
    >>> r.nodes
    (0.0, 0.25, 0.5, 0.75, 1.0)
    >>> r.weights
    (0.125, 0.25, 0.25, 0.25, 0.125)
    """
    if n < 1:
        raise ValueError(f"panel count must be >= 1, got {n}")
    a, b = iv.a, iv.b
    h = (b - a) / n
    # Force exact endpoint hits; intermediate nodes from one multiplication each.
    nodes = tuple(a + i * h for i in range(n)) + (b,)
    weights = (0.5 * h,) + (h,) * (n - 1) + (0.5 * h,)
    return QuadratureRule(iv, nodes, weights)


def midpoint_rule(iv: Interval) -> QuadratureRule:
    """One-point rule at the interval centre with weight (b-a)."""
    return QuadratureRule(iv, (iv.midpoint,), (iv.width,))


def apply(rule: QuadratureRule, g: Callable[[float], float]) -> float:
    """Apply a rule to g: the weighted sum of node values.

    The sum is accumulated with exactly rounded compensated summation
    (``math.fsum``) in node order, so the result is deterministic and
    within one ulp of the exact weighted sum.

    Raises
    ------
    ValueError
        If g evaluates to a non-finite value at some node.
    """
    terms = []
    for x, w in zip(rule.nodes, rule.weights):
        v = g(x)
        if not math.isfinite(v):
            raise ValueError(f"integrand returned non-finite value {v!r} at node {x!r}")
        terms.append(w * v)
    return math.fsum(terms)


def _truncated_power(u: float, k: int) -> float:
    """(u)_+^k with the conventions used by the kernel formulas.

    For k >= 1 this is ``max(u, 0)**k``, which vanishes at the kink so
    kernel values at quadrature nodes come out as exact zeros.  For k = 0
    the step is symmetrised (value 1/2 at u = 0); that is the convention
    under which the two closed forms of the first-order kernel agree at
    the nodes.
    """
    if k == 0:
        if u > 0.0:
            return 1.0
        if u < 0.0:
            return 0.0
        return 0.5
    return max(u, 0.0) ** k


def peano_kernel(rule: QuadratureRule, s: int, t: float) -> float:
    """Order-s Peano kernel K_s(rule; t) of the remainder functional.

    Evaluates the closed form

        K_s(t) = (b - t)^s / s!  -  (1/(s-1)!) * sum_i a_i (x_i - t)_+^(s-1),

    valid for rules with degree of precision at least s-1 (the caller's
    responsibility; it is not checked here).  A fixed sign of K_2 over
    the interval is what certifies one-sided behaviour of the rule's
    remainder on integrands with one-signed second derivative.

    Raises
    ------
    ValueError
        If t lies outside the rule's interval or ``s < 1``.
    """
    if s < 1:
        raise ValueError(f"kernel order must be >= 1, got {s}")
    a, b = rule.interval.a, rule.interval.b
    if not a <= t <= b:
        raise ValueError(f"kernel argument {t!r} outside [{a!r}, {b!r}]")
    lead = (b - t) ** s / math.factorial(s)
    fac = math.factorial(s - 1)
    tail = math.fsum(
        w * _truncated_power(x - t, s - 1) for x, w in zip(rule.nodes, rule.weights)
    )
    return lead - tail / fac


def peano_kernel_integral_k2(rule_kind: str, iv: Interval, n: Optional[int] = None) -> float:
    """Closed-form integral of the order-2 Peano kernel over iv.

    Parameters
    ----------
    rule_kind : {'trapezium', 'midpoint'}
        Which rule's kernel to integrate.  ``n`` is required for
        'trapezium' (number of panels) and ignored otherwise.

    Returns
    -------
    float
        ``(b-a)^3 / 24`` for the midpoint rule and ``-(b-a)^3 / (12 n^2)``
        for the n-panel trapezium rule.
    """
    w = iv.width
    if rule_kind == "midpoint":
        return w**3 / 24.0
    if rule_kind == "trapezium":
        if n is None or n < 1:
            raise ValueError("trapezium kernel integral requires a panel count n >= 1")
        return -(w**3) / (12.0 * n * n)
    raise ValueError(f"unknown rule kind {rule_kind!r}")


_MAX_ROMBERG_LEVELS = 24


def _romberg(g: Callable[[float], float], iv: Interval, tol: float) -> float:
    """Romberg value of the integral of g over iv to absolute tolerance tol.

    Classic scheme: trapezium refinements by halving plus Richardson
    extrapolation in h^2.  Convergence is declared when two successive
    diagonal entries differ by at most tol.
    """
    a, b = iv.a, iv.b
    h = b - a
    t0 = g(a)
    t1 = g(b)
    if not (math.isfinite(t0) and math.isfinite(t1)):
        raise ValueError("integrand returned non-finite value at an interval endpoint")
    prev_row = [0.5 * h * (t0 + t1)]
    n = 1
    for level in range(1, _MAX_ROMBERG_LEVELS + 1):
        n *= 2
        h *= 0.5
        new_terms = []
        for i in range(1, n, 2):
            x = a + i * h
            v = g(x)
            if not math.isfinite(v):
                raise ValueError(f"integrand returned non-finite value {v!r} at {x!r}")
            new_terms.append(v)
        row = [0.5 * prev_row[0] + h * math.fsum(new_terms)]
        for k in range(1, level + 1):
            row.append(row[k - 1] + (row[k - 1] - prev_row[k - 1]) / (4.0**k - 1.0))
        if level >= 2 and abs(row[-1] - prev_row[-1]) <= tol:
            return row[-1]
        prev_row = row
    raise ConvergenceError(
        f"integral did not converge to {tol!r} within {_MAX_ROMBERG_LEVELS} refinement levels",
        best_estimate=prev_row[-1],
    )


def trace_integral(
    g: Callable[[float], float],
    iv: Interval,
    exact: Optional[Callable[[Interval], float]] = None,
    tol: float = 1e-12,
) -> Tuple[float, float]:
    """Integral of a univariate trace over iv together with an error budget.

    When an exact-value supplier is given, its value is returned with a
    zero budget.  Otherwise the integral is approximated by adaptive
    Romberg refinement and the budget equals tol, the requested
    absolute accuracy.

    Returns
    -------
    (value, err_budget) : tuple of float
    """
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    if exact is not None:
        return float(exact(iv)), 0.0
    return _romberg(g, iv, tol), tol
