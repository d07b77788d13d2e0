"""Doubling refinement with certified a posteriori stopping.

For an integrand whose mixed derivative has one sign, the one-sided
rules approach the integral monotonically under mesh doubling, and the
difference of two consecutive values dominates the finer value's true
error:

    mid-line rule:  |error at 2n| <= |S(2n) - S(n)|
    edge rule:      |error at 2n| <= (4n-1)/(4n-3) * |S(2n) - S(n)|

Both inequalities are sharp up to their stated constants, so the driver
stops as soon as the bound (plus any trace-integration budget) drops
below the requested tolerance.  Printed convergence tables customarily
show half the mid-line difference, since the monotone halving makes the
finer error at most half the coarser one; :class:`RefinementLevel`
carries the certified bound and the table quantity side by side under
distinct names.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .cubature import CubatureEstimate, Integrand2D, s_minus, s_plus
from .univariate import Interval

__all__ = [
    "RefinementLevel",
    "RefinementReport",
    "refine",
    "refine_mean",
    "definite_pair_bounds",
]

_RULES = ("s_minus", "s_plus")
_PAIR_KINDS = ("pos_pair", "neg_pair")


@dataclass(frozen=True)
class RefinementLevel:
    """One level of the doubling sequence.

    ``aposteriori_bound`` is the certified error bound for this level's
    estimate; ``table_bound`` is the quantity convergence tables print
    (half the difference for the mid-line rule, the same bound for the
    edge rule).  Both are None on the coarsest level, where no
    difference exists yet.
    """

    n: int
    estimate: float
    diff_to_previous: Optional[float]
    aposteriori_bound: Optional[float]
    table_bound: Optional[float]
    trace_budget: float


@dataclass(frozen=True)
class RefinementReport:
    rule: str
    levels: Tuple[RefinementLevel, ...]
    final_value: float
    final_bound: float
    termination: str  # 'tolerance_met' or 'max_n_reached'

    @property
    def final_n(self) -> int:
        return self.levels[-1].n


def _bound_factor(rule: str, n_coarse: int) -> float:
    """Constant multiplying |S(2n) - S(n)| in the certified bound."""
    if rule == "s_minus":
        return 1.0
    return (4.0 * n_coarse - 1.0) / (4.0 * n_coarse - 3.0)


def _validate_refine_args(rule: str, n0: int, tol: float, max_n: int) -> None:
    if rule not in _RULES:
        raise ValueError(f"rule must be one of {_RULES}, got {rule!r}")
    if n0 < 1:
        raise ValueError(f"starting level must be >= 1, got {n0}")
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    if max_n < 2 * n0:
        raise ValueError(
            f"max_n must allow at least one doubling: need >= {2 * n0}, got {max_n}"
        )


def refine(
    F: Integrand2D,
    iv: Interval,
    rule: str,
    tol: float,
    n0: int = 4,
    max_n: int = 1024,
    trace_tol: float = 1e-12,
) -> RefinementReport:
    """Double the mesh until the a posteriori bound meets the tolerance.

    Runs the requested one-sided rule at n0, 2*n0, 4*n0, ... and stops
    at the first level whose certified bound plus trace budget is at
    most ``tol``, or once the next doubling would exceed ``max_n``
    (termination 'max_n_reached'; the report still carries the best
    value and bound).  The integrand must declare its mixed-derivative
    sign, since the bounds only hold for one-signed derivatives.
    """
    if F.d22_sign is None:
        raise ValueError(
            "definiteness not declared: Integrand2D.d22_sign is required"
        )
    _validate_refine_args(rule, n0, tol, max_n)
    evaluate = s_minus if rule == "s_minus" else s_plus

    estimates = [evaluate(F, iv, n0, trace_tol=trace_tol)]
    levels = [
        RefinementLevel(
            n=n0,
            estimate=estimates[0].value,
            diff_to_previous=None,
            aposteriori_bound=None,
            table_bound=None,
            trace_budget=estimates[0].trace_err_budget,
        )
    ]
    n = n0
    while True:
        coarse = estimates[-1]
        fine = evaluate(F, iv, 2 * n, trace_tol=trace_tol)
        diff = fine.value - coarse.value
        bound = _bound_factor(rule, n) * abs(diff)
        table = 0.5 * abs(diff) if rule == "s_minus" else bound
        estimates.append(fine)
        levels.append(
            RefinementLevel(
                n=2 * n,
                estimate=fine.value,
                diff_to_previous=diff,
                aposteriori_bound=bound,
                table_bound=table,
                trace_budget=fine.trace_err_budget,
            )
        )
        n *= 2
        certified = bound + fine.trace_err_budget
        if certified <= tol:
            termination = "tolerance_met"
            break
        if 2 * n > max_n:
            termination = "max_n_reached"
            break
    return RefinementReport(
        rule=rule,
        levels=tuple(levels),
        final_value=levels[-1].estimate,
        final_bound=certified,
        termination=termination,
    )


def refine_mean(
    F: Integrand2D,
    iv: Interval,
    tol: float,
    n0: int = 4,
    max_n: int = 1024,
    trace_tol: float = 1e-12,
) -> RefinementReport:
    """Refine the midpoint of the two-sided enclosure.

    At each level both one-sided rules run on the same mesh; the
    estimate is their mean and the certified bound is half their gap
    plus the averaged trace budgets, valid already at the coarsest
    level because the true integral lies between the two rule values.
    """
    if F.d22_sign is None:
        raise ValueError(
            "definiteness not declared: Integrand2D.d22_sign is required"
        )
    _validate_refine_args("s_minus", n0, tol, max_n)

    def level_at(n: int) -> Tuple[RefinementLevel, float]:
        lo = s_plus(F, iv, n, trace_tol=trace_tol)
        hi = s_minus(F, iv, n, trace_tol=trace_tol)
        mean = 0.5 * (lo.value + hi.value)
        budget = 0.5 * (lo.trace_err_budget + hi.trace_err_budget)
        halfgap = 0.5 * abs(hi.value - lo.value)
        return (
            RefinementLevel(
                n=n,
                estimate=mean,
                diff_to_previous=None,
                aposteriori_bound=halfgap + budget,
                table_bound=None,
                trace_budget=budget,
            ),
            halfgap + budget,
        )

    first, certified = level_at(n0)
    levels = [first]
    n = n0
    termination = "tolerance_met"
    while certified > tol:
        if 2 * n > max_n:
            termination = "max_n_reached"
            break
        level, certified = level_at(2 * n)
        levels.append(
            RefinementLevel(
                n=level.n,
                estimate=level.estimate,
                diff_to_previous=level.estimate - levels[-1].estimate,
                aposteriori_bound=level.aposteriori_bound,
                table_bound=None,
                trace_budget=level.trace_budget,
            )
        )
        n *= 2
    return RefinementReport(
        rule="mean",
        levels=tuple(levels),
        final_value=levels[-1].estimate,
        final_bound=levels[-1].aposteriori_bound,
        termination=termination,
    )


def definite_pair_bounds(
    pair_kind: str, c: float, s_prime: float, s_doubleprime: float
) -> Tuple[float, float]:
    """Error bounds for a definite pair of rules from their difference.

    If S' - S'' has one-signed bivariate kernel and the comparison
    kernel of (S', S'') is one-signed for the constant c, then

        |error of S'|  <= c       * |S' - S''|
        |error of S''| <= (c + 1) * |S' - S''|

    ``pair_kind`` records the orientation ('pos_pair' when the pair's
    kernels are nonnegative, 'neg_pair' when nonpositive); the returned
    magnitudes are the same either way.
    """
    if pair_kind not in _PAIR_KINDS:
        raise ValueError(f"pair_kind must be one of {_PAIR_KINDS}, got {pair_kind!r}")
    if not c > 0.0:
        raise ValueError(f"comparison constant must be positive, got {c!r}")
    gap = abs(s_prime - s_doubleprime)
    return (c * gap, (c + 1.0) * gap)
