"""Loan-financed investment under limited liability.

The agent borrows the whole cost alpha * p. Lenders break even in expectation
and the borrower never repays more than the project returns, so a failed
project repays min(loan, L). Small loans (alpha p < L) are riskless and cost
exactly the loan in both states; larger loans shift repayment onto success.
"""

import enum
import logging

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from risk_corners.config import (
    CREDIT_LAMBDA_K,
    LAMBDA_RTOL,
    SEARCH_GRID_SIZE,
    TIE_TOLERANCE,
    WEALTH_ATOL,
)
from risk_corners.errors import ArgumentError, InfeasibleError, ScheduleError
from risk_corners.models import Value, _check_interval, domain_margin
from risk_corners.solver import (
    SolveReport,
    ThresholdReport,
    cara_accepts,
    cara_lambda_threshold,
    endpoint_report,
    grid_search_report,
    wealth_threshold_search,
)
from risk_corners.utility import CARA, CRRA, BinaryLottery, Preference, two_point_eu

logger = logging.getLogger(__name__)


class CreditModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    B: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    H: float = Field(allow_inf_nan=False)
    L: float = Field(gt=0.0, allow_inf_nan=False)
    alpha: float = Field(gt=0.0, allow_inf_nan=False)
    p_bar: float = Field(gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _positive_premium(self) -> "CreditModel":
        if not self.L < self.H:
            raise ValueError(f"need L < H, got L={self.L}, H={self.H}")
        if not self.alpha < self.H - self.L:
            raise ValueError(
                f"need alpha < H - L, got alpha={self.alpha}, H - L={self.H - self.L}"
            )
        return self

    @property
    def kink(self) -> float:
        """Probability at which the loan reaches L and stops being riskless."""
        return self.L / self.alpha

    def with_wealth(self, B: float) -> "CreditModel":
        return CreditModel(**{**self.model_dump(), "B": B})

    def feasible_upper(self, pref: Preference) -> float:
        # A failed risky loan leaves exactly B, which CRRA rejects when B = 0.
        if isinstance(pref, CRRA) and self.B == 0.0:
            return min(self.p_bar, (self.L - domain_margin(self.B)) / self.alpha)
        return self.p_bar


class RepaymentSchedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    loan: float = Field(ge=0.0)
    repay_fail: float = Field(ge=0.0)
    repay_success: float = Field(ge=0.0)

    def expected_repayment(self, p: float) -> float:
        return p * self.repay_success + (1.0 - p) * self.repay_fail


def schedule_for_loan(loan: float, p: float, L: float) -> RepaymentSchedule:
    """Break-even repayments for a loan financing a project that succeeds w.p. p."""
    if loan < 0.0:
        raise ArgumentError(f"loan must be non-negative, got {loan}")
    if loan == 0.0:
        return RepaymentSchedule(loan=0.0, repay_fail=0.0, repay_success=0.0)
    if p <= 0.0:
        raise ScheduleError(f"a loan of {loan:g} cannot break even when p = {p:g}")
    repay_fail = min(loan, L)
    if loan <= L:
        repay_success = loan
    else:
        repay_success = (loan - (1.0 - p) * repay_fail) / p
    return RepaymentSchedule(loan=loan, repay_fail=repay_fail, repay_success=repay_success)


def break_even_schedule(model: CreditModel, p: float) -> RepaymentSchedule:
    """Repayments that let the lender break even when the whole cost alpha * p is borrowed."""
    _check_interval(p, 0.0, model.p_bar, "p")
    return schedule_for_loan(model.alpha * p, p, model.L)


def credit_outcomes(model: CreditModel, p: ArrayLike) -> tuple[Value, Value]:
    """Final wealth on success and on failure when alpha p is fully borrowed."""
    p = _check_interval(p, 0.0, model.p_bar, "p")
    loan = model.alpha * p
    repay_fail = np.minimum(loan, model.L)
    risky = np.divide(
        loan - (1.0 - p) * repay_fail, p, out=np.zeros_like(loan), where=p > 0.0
    )
    repay_success = np.where(loan <= model.L, loan, risky)
    return model.B + model.H - repay_success, model.B + model.L - repay_fail


def credit_lottery(model: CreditModel, p: float) -> BinaryLottery:
    """Final wealth under full borrowing at success probability ``p``."""
    w_win, w_lose = credit_outcomes(model, p)
    return BinaryLottery(p_win=p, w_win=float(w_win), w_lose=float(w_lose))


def credit_eu(
    model: CreditModel, pref: Preference, p: ArrayLike, normalized: bool = False
) -> Value:
    """Expected utility of full-loan financing at success probability p.

    Below the kink L/alpha this is the plain probability-model curve; above it
    the agent keeps B + H - L - alpha + L/p on success and B on failure.
    """
    p = np.asarray(p, dtype=float)
    w_win, w_lose = credit_outcomes(model, p)
    return two_point_eu(pref, p, w_win, w_lose, normalized)


def credit_eu_branches(
    model: CreditModel, pref: Preference, p: ArrayLike, normalized: bool = False
) -> tuple[Value, Value]:
    """Both closed-form branches evaluated at the same p > 0, whichever applies."""
    p = _check_interval(p, 0.0, model.p_bar, "p")
    if np.any(p <= 0.0):
        raise ArgumentError("the upper branch is undefined at p = 0")
    cost = model.alpha * p
    lower = two_point_eu(pref, p, model.B + model.H - cost, model.B + model.L - cost, normalized)
    upper = two_point_eu(
        pref,
        p,
        model.B + model.H - model.L - model.alpha + model.L / p,
        model.B * np.ones_like(p),
        normalized,
    )
    return lower, upper


def credit_eu_derivative_cara(
    model: CreditModel, lam: float, p: ArrayLike, normalized: bool = False
) -> Value:
    """U'(p) on the upper branch (p >= L/alpha) for CARA utility."""
    p = _check_interval(p, model.kink, model.p_bar, "p")
    win = model.B + model.H - model.L - model.alpha + model.L / p
    d1 = np.exp(-lam * model.B) - (1.0 + lam * model.L / p) * np.exp(-lam * win)
    return d1 / lam if normalized else d1


def upper_branch_increasing(model: CreditModel, lam: float, p: ArrayLike) -> Value:
    """Sign test for U'(p) > 0 on the upper branch, free of wealth and overflow.

    U'(p) > 0 iff lam (H - L - alpha + L/p) > ln(1 + lam L / p).
    """
    p = _check_interval(p, model.kink, model.p_bar, "p")
    x = lam * model.L / p
    return lam * (model.H - model.L - model.alpha) + x > np.log1p(x)


def mixed_financing_lottery(model: CreditModel, p: float, own_funds: float) -> BinaryLottery:
    """Pay ``own_funds`` up front and borrow the rest of alpha p at break even."""
    _check_interval(p, 0.0, model.p_bar, "p")
    cost = model.alpha * p
    if not 0.0 <= own_funds <= min(model.B, cost):
        raise ArgumentError(
            f"own funds must lie in [0, min(B, alpha p)] = [0, {min(model.B, cost):g}], "
            f"got {own_funds:g}"
        )
    schedule = schedule_for_loan(max(cost - own_funds, 0.0), p, model.L)
    kept = model.B - own_funds
    return BinaryLottery(
        p_win=p,
        w_win=kept + model.H - schedule.repay_success,
        w_lose=kept + model.L - schedule.repay_fail,
    )


class Financing(str, enum.Enum):
    FULL_LOAN = "full_loan"
    MIXED = "mixed"
    INDIFFERENT = "indifferent"


class FinancingComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    eu_full_loan: float
    eu_mixed: float
    normalized_difference: float
    ordering: Financing

    @property
    def full_loan_weakly_preferred(self) -> bool:
        return self.ordering is not Financing.MIXED


def full_loan_dominates(
    model: CreditModel, pref: Preference, p: float, own_funds_used: float
) -> FinancingComparison:
    """Compare borrowing all of alpha p against paying ``own_funds_used`` of it."""
    full = credit_lottery(model, p)
    mixed = mixed_financing_lottery(model, p, own_funds_used)
    eu_full = float(two_point_eu(pref, full.p_win, full.w_win, full.w_lose, normalized=True))
    eu_mixed = float(two_point_eu(pref, mixed.p_win, mixed.w_win, mixed.w_lose, normalized=True))
    difference = eu_full - eu_mixed
    if abs(difference) <= TIE_TOLERANCE * max(1.0, abs(eu_full), abs(eu_mixed)):
        ordering = Financing.INDIFFERENT
    elif difference > 0.0:
        ordering = Financing.FULL_LOAN
    else:
        ordering = Financing.MIXED
    return FinancingComparison(
        eu_full_loan=float(two_point_eu(pref, full.p_win, full.w_win, full.w_lose)),
        eu_mixed=float(two_point_eu(pref, mixed.p_win, mixed.w_win, mixed.w_lose)),
        normalized_difference=difference,
        ordering=ordering,
    )


def solve_credit(
    model: CreditModel, pref: Preference, grid_size: int = SEARCH_GRID_SIZE
) -> SolveReport:
    """Optimal p when investment is loan-financed."""
    if not isinstance(pref, CRRA):
        base = model.with_wealth(0.0)
        upper_wins = None
        if isinstance(pref, CARA):
            schedule = break_even_schedule(model, model.p_bar)
            upper_wins = cara_accepts(
                pref.lam,
                model.p_bar,
                model.H - model.L - schedule.repay_success,
                -schedule.repay_fail,
            )
        return endpoint_report(
            lambda p: credit_eu(base, pref, p, normalized=True),
            lambda p: credit_eu(model, pref, p),
            model.p_bar,
            upper_wins=upper_wins,
        )
    upper = model.feasible_upper(pref)
    if upper < 0.0:
        raise InfeasibleError(f"no feasible p for B={model.B:g}")
    return grid_search_report(lambda p: credit_eu(model, pref, p), upper, grid_size)


def lambda_threshold_credit(model: CreditModel, rtol: float = LAMBDA_RTOL) -> ThresholdReport:
    """CARA risk aversion above which a borrower gives up the project entirely."""
    schedule = break_even_schedule(model, model.p_bar)
    lo, hi, iterations = cara_lambda_threshold(
        model.p_bar,
        model.H - model.L - schedule.repay_success,
        -schedule.repay_fail,
        rtol,
    )
    return ThresholdReport(
        kind="lambda",
        threshold=0.5 * (lo + hi),
        bracket=(lo, hi),
        side_low=model.p_bar,
        side_high=0.0,
        iterations=iterations,
    )


def lambda_of_wealth(B: float, k: float = CREDIT_LAMBDA_K) -> float:
    """Risk aversion that falls with wealth: lambda(B) = k / B."""
    if k <= 0.0:
        raise ArgumentError(f"k must be positive, got {k}")
    return np.inf if B == 0.0 else k / B


def wealth_threshold_credit(
    model: CreditModel,
    k: float = CREDIT_LAMBDA_K,
    b_lo: float = 0.0,
    b_hi: float | None = None,
    atol: float = WEALTH_ATOL,
) -> ThresholdReport:
    """Wealth at which a CARA borrower with lambda = k / B jumps from 0 to p_bar."""

    def choice_at(B: float) -> float:
        lam = lambda_of_wealth(B, k)
        if not np.isfinite(lam):
            return 0.0
        return solve_credit(model.with_wealth(B), CARA(lam=lam)).argmax

    report = wealth_threshold_search(choice_at, b_lo, b_hi, atol)
    logger.debug("credit wealth threshold %.6g after %d steps", report.threshold, report.iterations)
    return report
