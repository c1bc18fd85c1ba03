"""Optimal-investment search and threshold finding.

The CARA probability model is U-shaped in p, so its optimum is always one of
the two endpoints and no search is needed. CRRA optima can be interior: those
are found on a coarse grid and refined by golden-section search around every
strict local maximum. The reward model is concave in c, so one bounded scalar
search suffices.

Exact ties always go to the larger investment.
"""

import enum
import logging
from collections.abc import Callable, Iterable, Mapping, Sequence
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict
from scipy.optimize import minimize_scalar

from risk_corners.config import (
    CONCAVITY_TOLERANCE,
    DIAGNOSTIC_GRID_SIZE,
    LAMBDA_BRACKET,
    LAMBDA_RTOL,
    REWARD_XTOL,
    SEARCH_GRID_SIZE,
    SHAPE_DEAD_BAND,
    TIE_TOLERANCE,
    WEALTH_ATOL,
    WEALTH_BRACKET_MAX,
)
from risk_corners.errors import ArgumentError, InfeasibleError, NoThresholdError
from risk_corners.models import ProbabilityModel, RewardModel, prob_eu, reward_eu
from risk_corners.utility import CARA, CRRA, Preference

logger = logging.getLogger(__name__)

Objective = Callable[[ArrayLike], Any]


class Shape(str, enum.Enum):
    U_SHAPED = "u_shaped"
    MONOTONE_UP = "monotone_up"
    MONOTONE_DOWN = "monotone_down"
    CONCAVE = "concave"
    IRREGULAR = "irregular"


class SolveDiagnostics(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: str
    grid_size: int
    iterations: int
    tolerance: float
    feasible_upper: float


class SolveReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    argmax: float
    max_eu: float
    shape: Shape
    diagnostics: SolveDiagnostics


class ThresholdReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["lambda", "wealth"]
    threshold: float
    bracket: tuple[float, float]
    side_low: float
    side_high: float
    iterations: int


def _ties_to_larger(a: float, b: float) -> bool:
    """True when b (the larger investment) is at least as good as a."""
    return b >= a - TIE_TOLERANCE * max(1.0, abs(a), abs(b))


def ushape_diagnostic(samples: Sequence[tuple[float, float]] | ArrayLike) -> Shape:
    """Classify sampled (x, value) pairs by the sign pattern of forward differences.

    Differences within a dead-band of 1e-12 times the value scale count as flat
    and are ignored. At most one sign change is expected for every model here;
    more than one is reported as IRREGULAR.
    """
    points = np.asarray(samples, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 3:
        raise ArgumentError("need at least 3 (x, value) samples")
    xs, ys = points[:, 0], points[:, 1]
    if np.any(np.diff(xs) < 0):
        raise ArgumentError("samples must be sorted by x")
    steps = np.diff(ys)
    scale = max(1.0, float(np.max(np.abs(ys))))
    signs = np.sign(steps[np.abs(steps) > SHAPE_DEAD_BAND * scale])
    if signs.size == 0 or np.all(signs > 0):
        return Shape.MONOTONE_UP
    if np.all(signs < 0):
        return Shape.MONOTONE_DOWN
    changes = np.flatnonzero(np.diff(signs))
    if changes.size > 1:
        return Shape.IRREGULAR
    return Shape.U_SHAPED if signs[0] < 0 else Shape.CONCAVE


def second_differences_ok(values: NDArray[np.float64]) -> bool:
    """True if no second difference of ``values`` is positive beyond the concavity tolerance."""
    scale = max(1.0, float(np.max(np.abs(values))))
    return bool(np.all(np.diff(values, n=2) <= CONCAVITY_TOLERANCE * scale))


def refine_grid_argmax(
    objective: Objective, grid: NDArray[np.float64], values: NDArray[np.float64]
) -> tuple[float, float, int]:
    """Best point of ``objective`` given its values on ``grid``.

    Every strict interior local maximum of the grid values is refined with a
    golden-section search on its neighbouring grid cells. Returns
    (x, value, golden-section iterations).
    """
    best_x, best_value = float(grid[0]), float(values[0])
    iterations = 0
    candidates = [(float(grid[-1]), float(values[-1]))]
    inner = np.flatnonzero((values[1:-1] > values[:-2]) & (values[1:-1] > values[2:])) + 1
    for i in inner:
        res = minimize_scalar(
            lambda x: -float(objective(x)),
            bracket=(grid[i - 1], grid[i], grid[i + 1]),
            method="golden",
            options={"xtol": 1e-10, "maxiter": 500},
        )
        iterations += int(res.nit)
        x = float(np.clip(res.x, grid[i - 1], grid[i + 1]))
        value = float(objective(x))
        if value < values[i]:
            x, value = float(grid[i]), float(values[i])
        candidates.append((x, value))
    for x, value in sorted(candidates):
        if x >= best_x and _ties_to_larger(best_value, value):
            best_x, best_value = x, value
    return best_x, best_value, iterations


def grid_search_report(objective: Objective, upper: float, grid_size: int) -> SolveReport:
    """Grid search on [0, upper] refined around local maxima; for CRRA curves."""
    grid = np.linspace(0.0, upper, grid_size)
    values = np.asarray(objective(grid), dtype=float)
    x, value, iterations = refine_grid_argmax(objective, grid, values)
    shape = ushape_diagnostic(np.column_stack([grid, values]))
    logger.debug(
        "CRRA search on [0, %.6g]: %d grid points, %d refinement steps, p*=%.6g",
        upper,
        grid_size,
        iterations,
        x,
    )
    return SolveReport(
        argmax=x,
        max_eu=value,
        shape=shape,
        diagnostics=SolveDiagnostics(
            method="grid+golden",
            grid_size=grid_size,
            iterations=iterations,
            tolerance=1e-10,
            feasible_upper=upper,
        ),
    )


def endpoint_report(
    objective: Objective,
    raw_objective: Objective,
    upper: float,
    diagnostic_size: int = DIAGNOSTIC_GRID_SIZE,
    upper_wins: bool | None = None,
) -> SolveReport:
    """Choose between 0 and ``upper`` for curves known to be U-shaped.

    ``objective`` is compared (normalized units), ``raw_objective`` is reported.
    ``upper_wins`` overrides the comparison when the caller decided it exactly.
    """
    if upper_wins is None:
        upper_wins = _ties_to_larger(float(objective(0.0)), float(objective(upper)))
    argmax = upper if upper_wins else 0.0
    grid = np.linspace(0.0, upper, diagnostic_size)
    shape = ushape_diagnostic(np.column_stack([grid, objective(grid)]))
    return SolveReport(
        argmax=argmax,
        max_eu=float(raw_objective(argmax)),
        shape=shape,
        diagnostics=SolveDiagnostics(
            method="endpoints",
            grid_size=2,
            iterations=0,
            tolerance=0.0,
            feasible_upper=upper,
        ),
    )


def solve_probability(
    model: ProbabilityModel, pref: Preference, grid_size: int = SEARCH_GRID_SIZE
) -> SolveReport:
    """Optimal success probability for one agent."""
    if not isinstance(pref, CRRA):
        # B scales a CARA curve without moving its argmax
        base = model.with_wealth(0.0)
        upper_wins = None
        if isinstance(pref, CARA):
            cost = model.alpha * model.p_bar
            upper_wins = cara_accepts(pref.lam, model.p_bar, model.H - model.L - cost, -cost)
        return endpoint_report(
            lambda p: prob_eu(base, pref, p, normalized=True),
            lambda p: prob_eu(model, pref, p),
            model.p_bar,
            upper_wins=upper_wins,
        )
    upper = model.feasible_upper(pref)
    if upper < 0.0:
        raise InfeasibleError(
            f"no feasible p: B + L = {model.B + model.L:g} leaves no positive consumption"
        )
    return grid_search_report(lambda p: prob_eu(model, pref, p), upper, grid_size)


def solve_reward(
    model: RewardModel, pref: Preference, diagnostic_size: int = DIAGNOSTIC_GRID_SIZE
) -> SolveReport:
    """Optimal investment in the prize; the objective is concave, so one search suffices."""
    upper = model.feasible_upper(pref)
    if upper < 0.0:
        raise InfeasibleError(
            f"no feasible c: B + L = {model.B + model.L:g} leaves no positive consumption"
        )
    tolerance = REWARD_XTOL * model.c_max
    search_model = model.model_copy(update={"B": 0.0}) if isinstance(pref, CARA) else model

    def objective(c: ArrayLike) -> Any:
        return reward_eu(search_model, pref, c, normalized=True)

    res = minimize_scalar(
        lambda c: -float(objective(c)),
        bounds=(0.0, upper),
        method="bounded",
        options={"xatol": tolerance},
    )
    best_x, best_value = 0.0, float(objective(0.0))
    for x in sorted([float(res.x), upper]):
        value = float(objective(x))
        if _ties_to_larger(best_value, value):
            best_x, best_value = x, value

    grid = np.linspace(0.0, upper, diagnostic_size)
    values = objective(grid)
    if second_differences_ok(values):
        shape = ushape_diagnostic(np.column_stack([grid, values]))
        if shape is Shape.U_SHAPED:
            shape = Shape.IRREGULAR
    else:
        shape = Shape.IRREGULAR
    if shape is Shape.IRREGULAR:
        logger.warning("reward curve for %s failed the concavity check", pref.label())
    return SolveReport(
        argmax=best_x,
        max_eu=float(reward_eu(model, pref, best_x)),
        shape=shape,
        diagnostics=SolveDiagnostics(
            method="bounded-golden",
            grid_size=diagnostic_size,
            iterations=int(res.nit),
            tolerance=tolerance,
            feasible_upper=upper,
        ),
    )


def bisect_switch(
    switched: Callable[[float], bool],
    lo: float,
    hi: float,
    converged: Callable[[float, float], bool],
) -> tuple[float, float, int]:
    """Shrink [lo, hi] with switched(lo) False and switched(hi) True."""
    iterations = 0
    while not converged(lo, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if switched(mid):
            hi = mid
        else:
            lo = mid
        iterations += 1
    return lo, hi, iterations


def cara_log_ratio(lam: float, p: float, gain_win: float, gain_lose: float) -> float:
    """ln(p e^{-lam gain_win} + (1 - p) e^{-lam gain_lose}), computed without overflow.

    Negative when a CARA agent strictly prefers the lottery of gains to nothing.
    """
    with np.errstate(divide="ignore"):
        log_p, log_q = np.log(p), np.log1p(-p)
    return float(np.logaddexp(log_p - lam * gain_win, log_q - lam * gain_lose))


def cara_accepts(lam: float, p: float, gain_win: float, gain_lose: float) -> bool:
    """Whether the lottery is weakly preferred to zero gain; ties accept."""
    return cara_log_ratio(lam, p, gain_win, gain_lose) <= TIE_TOLERANCE


def cara_lambda_threshold(
    p_bar: float, gain_win: float, gain_lose: float, rtol: float = LAMBDA_RTOL
) -> tuple[float, float, int]:
    """Risk aversion at which a CARA agent stops preferring the p_bar lottery.

    The lottery pays ``gain_win`` with probability p_bar and ``gain_lose``
    otherwise, both measured against not investing. The agent declines iff
    p_bar e^{-lam gain_win} + (1 - p_bar) e^{-lam gain_lose} > 1, evaluated in
    log space so large lam cannot overflow. Returns the final bracket and the
    number of bisection steps.
    """
    def declines(lam: float) -> bool:
        return cara_log_ratio(lam, p_bar, gain_win, gain_lose) > 0.0

    lam_min, lam_max = LAMBDA_BRACKET
    hi = 1.0
    while not declines(hi):
        hi *= 2.0
        if hi > lam_max:
            raise NoThresholdError(
                f"investing stays optimal for every lambda up to {lam_max:g}", p_bar
            )
    lo = hi / 2.0
    while declines(lo):
        lo /= 2.0
        if lo < lam_min:
            raise NoThresholdError(
                f"investing is never optimal for lambda down to {lam_min:g}", 0.0
            )
    logger.debug("lambda bracket [%g, %g]", lo, hi)
    return bisect_switch(declines, lo, hi, lambda a, b: b - a <= rtol * b)


def lambda_threshold(model: ProbabilityModel, rtol: float = LAMBDA_RTOL) -> ThresholdReport:
    """CARA risk aversion above which the agent invests nothing instead of p_bar."""
    cost = model.alpha * model.p_bar
    lo, hi, iterations = cara_lambda_threshold(
        model.p_bar, model.H - model.L - cost, -cost, rtol
    )
    return ThresholdReport(
        kind="lambda",
        threshold=0.5 * (lo + hi),
        bracket=(lo, hi),
        side_low=model.p_bar,
        side_high=0.0,
        iterations=iterations,
    )


def wealth_threshold_search(
    choice_at: Callable[[float], float],
    b_lo: float = 0.0,
    b_hi: float | None = None,
    atol: float = WEALTH_ATOL,
) -> ThresholdReport:
    """Smallest wealth at which ``choice_at(B)`` turns positive."""
    low_choice = choice_at(b_lo)
    if low_choice > 0.0:
        raise NoThresholdError(f"the agent already invests at B={b_lo:g}", low_choice)
    hi = b_hi if b_hi is not None else max(1.0, 2.0 * b_lo)
    while choice_at(hi) <= 0.0:
        if b_hi is not None or hi > WEALTH_BRACKET_MAX:
            raise NoThresholdError(f"the agent never invests for B up to {hi:g}", 0.0)
        hi *= 2.0
    lo, hi, iterations = bisect_switch(
        lambda b: choice_at(b) > 0.0, b_lo, hi, lambda a, b: b - a <= atol
    )
    return ThresholdReport(
        kind="wealth",
        threshold=0.5 * (lo + hi),
        bracket=(lo, hi),
        side_low=choice_at(lo),
        side_high=choice_at(hi),
        iterations=iterations,
    )


def wealth_threshold(
    model: ProbabilityModel,
    pref: Preference,
    b_lo: float = 0.0,
    b_hi: float | None = None,
    atol: float = WEALTH_ATOL,
    grid_size: int = SEARCH_GRID_SIZE,
) -> ThresholdReport:
    """Wealth B above which the agent starts to invest (CRRA).

    Under Linear or CARA utility the choice does not depend on B, which is
    reported as ``NoThresholdError``.
    """
    if not isinstance(pref, CRRA):
        choice = solve_probability(model, pref).argmax
        raise NoThresholdError(f"{pref.label()} choices do not depend on B", choice)

    def choice_at(B: float) -> float:
        try:
            return solve_probability(model.with_wealth(B), pref, grid_size).argmax
        except InfeasibleError:
            return 0.0

    return wealth_threshold_search(choice_at, b_lo, b_hi, atol)


def sweep(
    evaluate: Callable[[float], Mapping[str, Any]],
    values: Iterable[float],
    name: str = "value",
) -> list[dict[str, Any]]:
    """One row per parameter value: ``{name: v, **evaluate(v)}``."""
    rows = []
    for v in values:
        rows.append({name: float(v), **evaluate(float(v))})
    return rows
