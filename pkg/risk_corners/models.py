"""The three investment models.

- ``ProbabilityModel``: paying alpha * p buys success probability p <= p_bar.
- ``RewardModel``: paying c buys a larger prize H(c) at a fixed probability.
- ``HybridProject``: mean-preserving trade-off between probability and prize.

Wealth ``B`` is added to every outcome. Under CARA it never changes a choice
(the whole expected-utility curve scales by exp(-lam * B)); under CRRA it does.
"""

import enum
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from risk_corners.config import DOMAIN_EPSILON, TIE_TOLERANCE
from risk_corners.errors import ArgumentError, RangeError
from risk_corners.utility import CRRA, BinaryLottery, Preference, two_point_eu

Value = float | NDArray[np.float64]


def domain_margin(B: float) -> float:
    """Smallest consumption kept feasible under CRRA."""
    return DOMAIN_EPSILON * max(1.0, B)


def _check_interval(x: ArrayLike, lo: float, hi: float, name: str) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=float)
    if np.any(~((x >= lo) & (x <= hi))):
        raise RangeError(f"{name} must lie in [{lo:g}, {hi:g}], got {x}")
    return x


class ProbabilityModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    B: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    H: float = Field(allow_inf_nan=False)
    L: float = Field(allow_inf_nan=False)
    alpha: float = Field(gt=0.0, allow_inf_nan=False)
    p_bar: float = Field(gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _positive_premium(self) -> "ProbabilityModel":
        if not self.L < self.H:
            raise ValueError(f"need L < H, got L={self.L}, H={self.H}")
        if not self.alpha < self.H - self.L:
            raise ValueError(
                f"need alpha < H - L for a positive expected return, "
                f"got alpha={self.alpha}, H - L={self.H - self.L}"
            )
        return self

    def with_wealth(self, B: float) -> "ProbabilityModel":
        return ProbabilityModel(**{**self.model_dump(), "B": B})

    def feasible_upper(self, pref: Preference) -> float:
        """Largest feasible p; below p_bar when CRRA needs B + L - alpha p > 0."""
        if isinstance(pref, CRRA):
            clip = (self.B + self.L - domain_margin(self.B)) / self.alpha
            return min(self.p_bar, clip)
        return self.p_bar

    def outcomes(self, p: ArrayLike) -> tuple[Value, Value]:
        p = np.asarray(p, dtype=float)
        cost = self.alpha * p
        return self.B + self.H - cost, self.B + self.L - cost

    def lottery(self, p: float) -> BinaryLottery:
        w_win, w_lose = self.outcomes(p)
        return BinaryLottery(p_win=p, w_win=float(w_win), w_lose=float(w_lose))


def prob_eu(
    model: ProbabilityModel, pref: Preference, p: ArrayLike, normalized: bool = False
) -> Value:
    """p u(B + H - alpha p) + (1 - p) u(B + L - alpha p)."""
    p = _check_interval(p, 0.0, model.p_bar, "p")
    w_win, w_lose = model.outcomes(p)
    return two_point_eu(pref, p, w_win, w_lose, normalized)


def prob_eu_grid(
    model: ProbabilityModel, pref: Preference, size: int, normalized: bool = False
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Evenly spaced p over the feasible range and the expected utility at each."""
    upper = model.feasible_upper(pref)
    grid = np.linspace(0.0, max(upper, 0.0), size)
    return grid, prob_eu(model, pref, grid, normalized)


def prob_eu_cara_derivatives(
    model: ProbabilityModel, lam: float, p: ArrayLike, normalized: bool = False
) -> tuple[Value, Value]:
    """Closed-form U'(p) and U''(p) for CARA utility.

    B is folded into H and L. With ``normalized`` both are divided by lam, which
    is the scaling under which U'(p) -> (H - L) - alpha as lam -> 0.
    """
    p = _check_interval(p, 0.0, model.p_bar, "p")
    high = model.B + model.H
    low = model.B + model.L
    grow = np.exp(lam * model.alpha * p)
    spread = np.exp(-lam * low) * -np.expm1(-lam * (high - low))
    d1 = (1.0 + lam * model.alpha * p) * grow * spread - lam * model.alpha * grow * np.exp(
        -lam * low
    )
    d2 = lam * model.alpha * (d1 + grow * spread)
    if normalized:
        return d1 / lam, d2 / lam
    return d1, d2


class RewardFunction(BaseModel):
    """H(c) = h0 + m c (affine) or h0 + m c**theta (power), for 0 <= c <= c_max."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["affine", "power"] = "affine"
    h0: float = Field(default=0.0, allow_inf_nan=False)
    m: float = Field(gt=0.0, allow_inf_nan=False)
    theta: float = Field(default=1.0, gt=0.0, le=1.0)
    c_max: float = Field(gt=0.0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _affine_is_linear(self) -> "RewardFunction":
        if self.kind == "affine" and self.theta != 1.0:
            raise ValueError("an affine reward function has theta = 1")
        return self

    def value(self, c: ArrayLike) -> Value:
        c = np.asarray(c, dtype=float)
        if self.kind == "affine":
            return self.h0 + self.m * c
        return self.h0 + self.m * c**self.theta

    def slope(self, c: ArrayLike) -> Value:
        c = np.asarray(c, dtype=float)
        if self.kind == "affine":
            return self.m * np.ones_like(c)
        with np.errstate(divide="ignore"):
            return self.m * self.theta * c ** (self.theta - 1.0)

    def curvature(self, c: ArrayLike) -> Value:
        c = np.asarray(c, dtype=float)
        if self.kind == "affine" or self.theta == 1.0:
            return np.zeros_like(c)
        with np.errstate(divide="ignore"):
            return self.m * self.theta * (self.theta - 1.0) * c ** (self.theta - 2.0)


class RewardModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    B: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    L: float = Field(allow_inf_nan=False)
    p: float = Field(gt=0.0, lt=1.0)
    reward: RewardFunction

    @model_validator(mode="after")
    def _reward_above_failure(self) -> "RewardModel":
        # H is increasing, so H(0) >= L covers the whole range.
        if float(self.reward.value(0.0)) < self.L:
            raise ValueError(f"need H(c) >= L, got H(0)={self.reward.value(0.0)}, L={self.L}")
        return self

    @property
    def c_max(self) -> float:
        return self.reward.c_max

    def feasible_upper(self, pref: Preference) -> float:
        if isinstance(pref, CRRA):
            return min(self.c_max, self.B + self.L - domain_margin(self.B))
        return self.c_max

    def outcomes(self, c: ArrayLike) -> tuple[Value, Value]:
        c = np.asarray(c, dtype=float)
        return self.B + self.reward.value(c) - c, self.B + self.L - c


def reward_eu(
    model: RewardModel, pref: Preference, c: ArrayLike, normalized: bool = False
) -> Value:
    """V(c) = p u(B + H(c) - c) + (1 - p) u(B + L - c)."""
    c = _check_interval(c, 0.0, model.c_max, "c")
    w_win, w_lose = model.outcomes(c)
    return two_point_eu(pref, model.p, w_win, w_lose, normalized)


def reward_eu_derivatives(
    model: RewardModel, pref: Preference, c: ArrayLike
) -> tuple[Value, Value]:
    """Closed-form V'(c) and V''(c)."""
    c = _check_interval(c, 0.0, model.c_max, "c")
    w_win, w_lose = model.outcomes(c)
    gain = model.reward.slope(c) - 1.0
    du_win = pref.du(w_win, "w_win")
    du_lose = pref.du(w_lose, "w_lose")
    d1 = model.p * du_win * gain - (1.0 - model.p) * du_lose
    d2 = (
        model.p * pref.d2u(w_win, "w_win") * gain**2
        + model.p * du_win * model.reward.curvature(c)
        + (1.0 - model.p) * pref.d2u(w_lose, "w_lose")
    )
    return d1, d2


class HybridProject(BaseModel):
    """Binary project whose expected return C is the same for every p in [p0, p_bar]."""

    model_config = ConfigDict(frozen=True)

    C: float = Field(allow_inf_nan=False)
    L: float = Field(allow_inf_nan=False)
    p0: float = Field(gt=0.0, le=1.0)
    p_bar: float = Field(gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _ordered(self) -> "HybridProject":
        if not self.C > self.L:
            raise ValueError(f"need C > L, got C={self.C}, L={self.L}")
        if not self.p0 <= self.p_bar:
            raise ValueError(f"need p0 <= p_bar, got p0={self.p0}, p_bar={self.p_bar}")
        return self


def hybrid_reward(project: HybridProject, p: ArrayLike) -> Value:
    """H(p) = (C - (1 - p) L) / p, decreasing in p."""
    p = _check_interval(p, project.p0, project.p_bar, "p")
    return (project.C - (1.0 - p) * project.L) / p


def hybrid_lottery(project: HybridProject, p: float, base_wealth: float = 0.0) -> BinaryLottery:
    """Final wealth when the project is run at success probability ``p``."""
    return BinaryLottery(
        p_win=p,
        w_win=base_wealth + float(hybrid_reward(project, p)),
        w_lose=base_wealth + project.L,
    )


class Ordering(str, enum.Enum):
    PROBABILITY = "probability"  # the higher-probability lottery wins
    REWARD = "reward"  # the higher-prize lottery wins
    INDIFFERENT = "indifferent"


class LotteryComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    eu_probability: float
    eu_reward: float
    normalized_difference: float  # in CARA-normalized units
    ordering: Ordering


def sosd_prefer_probability(
    project: HybridProject,
    pref: Preference,
    p: float,
    p_prime: float,
    base_wealth: float = 0.0,
) -> LotteryComparison:
    """Compare the p-lottery against the p'-lottery of the same mean, p > p'."""
    if not p > p_prime:
        raise ArgumentError(f"need p > p', got p={p}, p'={p_prime}")
    high = hybrid_lottery(project, p, base_wealth)
    low = hybrid_lottery(project, p_prime, base_wealth)
    eu_high = float(two_point_eu(pref, high.p_win, high.w_win, high.w_lose, normalized=True))
    eu_low = float(two_point_eu(pref, low.p_win, low.w_win, low.w_lose, normalized=True))
    difference = eu_high - eu_low
    if abs(difference) <= TIE_TOLERANCE * max(1.0, abs(eu_high), abs(eu_low)):
        ordering = Ordering.INDIFFERENT
    elif difference > 0:
        ordering = Ordering.PROBABILITY
    else:
        ordering = Ordering.REWARD
    return LotteryComparison(
        eu_probability=float(two_point_eu(pref, high.p_win, high.w_win, high.w_lose)),
        eu_reward=float(two_point_eu(pref, low.p_win, low.w_win, low.w_lose)),
        normalized_difference=difference,
        ordering=ordering,
    )
