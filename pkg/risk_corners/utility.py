"""Utility families, their derivatives, and certainty equivalents of binary lotteries.

Three families are supported:

- ``CARA(lam)``: u(x) = -exp(-lam * x). The affine-equivalent normalized form
  (1 - exp(-lam * x)) / lam converges to linear utility as lam -> 0 and is what
  every cross-lambda comparison uses; the raw form is what gets reported.
- ``CRRA(sigma)``: u(x) = (x**(1 - sigma) - 1) / (1 - sigma), ln(x) at sigma = 1.
  Defined for strictly positive wealth only.
- ``Linear``: u(x) = x.

All functions accept floats or numpy arrays. Exponentials saturate for
|lam * x| > 700; callers keep arguments inside that range.
"""

from typing import Annotated, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

from risk_corners.errors import DomainError

Wealth = float | NDArray[np.float64]


class CARA(BaseModel):
    """Constant absolute risk aversion with coefficient ``lam`` (1/currency)."""

    model_config = ConfigDict(frozen=True)

    family: Literal["cara"] = "cara"
    lam: float = Field(gt=0.0, allow_inf_nan=False)

    def u(self, x: ArrayLike, argument: str = "x") -> Wealth:
        return -np.exp(-self.lam * np.asarray(x, dtype=float))

    def u_normalized(self, x: ArrayLike, argument: str = "x") -> Wealth:
        return -np.expm1(-self.lam * np.asarray(x, dtype=float)) / self.lam

    def du(self, x: ArrayLike, argument: str = "x") -> Wealth:
        return self.lam * np.exp(-self.lam * np.asarray(x, dtype=float))

    def d2u(self, x: ArrayLike, argument: str = "x") -> Wealth:
        return -self.lam**2 * np.exp(-self.lam * np.asarray(x, dtype=float))

    def inverse(self, v: ArrayLike) -> Wealth:
        return -np.log(-np.asarray(v, dtype=float)) / self.lam

    def arrow_pratt(self, x: ArrayLike) -> tuple[Wealth, Wealth]:
        x = np.asarray(x, dtype=float)
        return self.lam * np.ones_like(x), self.lam * x

    def label(self) -> str:
        return f"CARA(lambda={self.lam:g})"


class CRRA(BaseModel):
    """Constant relative risk aversion with coefficient ``sigma``."""

    model_config = ConfigDict(frozen=True)

    family: Literal["crra"] = "crra"
    sigma: float = Field(gt=0.0, allow_inf_nan=False)

    def _positive(self, x: ArrayLike, argument: str) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        if np.any(~(x > 0.0)):
            raise DomainError(
                argument,
                f"CRRA(sigma={self.sigma:g}) needs strictly positive wealth, "
                f"got {np.min(x):g}",
            )
        return x

    def u(self, x: ArrayLike, argument: str = "x") -> Wealth:
        x = self._positive(x, argument)
        if self.sigma == 1.0:
            return np.log(x)
        one_minus = 1.0 - self.sigma
        # expm1 keeps the value continuous in sigma as sigma -> 1
        return np.expm1(one_minus * np.log(x)) / one_minus

    def u_normalized(self, x: ArrayLike, argument: str = "x") -> Wealth:
        return self.u(x, argument)

    def du(self, x: ArrayLike, argument: str = "x") -> Wealth:
        x = self._positive(x, argument)
        return x ** (-self.sigma)

    def d2u(self, x: ArrayLike, argument: str = "x") -> Wealth:
        x = self._positive(x, argument)
        return -self.sigma * x ** (-self.sigma - 1.0)

    def inverse(self, v: ArrayLike) -> Wealth:
        v = np.asarray(v, dtype=float)
        if self.sigma == 1.0:
            return np.exp(v)
        one_minus = 1.0 - self.sigma
        return np.exp(np.log1p(one_minus * v) / one_minus)

    def arrow_pratt(self, x: ArrayLike) -> tuple[Wealth, Wealth]:
        x = self._positive(x, "x")
        return self.sigma / x, self.sigma * np.ones_like(x)

    def label(self) -> str:
        return f"CRRA(sigma={self.sigma:g})"


class Linear(BaseModel):
    """Risk neutrality."""

    model_config = ConfigDict(frozen=True)

    family: Literal["linear"] = "linear"

    def u(self, x: ArrayLike, argument: str = "x") -> Wealth:
        return np.asarray(x, dtype=float) * 1.0

    def u_normalized(self, x: ArrayLike, argument: str = "x") -> Wealth:
        return self.u(x)

    def du(self, x: ArrayLike, argument: str = "x") -> Wealth:
        return np.ones_like(np.asarray(x, dtype=float))

    def d2u(self, x: ArrayLike, argument: str = "x") -> Wealth:
        return np.zeros_like(np.asarray(x, dtype=float))

    def inverse(self, v: ArrayLike) -> Wealth:
        return np.asarray(v, dtype=float) * 1.0

    def arrow_pratt(self, x: ArrayLike) -> tuple[Wealth, Wealth]:
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x), np.zeros_like(x)

    def label(self) -> str:
        return "Linear"


Preference = CARA | CRRA | Linear
RiskPreference = Annotated[Preference, Field(discriminator="family")]
PREFERENCE_ADAPTER: TypeAdapter[Preference] = TypeAdapter(RiskPreference)


def is_strictly_concave(pref: Preference) -> bool:
    """Every family except ``Linear`` is strictly concave."""
    return not isinstance(pref, Linear)


class BinaryLottery(BaseModel):
    """Final wealth ``w_win`` with probability ``p_win``, otherwise ``w_lose``.

    The two outcomes are not required to be ordered.
    """

    model_config = ConfigDict(frozen=True)

    p_win: float = Field(ge=0.0, le=1.0)
    w_win: float = Field(allow_inf_nan=False)
    w_lose: float = Field(allow_inf_nan=False)

    @property
    def mean(self) -> float:
        return self.p_win * self.w_win + (1.0 - self.p_win) * self.w_lose

    @property
    def variance(self) -> float:
        return self.p_win * (1.0 - self.p_win) * (self.w_win - self.w_lose) ** 2

    def shifted(self, wealth: float) -> "BinaryLottery":
        return BinaryLottery(
            p_win=self.p_win, w_win=self.w_win + wealth, w_lose=self.w_lose + wealth
        )


def eval_utility(pref: Preference, x: ArrayLike, normalized: bool = False) -> Wealth:
    """u(x); ``normalized`` selects the (1 - exp(-lam x)) / lam form for CARA."""
    if normalized:
        return pref.u_normalized(x, "x")
    return pref.u(x, "x")


def normalized_utility(pref: Preference, x: ArrayLike) -> Wealth:
    """Utility rescaled so CARA tends to the identity as lam goes to 0."""
    return pref.u_normalized(x, "x")


def marginal_utility(pref: Preference, x: ArrayLike) -> Wealth:
    """u'(x)."""
    return pref.du(x, "x")


def utility_curvature(pref: Preference, x: ArrayLike) -> Wealth:
    """u''(x)."""
    return pref.d2u(x, "x")


def arrow_pratt(pref: Preference, x: ArrayLike) -> tuple[Wealth, Wealth]:
    """Absolute and relative Arrow-Pratt coefficients at wealth ``x``."""
    return pref.arrow_pratt(x)


def two_point_eu(
    pref: Preference,
    p_win: ArrayLike,
    w_win: ArrayLike,
    w_lose: ArrayLike,
    normalized: bool = False,
) -> Wealth:
    """p u(w_win) + (1 - p) u(w_lose), vectorized over any broadcastable inputs."""
    p = np.asarray(p_win, dtype=float)
    if normalized:
        u_win = pref.u_normalized(w_win, "w_win")
        u_lose = pref.u_normalized(w_lose, "w_lose")
    else:
        u_win = pref.u(w_win, "w_win")
        u_lose = pref.u(w_lose, "w_lose")
    return p * u_win + (1.0 - p) * u_lose


def expected_utility(
    pref: Preference, lot: BinaryLottery, normalized: bool = False
) -> float:
    """Expected utility of ``lot``, raw or normalized."""
    return float(two_point_eu(pref, lot.p_win, lot.w_win, lot.w_lose, normalized))


def certainty_equivalent(pref: Preference, lot: BinaryLottery) -> float:
    """The sure wealth x* with u(x*) equal to the lottery's expected utility."""
    if isinstance(pref, CARA):
        # -ln(p e^{-lam w} + (1-p) e^{-lam l}) / lam, in log space
        with np.errstate(divide="ignore"):
            log_p = np.log(lot.p_win)
            log_q = np.log1p(-lot.p_win)
        return float(
            -np.logaddexp(log_p - pref.lam * lot.w_win, log_q - pref.lam * lot.w_lose)
            / pref.lam
        )
    return float(pref.inverse(expected_utility(pref, lot)))
