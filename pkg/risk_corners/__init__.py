"""Corner solutions in risky investment: when risk-averse agents invest all or nothing."""

from risk_corners.credit import CreditModel, solve_credit
from risk_corners.errors import RiskCornersError
from risk_corners.models import ProbabilityModel, RewardFunction, RewardModel
from risk_corners.solver import (
    SolveReport,
    ThresholdReport,
    lambda_threshold,
    solve_probability,
    solve_reward,
    wealth_threshold,
)
from risk_corners.utility import CARA, CRRA, BinaryLottery, Linear

__all__ = [
    "CARA",
    "CRRA",
    "BinaryLottery",
    "CreditModel",
    "Linear",
    "ProbabilityModel",
    "RewardFunction",
    "RewardModel",
    "RiskCornersError",
    "SolveReport",
    "ThresholdReport",
    "lambda_threshold",
    "solve_credit",
    "solve_probability",
    "solve_reward",
    "wealth_threshold",
]
