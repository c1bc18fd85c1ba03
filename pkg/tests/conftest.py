import numpy as np
import pytest

from risk_corners.credit import CreditModel
from risk_corners.models import ProbabilityModel, RewardFunction, RewardModel


@pytest.fixture
def prob_model():
    """H=2, L=0, alpha=1, p_bar=0.8: the running two-outcome example."""
    return ProbabilityModel(B=0.0, H=2.0, L=0.0, alpha=1.0, p_bar=0.8)


@pytest.fixture
def log_model():
    """Parameters of the log-utility wealth threshold example."""
    return ProbabilityModel(B=1.5, H=5.5, L=0.6875, alpha=3.0, p_bar=0.8)


@pytest.fixture
def experiment_reward_model():
    """Reward game shape: 150 CZK endowment, H(c) = 3c, fair coin."""
    return RewardModel(
        B=150.0, L=0.0, p=0.5, reward=RewardFunction(kind="affine", h0=0.0, m=3.0, c_max=150.0)
    )


@pytest.fixture
def credit_model():
    return CreditModel(B=1.0, H=3.0, L=0.5, alpha=1.0, p_bar=0.9)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def _draw_prob_model(rng: np.random.Generator) -> ProbabilityModel:
    H = rng.uniform(1.0, 10.0)
    L = rng.uniform(0.0, 0.5 * H)
    alpha = rng.uniform(0.05, 0.95) * (H - L)
    return ProbabilityModel(
        B=rng.uniform(0.0, 5.0), H=H, L=L, alpha=alpha, p_bar=rng.uniform(0.05, 0.95)
    )


def _draw_credit_model(rng: np.random.Generator) -> CreditModel:
    """Credit model whose kink L/alpha lies strictly inside (0, p_bar)."""
    H = rng.uniform(2.0, 10.0)
    L = rng.uniform(0.1, 0.4 * H)
    alpha = rng.uniform(0.3, 0.95) * (H - L)
    kink = L / alpha
    while kink >= 0.9:
        alpha = 0.5 * (alpha + (H - L))
        kink = L / alpha
    p_bar = rng.uniform(kink + 0.5 * (0.95 - kink) * 0.1, 0.95)
    return CreditModel(B=rng.uniform(0.0, 5.0), H=H, L=L, alpha=alpha, p_bar=p_bar)


@pytest.fixture
def random_prob_model(rng):
    return lambda: _draw_prob_model(rng)


@pytest.fixture
def random_credit_model(rng):
    return lambda: _draw_credit_model(rng)
