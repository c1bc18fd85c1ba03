from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

# Solver grids and tolerances
SEARCH_GRID_SIZE = 2001  # coarse grid before golden-section refinement
VERIFY_GRID_SIZE = 10001  # brute-force grid used by verification sweeps
DIAGNOSTIC_GRID_SIZE = 201  # grid used only to label the shape of a solved curve
SHAPE_DEAD_BAND = 1e-12  # relative dead-band for sign changes of forward differences
CONCAVITY_TOLERANCE = 1e-9  # relative tolerance on second differences
REWARD_XTOL = 1e-8  # golden-section tolerance, relative to c_max
LAMBDA_RTOL = 1e-9  # relative bracket width for the risk-aversion threshold
WEALTH_ATOL = 1e-4  # absolute bracket width for the wealth threshold
LAMBDA_BRACKET = (1e-12, 1e6)
WEALTH_BRACKET_MAX = 1e9
DOMAIN_EPSILON = 1e-9  # CRRA clipping margin, scaled by max(1, B)
TIE_TOLERANCE = 1e-12  # relative: expected utilities this close count as a tie

# Credit market: wealth -> risk aversion map lambda(B) = k / B
CREDIT_LAMBDA_K = 1.0

# Calibration defaults
CALIBRATION_GROUPS = 30
CALIBRATION_H = 62_000.0
CALIBRATION_L = 0.0
CALIBRATION_P_BAR = 0.88
SUCCESS_LIKERT = 3
CALIBRATION_SIGMAS = (0.5, 1.0, 2.0, 3.0)
FIXTURE_PATH = Path(__file__).parent / "data" / "survey_fixture.csv"

# Investment games, amounts in CZK
GAME_ENDOWMENT = 150
GAME_UNIT = 30
GAME_REWARD = 270
GAME_MULTIPLIER = 3
GAME_STEPS = 4
DIE_FACES = 6

# Risk elicitation menu: 50% chance of 1,300 CZK vs. a safe amount 0..1,000
ELICITATION_PRIZE = 1300
ELICITATION_STEP = 100
ELICITATION_ROWS = 11
ELICITATION_NEUTRAL_ROW = 8  # first row a risk-neutral agent takes the safe amount

# Synthetic population defaults
POPULATION_SIZE = 10_000
POPULATION_LAMBDA_RANGE = (1e-4, 5e-2)
POPULATION_SEED = 7


class RunConfig(BaseModel):
    """Validated command-line run, dumped into every report for provenance."""

    model_config = ConfigDict(frozen=True)

    command: str
    subcommand: str | None = None
    parameters: dict[str, Any] = Field(default_factory=dict)
    grid_size: int = Field(default=SEARCH_GRID_SIZE, ge=3)
    tolerance: float | None = Field(default=None, gt=0.0)
    out_dir: Path = Path(".")
    fmt: Literal["json", "csv"] = "json"
    seed: int | None = None
