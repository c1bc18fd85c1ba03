"""Calibrate the probability model on survey-style records.

Records are sorted by asset value and cut into near-equal income groups. Each
group's success share is taken as the probability it achieved, business
expenses are mapped to probability through p = gamma * mu, and gamma is pinned
by giving the largest group expense the maximum probability p_bar. Optimal
investment is then solved per group for a range of CRRA coefficients.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, computed_field

from risk_corners.config import (
    CALIBRATION_GROUPS,
    CALIBRATION_H,
    CALIBRATION_L,
    CALIBRATION_P_BAR,
    CALIBRATION_SIGMAS,
    SEARCH_GRID_SIZE,
    SUCCESS_LIKERT,
)
from risk_corners.errors import (
    ArgumentError,
    DegenerateFitError,
    EmptyInputError,
    InfeasibleError,
    RecordError,
)
from risk_corners.models import ProbabilityModel
from risk_corners.solver import solve_probability
from risk_corners.utility import CRRA

logger = logging.getLogger(__name__)

RECORD_COLUMNS = ["asset_value", "y_max", "bm_expenses", "success_likert"]
GROUP_COLUMNS = ["group", "n", "mean_B", "mean_mu", "p_hat"]
CURVE_COLUMNS = ["sigma", "group", "mean_B", "optimal_p", "clipped_flag"]


class SurveyRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    asset_value: float = Field(ge=0.0, allow_inf_nan=False)
    y_max: float = Field(ge=0.0, allow_inf_nan=False)
    bm_expenses: float = Field(ge=0.0, allow_inf_nan=False)
    success_likert: int = Field(ge=1, le=3)


class IncomeGroup(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=1)
    n: int = Field(ge=1)
    successes: int = Field(ge=0)
    mean_B: float
    mean_mu: float

    @computed_field
    @property
    def p_hat(self) -> float:
        """Share of the group that reported success."""
        return self.successes / self.n


class CalibrationCore(BaseModel):
    model_config = ConfigDict(frozen=True)

    gamma: float = Field(gt=0.0)
    p_bar: float = Field(gt=0.0, lt=1.0)
    mu_max: float = Field(gt=0.0)
    groups: list[IncomeGroup]

    @property
    def alpha(self) -> float:
        """Cost per unit of probability implied by p = gamma * mu."""
        return 1.0 / self.gamma


class CurvePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma: float
    group: int
    mean_B: float
    optimal_p: float
    clipped_flag: bool


class CalibrationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    gamma: float
    H: float
    L: float
    p_bar: float
    groups: list[IncomeGroup]
    curves: list[CurvePoint]

    def curve(self, sigma: float) -> list[CurvePoint]:
        """Points solved at ``sigma``, in group order."""
        return [point for point in self.curves if point.sigma == sigma]


def load_records(path: Path) -> list[SurveyRecord]:
    """Read and validate a survey CSV; every bad row is reported at once."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except FileNotFoundError as exc:
        raise RecordError(f"{path} does not exist") from exc
    except UnicodeDecodeError as exc:
        raise RecordError(f"{path} is not UTF-8 text: {exc.reason} at byte {exc.start}") from exc
    except OSError as exc:
        raise RecordError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise EmptyInputError(f"{path} is empty") from exc
    except pd.errors.ParserError as exc:
        raise RecordError(f"{path} is not valid CSV: {exc}") from exc
    missing = [c for c in RECORD_COLUMNS if c not in frame.columns]
    if missing:
        raise RecordError(f"{path} lacks columns {missing}")
    if frame.empty:
        raise EmptyInputError(f"{path} has a header but no records")

    records, bad_rows, first_problem = [], [], ""
    for row_number, row in enumerate(frame[RECORD_COLUMNS].to_dict("records"), start=1):
        try:
            records.append(SurveyRecord.model_validate(row))
        except ValidationError as exc:
            bad_rows.append(row_number)
            if not first_problem:
                error = exc.errors()[0]
                first_problem = f"row {row_number}, {error['loc'][0]}: {error['msg']}"
    if bad_rows:
        raise RecordError(f"{len(bad_rows)} invalid row(s); first: {first_problem}", bad_rows)
    logger.info("loaded %d records from %s", len(records), path)
    return records


def default_success_counts(groups: int, per_group: int) -> list[int]:
    """Success counts rising with wealth, from about a fifth of a group to all of it."""
    low = max(1, round(per_group * 2 / 9))
    return [
        min(per_group, low + g * (per_group - low) // max(groups - 1, 1)) for g in range(groups)
    ]


def generate_fixture(
    groups: int = CALIBRATION_GROUPS,
    per_group: int = 18,
    success_counts: list[int] | None = None,
    seed: int | None = None,
    y_max: float = CALIBRATION_H,
) -> list[SurveyRecord]:
    """Synthetic records whose asset-sorted bins have known success counts.

    Assets grow geometrically from 1,500 to 120,000 and expenses linearly from
    800 to 8,800, so records are already in asset order. Within each bin the
    first ``success_counts[g]`` records succeed unless ``seed`` shuffles them.
    """
    counts = success_counts or default_success_counts(groups, per_group)
    if len(counts) != groups or any(not 0 <= k <= per_group for k in counts):
        raise ArgumentError(f"need {groups} success counts in [0, {per_group}]")
    n = groups * per_group
    assets = np.round(np.geomspace(1_500.0, 120_000.0, n), 2)
    expenses = np.round(np.linspace(800.0, 8_800.0, n), 2)
    rng = np.random.default_rng(seed) if seed is not None else None

    records = []
    for g, k in enumerate(counts):
        likert = np.array([3] * k + [1 + j % 2 for j in range(per_group - k)])
        if rng is not None:
            likert = rng.permutation(likert)
        for j in range(per_group):
            i = g * per_group + j
            records.append(
                SurveyRecord(
                    asset_value=float(assets[i]),
                    y_max=y_max,
                    bm_expenses=float(expenses[i]),
                    success_likert=int(likert[j]),
                )
            )
    return records


def write_records(records: list[SurveyRecord], path: Path) -> Path:
    """Write records in the column layout ``load_records`` reads."""
    frame = pd.DataFrame([r.model_dump() for r in records], columns=RECORD_COLUMNS)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def bin_groups(
    records: list[SurveyRecord],
    groups: int = CALIBRATION_GROUPS,
    success_likert: int = SUCCESS_LIKERT,
) -> list[IncomeGroup]:
    """Cut the asset-sorted sample into ``groups`` bins whose sizes differ by at most one.

    Equal asset values keep their input order; the first bins take the remainder.
    """
    if groups < 1:
        raise ArgumentError(f"need at least one group, got {groups}")
    if not records:
        raise EmptyInputError("no records to group")
    if groups > len(records):
        raise ArgumentError(f"cannot make {groups} groups from {len(records)} records")
    assets = np.array([r.asset_value for r in records])
    expenses = np.array([r.bm_expenses for r in records])
    success = np.array([r.success_likert >= success_likert for r in records])
    order = np.argsort(assets, kind="stable")
    result = []
    for index, members in enumerate(np.array_split(order, groups), start=1):
        result.append(
            IncomeGroup(
                index=index,
                n=members.size,
                successes=int(success[members].sum()),
                mean_B=float(assets[members].mean()),
                mean_mu=float(expenses[members].mean()),
            )
        )
    logger.info("binned %d records into %d groups", len(records), groups)
    return result


def fit_gamma(groups: list[IncomeGroup], p_bar: float = CALIBRATION_P_BAR) -> CalibrationCore:
    """gamma = p_bar / max(mean_mu), so the biggest spender reaches p_bar."""
    if not groups:
        raise EmptyInputError("no groups to fit")
    mu_max = max(g.mean_mu for g in groups)
    if mu_max <= 0.0:
        raise DegenerateFitError("every group has zero business expenses")
    return CalibrationCore(gamma=p_bar / mu_max, p_bar=p_bar, mu_max=mu_max, groups=groups)


def predict_curves(
    core: CalibrationCore,
    sigmas: tuple[float, ...] | list[float] = CALIBRATION_SIGMAS,
    H: float = CALIBRATION_H,
    L: float = CALIBRATION_L,
    grid_size: int = SEARCH_GRID_SIZE,
) -> CalibrationResult:
    """Optimal probability per group and sigma with B set to the group's mean assets."""
    curves = []
    for sigma in sigmas:
        pref = CRRA(sigma=sigma)
        for group in core.groups:
            model = ProbabilityModel(
                B=group.mean_B, H=H, L=L, alpha=core.alpha, p_bar=core.p_bar
            )
            upper = model.feasible_upper(pref)
            try:
                optimal = solve_probability(model, pref, grid_size).argmax
            except InfeasibleError:
                logger.warning("group %d is infeasible at sigma=%g", group.index, sigma)
                optimal, upper = 0.0, -1.0
            curves.append(
                CurvePoint(
                    sigma=sigma,
                    group=group.index,
                    mean_B=group.mean_B,
                    optimal_p=optimal,
                    clipped_flag=upper < core.p_bar,
                )
            )
        logger.info("solved %d groups at sigma=%g", len(core.groups), sigma)
    return CalibrationResult(
        gamma=core.gamma, H=H, L=L, p_bar=core.p_bar, groups=core.groups, curves=curves
    )


def calibrate(
    path: Path,
    groups: int = CALIBRATION_GROUPS,
    sigmas: tuple[float, ...] | list[float] = CALIBRATION_SIGMAS,
    H: float = CALIBRATION_H,
    L: float = CALIBRATION_L,
    p_bar: float = CALIBRATION_P_BAR,
    success_likert: int = SUCCESS_LIKERT,
    grid_size: int = SEARCH_GRID_SIZE,
) -> CalibrationResult:
    """Load, bin, fit gamma and solve every group; see the module docstring."""
    records = load_records(path)
    core = fit_gamma(bin_groups(records, groups, success_likert), p_bar)
    return predict_curves(core, sigmas, H, L, grid_size)


def write_groups_csv(groups: list[IncomeGroup], path: Path) -> Path:
    """One row per income group."""
    frame = pd.DataFrame(
        [[g.index, g.n, g.mean_B, g.mean_mu, g.p_hat] for g in groups], columns=GROUP_COLUMNS
    )
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info("wrote %s", path)
    return path


def write_curves_csv(result: CalibrationResult, path: Path) -> Path:
    """One row per (sigma, group) point."""
    frame = pd.DataFrame([p.model_dump() for p in result.curves], columns=CURVE_COLUMNS)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info("wrote %s", path)
    return path
