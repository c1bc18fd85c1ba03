"""Simulated agents playing the three investment games.

Every game offers lotteries with the same expected return of 50% on the
amount invested, so risk-neutral agents are indifferent and concave agents
reveal the corner structure:

- probability game: each 30 CZK unit adds a star (1/6 success chance) for a
  fixed 270 CZK prize;
- reward game: each unit is tripled on a fair coin;
- step game: four sequential choices between a star and a larger prize at
  equal expected return, followed by a final choice of how many units to
  invest.

Amounts are exact ``Fraction``s so the expected-value identity holds without
rounding. Agents are vectorized: a population is one utility family with an
array of coefficients.
"""

import json
import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Literal, NamedTuple

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator
from scipy import stats

from risk_corners.config import (
    DIE_FACES,
    ELICITATION_NEUTRAL_ROW,
    ELICITATION_PRIZE,
    ELICITATION_ROWS,
    ELICITATION_STEP,
    GAME_ENDOWMENT,
    GAME_MULTIPLIER,
    GAME_REWARD,
    GAME_STEPS,
    GAME_UNIT,
    POPULATION_LAMBDA_RANGE,
    POPULATION_SEED,
    POPULATION_SIZE,
    TIE_TOLERANCE,
)
from risk_corners.errors import ArgumentError, DomainError, RecordError
from risk_corners.utility import CARA, CRRA, BinaryLottery, Linear, Preference, two_point_eu

logger = logging.getLogger(__name__)

PROBABILITY_STEP = "P"
REWARD_STEP = "R"
CORNER_AMOUNTS = (0, 30, 120, 150)
STEP_FINAL_STAGE_NOTE = (
    "final stage: n units priced at the node reached after n - 1 steps of the chosen path"
)


class ProbabilityGame(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["probability"] = "probability"
    endowment: int = Field(default=GAME_ENDOWMENT, gt=0)
    unit: int = Field(default=GAME_UNIT, gt=0)
    reward: int = Field(default=GAME_REWARD, gt=0)
    faces: int = Field(default=DIE_FACES, gt=1)


class RewardGame(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["reward"] = "reward"
    endowment: int = Field(default=GAME_ENDOWMENT, gt=0)
    unit: int = Field(default=GAME_UNIT, gt=0)
    multiplier: int = Field(default=GAME_MULTIPLIER, gt=1)

    @property
    def probability(self) -> Fraction:
        return Fraction(1, 2)


class StepGame(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["step"] = "step"
    endowment: int = Field(default=GAME_ENDOWMENT, gt=0)
    unit: int = Field(default=GAME_UNIT, gt=0)
    reward: int = Field(default=GAME_REWARD, gt=0)
    faces: int = Field(default=DIE_FACES, gt=1)
    steps: int = Field(default=GAME_STEPS, ge=1)

    @model_validator(mode="after")
    def _fits_endowment(self) -> "StepGame":
        if self.unit * (self.steps + 1) > self.endowment:
            raise ValueError("the full path must be affordable from the endowment")
        if self.steps + 1 >= self.faces:
            raise ValueError("the star count must stay below the number of faces")
        return self


GameSpec = Annotated[ProbabilityGame | RewardGame | StepGame, Field(discriminator="kind")]
GAME_ADAPTER: TypeAdapter[ProbabilityGame | RewardGame | StepGame] = TypeAdapter(GameSpec)
GAME_NAMES = ("probability", "reward", "step")


def make_game(name: str) -> ProbabilityGame | RewardGame | StepGame:
    """Default game by name."""
    if name not in GAME_NAMES:
        raise ArgumentError(f"unknown game {name!r}, expected one of {GAME_NAMES}")
    return GAME_ADAPTER.validate_python({"kind": name})


class GameOption(NamedTuple):
    label: str
    invested: int
    p: Fraction
    win: Fraction  # final wealth on success
    lose: Fraction

    @property
    def mean(self) -> Fraction:
        return self.p * self.win + (1 - self.p) * self.lose

    def lottery(self, base_wealth: float = 0.0) -> BinaryLottery:
        return BinaryLottery(
            p_win=float(self.p),
            w_win=base_wealth + float(self.win),
            w_lose=base_wealth + float(self.lose),
        )


class StepNode(NamedTuple):
    t: int  # steps taken
    s: int  # stars
    invested: int
    probability: Fraction
    reward: Fraction


def step_node(game: StepGame, t: int, s: int) -> StepNode:
    """Node after ``t`` steps holding ``s`` stars."""
    if not (0 <= t <= game.steps and 1 <= s <= t + 1):
        raise ArgumentError(f"no node with t={t}, s={s}")
    invested = game.unit * (t + 1)
    # equal expected return at every node: (s / faces) * reward = 1.5 * invested
    reward = Fraction(game.reward * (t + 1), s)
    return StepNode(t=t, s=s, invested=invested, probability=Fraction(s, game.faces), reward=reward)


def node_option(game: StepGame, node: StepNode, label: str) -> GameOption:
    """Investing at ``node`` as a lottery over final wealth."""
    keep = game.endowment - node.invested
    return GameOption(
        label=label,
        invested=node.invested,
        p=node.probability,
        win=keep + node.reward,
        lose=Fraction(keep),
    )


def stars_along(path: str) -> list[int]:
    """Star count at every node visited by ``path``, starting node included."""
    stars = [1]
    for step in path:
        if step not in (PROBABILITY_STEP, REWARD_STEP):
            raise ArgumentError(f"path steps are P or R, got {path!r}")
        stars.append(stars[-1] + (step == PROBABILITY_STEP))
    return stars


def step_paths(game: StepGame) -> list[str]:
    """All leaf paths, most probability steps first so that ties resolve toward them."""
    paths = [""]
    for _ in range(game.steps):
        paths = [path + step for path in paths for step in (PROBABILITY_STEP, REWARD_STEP)]
    return sorted(paths, key=lambda path: (-path.count(PROBABILITY_STEP), path))


def enumerate_options(game: ProbabilityGame | RewardGame | StepGame) -> list[GameOption]:
    """Every option of a game as an exact lottery over final wealth."""
    match game:
        case ProbabilityGame():
            return [
                GameOption(
                    label=f"k={k}",
                    invested=k * game.unit,
                    p=Fraction(k, game.faces),
                    win=Fraction(game.endowment - k * game.unit + game.reward),
                    lose=Fraction(game.endowment - k * game.unit),
                )
                for k in range(game.endowment // game.unit + 1)
            ]
        case RewardGame():
            options = []
            for n in range(game.endowment // game.unit + 1):
                c = n * game.unit
                options.append(
                    GameOption(
                        label=f"c={c}",
                        invested=c,
                        p=game.probability,
                        win=Fraction(game.endowment - c + game.multiplier * c),
                        lose=Fraction(game.endowment - c),
                    )
                )
            return options
        case StepGame():
            return [
                node_option(game, step_node(game, game.steps, stars_along(path)[-1]), path)
                for path in step_paths(game)
            ]


def game_options(name: str) -> list[GameOption]:
    """Options of the game called ``name``."""
    return enumerate_options(make_game(name))


@dataclass(frozen=True, eq=False)
class AgentPopulation:
    """Agents sharing one utility family; ``coefficients`` holds lam or sigma."""

    family: Literal["cara", "crra", "linear"]
    coefficients: NDArray[np.float64]
    wealth: NDArray[np.float64]

    def __post_init__(self):
        if self.coefficients.shape != self.wealth.shape or self.coefficients.ndim != 1:
            raise ArgumentError("coefficients and wealth must be 1-d arrays of equal length")
        if self.family != "linear" and np.any(self.coefficients <= 0.0):
            raise ArgumentError("risk aversion coefficients must be positive")

    def __len__(self) -> int:
        return self.coefficients.size

    def preference(self, i: int) -> Preference:
        match self.family:
            case "cara":
                return CARA(lam=float(self.coefficients[i]))
            case "crra":
                return CRRA(sigma=float(self.coefficients[i]))
            case _:
                return Linear()

    @classmethod
    def from_preferences(
        cls, prefs: list[Preference], wealth: ArrayLike | None = None
    ) -> "AgentPopulation":
        """One agent per preference; ``wealth`` broadcasts and defaults to zero."""
        families = {pref.family for pref in prefs}
        if len(families) != 1:
            raise ArgumentError(f"a population holds one utility family, got {sorted(families)}")
        family = families.pop()
        coefficients = np.array(
            [getattr(pref, "lam", getattr(pref, "sigma", 0.0)) for pref in prefs], dtype=float
        )
        base = np.zeros(len(prefs)) if wealth is None else np.broadcast_to(
            np.asarray(wealth, dtype=float), (len(prefs),)
        ).copy()
        return cls(family=family, coefficients=coefficients, wealth=base)


class PopulationConfig(BaseModel):
    """How to draw a synthetic population; also accepted as a JSON document."""

    model_config = ConfigDict(frozen=True)

    family: Literal["cara", "crra"] = "cara"
    n: int = Field(default=POPULATION_SIZE, gt=0)
    lambda_range: tuple[float, float] = POPULATION_LAMBDA_RANGE  # log-uniform
    sigma_grid: tuple[float, ...] | None = None  # drawn uniformly
    wealth_range: tuple[float, float] | None = None  # uniform outside wealth
    seed: int = POPULATION_SEED

    @model_validator(mode="after")
    def _check(self) -> "PopulationConfig":
        lo, hi = self.lambda_range
        if not 0.0 < lo <= hi:
            raise ValueError(f"need 0 < lambda_lo <= lambda_hi, got {self.lambda_range}")
        if self.family == "crra":
            if not self.sigma_grid or min(self.sigma_grid) <= 0.0:
                raise ValueError("a CRRA population needs a grid of positive sigmas")
            if self.wealth_range is None or self.wealth_range[0] <= 0.0:
                raise ValueError("a CRRA population needs strictly positive outside wealth")
        if self.wealth_range is not None:
            lo, hi = self.wealth_range
            if not 0.0 <= lo <= hi:
                raise ValueError(f"bad wealth range {self.wealth_range}")
        return self

    def draw(self) -> AgentPopulation:
        """Sample the population; the same seed always gives the same agents."""
        rng = np.random.default_rng(self.seed)
        if self.family == "cara":
            lo, hi = np.log(self.lambda_range)
            coefficients = np.exp(rng.uniform(lo, hi, self.n))
        else:
            coefficients = rng.choice(np.asarray(self.sigma_grid, dtype=float), self.n)
        if self.wealth_range is None:
            wealth = np.zeros(self.n)
        else:
            wealth = rng.uniform(*self.wealth_range, self.n)
        return AgentPopulation(family=self.family, coefficients=coefficients, wealth=wealth)


def load_population_config(path: Path) -> PopulationConfig:
    """Read a ``PopulationConfig`` JSON document; unreadable files raise ``RecordError``."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise RecordError(f"{path} is not UTF-8 text: {exc.reason} at byte {exc.start}") from exc
    except OSError as exc:
        raise RecordError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return PopulationConfig.model_validate_json(text)


def population_utility(
    population: AgentPopulation, x: NDArray[np.float64], normalized: bool = True
) -> NDArray[np.float64]:
    """Utility of wealth ``x`` of shape (agents, options), row i for agent i."""
    coef = population.coefficients[:, None]
    match population.family:
        case "cara":
            if normalized:
                return -np.expm1(-coef * x) / coef
            return -np.exp(-coef * x)
        case "crra":
            if np.any(x <= 0.0):
                raise DomainError("wealth", "CRRA agents need strictly positive final wealth")
            one_minus = 1.0 - coef
            safe = np.where(one_minus == 0.0, 1.0, one_minus)
            return np.where(one_minus == 0.0, np.log(x), np.expm1(one_minus * np.log(x)) / safe)
        case _:
            return x * 1.0


def population_eu(
    population: AgentPopulation, p: ArrayLike, win: ArrayLike, lose: ArrayLike
) -> NDArray[np.float64]:
    """Normalized expected utility, shape (agents, options)."""
    base = population.wealth[:, None]
    p = np.asarray(p, dtype=float)
    u_win = population_utility(population, base + np.asarray(win, dtype=float))
    u_lose = population_utility(population, base + np.asarray(lose, dtype=float))
    return p * u_win + (1.0 - p) * u_lose


def raw_eu(population: AgentPopulation, eu: NDArray[np.float64]) -> NDArray[np.float64]:
    """Undo the CARA normalization row by row: u = lam * u_norm - 1."""
    if population.family == "cara":
        return population.coefficients[:, None] * eu - 1.0
    return eu


def option_arrays(options: list[GameOption]) -> tuple[NDArray[np.float64], ...]:
    """``(p, win, lose)`` as float arrays for ``population_eu``."""
    return (
        np.array([float(o.p) for o in options]),
        np.array([float(o.win) for o in options]),
        np.array([float(o.lose) for o in options]),
    )


def _tied_with_best(eu: NDArray[np.float64]) -> NDArray[np.bool_]:
    best = eu.max(axis=1, keepdims=True)
    return eu >= best - TIE_TOLERANCE * np.maximum(1.0, np.abs(best))


def choose_last_best(eu: NDArray[np.float64]) -> NDArray[np.int64]:
    """Row-wise argmax; ties go to the last column (the larger investment)."""
    tied = _tied_with_best(eu)
    return eu.shape[1] - 1 - np.argmax(tied[:, ::-1], axis=1)


def choose_first_best(eu: NDArray[np.float64]) -> NDArray[np.int64]:
    """Row-wise argmax; ties go to the first column."""
    return np.argmax(_tied_with_best(eu), axis=1)


class ChoiceRecord(BaseModel):
    """One agent's decision in one game.

    For the step game ``option`` is the node-by-node path, ``invested`` and
    ``eu`` belong to the final-stage choice, and ``full_path`` is the best
    leaf found by comparing all paths at once.
    """

    model_config = ConfigDict(frozen=True)

    agent_id: int
    game: str
    option: str
    invested: int
    eu: float
    full_path: str | None = None
    probability_picks: int | None = None
    risk_averse: bool | None = None  # switches before the risk-neutral row of the menu


class GameSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    game: str
    agents: int
    shares: dict[int, float]
    mean_invested: float
    variance: float
    corner_mass: float
    risk_averse_agents: int | None = None
    branch_shares: dict[int, float] | None = None
    paths_agree: float | None = None
    note: str | None = None


class SimulationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    records: list[ChoiceRecord]
    summary: GameSummary


def _simulate_options(
    game: ProbabilityGame | RewardGame, population: AgentPopulation, averse: NDArray[np.bool_]
) -> list[ChoiceRecord]:
    options = enumerate_options(game)
    eu = population_eu(population, *option_arrays(options))
    picks = choose_last_best(eu)
    chosen_eu = raw_eu(population, eu)[np.arange(len(population)), picks]
    return [
        ChoiceRecord(
            agent_id=i,
            game=game.kind,
            option=options[j].label,
            invested=options[j].invested,
            eu=float(chosen_eu[i]),
            risk_averse=bool(averse[i]),
        )
        for i, j in enumerate(picks)
    ]


def _child_eu(
    game: StepGame, population: AgentPopulation, t: int, stars: NDArray[np.int64]
) -> NDArray[np.float64]:
    nodes = [step_node(game, t, int(s)) for s in stars]
    option = [node_option(game, node, "") for node in nodes]
    p, win, lose = (a[:, None] for a in option_arrays(option))
    return population_eu(population, p, win, lose)[:, 0]


def myopic_paths(game: StepGame, population: AgentPopulation) -> list[str]:
    """Node-by-node choice: take the extra star unless the bigger prize is strictly better."""
    n = len(population)
    stars = np.ones(n, dtype=np.int64)
    steps = np.empty((n, game.steps), dtype="<U1")
    for t in range(1, game.steps + 1):
        eu_star = _child_eu(game, population, t, stars + 1)
        eu_prize = _child_eu(game, population, t, stars)
        scale = np.maximum(1.0, np.maximum(np.abs(eu_star), np.abs(eu_prize)))
        take_star = eu_star >= eu_prize - TIE_TOLERANCE * scale
        steps[:, t - 1] = np.where(take_star, PROBABILITY_STEP, REWARD_STEP)
        stars = stars + take_star
    return ["".join(row) for row in steps]


def final_stage_options(game: StepGame, path: str) -> list[GameOption]:
    """Investing n units uses the node reached after n - 1 steps of ``path``."""
    stars = stars_along(path)
    return [
        node_option(game, step_node(game, n - 1, stars[n - 1]), f"n={n}")
        for n in range(1, game.steps + 2)
    ]


def step_final_stage(
    path: str, pref: Preference, game: StepGame | None = None, base_wealth: float = 0.0
) -> GameOption:
    """Final-stage choice of one agent along ``path``; ties go to more units."""
    game = game or StepGame()
    options = final_stage_options(game, path)
    values = [
        float(
            two_point_eu(
                pref,
                float(o.p),
                base_wealth + float(o.win),
                base_wealth + float(o.lose),
                normalized=True,
            )
        )
        for o in options
    ]
    best = choose_last_best(np.array([values]))[0]
    return options[int(best)]


def _simulate_steps(
    game: StepGame, population: AgentPopulation, averse: NDArray[np.bool_]
) -> list[ChoiceRecord]:
    n = len(population)
    paths = myopic_paths(game, population)

    leaves = enumerate_options(game)
    leaf_eu = population_eu(population, *option_arrays(leaves))
    full = choose_first_best(leaf_eu)

    final = [final_stage_options(game, path) for path in paths]
    p = np.array([[float(o.p) for o in row] for row in final])
    win = np.array([[float(o.win) for o in row] for row in final])
    lose = np.array([[float(o.lose) for o in row] for row in final])
    final_eu = population_eu(population, p, win, lose)
    picks = choose_last_best(final_eu)
    chosen_eu = raw_eu(population, final_eu)[np.arange(n), picks]
    return [
        ChoiceRecord(
            agent_id=i,
            game=game.kind,
            option=paths[i],
            invested=final[i][picks[i]].invested,
            eu=float(chosen_eu[i]),
            full_path=leaves[full[i]].label,
            probability_picks=paths[i].count(PROBABILITY_STEP),
            risk_averse=bool(averse[i]),
        )
        for i in range(n)
    ]


def invested_levels(game: ProbabilityGame | RewardGame | StepGame) -> list[int]:
    """Every amount an agent can end up investing in ``game``."""
    if isinstance(game, StepGame):
        return [game.unit * n for n in range(1, game.steps + 2)]
    return [o.invested for o in enumerate_options(game)]


def summarize(
    records: list[ChoiceRecord], game: ProbabilityGame | RewardGame | StepGame
) -> GameSummary:
    """Shares per invested amount, dispersion and corner mass of one game's records."""
    if not records:
        raise ArgumentError("no records to summarize")
    invested = np.array([r.invested for r in records], dtype=float)
    counts = Counter(r.invested for r in records)
    total = len(records)
    summary = {
        "game": game.kind,
        "agents": total,
        "shares": {level: counts.get(level, 0) / total for level in invested_levels(game)},
        "mean_invested": float(invested.mean()),
        "variance": float(invested.var()),
        "corner_mass": float(np.isin(invested, CORNER_AMOUNTS).mean()),
    }
    if any(r.risk_averse is not None for r in records):
        summary["risk_averse_agents"] = sum(bool(r.risk_averse) for r in records)
    if isinstance(game, StepGame):
        summary["branch_shares"] = step_branch_shares(records)
        summary["paths_agree"] = sum(r.full_path == r.option for r in records) / total
        summary["note"] = STEP_FINAL_STAGE_NOTE
    return GameSummary(**summary)


def simulate(
    game: ProbabilityGame | RewardGame | StepGame, population: AgentPopulation
) -> SimulationResult:
    """Every agent picks its expected-utility maximizing option.

    Records also carry each agent's risk-aversion label from the elicitation menu.
    """
    averse = risk_averse_labels(population)
    if isinstance(game, StepGame):
        records = _simulate_steps(game, population, averse)
    else:
        records = _simulate_options(game, population, averse)
    logger.info("simulated %d agents in the %s game", len(population), game.kind)
    return SimulationResult(records=records, summary=summarize(records, game))


def step_branch_shares(records: list[ChoiceRecord]) -> dict[int, float]:
    """Share of agents by number of probability steps taken (0 .. steps)."""
    picks = [r.probability_picks for r in records if r.probability_picks is not None]
    if not picks:
        raise ArgumentError("branch shares need step-game records")
    steps = max(len(r.option) for r in records)
    counts = Counter(picks)
    return {k: counts.get(k, 0) / len(picks) for k in range(steps + 1)}


def probability_branch_share(records: list[ChoiceRecord]) -> float:
    """Fraction of all step decisions that took the extra star."""
    total = sum(len(r.option) for r in records)
    return sum(r.probability_picks or 0 for r in records) / total


class DispersionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    variance_probability: float
    variance_reward: float
    levene_w: float
    levene_p: float
    share_differences: dict[int, float]  # probability-game share minus reward-game share
    corner_mass_difference: float
    risk_averse_agents: int = 0
    risk_averse_share_differences: dict[int, float] | None = None  # None if nobody is labelled


def _share_differences(a: NDArray[np.float64], b: NDArray[np.float64]) -> dict[int, float]:
    levels = sorted(set(a.astype(int)) | set(b.astype(int)))
    return {level: float(np.mean(a == level) - np.mean(b == level)) for level in levels}


def dispersion_compare(
    records_prob: list[ChoiceRecord], records_reward: list[ChoiceRecord]
) -> DispersionReport:
    """Contrast the spread of invested amounts between two games played by the same agents.

    Share differences are also reported for the agents the elicitation menu
    labels risk averse; labels are read from the probability-game records.
    """
    ids_prob = sorted(r.agent_id for r in records_prob)
    ids_reward = sorted(r.agent_id for r in records_reward)
    if not ids_prob or ids_prob != ids_reward:
        raise ArgumentError("both record sets must cover the same agents")
    records_prob = sorted(records_prob, key=lambda r: r.agent_id)
    records_reward = sorted(records_reward, key=lambda r: r.agent_id)
    a = np.array([r.invested for r in records_prob], dtype=float)
    b = np.array([r.invested for r in records_reward], dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        w, p_value = stats.levene(a, b, center="mean")
    if not np.isfinite(w):
        # both samples constant
        w, p_value = 0.0, 1.0

    averse = np.array([bool(r.risk_averse) for r in records_prob])
    subset = _share_differences(a[averse], b[averse]) if averse.any() else None
    return DispersionReport(
        variance_probability=float(a.var()),
        variance_reward=float(b.var()),
        levene_w=float(w),
        levene_p=float(p_value),
        share_differences=_share_differences(a, b),
        corner_mass_difference=float(
            np.isin(a, CORNER_AMOUNTS).mean() - np.isin(b, CORNER_AMOUNTS).mean()
        ),
        risk_averse_agents=int(averse.sum()),
        risk_averse_share_differences=subset,
    )


def risk_elicitation_row(pref: Preference, base_wealth: float = 0.0) -> int | None:
    """First row of the menu where the safe amount beats a 50/50 shot at the prize.

    Row r offers 100 (r - 1) CZK for sure; ``None`` if the agent never switches.
    """
    lottery_eu = float(
        two_point_eu(
            pref, 0.5, base_wealth + ELICITATION_PRIZE, base_wealth, normalized=True
        )
    )
    for row in range(1, ELICITATION_ROWS + 1):
        safe = base_wealth + ELICITATION_STEP * (row - 1)
        if float(pref.u_normalized(safe, "safe")) > lottery_eu:
            return row
    return None


def is_risk_averse(pref: Preference, base_wealth: float = 0.0) -> bool:
    """Switching before the risk-neutral row marks an agent as risk averse."""
    row = risk_elicitation_row(pref, base_wealth)
    return row is not None and row < ELICITATION_NEUTRAL_ROW


def switch_rows(population: AgentPopulation) -> NDArray[np.int64]:
    """``risk_elicitation_row`` for every agent at once; 0 where an agent never switches."""
    safe = ELICITATION_STEP * np.arange(ELICITATION_ROWS, dtype=float)
    lottery = population_eu(population, [0.5], [float(ELICITATION_PRIZE)], [0.0])
    sure = population_utility(population, population.wealth[:, None] + safe[None, :])
    switches = sure > lottery
    return np.where(switches.any(axis=1), np.argmax(switches, axis=1) + 1, 0)


def risk_averse_labels(population: AgentPopulation) -> NDArray[np.bool_]:
    rows = switch_rows(population)
    return (rows > 0) & (rows < ELICITATION_NEUTRAL_ROW)


CHOICE_COLUMNS = ["agent_id", "game", "option", "invested", "eu", "risk_averse"]


def write_choices_csv(records: list[ChoiceRecord], path: Path) -> Path:
    """One row per record; ``risk_averse`` is blank for records built without labels."""
    frame = pd.DataFrame(
        [r.model_dump(include=set(CHOICE_COLUMNS)) for r in records], columns=CHOICE_COLUMNS
    )
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info("wrote %d choices to %s", len(frame), path)
    return path


def write_summary_json(
    summaries: list[GameSummary],
    path: Path,
    dispersion: DispersionReport | None = None,
    config: PopulationConfig | None = None,
    run: dict | None = None,
) -> Path:
    """Game summaries plus the population and run settings that produced them."""
    document = {
        "config": run,
        "population": config.model_dump(mode="json") if config else None,
        "games": [s.model_dump(mode="json") for s in summaries],
        "dispersion": dispersion.model_dump(mode="json") if dispersion else None,
    }
    Path(path).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
    logger.info("wrote summary to %s", path)
    return path
