"""Online plan -> drop -> return mission loop with ground-truth MI bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .deviation import DeviationModel, build_sample_set, sample_landing
from .errors import ConfigError, LogValidationError
from .gp import KernelModel, Position, delta_gain
from .planners import OBJECTIVES, CandidateSet, PlanState, plan_baseline, plan_random, plan_sumoss

__all__ = [
    "METHODS",
    "AreaSpec",
    "PlannerSpec",
    "MissionConfig",
    "MissionStep",
    "MissionLog",
    "center_index",
    "rng_stream",
    "plan_next",
    "run_mission",
    "evaluate_log",
]

METHODS = ("sumoss", "baseline", "random")
COINCIDENT_TOL = 1e-9
NUDGE = 1e-6

# spawn keys of the per-mission random streams
LANDING_STREAM, PLANNER_STREAM, RANDOM_STREAM = 0, 1, 2


@dataclass(frozen=True)
class AreaSpec:
    """Monitored rectangle and its candidate grid.

    ``layout="cell_center"`` puts candidates at the centers of a rows x cols
    partition; ``"edge"`` spaces them evenly including the boundary.
    """

    origin: tuple = (0.0, 0.0)
    width: float = 5.0
    height: float = 5.0
    rows: int = 5
    cols: int = 5
    layout: str = "cell_center"

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        if self.rows < 2 or self.cols < 2:
            raise ConfigError("grid dimensions must be at least 2x2")
        if not (self.width > 0 and self.height > 0):
            raise ConfigError("area width and height must be positive")
        if self.layout not in ("cell_center", "edge"):
            raise ConfigError(f"unknown grid layout {self.layout!r}")

    def axis(self, length: float, count: int) -> np.ndarray:
        if self.layout == "edge":
            return np.linspace(0.0, length, count)
        return (np.arange(count) + 0.5) * (length / count)

    def candidates(self) -> CandidateSet:
        xs = self.origin[0] + self.axis(self.width, self.cols)
        ys = self.origin[1] + self.axis(self.height, self.rows)
        pts = np.array([(x, y) for y in ys for x in xs])
        x0, y0 = self.origin
        return CandidateSet(pts, (x0, y0, x0 + self.width, y0 + self.height))

    @property
    def centroid(self) -> tuple[float, float]:
        return (self.origin[0] + self.width / 2, self.origin[1] + self.height / 2)


@dataclass(frozen=True)
class PlannerSpec:
    method: str = "sumoss"
    objective: str = "log"
    expectation_samples: int = 128
    reuse_samples: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown planner method {self.method!r}; expected one of {METHODS}")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"unknown objective {self.objective!r}; expected one of {OBJECTIVES}")
        if int(self.expectation_samples) < 1:
            raise ConfigError("expectation_samples must be >= 1")


@dataclass(frozen=True)
class MissionConfig:
    area: AreaSpec = field(default_factory=AreaSpec)
    kernel: KernelModel = field(default_factory=KernelModel)
    deviation: DeviationModel = field(default_factory=DeviationModel)
    planner: PlannerSpec = field(default_factory=PlannerSpec)
    n_max: int = 12
    seed: int = 0
    first_sensor: object = "center"

    def __post_init__(self):
        n_cand = self.area.rows * self.area.cols
        limit = (n_cand - 1) // 2
        if not 1 <= self.n_max <= limit:
            raise ConfigError(f"n_max must be in [1, {limit}] for {n_cand} candidates, got {self.n_max}")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.first_sensor != "center" and not (
            isinstance(self.first_sensor, int) and 0 <= self.first_sensor < n_cand
        ):
            raise ConfigError(f"first_sensor must be 'center' or a candidate index, got {self.first_sensor!r}")

    def with_method(self, method: str) -> "MissionConfig":
        return replace(self, planner=replace(self.planner, method=method))

    def with_weights(self, w1: float, w2: float) -> "MissionConfig":
        return replace(self, deviation=replace(self.deviation, w1=w1, w2=w2))


@dataclass
class MissionStep:
    n: int
    target_index: int
    target: tuple
    landing: tuple
    planner_gain: float | None
    true_gain: float | None
    mi_cumulative: float
    perturbed: bool = False


@dataclass
class MissionLog:
    config: MissionConfig
    steps: list = field(default_factory=list)

    @property
    def method(self) -> str:
        return self.config.planner.method

    @property
    def seed(self) -> int:
        return self.config.seed

    def curve(self) -> np.ndarray:
        return np.array([s.mi_cumulative for s in self.steps])

    @property
    def targets(self) -> list[int]:
        return [s.target_index for s in self.steps]


def center_index(V: CandidateSet, centroid) -> int:
    d = np.sum((V.positions - np.asarray(centroid)) ** 2, axis=1)
    return int(np.flatnonzero(d <= d.min() + 1e-12)[0])


def rng_stream(seed: int, stream: int, step: int) -> np.random.Generator:
    """Independent generator for one (stream, step) of a mission.

    Landing draws depend only on (seed, step), so different planners run on
    the same seed see the same landing noise.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, step)))


def _separate(landing: Position, landed: list) -> tuple[Position, bool]:
    """Nudge ``landing`` off any previous landing it coincides with."""
    moved = False
    while any(math.hypot(landing.x - p.x, landing.y - p.y) <= COINCIDENT_TOL for p in landed):
        landing = Position(landing.x + NUDGE, landing.y)
        moved = True
    return landing, moved


def _true_gain(V: CandidateSet, chosen: list[int], landed: list, kernel: KernelModel) -> float:
    """Gain of the last landed sensor given the earlier landings and the untouched grid."""
    rest = [i for i in range(len(V)) if i not in set(chosen)]
    return delta_gain(landed[-1], landed[:-1], V.positions[rest], kernel)


def plan_next(config: MissionConfig, state: PlanState, V: CandidateSet | None = None, samples=None):
    """Next target index and planner gain (None for random) for ``state``."""
    V = V if V is not None else config.area.candidates()
    spec, step = config.planner, state.step + 1
    if spec.method == "baseline":
        return plan_baseline(state, V, config.kernel)
    if spec.method == "sumoss":
        return plan_sumoss(
            state,
            V,
            config.kernel,
            config.deviation,
            samples if samples is not None else spec.expectation_samples,
            seed=rng_stream(config.seed, PLANNER_STREAM, step),
            objective=spec.objective,
        )
    return plan_random(state, V, rng_stream(config.seed, RANDOM_STREAM, step)), None


def run_mission(config: MissionConfig) -> MissionLog:
    """Run one mission; fully determined by ``config`` (including its seed)."""
    V = config.area.candidates()
    kernel, dev, spec = config.kernel, config.deviation, config.planner
    log = MissionLog(config)
    state = PlanState()
    landed: list[Position] = []
    mi = 0.0
    shared = None
    if spec.method == "sumoss" and spec.reuse_samples:
        shared = build_sample_set(V.positions, dev, spec.expectation_samples, rng_stream(config.seed, PLANNER_STREAM, 0))

    for n in range(1, config.n_max + 1):
        if n == 1:
            first = config.first_sensor
            idx = center_index(V, config.area.centroid) if first == "center" else int(first)
            gain = None
        else:
            idx, gain = plan_next(config, state, V, shared)

        target = V.positions[idx]
        landing = sample_landing(target, dev, rng_stream(config.seed, LANDING_STREAM, n))
        landing, moved = _separate(landing, landed)
        state = state.add(idx)
        landed.append(landing)
        true_gain = None
        if n > 1:
            true_gain = _true_gain(V, list(state.chosen), landed, kernel)
            mi += true_gain
        log.steps.append(
            MissionStep(
                n=n,
                target_index=idx,
                target=(float(target[0]), float(target[1])),
                landing=(landing.x, landing.y),
                planner_gain=gain,
                true_gain=true_gain,
                mi_cumulative=mi,
                perturbed=moved,
            )
        )
    return log


def evaluate_log(log: MissionLog, kernel: KernelModel | None = None, check: bool = True) -> np.ndarray:
    """Recompute the MI curve ``MI(A_1..A_n)`` from the recorded landings.

    With ``check`` the result must match the stored curve within 1e-9.
    """
    kernel = kernel or log.config.kernel
    V = log.config.area.candidates()
    steps = log.steps
    if not steps:
        raise LogValidationError("mission log has no steps")
    if [s.n for s in steps] != list(range(1, len(steps) + 1)):
        raise LogValidationError("step numbers must run 1..n without gaps")
    if len(steps) > log.config.n_max:
        raise LogValidationError("more steps than n_max")
    chosen = [s.target_index for s in steps]
    if len(set(chosen)) != len(chosen) or any(not 0 <= i < len(V) for i in chosen):
        raise LogValidationError("target indices must be distinct candidate indices")
    for s in steps:
        if not np.allclose(V.positions[s.target_index], s.target, rtol=0, atol=1e-9):
            raise LogValidationError(f"step {s.n}: target position does not match candidate {s.target_index}")

    landed = [Position(*s.landing) for s in steps]
    curve = [0.0]
    for n in range(2, len(steps) + 1):
        curve.append(curve[-1] + _true_gain(V, chosen[:n], landed[:n], kernel))
    curve = np.array(curve)
    if check:
        stored = log.curve()
        if not np.all(np.abs(curve - stored) <= 1e-9):
            raise LogValidationError(f"stored MI curve deviates from recomputation by {np.max(np.abs(curve - stored)):.3e}")
        gains = np.array([0.0] + [s.true_gain for s in steps[1:]])
        if np.any(np.abs(np.cumsum(gains) - stored) > 1e-9):
            raise LogValidationError("stored cumulative MI is not the running sum of the step gains")
    return curve
