"""Epsilon sweeps, minimal-iteration search and power-law fits.

A sweep point draws ``trials`` fixture functions at distance ``ceil(eps*2**n)``
from the affine set, then searches for the smallest iteration count ``t`` at
which the tester's empirical rejection rate reaches the target. Every random
draw is keyed by ``(seed, eps index, trial index, purpose, t)``, so results do
not depend on how points are scheduled across worker processes.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import binomtest

from .boolean_core import (
    TruthTable,
    far_threshold,
    make_bent,
    max_planted_distance,
    nonlinearity,
    plant_distance,
    random_function,
)
from .testers import (
    DEFAULT_TARGET,
    Fixed,
    PaperEpsilon,
    Verdict,
    blr_test,
    dj_repetition_test,
    exact_algorithm2_error,
    exact_algorithm3_success,
    grover_test,
)

log = logging.getLogger(__name__)

ALGORITHMS = ("blr", "dj", "grover")
POLICIES = ("exact_theta", "paper_epsilon")
DEFAULT_GRID = (0.25, 0.177, 0.125, 0.088, 0.0625, 0.044, 0.031, 0.022, 0.0156)
CSV_COLUMNS = ("epsilon", "t_star", "success_rate", "mean_queries", "wilson_low", "wilson_high")

_FIXTURE_TAG = 0
_TESTER_TAG = 1


class InfeasibleConfig(ValueError):
    """The configuration asks for something the fixtures cannot provide."""


# --- configuration ----------------------------------------------------------

@dataclass(frozen=True)
class Fixture:
    """Fixture family: ``planted``, ``affine``, ``bent`` or ``random-far``.

    ``omega``/``a0`` pin the planted affine function; ``None`` draws them per
    trial.
    """

    kind: str = "planted"
    omega: int | None = None
    a0: int | None = None

    @classmethod
    def parse(cls, value) -> "Fixture":
        if isinstance(value, Fixture):
            return value
        if isinstance(value, dict):
            return cls(value.get("kind", "planted"), value.get("omega"), value.get("a0"))
        parts = str(value).split(":")
        kind = parts[0]
        if kind in ("planted", "affine") and len(parts) == 3:
            return cls(kind, int(parts[1]), int(parts[2]))
        if len(parts) != 1:
            raise ValueError(f"bad fixture spec {value!r}")
        return cls(kind)

    def __str__(self) -> str:
        if self.omega is None:
            return self.kind
        return f"{self.kind}:{self.omega}:{self.a0}"


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 12
    epsilons: tuple[float, ...] = DEFAULT_GRID
    trials: int = 2000
    target: float = DEFAULT_TARGET
    algorithm: str = "grover"
    policy: str = "exact_theta"
    seed: int = 0
    fixture: Fixture = field(default_factory=Fixture)
    t_max: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "fixture", Fixture.parse(self.fixture))
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        if self.fixture.kind not in ("planted", "affine", "bent", "random-far"):
            raise ValueError(f"unknown fixture {self.fixture.kind!r}")
        if not 0.5 < self.target < 1.0:
            raise ValueError("target must lie in (1/2, 1)")
        if not 1 <= self.n <= 24:
            raise ValueError("n must lie in [1, 24]")
        if not self.epsilons:
            raise ValueError("no epsilons given")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["epsilons"] = list(self.epsilons)
        d["fixture"] = str(self.fixture)
        return d

    def check_feasible(self) -> None:
        if self.trials <= 0:
            raise InfeasibleConfig("trials must be positive")
        for eps in self.epsilons:
            if not 0.0 < eps < 0.5:
                raise InfeasibleConfig(f"epsilon {eps} outside (0, 1/2)")
            k = far_threshold(self.n, eps)
            if self.fixture.kind == "planted" and k > max_planted_distance(self.n):
                raise InfeasibleConfig(
                    f"epsilon {eps} needs {k} flips, planted fixtures allow at most "
                    f"{max_planted_distance(self.n)} at n={self.n}"
                )
            if self.fixture.kind == "bent":
                if self.n % 2:
                    raise InfeasibleConfig("bent fixture needs even n")
                if nonlinearity(make_bent(self.n)) < k:
                    raise InfeasibleConfig(f"bent function at n={self.n} is not {eps}-far")
            if self.fixture.kind == "random-far" and k > (1 << (self.n - 1)) - (1 << (self.n // 2)):
                raise InfeasibleConfig(f"random functions are practically never {eps}-far at n={self.n}")


# --- results ----------------------------------------------------------------

@dataclass
class PointResult:
    epsilon: float
    t_star: int | None
    success_rate: float
    mean_queries: float
    wilson_low: float
    wilson_high: float
    trials: int
    exact_success: float | None = None

    def csv_row(self) -> list[str]:
        return [
            repr(self.epsilon),
            "" if self.t_star is None else str(self.t_star),
            repr(self.success_rate),
            repr(self.mean_queries),
            repr(self.wilson_low),
            repr(self.wilson_high),
        ]


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: list[PointResult]
    fitted_exponent: float | None = None
    fit_residual: float | None = None
    warnings: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p in self.points:
            w.writerow(p.csv_row())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "points": [asdict(p) for p in self.points],
            "fitted_exponent": self.fitted_exponent,
            "fit_residual": self.fit_residual,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def fit_points(self) -> list[tuple[float, int]]:
        return [(p.epsilon, p.t_star) for p in self.points if p.t_star is not None]


# --- seeding and fixtures ---------------------------------------------------

def trial_rng(seed: int, eps_index: int, trial: int, tag: int, t: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, eps_index, trial, tag, t]))


def trial_seed(seed: int, eps_index: int, trial: int, t: int) -> int:
    ss = np.random.SeedSequence([seed, eps_index, trial, _TESTER_TAG, t])
    return int(ss.generate_state(1, np.uint64)[0])


def make_fixture(config: ExperimentConfig, eps: float, rng: np.random.Generator) -> TruthTable:
    n = config.n
    fx = config.fixture
    if fx.kind == "bent":
        return make_bent(n)
    if fx.kind == "random-far":
        k = far_threshold(n, eps)
        while True:
            f = random_function(n, rng)
            if nonlinearity(f) >= k:
                return f
    omega = int(rng.integers(1 << n)) if fx.omega is None else fx.omega
    a0 = int(rng.integers(2)) if fx.a0 is None else fx.a0
    k = 0 if fx.kind == "affine" else far_threshold(n, eps)
    return plant_distance(n, omega, a0, k, rng)


def _run_tester(config: ExperimentConfig, f: TruthTable, eps: float, t: int, seed: int):
    if config.algorithm == "blr":
        return blr_test(f, t, seed)
    if config.algorithm == "dj":
        return dj_repetition_test(f, t, seed)
    policy = PaperEpsilon(eps) if config.policy == "paper_epsilon" else Fixed(t)
    return grover_test(f, policy, seed)


def _exact_success(config: ExperimentConfig, fixtures: Sequence[TruthTable], eps: float, t: int):
    if config.algorithm == "dj":
        return float(np.mean([1.0 - exact_algorithm2_error(f, t) for f in fixtures]))
    if config.algorithm == "grover":
        arg = PaperEpsilon(eps) if config.policy == "paper_epsilon" else t
        return float(np.mean([exact_algorithm3_success(f, arg) for f in fixtures]))
    return None


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


# --- minimal t search -------------------------------------------------------

def find_t_star(ok: Callable[[int], bool], t_min: int, t_max: int) -> int | None:
    """Smallest ``t`` in ``[t_min, t_max]`` with ``ok(t)``, by doubling then bisection.

    Assumes ``ok`` switches from False to True once; returns None if ``t_max``
    still fails.
    """
    if ok(t_min):
        return t_min
    bad = t_min
    good = max(1, 2 * t_min)
    while not ok(good):
        if good >= t_max:
            return None
        bad, good = good, min(2 * good, t_max)
    while good - bad > 1:
        mid = (good + bad) // 2
        if ok(mid):
            good = mid
        else:
            bad = mid
    return good


def run_point(config: ExperimentConfig, eps_index: int) -> PointResult:
    eps = config.epsilons[eps_index]
    fixtures = [
        make_fixture(config, eps, trial_rng(config.seed, eps_index, i, _FIXTURE_TAG))
        for i in range(config.trials)
    ]
    cache: dict[int, tuple[int, float]] = {}

    def evaluate(t: int) -> tuple[int, float]:
        if t not in cache:
            hits = 0
            queries = 0
            for i, f in enumerate(fixtures):
                report = _run_tester(config, f, eps, t, trial_seed(config.seed, eps_index, i, t))
                hits += report.verdict is Verdict.NOT_AFFINE
                queries += report.queries
            cache[t] = (hits, queries / config.trials)
        return cache[t]

    if config.algorithm == "grover" and config.policy == "paper_epsilon":
        t_star = PaperEpsilon(eps).iterations(None, 0)
        t_eval = t_star
    else:
        t_min = 0 if config.algorithm == "grover" else 1
        t_star = find_t_star(
            lambda t: evaluate(t)[0] >= config.target * config.trials, t_min, config.t_max
        )
        t_eval = config.t_max if t_star is None else t_star
    hits, mean_queries = evaluate(t_eval)
    low, high = wilson_interval(hits, config.trials)
    return PointResult(
        epsilon=eps,
        t_star=t_star,
        success_rate=hits / config.trials,
        mean_queries=mean_queries,
        wilson_low=low,
        wilson_high=high,
        trials=config.trials,
        exact_success=_exact_success(config, fixtures, eps, t_eval),
    )


def worker_count() -> int:
    env = os.environ.get("QLINT_THREADS")
    if env:
        return max(1, int(env))
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def run_sweep(config: ExperimentConfig, workers: int | None = None) -> SweepResult:
    config.check_feasible()
    workers = worker_count() if workers is None else workers
    idx = range(len(config.epsilons))
    if workers > 1 and len(config.epsilons) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(config.epsilons))) as pool:
            points = list(pool.map(run_point, [config] * len(idx), idx))
    else:
        points = [run_point(config, i) for i in idx]

    result = SweepResult(config, points)
    order = sorted((p for p in points if p.t_star is not None), key=lambda p: p.epsilon)
    # larger epsilon should never need more iterations; noise can break this locally
    for small, large in zip(order, order[1:]):
        if large.t_star > small.t_star:
            msg = f"t_star rises from {small.t_star} at eps={small.epsilon} to {large.t_star} at eps={large.epsilon}"
            log.warning(msg)
            result.warnings.append(msg)
    try:
        result.fitted_exponent, result.fit_residual = fit_exponent(result.fit_points())
    except ValueError as exc:
        result.warnings.append(f"no fit: {exc}")
    return result


# --- fitting ----------------------------------------------------------------

def fit_exponent(points: Sequence[tuple[float, float]], offset: float = 1.0) -> tuple[float, float]:
    """Least-squares slope of ``log(t + offset)`` against ``log(1/eps)``.

    With the default ``offset=1`` the fitted quantity is the number of rounds
    including the reference round, proportional to the worst-case query count
    of the DJ and Grover testers and defined at ``t = 0``. Pass ``offset=0``
    to fit ``t`` itself. Returns ``(slope, rms residual)``.
    """
    if len(points) < 4:
        raise ValueError(f"need at least 4 points, got {len(points)}")
    eps = np.array([p[0] for p in points], dtype=float)
    cost = np.array([p[1] for p in points], dtype=float) + offset
    if np.any(eps <= 0) or np.any(cost <= 0):
        raise ValueError("epsilons and costs must be positive")
    if eps.max() / eps.min() < 10.0 * (1 - 1e-9):
        raise ValueError("epsilons must span at least one decade")
    x = np.log(1.0 / eps)
    y = np.log(cost)
    slope, intercept = np.polyfit(x, y, 1)
    residual = math.sqrt(float(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), residual


def read_sweep_csv(text: str) -> list[tuple[float, int]]:
    rows = csv.DictReader(io.StringIO(text))
    if rows.fieldnames is None or list(rows.fieldnames) != list(CSV_COLUMNS):
        raise ValueError(f"expected CSV columns {','.join(CSV_COLUMNS)}")
    return [(float(r["epsilon"]), int(r["t_star"])) for r in rows if r["t_star"]]


def calibrate_blr_constant(result: SweepResult) -> float:
    """Infimum of ``c`` with ``ceil(c/eps) >= t_star`` on every point of a BLR sweep.

    Any ``c`` strictly above the returned value reaches the target on the grid.
    """
    pts = result.fit_points()
    if not pts:
        raise ValueError("sweep has no points that reached the target")
    return max((t - 1) * eps for eps, t in pts)
