"""Derivative-free optimizer portfolio and the run harness.

Thirteen canonical configurations share one entry point, ``run``: each
algorithm consumes evaluations from a counting objective until the budget
error fires, and the improvement trajectory recorded by the counter becomes
the run log.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..coverage import BudgetExhaustedError, DivergenceError, EvaluationCounter
from ..runlog import RunTrajectory
from . import cmaes, local, population

DIMENSION_DEFAULT = 15

CMA_VARIANTS = {
    "00000000000": {},
    "00100001000": {"mirrored_pairwise": True},
    "01000000000": {"elitist": True},
    "10000000000": {"active": True},
    "11000000002": {"active": True, "elitist": True, "bipop": True},
}

PORTFOLIO_NAMES = (
    "RandomSearch",
    "SobolSearch",
    "DE",
    "DE_2500_chile",
    "NelderMead",
    "Powell",
    "LBFGSB",
    "PSO",
    "CMA_00000000000",
    "CMA_00100001000",
    "CMA_01000000000",
    "CMA_10000000000",
    "CMA_11000000002",
)


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    hyperparameters: dict = field(default_factory=dict)
    seedable: bool = True


def cma_flags(name: str) -> dict:
    """Module flags for a CMA_<digits> portfolio name."""
    if not name.startswith("CMA_"):
        raise ValueError(f"not a CMA configuration name: {name!r}")
    digits = name[4:]
    try:
        return dict(CMA_VARIANTS[digits])
    except KeyError:
        raise ValueError(
            f"unsupported CMA module string {digits!r}; supported: "
            f"{sorted(CMA_VARIANTS)}") from None


def _make_spec(name: str) -> AlgorithmSpec:
    if name == "DE":
        hp = {"popsize": 15, "mutation": (0.5, 1.0), "recombination": 0.7}
    elif name == "DE_2500_chile":
        hp = {"popsize": 6, "mutation": 0.1, "recombination": 0.58}
    elif name == "LBFGSB":
        hp = {"fd_step": 0.01}
    elif name == "PSO":
        hp = {"swarm": 10, "inertia": 0.7298,
              "cognitive": 1.49618, "social": 1.49618}
    elif name.startswith("CMA_"):
        hp = cma_flags(name)
    else:
        hp = {}
    return AlgorithmSpec(name=name, hyperparameters=hp)


def portfolio() -> list[AlgorithmSpec]:
    """The thirteen canonical algorithm configurations, in canonical order."""
    return [_make_spec(n) for n in PORTFOLIO_NAMES]


def get_spec(name: str) -> AlgorithmSpec:
    if name not in PORTFOLIO_NAMES:
        raise ValueError(f"unknown algorithm {name!r}; known: {list(PORTFOLIO_NAMES)}")
    return _make_spec(name)


def _dispatch(name: str):
    if name == "RandomSearch":
        return population.random_search
    if name == "SobolSearch":
        return population.sobol_search
    if name in ("DE", "DE_2500_chile"):
        return population.differential_evolution
    if name == "NelderMead":
        return local.nelder_mead
    if name == "Powell":
        return local.powell
    if name == "LBFGSB":
        return local.lbfgsb
    if name == "PSO":
        return population.particle_swarm
    if name.startswith("CMA_"):
        return cmaes.cma_es
    raise ValueError(f"unknown algorithm {name!r}")


@dataclass
class RunResult:
    algorithm: str
    instance: str
    seed: int
    budget: int
    trajectory: RunTrajectory | None
    best_value: float
    best_vector: np.ndarray | None
    evaluations_used: int
    events: list
    diagnostic: str | None = None


def run(spec: AlgorithmSpec, objective: EvaluationCounter, budget: int,
        seed: int, dim: int = DIMENSION_DEFAULT) -> RunResult:
    """Execute one seeded run of an algorithm against a counting objective.

    The counter must either carry the same budget or none (in which case it
    adopts this one).  The algorithm runs until the budget error; a NaN
    objective aborts the run and is reported as a diagnostic instead.
    """
    if objective.budget is None:
        objective.budget = budget
    elif objective.budget != budget:
        raise ValueError(f"counter budget {objective.budget} != run budget {budget}")
    if objective.count:
        raise ValueError("counter has already been used")

    algo_fn = _dispatch(spec.name)
    rng = np.random.default_rng(seed)
    diagnostic = None
    try:
        algo_fn(objective, budget, rng, dim, **spec.hyperparameters)
    except BudgetExhaustedError:
        pass
    except DivergenceError as e:
        diagnostic = str(e)

    if objective.improvements:
        trajectory = RunTrajectory(
            algorithm=spec.name, instance=objective.name or "unknown",
            seed=seed, budget=budget, dim=dim,
            points=list(objective.improvements)).validate()
    else:
        trajectory = None
    return RunResult(
        algorithm=spec.name, instance=objective.name or "unknown", seed=seed,
        budget=budget, trajectory=trajectory, best_value=objective.best_value,
        best_vector=objective.best_vector,
        evaluations_used=objective.count, events=list(objective.events),
        diagnostic=diagnostic)
