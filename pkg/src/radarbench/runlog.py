"""Run trajectories: improvements-only logs, file format, and analytics.

A trajectory records best-so-far fitness at every strict improvement, plus
the very first evaluation.  On disk:

    # algo=DE instance=alpha0 seed=3 budget=2500 dim=15
    1 27000.0
    7 26423.0
    ...

Logs live under <root>/<instance>/<algo>/run_<seed>.dat.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .util import lower_median


class TrajectoryFormatError(ValueError):
    """Malformed or inconsistent trajectory data."""


@dataclass
class RunTrajectory:
    algorithm: str
    instance: str
    seed: int
    budget: int
    points: list[tuple[int, float]] = field(default_factory=list)
    dim: int = 15

    def validate(self) -> "RunTrajectory":
        if not self.points:
            raise TrajectoryFormatError("trajectory has no points")
        ev, vals = zip(*self.points)
        if ev[0] != 1:
            raise TrajectoryFormatError(
                f"first point must be at evaluation 1, got {ev[0]}")
        for a, b in zip(ev, ev[1:]):
            if b <= a:
                raise TrajectoryFormatError(
                    f"evaluations must strictly increase ({a} then {b})")
        for a, b in zip(vals, vals[1:]):
            if not b < a:
                raise TrajectoryFormatError(
                    f"values must strictly decrease ({a} then {b})")
        if self.budget < ev[-1]:
            raise TrajectoryFormatError(
                f"last improvement at evaluation {ev[-1]} exceeds budget {self.budget}")
        return self

    @property
    def final_value(self) -> float:
        return self.points[-1][1]


def dumps_run(traj: RunTrajectory, validate: bool = True) -> str:
    if validate:
        traj.validate()
    lines = [f"# algo={traj.algorithm} instance={traj.instance} "
             f"seed={traj.seed} budget={traj.budget} dim={traj.dim}"]
    for ev, val in traj.points:
        lines.append(f"{ev} {float(val)!r}")
    return "\n".join(lines) + "\n"


def loads_run(text: str, source: str = "<string>") -> RunTrajectory:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise TrajectoryFormatError(f"{source}:1: missing header line")
    fields = {}
    for tok in lines[0][2:].split():
        if "=" not in tok:
            raise TrajectoryFormatError(f"{source}:1: bad header token {tok!r}")
        k, _, v = tok.partition("=")
        fields[k] = v
    try:
        traj = RunTrajectory(
            algorithm=fields["algo"], instance=fields["instance"],
            seed=int(fields["seed"]), budget=int(fields["budget"]),
            dim=int(fields.get("dim", 15)))
    except (KeyError, ValueError) as e:
        raise TrajectoryFormatError(f"{source}:1: bad header ({e})") from None

    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TrajectoryFormatError(
                f"{source}:{lineno}: expected '<evaluation> <value>'")
        try:
            ev = int(parts[0])
            val = float(parts[1])
        except ValueError:
            raise TrajectoryFormatError(
                f"{source}:{lineno}: non-numeric point") from None
        traj.points.append((ev, val))

    try:
        traj.validate()
    except TrajectoryFormatError as e:
        raise TrajectoryFormatError(f"{source}: {e}") from None
    return traj


def run_path(root: str | os.PathLike, instance: str, algorithm: str, seed: int) -> str:
    return os.path.join(os.fspath(root), instance, algorithm, f"run_{seed}.dat")


def write_run(traj: RunTrajectory, root: str | os.PathLike) -> str:
    """Write under the standard layout; atomic replace so readers never see
    a half-written file (an interrupted write leaves only a .partial)."""
    path = run_path(root, traj.instance, traj.algorithm, traj.seed)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tmp = path + ".partial"
    with open(tmp, "w", encoding="ascii") as fh:
        fh.write(dumps_run(traj))
    os.replace(tmp, path)
    return path


def read_run(path: str | os.PathLike) -> RunTrajectory:
    with open(os.fspath(path), "r", encoding="ascii") as fh:
        return loads_run(fh.read(), source=os.fspath(path))


def scan_logs(root: str | os.PathLike):
    """Yield (instance, algorithm, seed, path) for every complete log file."""
    root = os.fspath(root)
    if not os.path.isdir(root):
        return
    for instance in sorted(os.listdir(root)):
        idir = os.path.join(root, instance)
        if not os.path.isdir(idir):
            continue
        for algo in sorted(os.listdir(idir)):
            adir = os.path.join(idir, algo)
            if not os.path.isdir(adir):
                continue
            for fn in sorted(os.listdir(adir)):
                if fn.startswith("run_") and fn.endswith(".dat"):
                    try:
                        seed = int(fn[4:-4])
                    except ValueError:
                        continue
                    yield instance, algo, seed, os.path.join(adir, fn)


# ---------------------------------------------------------------------------
# Analytics
# ---------------------------------------------------------------------------

def value_at(traj: RunTrajectory, budget: int) -> float:
    """Best-so-far value after ``budget`` evaluations (step function).

    Before the first recorded point the run has seen nothing: +inf.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    best = math.inf
    for ev, val in traj.points:
        if ev > budget:
            break
        best = val
    return best


def median_trajectory(trajs: list[RunTrajectory], grid: list[int]) -> list[tuple[int, float]]:
    """Lower-median best-so-far across runs at each grid budget."""
    if not trajs:
        raise ValueError("no trajectories")
    out = []
    for b in grid:
        out.append((b, lower_median(value_at(t, b) for t in trajs)))
    return out


def crossing_point(a: list[tuple[int, float]], b: list[tuple[int, float]],
                   ) -> int | None:
    """First grid budget where the sign of (a - b) flips from its initial sign.

    Both series must share the same budget grid.  Zero differences are
    neutral: they neither set the initial sign nor flip it.  None when the
    sign never flips.
    """
    if [e for e, _ in a] != [e for e, _ in b]:
        raise ValueError("series are on different budget grids")
    initial = 0
    for (ev, va), (_, vb) in zip(a, b):
        diff = va - vb
        if diff == 0 or math.isnan(diff):
            continue
        sign = 1 if diff > 0 else -1
        if initial == 0:
            initial = sign
        elif sign != initial:
            return ev
    return None


def histogram(values, edges) -> np.ndarray:
    """Counts of ``values`` in the half-open bins defined by ``edges``
    (last bin closed), as np.histogram does with explicit edges."""
    counts, _ = np.histogram(np.asarray(list(values), dtype=float), bins=edges)
    return counts


def fixed_budget_values(runs: dict, budget: int) -> dict:
    """Map (instance, algorithm) -> list of value_at(budget) in seed order.

    ``runs`` maps (instance, algorithm) -> list of RunTrajectory.
    """
    out = {}
    for key, trajs in runs.items():
        ordered = sorted(trajs, key=lambda t: t.seed)
        out[key] = [value_at(t, budget) for t in ordered]
    return out


def load_runs(root: str | os.PathLike, budget: int | None = None) -> dict:
    """Read every log under root into {(instance, algorithm): [RunTrajectory]}.

    With ``budget`` given, only logs recorded with that budget are kept.
    """
    runs: dict = {}
    for instance, algo, seed, path in scan_logs(root):
        traj = read_run(path)
        if budget is not None and traj.budget != budget:
            continue
        runs.setdefault((instance, algo), []).append(traj)
    return runs


def export_fixed_budget_csv(runs: dict, budgets: list[int], path: str | os.PathLike) -> None:
    """CSV: instance,algo,seed,budget,value for each run and budget."""
    with open(os.fspath(path), "w", encoding="ascii") as fh:
        fh.write("instance,algo,seed,budget,value\n")
        for (instance, algo) in sorted(runs):
            for traj in sorted(runs[(instance, algo)], key=lambda t: t.seed):
                for b in budgets:
                    fh.write(f"{instance},{algo},{traj.seed},{b},"
                             f"{value_at(traj, b)!r}\n")
