"""Command-line orchestration.

Subcommands cover the whole experiment chain: synthesize the instance set,
benchmark the portfolio over an (algorithm, instance, seed) grid with
resumable per-run log files, extract landscape features, compare algorithm
result samples pairwise, train and evaluate selectors, and serve one
instance over HTTP for interactive sessions.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ela, runlog, selector as sel, terrain
from .coverage import Instance, counting_objective
from .optimizers import PORTFOLIO_NAMES, get_spec, run
from .radar import RadarPhysics
from .util import lower_median

CENSUS_TARGET = {"flat": 36, "intermediate": 57, "mountainous": 60}

SELECT_COMPARATORS = ("VBS", "SBS", "CMA_00000000000", "S_radar", "S_DEM")


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------

def parse_seeds(spec: str) -> list[int]:
    """"0-29" or "1,4,7" -> list of ints."""
    seeds = []
    for part in spec.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    return seeds


def parse_algorithms(spec: str) -> list[str]:
    if spec == "all":
        return list(PORTFOLIO_NAMES)
    names = [s.strip() for s in spec.split(",") if s.strip()]
    for n in names:
        if n not in PORTFOLIO_NAMES:
            raise ValueError(f"unknown algorithm {n!r}")
    return names


def _load_physics(path: str | None) -> RadarPhysics:
    if path is None:
        return RadarPhysics()
    with open(path, "r", encoding="utf-8") as fh:
        return RadarPhysics(**json.load(fh))


def load_instances(manifest: terrain.Manifest) -> list[tuple[str, Instance]]:
    physics = _load_physics(manifest.physics_path)
    out = []
    for entry in manifest.entries:
        grid = terrain.load_grid(entry["grid_path"])
        out.append((entry["name"],
                    Instance(grid=grid, physics=physics, tau=manifest.tau)))
    return out


@dataclass
class ExperimentPlan:
    """One benchmarking grid: which algorithms run where, and how long."""

    manifest_path: str
    output_dir: str
    algorithms: list = field(default_factory=lambda: list(PORTFOLIO_NAMES))
    budget: int = 2500
    seeds: list = field(default_factory=lambda: list(range(30)))
    workers: int = 1

    def validate(self) -> "ExperimentPlan":
        if self.budget <= 0:
            raise ValueError(f"budget must be positive, got {self.budget}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if not self.algorithms:
            raise ValueError("no algorithms selected")
        for n in self.algorithms:
            if n not in PORTFOLIO_NAMES:
                raise ValueError(f"unknown algorithm {n!r}")
        return self


# ---------------------------------------------------------------------------
# gen-instances
# ---------------------------------------------------------------------------

def census_plan(tiles: int = 17) -> dict:
    """Tiles per class via largest remainder against the census target."""
    total = sum(CENSUS_TARGET.values())
    shares = {c: tiles * n / total for c, n in CENSUS_TARGET.items()}
    plan = {c: int(shares[c]) for c in terrain.TERRAIN_CLASSES}
    leftovers = sorted(terrain.TERRAIN_CLASSES,
                       key=lambda c: shares[c] - plan[c], reverse=True)
    for c in leftovers[:tiles - sum(plan.values())]:
        plan[c] += 1
    return plan


def cmd_gen_instances(out_dir: str, seed: int = 0, tiles: int = 17) -> str:
    """Write tiles x 9 instance grids plus a manifest; returns its path."""
    plan = census_plan(tiles)
    classes = [c for c in terrain.TERRAIN_CLASSES for _ in range(plan[c])]
    grids_dir = os.path.join(out_dir, "grids")
    os.makedirs(grids_dir, exist_ok=True)

    # one mask shared by every tile
    mask = terrain.subsample_mask(150, 150, seed=seed)
    entries = []
    census = {c: 0 for c in terrain.TERRAIN_CLASSES}
    for t, cls in enumerate(classes):
        tile_name = (terrain.TILE_NAMES[t] if t < len(terrain.TILE_NAMES)
                     else f"tile{t}")
        tile = terrain.generate_tile(seed * 100 + t, size=150, name=tile_name)
        rng = np.random.default_rng([seed, 3000 + t])
        for w, sq in enumerate(mask):
            name = f"{tile_name}{w}"
            grid = terrain.instance_from_window(tile, sq, cls, rng, name=name)
            path = os.path.join(grids_dir, name + ".asc")
            terrain.save_grid(grid, path)
            census[terrain.classify(grid)] += 1
            entries.append({"name": name, "grid_path": path, "class": cls})

    manifest_path = os.path.join(out_dir, "manifest.json")
    terrain.save_manifest(terrain.Manifest(entries=entries), manifest_path)
    counts = " ".join(f"{c}={census[c]}" for c in terrain.TERRAIN_CLASSES)
    print(f"wrote {len(entries)} instances ({counts}) -> {manifest_path}")
    return manifest_path


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _execute_run(task) -> tuple:
    """Worker: one (algorithm, instance, seed) cell; returns a result row."""
    (grid_path, name, tau, physics_path, algo, seed, budget, out_dir) = task
    grid = terrain.load_grid(grid_path)
    grid = terrain.ElevationGrid(grid.altitudes, grid.cell_size, name)
    instance = Instance(grid=grid, physics=_load_physics(physics_path), tau=tau)
    objective = counting_objective(instance, budget)
    result = run(get_spec(algo), objective, budget, seed)
    path = None
    if result.trajectory is not None:
        path = runlog.write_run(result.trajectory, out_dir)
    return name, algo, seed, result.best_value, path, result.diagnostic


def cmd_run(plan: ExperimentPlan) -> list[str]:
    """Execute the grid, skipping cells whose log file already exists."""
    plan.validate()
    manifest = terrain.load_manifest(plan.manifest_path)
    tasks = []
    for entry in manifest.entries:
        for algo in plan.algorithms:
            for seed in plan.seeds:
                if os.path.exists(runlog.run_path(
                        plan.output_dir, entry["name"], algo, seed)):
                    continue
                tasks.append((entry["grid_path"], entry["name"], manifest.tau,
                              manifest.physics_path, algo, seed, plan.budget,
                              plan.output_dir))

    written = []
    if plan.workers <= 1:
        results = map(_execute_run, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=plan.workers)
        results = pool.map(_execute_run, tasks)
    for name, algo, seed, best, path, diagnostic in results:
        if diagnostic:
            print(f"{name} {algo} seed={seed} FAILED: {diagnostic}",
                  file=sys.stderr)
        else:
            print(f"{name} {algo} seed={seed} best={best:g}")
        if path:
            written.append(path)
    if plan.workers > 1:
        pool.shutdown()
    return written


# ---------------------------------------------------------------------------
# features
# ---------------------------------------------------------------------------

def write_features_csv(rows, path: str) -> None:
    """rows: iterable of (instance, source, vector-of-33)."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "source", *ela.FEATURE_NAMES])
        for name, source, vec in rows:
            writer.writerow([name, source, *[repr(float(v)) for v in vec]])


def read_features_csv(path: str) -> dict:
    """-> {source: {instance: array of 33}}."""
    out: dict = {}
    with open(path, "r", encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[2:] != list(ela.FEATURE_NAMES):
            raise ValueError(f"{path}: unexpected feature columns")
        for row in reader:
            name, source = row[0], row[1]
            out.setdefault(source, {})[name] = np.array(
                [float(v) for v in row[2:]])
    return out


def cmd_features(manifest_path: str, out_csv: str, source: str,
                 reps: int = 100) -> str:
    if source not in ("radar", "dem"):
        raise ValueError(f"source must be 'radar' or 'dem', got {source!r}")
    manifest = terrain.load_manifest(manifest_path)
    rows = []
    for name, instance in load_instances(manifest):
        if source == "dem":
            vec = ela.features(ela.dem_design(instance.grid))
        else:
            reps_vecs = [ela.features(ela.sobol_design(instance, rep_seed=r))
                         for r in range(reps)]
            vec = ela.median_aggregate(reps_vecs)
        rows.append((name, source, vec))
        print(f"features {source} {name}")
    write_features_csv(rows, out_csv)
    return out_csv


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------

def cmd_stats(logs_dir: str, budget: int, out_csv: str) -> str:
    """Pairwise result-sample comparisons per instance, CSV of decisions."""
    runs = runlog.load_runs(logs_dir, budget)
    samples = runlog.fixed_budget_values(runs, budget)
    instances = sorted({inst for inst, _ in samples})
    with open(out_csv, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "algo_a", "algo_b",
                         "statistic", "critical", "reject"])
        for inst in instances:
            present = [a for a in PORTFOLIO_NAMES if (inst, a) in samples]
            for a, b in itertools.combinations(present, 2):
                r = sel.ks_test(samples[(inst, a)], samples[(inst, b)])
                writer.writerow([inst, a, b, repr(r.statistic),
                                 repr(r.critical), int(r.reject)])
    return out_csv


# ---------------------------------------------------------------------------
# select
# ---------------------------------------------------------------------------

def build_table(logs_dir: str, budget: int, instances,
                algorithms=PORTFOLIO_NAMES):
    """Median-over-seeds table from run logs; also returns missing cells."""
    runs = runlog.load_runs(logs_dir, budget)
    samples = runlog.fixed_budget_values(runs, budget)
    values, gaps = {}, []
    for inst in instances:
        for algo in algorithms:
            vals = samples.get((inst, algo))
            if not vals:
                gaps.append((inst, algo))
            else:
                values[(inst, algo, budget)] = lower_median(vals)
    return sel.PerformanceTable(values=values,
                                algorithms=tuple(algorithms)), gaps


def cmd_select(features_csv: str, logs_dir: str, budget: int, out_csv: str,
               splits: int = 5, seed: int = 0,
               stability_splits: int | None = None) -> dict:
    """Train and evaluate selectors over independent splits.

    The report compares five pickers per test instance: the oracle best,
    the single best solver chosen on the training side, a fixed vanilla
    CMA-ES baseline, and the two learned selectors (objective features and
    terrain features).
    """
    feats = read_features_csv(features_csv)
    for source in ("radar", "dem"):
        if source not in feats:
            raise ValueError(f"{features_csv}: no rows with source {source!r}")
    instances = sorted(set(feats["radar"]) & set(feats["dem"]))
    table, gaps = build_table(logs_dir, budget, instances)
    if gaps:
        listing = ", ".join(f"{i}/{a}" for i, a in gaps[:20])
        raise ValueError(f"missing logs for {len(gaps)} cells: {listing}")

    rows = []
    for k in range(splits):
        train_set, test_set = sel.split(instances, seed=seed + k)
        sbs_algo = sel.sbs(table, train_set, budget)
        s_radar = sel.train({i: feats["radar"][i] for i in train_set},
                            table, budget, seed=seed + k)
        s_dem = sel.train({i: feats["dem"][i] for i in train_set},
                          table, budget, seed=seed + k)
        for inst in test_set:
            vbs_algo, _ = sel.vbs(table, inst, budget)
            picks = {
                "VBS": vbs_algo,
                "SBS": sbs_algo,
                "CMA_00000000000": "CMA_00000000000",
                "S_radar": sel.select(s_radar, feats["radar"][inst])[0],
                "S_DEM": sel.select(s_dem, feats["dem"][inst])[0],
            }
            for comparator in SELECT_COMPARATORS:
                loss = sel.relative_loss(table, picks[comparator], inst, budget)
                rows.append((k, comparator, inst, picks[comparator], loss))

    with open(out_csv, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["split", "comparator", "instance", "pick", "loss"])
        for row in rows:
            writer.writerow([*row[:4], repr(row[4])])

    medians = {}
    for comparator in SELECT_COMPARATORS:
        losses = [r[4] for r in rows if r[1] == comparator]
        medians[comparator] = lower_median(losses) if losses else math.nan
        print(f"median loss {comparator}: {medians[comparator]:g}")

    stability = None
    if stability_splits:
        stability = sel.sbs_stability(table, budget, n_splits=stability_splits,
                                      instances=instances)
        for algo, count in sorted(stability.items(), key=lambda kv: -kv[1]):
            print(f"sbs-stability {algo}: {count}")
    return {"rows": rows, "medians": medians, "stability": stability,
            "report": out_csv}


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

def cmd_serve(grid_path: str, host: str = "127.0.0.1", port: int = 8000,
              tau: float = 0.9, physics_path: str | None = None,
              logs_dir: str | None = None) -> None:
    import uvicorn

    from .server import create_app

    grid = terrain.load_grid(grid_path)
    instance = Instance(grid=grid, physics=_load_physics(physics_path), tau=tau)
    uvicorn.run(create_app(instance, logs_dir=logs_dir), host=host, port=port)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radarbench",
        description="radar network configuration benchmark workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-instances", help="synthesize the instance set")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tiles", type=int, default=17)

    p = sub.add_parser("run", help="benchmark algorithms over a grid")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--algorithms", default="all")
    p.add_argument("--budget", type=int, default=2500)
    p.add_argument("--seeds", default="0-29")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("features", help="extract landscape features")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--source", choices=("radar", "dem"), required=True)
    p.add_argument("--reps", type=int, default=100)

    p = sub.add_parser("stats", help="pairwise sample comparisons")
    p.add_argument("--logs", required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("select", help="train and evaluate selectors")
    p.add_argument("--features", required=True)
    p.add_argument("--logs", required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--splits", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sbs-stability", type=int, default=None)

    p = sub.add_parser("serve", help="serve one instance over HTTP")
    p.add_argument("--grid", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--tau", type=float, default=0.9)
    p.add_argument("--physics", default=None)
    p.add_argument("--logs", default=None,
                   help="benchmark logs dir; enables /trajectories/<algo>.csv")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "gen-instances":
        cmd_gen_instances(args.out, seed=args.seed, tiles=args.tiles)
    elif args.command == "run":
        plan = ExperimentPlan(
            manifest_path=args.manifest, output_dir=args.out,
            algorithms=parse_algorithms(args.algorithms),
            budget=args.budget, seeds=parse_seeds(args.seeds),
            workers=args.workers)
        cmd_run(plan)
    elif args.command == "features":
        cmd_features(args.manifest, args.out, args.source, reps=args.reps)
    elif args.command == "stats":
        cmd_stats(args.logs, args.budget, args.out)
    elif args.command == "select":
        cmd_select(args.features, args.logs, args.budget, args.out,
                   splits=args.splits, seed=args.seed,
                   stability_splits=args.sbs_stability)
    elif args.command == "serve":
        cmd_serve(args.grid, host=args.host, port=args.port, tau=args.tau,
                  physics_path=args.physics, logs_dir=args.logs)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
