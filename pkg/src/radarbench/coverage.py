"""Coverage objective: how much of the airspace does a network see?

The 50 km x 50 km domain is discretised into 30 x 30 ground cells, each
carrying 30 heading bins of 12 degrees, for 27,000 voxels.  A voxel counts as
covered when the fused detection probability of the four radars reaches the
threshold tau.  The optimizers minimise the number of uncovered voxels.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .radar import (DEG2RAD, RAD2DEG, STARING, NetworkConfig, RadarPhysics,
                    THETA_BINS, THETA_STEP_DEG, config_arrays, decode)
from .terrain import ElevationGrid, _bilinear
from .radar import _bearing_deg, _circ_diff_deg, _los_clear

TOTAL_VOXELS = 27_000
DEFAULT_TAU = 0.9


class BudgetExhaustedError(RuntimeError):
    """An evaluation was requested beyond the configured budget."""


class DivergenceError(RuntimeError):
    """The objective produced NaN; the run cannot continue."""


@dataclass(frozen=True)
class Instance:
    """One optimization problem: a terrain grid plus model parameters."""

    grid: ElevationGrid
    physics: RadarPhysics = field(default_factory=RadarPhysics)
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if self.grid.width != 30 or self.grid.height != 30:
            raise ValueError(f"instance grids must be 30x30, got "
                             f"{self.grid.width}x{self.grid.height}")
        if not (0.0 < self.tau < 1.0):
            raise ValueError(f"tau must be in (0, 1), got {self.tau}")

    @property
    def name(self) -> str:
        return self.grid.name


@dataclass(frozen=True)
class CoverageResult:
    covered: int
    uncovered: int
    map: np.ndarray     # (30, 30, 30) bool, indexed [itheta, iy, ix]


@njit(cache=True)
def _coverage_kernel(alt, cell_size, alt_max, phys, kinds, xs, ys, tilts, angles,
                     tau, cover):
    """Fill ``cover`` and return the covered-voxel count.

    Walks cells per radar so line of sight and range terms are computed once
    per (radar, cell); only the aspect-angle modulation varies over the 30
    heading bins.  Produces bit-identical values to evaluating
    radar._single_pd_core voxel by voxel.
    """
    (antenna_h, object_h, beamwidth, sector, ref_range,
     snr_rot, snr_star, snr_50, slope, rcs) = phys
    h, w = alt.shape
    pnd = np.ones((THETA_BINS, h, w))

    for rid in range(kinds.shape[0]):
        kind = kinds[rid]
        rx = xs[rid]
        ry = ys[rid]
        tilt = tilts[rid]
        angle = angles[rid]
        zr = _bilinear(alt, cell_size, rx, ry) + antenna_h
        snr_ref = snr_star if kind == STARING else snr_rot
        lo_gate = tilt - beamwidth * 0.5
        hi_gate = tilt + beamwidth * 0.5

        for iy in range(h):
            ty = (iy + 0.5) * cell_size
            for ix in range(w):
                tx = (ix + 0.5) * cell_size
                zt = alt[iy, ix] + object_h
                dx = tx - rx
                dy = ty - ry
                dz = zt - zr

                if kind == STARING:
                    if _circ_diff_deg(_bearing_deg(dx, dy), angle) > sector * 0.5:
                        continue

                dist2 = math.sqrt(dx * dx + dy * dy)
                elev = math.atan2(dz, dist2) * RAD2DEG
                if elev < lo_gate or elev > hi_gate:
                    continue

                if not _los_clear(alt, cell_size, alt_max, rx, ry, zr, tx, ty, zt):
                    continue

                r3 = math.sqrt(dx * dx + dy * dy + dz * dz)
                rr = r3 if r3 > 1.0 else 1.0
                snr_base = snr_ref - 40.0 * math.log10(rr / ref_range)
                aspect = _bearing_deg(-dx, -dy)
                for it in range(THETA_BINS):
                    theta = (it + 0.5) * THETA_STEP_DEG
                    snr = snr_base + rcs * math.cos((theta - aspect) * DEG2RAD)
                    pd = 1.0 / (1.0 + math.exp(-slope * (snr - snr_50)))
                    pnd[it, iy, ix] *= (1.0 - pd)

    covered = 0
    for it in range(THETA_BINS):
        for iy in range(h):
            for ix in range(w):
                c = (1.0 - pnd[it, iy, ix]) >= tau
                cover[it, iy, ix] = c
                if c:
                    covered += 1
    return covered


def coverage(instance: Instance, config: NetworkConfig) -> CoverageResult:
    """Evaluate one placed network on an instance."""
    kinds, xs, ys, tilts, angles = config_arrays(config)
    alt = instance.grid.altitudes
    cover = np.zeros((THETA_BINS, alt.shape[0], alt.shape[1]), dtype=np.bool_)
    covered = int(_coverage_kernel(alt, instance.grid.cell_size, float(alt.max()),
                                   instance.physics.as_tuple(), kinds, xs, ys,
                                   tilts, angles, instance.tau, cover))
    return CoverageResult(covered=covered, uncovered=TOTAL_VOXELS - covered,
                          map=cover)


def fitness(instance: Instance, vector) -> float:
    """Uncovered-voxel count of the decoded vector (minimise)."""
    config = decode(vector, instance.physics)
    return float(TOTAL_VOXELS - coverage(instance, config).covered)


class EvaluationCounter:
    """Serialises and counts objective evaluations.

    Wraps a plain objective callable; refuses calls past ``budget``, tracks
    the best-so-far value/vector, and records an improvement point for the
    first evaluation and for every strict improvement after it.  A NaN
    objective value raises DivergenceError (the evaluation still counts).
    All bookkeeping happens under one lock, so concurrent callers see a
    consistent count and trajectory.
    """

    def __init__(self, objective, budget: int | None = None, name: str = ""):
        if budget is not None and budget < 1:
            raise ValueError(f"budget must be positive, got {budget}")
        self._objective = objective
        self.budget = budget
        self.name = name
        self.count = 0
        self.best_value = math.inf
        self.best_vector = None
        self.improvements: list[tuple[int, float]] = []
        self.events: list[tuple[str, int]] = []
        self._lock = threading.Lock()

    @property
    def remaining(self) -> int | None:
        if self.budget is None:
            return None
        return self.budget - self.count

    def _check_budget(self):
        if self.budget is not None and self.count >= self.budget:
            raise BudgetExhaustedError(
                f"budget of {self.budget} evaluations exhausted")

    def _record(self, value: float, vector) -> float:
        self.count += 1
        if math.isnan(value):
            raise DivergenceError(f"objective returned NaN at evaluation {self.count}")
        if value < self.best_value or self.count == 1:
            self.best_value = value
            self.best_vector = None if vector is None else np.array(vector, dtype=float)
            self.improvements.append((self.count, value))
        return value

    def __call__(self, vector) -> float:
        with self._lock:
            self._check_budget()
            return self._record(float(self._objective(vector)), vector)

    def observe(self, value: float, vector=None) -> float:
        """Count an evaluation whose value was computed by the caller."""
        with self._lock:
            self._check_budget()
            return self._record(float(value), vector)


def counting_objective(instance: Instance, budget: int | None = None) -> EvaluationCounter:
    """Counter around ``fitness`` for one instance."""
    return EvaluationCounter(lambda v: fitness(instance, v), budget=budget,
                             name=instance.name)
