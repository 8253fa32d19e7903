"""Radar network model.

A network is one rotating radar plus three staring radars, all described by a
15-dimensional search vector in the unit cube:

    [x_rot, y_rot, tilt_rot,
     x_s1, y_s1, tilt_s1, angle_s1,
     x_s2, y_s2, tilt_s2, angle_s2,
     x_s3, y_s3, tilt_s3, angle_s3]

Positions scale to [0, 50000] m, tilts to [tilt_min, tilt_max] degrees, and
staring angles to [0, 360) degrees (compass, 0 = north = +y, clockwise).

Detection of an object at a voxel is gated (line of sight, staring sector,
vertical beam) and otherwise follows a logistic curve in SNR, where SNR rolls
off with 40 log10 of range and is modulated by the object's aspect angle.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields

import numpy as np
from numba import njit

from .terrain import CELL_SIZE_M, DOMAIN_SIZE_M, ElevationGrid, _bilinear, altitude_at

DIMENSION = 15
N_RADARS = 4
THETA_BINS = 30
THETA_STEP_DEG = 360.0 / THETA_BINS

ROTATING = 0
STARING = 1

RAD2DEG = 180.0 / math.pi
DEG2RAD = math.pi / 180.0

_CLAMP_EPS = 1e-9


class DecodeError(ValueError):
    """Search vector cannot be decoded into a radar network."""


@dataclass(frozen=True)
class RadarPhysics:
    """Fixed physical parameters of the detection model.

    Distances in metres, angles in degrees, SNR quantities in dB.
    """

    antenna_height: float = 10.0        # radar antenna above ground
    object_altitude_agl: float = 100.0  # detected object above its cell's ground
    vertical_beamwidth: float = 30.0    # full width of the elevation beam
    staring_sector: float = 90.0        # full width of a staring radar's sector
    tilt_min: float = -5.0
    tilt_max: float = 15.0
    reference_range: float = 20_000.0   # range at which snr_ref applies
    snr_ref_rotating: float = 13.0
    snr_ref_staring: float = 18.0
    snr_50: float = 10.0                # SNR of 50 % detection probability
    sigmoid_slope: float = 0.6
    rcs_modulation: float = 6.0         # aspect-angle swing of effective SNR

    def __post_init__(self):
        for name in ("antenna_height", "object_altitude_agl", "vertical_beamwidth",
                     "staring_sector", "reference_range"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.tilt_min >= self.tilt_max:
            raise ValueError("tilt_min must be below tilt_max")
        if self.sigmoid_slope <= 0.0:
            raise ValueError("sigmoid_slope must be positive")
        if self.rcs_modulation < 0.0:
            raise ValueError("rcs_modulation must be non-negative")

    def as_tuple(self) -> tuple:
        """Kernel argument order; keep in sync with the coverage kernel."""
        return (self.antenna_height, self.object_altitude_agl,
                self.vertical_beamwidth, self.staring_sector,
                self.reference_range, self.snr_ref_rotating,
                self.snr_ref_staring, self.snr_50,
                self.sigmoid_slope, self.rcs_modulation)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "RadarPhysics":
        """Parse a key=value file; unknown keys are rejected."""
        valid = {f.name for f in fields(cls)}
        kwargs = {}
        with open(os.fspath(path), "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, val = line.partition("=")
                key = key.strip()
                if key not in valid:
                    raise ValueError(f"{path}:{lineno}: unknown physics key {key!r}")
                try:
                    kwargs[key] = float(val)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: bad value for {key}: {val!r}") from None
        return cls(**kwargs)


@dataclass(frozen=True)
class RadarParams:
    """One placed radar; angles in degrees, position in metres."""

    kind: int                   # ROTATING or STARING
    x: float
    y: float
    tilt: float
    staring_angle: float = 0.0  # ignored for rotating radars


@dataclass(frozen=True)
class NetworkConfig:
    radars: tuple[RadarParams, ...]

    def __post_init__(self):
        if len(self.radars) != N_RADARS:
            raise ValueError(f"network must have {N_RADARS} radars")
        kinds = [r.kind for r in self.radars]
        if kinds != [ROTATING, STARING, STARING, STARING]:
            raise ValueError("network must be one rotating radar then three staring")


@dataclass(frozen=True)
class Voxel:
    """One cell of the 30x30x30 coverage discretisation."""

    ix: int
    iy: int
    itheta: int

    def __post_init__(self):
        for v in (self.ix, self.iy, self.itheta):
            if not 0 <= v < 30:
                raise ValueError(f"voxel index out of range: {self}")

    @property
    def x(self) -> float:
        return (self.ix + 0.5) * CELL_SIZE_M

    @property
    def y(self) -> float:
        return (self.iy + 0.5) * CELL_SIZE_M

    @property
    def theta(self) -> float:
        """Centre heading of the aspect bin, degrees."""
        return (self.itheta + 0.5) * THETA_STEP_DEG


def decode(vector, physics: RadarPhysics | None = None) -> NetworkConfig:
    """Map a point of the unit cube to a radar network.

    Entries may stray outside [0, 1] by at most 1e-9 (they are clamped);
    anything further out, a wrong length, or a non-finite entry raises
    DecodeError.
    """
    physics = physics or RadarPhysics()
    v = np.asarray(vector, dtype=np.float64)
    if v.shape != (DIMENSION,):
        raise DecodeError(f"expected vector of length {DIMENSION}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DecodeError("vector contains non-finite entries")
    if np.any(v < -_CLAMP_EPS) or np.any(v > 1.0 + _CLAMP_EPS):
        raise DecodeError("vector entries outside [0, 1]")
    v = np.clip(v, 0.0, 1.0)

    tspan = physics.tilt_max - physics.tilt_min

    def pos(a):
        return float(a) * DOMAIN_SIZE_M

    def tilt(a):
        return physics.tilt_min + float(a) * tspan

    radars = [RadarParams(ROTATING, pos(v[0]), pos(v[1]), tilt(v[2]))]
    for j in range(3):
        o = 3 + 4 * j
        ang = math.fmod(float(v[o + 3]) * 360.0, 360.0)
        radars.append(RadarParams(STARING, pos(v[o]), pos(v[o + 1]), tilt(v[o + 2]), ang))
    return NetworkConfig(radars=tuple(radars))


def config_arrays(config: NetworkConfig):
    """Kernel-friendly arrays (kinds, xs, ys, tilts, angles)."""
    kinds = np.array([r.kind for r in config.radars], dtype=np.int64)
    xs = np.array([r.x for r in config.radars])
    ys = np.array([r.y for r in config.radars])
    tilts = np.array([r.tilt for r in config.radars])
    angles = np.array([r.staring_angle for r in config.radars])
    return kinds, xs, ys, tilts, angles


# ---------------------------------------------------------------------------
# Geometry and detection cores.  These are shared by the scalar API below and
# by the full-grid coverage kernel.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _bearing_deg(dx, dy):
    """Compass bearing of displacement (dx east, dy north), in [0, 360)."""
    b = math.atan2(dx, dy) * RAD2DEG
    if b < 0.0:
        b += 360.0
    return b


@njit(cache=True)
def _circ_diff_deg(a, b):
    """Absolute circular difference of two headings, in [0, 180]."""
    d = (a - b + 180.0) % 360.0
    return abs(d - 180.0)


@njit(cache=True)
def _los_clear(alt, cell_size, alt_max, x0, y0, z0, x1, y1, z1):
    """True when the straight segment stays above the interpolated terrain.

    Sampled every half cell; a sample at or below ground blocks.  When both
    endpoints are above the grid's maximum altitude no sample can block, so
    the scan is skipped (same answer, no work).
    """
    dx = x1 - x0
    dy = y1 - y0
    dist = math.sqrt(dx * dx + dy * dy)
    nseg = int(math.ceil(dist / (cell_size * 0.5)))
    if nseg <= 1:
        return True
    zmin = z0 if z0 < z1 else z1
    if zmin > alt_max:
        return True
    dz = z1 - z0
    for j in range(1, nseg):
        t = j / nseg
        zt = _bilinear(alt, cell_size, x0 + t * dx, y0 + t * dy)
        if zt >= z0 + t * dz:
            return False
    return True


@njit(cache=True)
def _single_pd_core(alt, cell_size, alt_max, phys,
                    kind, rx, ry, tilt, staring_angle,
                    tx, ty, theta):
    """Detection probability of one radar against one voxel (0 when gated)."""
    (antenna_h, object_h, beamwidth, sector, ref_range,
     snr_rot, snr_star, snr_50, slope, rcs) = phys

    zr = _bilinear(alt, cell_size, rx, ry) + antenna_h
    iy = int(ty / cell_size)
    ix = int(tx / cell_size)
    zt = alt[iy, ix] + object_h

    dx = tx - rx
    dy = ty - ry
    dz = zt - zr

    if kind == STARING:
        if _circ_diff_deg(_bearing_deg(dx, dy), staring_angle) > sector * 0.5:
            return 0.0

    dist2 = math.sqrt(dx * dx + dy * dy)
    elev = math.atan2(dz, dist2) * RAD2DEG
    if elev < tilt - beamwidth * 0.5 or elev > tilt + beamwidth * 0.5:
        return 0.0

    if not _los_clear(alt, cell_size, alt_max, rx, ry, zr, tx, ty, zt):
        return 0.0

    r3 = math.sqrt(dx * dx + dy * dy + dz * dz)
    rr = r3 if r3 > 1.0 else 1.0
    snr_ref = snr_star if kind == STARING else snr_rot
    aspect = _bearing_deg(-dx, -dy)       # bearing object -> radar
    snr = (snr_ref - 40.0 * math.log10(rr / ref_range)
           + rcs * math.cos((theta - aspect) * DEG2RAD))
    return 1.0 / (1.0 + math.exp(-slope * (snr - snr_50)))


def line_of_sight(grid: ElevationGrid, physics: RadarPhysics,
                  radar: RadarParams, target_x: float, target_y: float) -> bool:
    """Is the object above (target_x, target_y) visible from the radar?

    The sight line runs from the antenna (ground + antenna_height at the
    radar position) to the object (cell ground + object_altitude_agl).
    """
    zr = altitude_at(grid, radar.x, radar.y) + physics.antenna_height
    iy = int(target_y / grid.cell_size)
    ix = int(target_x / grid.cell_size)
    iy = min(max(iy, 0), grid.height - 1)
    ix = min(max(ix, 0), grid.width - 1)
    zt = grid.altitudes[iy, ix] + physics.object_altitude_agl
    return bool(_los_clear(grid.altitudes, grid.cell_size, float(grid.altitudes.max()),
                           radar.x, radar.y, zr, target_x, target_y, zt))


def single_detection_probability(grid: ElevationGrid, physics: RadarPhysics,
                                 radar: RadarParams, voxel: Voxel) -> float:
    """Detection probability of one radar for one voxel."""
    return float(_single_pd_core(
        grid.altitudes, grid.cell_size, float(grid.altitudes.max()),
        physics.as_tuple(),
        radar.kind, radar.x, radar.y, radar.tilt, radar.staring_angle,
        voxel.x, voxel.y, voxel.theta))


def network_detection_probability(grid: ElevationGrid, physics: RadarPhysics,
                                  config: NetworkConfig, voxel: Voxel) -> float:
    """Fused detection probability: 1 - prod(1 - pd_i) over the four radars."""
    prod = 1.0
    for radar in config.radars:
        pd = single_detection_probability(grid, physics, radar, voxel)
        prod *= (1.0 - pd)
    return 1.0 - prod
