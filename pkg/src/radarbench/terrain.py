"""Elevation grids: ASCII file I/O, synthetic generation, tiles and masks.

Grid arrays are stored y-up: row index ``iy`` grows from south to north, so
``altitudes[0, 0]`` is the south-west cell.  The ASCII file format puts the
northernmost row first (the usual raster convention), so reading and writing
flips the row order.

Coordinates are metres.  Cell (ix, iy) has its centre at
((ix + 0.5) * cell_size, (iy + 0.5) * cell_size).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from numba import njit

DOMAIN_SIZE_M = 50_000.0
GRID_CELLS = 30
CELL_SIZE_M = DOMAIN_SIZE_M / GRID_CELLS

FLAT = "flat"
INTERMEDIATE = "intermediate"
MOUNTAINOUS = "mountainous"
TERRAIN_CLASSES = (FLAT, INTERMEDIATE, MOUNTAINOUS)

# Elevation-range band sampled for each class, metres.  The bands sit strictly
# inside the classification thresholds so a generated grid always classifies
# as the class it was generated for.
CLASS_RANGE_BANDS = {
    FLAT: (20.0, 99.0),
    INTERMEDIATE: (150.0, 900.0),
    MOUNTAINOUS: (1050.0, 3800.0),
}

# Tile names, handed out in order to gen-instances tiles.
TILE_NAMES = (
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
    "hotel", "india", "juliett", "kilo", "lima", "mike", "november",
    "oscar", "papa", "quebec",
)


class GridParseError(ValueError):
    """Malformed ASCII grid file; message includes the offending line."""


class DomainError(ValueError):
    """Coordinate outside the terrain domain."""


class TileMaskError(RuntimeError):
    """Mask subsampling could not place the required disjoint squares."""


@dataclass(eq=False)
class ElevationGrid:
    """A rectangular altitude raster.

    altitudes : (height, width) float64 array, y-up (row 0 = south).
    cell_size : edge length of one square cell in metres.
    name      : instance name, defaults to the file stem on load.
    """

    altitudes: np.ndarray
    cell_size: float = CELL_SIZE_M
    name: str = ""

    def __post_init__(self):
        a = np.asarray(self.altitudes, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 2 or a.shape[1] < 2:
            raise ValueError(f"altitude raster must be 2-D, at least 2x2, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("altitude raster contains non-finite values")
        if np.any(a < 0.0):
            raise ValueError("altitudes must be non-negative")
        if not (self.cell_size > 0.0 and math.isfinite(self.cell_size)):
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        self.altitudes = a
        self.cell_size = float(self.cell_size)

    @property
    def width(self) -> int:
        return self.altitudes.shape[1]

    @property
    def height(self) -> int:
        return self.altitudes.shape[0]

    @property
    def extent(self) -> tuple[float, float]:
        """(x_max, y_max) of the domain in metres."""
        return (self.width * self.cell_size, self.height * self.cell_size)


@njit(cache=True)
def _bilinear(alt, cell_size, x, y):
    """Bilinearly interpolated altitude at (x, y) on a y-up raster.

    Between cell centres the four surrounding centres are blended; outside
    the outermost centres the edge value continues flat.  The exact operation
    order here is relied on elsewhere: any reimplementation must reproduce it
    bit for bit.
    """
    h, w = alt.shape
    u = x / cell_size - 0.5
    v = y / cell_size - 0.5
    i0 = int(math.floor(u))
    j0 = int(math.floor(v))
    if i0 < 0:
        i0 = 0
    elif i0 > w - 2:
        i0 = w - 2
    if j0 < 0:
        j0 = 0
    elif j0 > h - 2:
        j0 = h - 2
    fu = u - i0
    fv = v - j0
    if fu < 0.0:
        fu = 0.0
    elif fu > 1.0:
        fu = 1.0
    if fv < 0.0:
        fv = 0.0
    elif fv > 1.0:
        fv = 1.0
    lo = (1.0 - fu) * alt[j0, i0] + fu * alt[j0, i0 + 1]
    hi = (1.0 - fu) * alt[j0 + 1, i0] + fu * alt[j0 + 1, i0 + 1]
    return (1.0 - fv) * lo + fv * hi


def altitude_at(grid: ElevationGrid, x: float, y: float) -> float:
    """Interpolated ground altitude at a point inside the domain."""
    xmax, ymax = grid.extent
    if not (0.0 <= x <= xmax and 0.0 <= y <= ymax):
        raise DomainError(f"point ({x}, {y}) outside domain [0, {xmax}] x [0, {ymax}]")
    return float(_bilinear(grid.altitudes, grid.cell_size, x, y))


def elevation_range(grid: ElevationGrid) -> float:
    a = grid.altitudes
    return float(a.max() - a.min())


def classify(grid: ElevationGrid) -> str:
    """Terrain class from the elevation range.

    Below 100 m of relief is flat, above 1000 m mountainous, anything else
    (boundaries included) intermediate.
    """
    r = elevation_range(grid)
    if r < 100.0:
        return FLAT
    if r > 1000.0:
        return MOUNTAINOUS
    return INTERMEDIATE


# ---------------------------------------------------------------------------
# ASCII grid file format
#
#   ncols 30
#   nrows 30
#   cellsize 1666.6667
#   <nrows data rows, northernmost first, ncols space-separated altitudes>
# ---------------------------------------------------------------------------

def load_grid(path: str | os.PathLike) -> ElevationGrid:
    path = os.fspath(path)
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()

    def fail(lineno, msg):
        raise GridParseError(f"{path}:{lineno}: {msg}")

    header = {}
    for lineno, key in ((1, "ncols"), (2, "nrows"), (3, "cellsize")):
        if lineno > len(lines):
            fail(lineno, f"missing {key} header line")
        parts = lines[lineno - 1].split()
        if len(parts) != 2 or parts[0] != key:
            fail(lineno, f"expected '{key} <value>', got {lines[lineno - 1]!r}")
        try:
            header[key] = float(parts[1])
        except ValueError:
            fail(lineno, f"bad {key} value {parts[1]!r}")

    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    if ncols != header["ncols"] or nrows != header["nrows"] or ncols < 2 or nrows < 2:
        raise GridParseError(f"{path}: grid dimensions must be integers >= 2")
    cell_size = header["cellsize"]

    data_lines = [ln for ln in lines[3:] if ln.strip()]
    if len(data_lines) != nrows:
        raise GridParseError(f"{path}: expected {nrows} data rows, found {len(data_lines)}")

    rows = np.empty((nrows, ncols), dtype=np.float64)
    for r, ln in enumerate(data_lines):
        parts = ln.split()
        lineno = 4 + r
        if len(parts) != ncols:
            fail(lineno, f"expected {ncols} values, got {len(parts)}")
        try:
            rows[r] = [float(p) for p in parts]
        except ValueError:
            fail(lineno, "non-numeric altitude value")

    name = os.path.splitext(os.path.basename(path))[0]
    # file rows run north to south; flip to the internal y-up order
    return ElevationGrid(altitudes=np.flipud(rows), cell_size=cell_size, name=name)


def save_grid(grid: ElevationGrid, path: str | os.PathLike) -> None:
    path = os.fspath(path)
    rows = np.flipud(grid.altitudes)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"ncols {grid.width}\n")
        fh.write(f"nrows {grid.height}\n")
        fh.write(f"cellsize {float(grid.cell_size)!r}\n")
        for r in rows:
            fh.write(" ".join(repr(float(v)) for v in r))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Synthetic terrain
# ---------------------------------------------------------------------------

_ROUGHNESS = 0.55


def _midpoint_displacement(rng: np.random.Generator, size_pow: int) -> np.ndarray:
    """Square lattice of side 2**size_pow + 1 filled by midpoint displacement."""
    n = 2 ** size_pow + 1
    a = np.zeros((n, n))
    a[0, 0], a[0, -1], a[-1, 0], a[-1, -1] = rng.uniform(0.0, 1.0, 4)
    step = n - 1
    amp = 0.5
    while step > 1:
        half = step // 2
        # diamond: centre of each square from its four corners
        for r in range(half, n, step):
            for c in range(half, n, step):
                avg = (a[r - half, c - half] + a[r - half, c + half]
                       + a[r + half, c - half] + a[r + half, c + half]) / 4.0
                a[r, c] = avg + rng.uniform(-amp, amp)
        # square: edge midpoints from the neighbours that exist
        for r in range(0, n, half):
            c_start = half if r % step == 0 else 0
            for c in range(c_start, n, step):
                s = 0.0
                cnt = 0
                if r - half >= 0:
                    s += a[r - half, c]
                    cnt += 1
                if r + half < n:
                    s += a[r + half, c]
                    cnt += 1
                if c - half >= 0:
                    s += a[r, c - half]
                    cnt += 1
                if c + half < n:
                    s += a[r, c + half]
                    cnt += 1
                a[r, c] = s / cnt + rng.uniform(-amp, amp)
        step = half
        amp *= _ROUGHNESS
    return a


def _rescale_to_band(raw: np.ndarray, target_range: float) -> np.ndarray:
    """Shift/scale so min is 0 and max is target_range (ramp added if flat)."""
    a = raw - raw.min()
    top = a.max()
    if top == 0.0:
        a = a + np.linspace(0.0, 1.0, a.shape[1])[None, :]
        top = a.max()
    return a * (target_range / top)


def generate_synthetic(seed: int, terrain_class: str, name: str = "") -> ElevationGrid:
    """30x30 synthetic grid of the requested terrain class.

    Deterministic in (seed, terrain_class).  A 33x33 midpoint-displacement
    lattice is cropped to 30x30 and rescaled into the class elevation band.
    """
    if terrain_class not in TERRAIN_CLASSES:
        raise ValueError(f"unknown terrain class {terrain_class!r}")
    idx = TERRAIN_CLASSES.index(terrain_class)
    rng = np.random.default_rng([int(seed), idx])
    lattice = _midpoint_displacement(rng, 5)            # 33x33
    raw = lattice[:GRID_CELLS, :GRID_CELLS]
    target = rng.uniform(*CLASS_RANGE_BANDS[terrain_class])
    alts = _rescale_to_band(raw, target)
    return ElevationGrid(altitudes=alts, cell_size=CELL_SIZE_M,
                         name=name or f"{terrain_class}{seed}")


@dataclass(eq=False)
class TileExtent:
    """A larger raster from which instance-sized windows are cut."""

    altitudes: np.ndarray        # (height, width), y-up, raw units
    name: str = ""

    @property
    def width(self) -> int:
        return self.altitudes.shape[1]

    @property
    def height(self) -> int:
        return self.altitudes.shape[0]


def generate_tile(seed: int, size: int = 150, name: str = "") -> TileExtent:
    """Raw midpoint-displacement tile of side ``size`` (<= 257)."""
    if not 2 <= size <= 257:
        raise ValueError("tile size must be in [2, 257]")
    rng = np.random.default_rng([int(seed), 1000])
    lattice = _midpoint_displacement(rng, 8)            # 257x257
    return TileExtent(altitudes=lattice[:size, :size].copy(), name=name)


@dataclass(frozen=True)
class MaskSquare:
    """One window of the subsampling mask; (row0, col0) is its low corner."""

    row0: int
    col0: int
    size: int = GRID_CELLS

    def disjoint(self, other: "MaskSquare") -> bool:
        return (self.row0 + self.size <= other.row0
                or other.row0 + other.size <= self.row0
                or self.col0 + self.size <= other.col0
                or other.col0 + other.size <= self.col0)


def subsample_mask(width: int, height: int, seed: int,
                   n_squares: int = 9, size: int = GRID_CELLS,
                   max_rejections: int = 10_000) -> list[MaskSquare]:
    """Place ``n_squares`` pairwise-disjoint size x size windows on a tile.

    The first window is pinned at (0, 0); the rest are rejection-sampled
    uniformly.  Raises TileMaskError after ``max_rejections`` consecutive
    rejections, which in practice means the tile is too small for a disjoint
    mask of this cardinality.
    """
    if width < size or height < size:
        raise TileMaskError(f"tile {width}x{height} smaller than window size {size}")
    rng = np.random.default_rng(int(seed))
    squares = [MaskSquare(0, 0, size)]
    rejections = 0
    while len(squares) < n_squares:
        r = int(rng.integers(0, height - size + 1))
        c = int(rng.integers(0, width - size + 1))
        cand = MaskSquare(r, c, size)
        if all(cand.disjoint(sq) for sq in squares):
            squares.append(cand)
            rejections = 0
        else:
            rejections += 1
            if rejections >= max_rejections:
                raise TileMaskError(
                    f"tile {width}x{height} too small for {n_squares} disjoint "
                    f"{size}x{size} windows ({max_rejections} consecutive rejections)")
    return squares


def cut_window(tile: TileExtent, sq: MaskSquare) -> np.ndarray:
    """Raw altitude window of a mask square (still y-up, raw units)."""
    return tile.altitudes[sq.row0:sq.row0 + sq.size, sq.col0:sq.col0 + sq.size].copy()


def instance_from_window(tile: TileExtent, sq: MaskSquare, terrain_class: str,
                         rng: np.random.Generator, name: str = "") -> ElevationGrid:
    """Cut a mask window and rescale it into the class elevation band.

    Each window gets its own uniformly drawn target range, so the nine
    instances of one tile differ in relief while all classifying as the
    tile's terrain class.
    """
    if terrain_class not in TERRAIN_CLASSES:
        raise ValueError(f"unknown terrain class {terrain_class!r}")
    raw = cut_window(tile, sq)
    target = rng.uniform(*CLASS_RANGE_BANDS[terrain_class])
    return ElevationGrid(altitudes=_rescale_to_band(raw, target),
                         cell_size=CELL_SIZE_M, name=name)


# ---------------------------------------------------------------------------
# Instance manifest (JSON)
# ---------------------------------------------------------------------------

@dataclass
class Manifest:
    entries: list[dict] = field(default_factory=list)   # {"name", "grid_path", "class"?}
    tau: float = 0.9
    physics_path: str | None = None
    base_dir: str = "."


def load_manifest(path: str | os.PathLike) -> Manifest:
    """Read a manifest file.

    Two forms are accepted: a bare JSON list of instance entries, or an
    object {"tau": ..., "physics": ..., "instances": [...]} where each entry
    has "name" and "grid" (path relative to the manifest file).
    """
    path = os.fspath(path)
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)

    if isinstance(doc, list):
        raw_entries, tau, physics = doc, 0.9, None
    elif isinstance(doc, dict):
        raw_entries = doc.get("instances", [])
        tau = float(doc.get("tau", 0.9))
        physics = doc.get("physics")
    else:
        raise ValueError(f"{path}: manifest must be a JSON list or object")

    if not (0.0 < tau < 1.0):
        raise ValueError(f"{path}: tau must be in (0, 1), got {tau}")

    entries = []
    for i, e in enumerate(raw_entries):
        if not isinstance(e, dict) or "name" not in e or "grid" not in e:
            raise ValueError(f"{path}: instance entry {i} needs 'name' and 'grid'")
        entries.append({
            "name": str(e["name"]),
            "grid_path": os.path.join(base, e["grid"]),
            "class": e.get("class"),
        })
    names = [e["name"] for e in entries]
    if len(set(names)) != len(names):
        raise ValueError(f"{path}: duplicate instance names in manifest")

    physics_path = os.path.join(base, physics) if physics else None
    return Manifest(entries=entries, tau=tau, physics_path=physics_path, base_dir=base)


def save_manifest(manifest: Manifest, path: str | os.PathLike) -> None:
    path = os.fspath(path)
    base = os.path.dirname(os.path.abspath(path))
    doc = {
        "tau": manifest.tau,
        "physics": (os.path.relpath(manifest.physics_path, base)
                    if manifest.physics_path else None),
        "instances": [
            {"name": e["name"],
             "grid": os.path.relpath(e["grid_path"], base),
             **({"class": e["class"]} if e.get("class") else {})}
            for e in manifest.entries
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
