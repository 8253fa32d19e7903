"""Landscape feature extraction from (sample, fitness) designs.

Thirty-three cheap features in a frozen order: fitness-distribution shape
(3), meta-model fits (9), dispersion of the best points (16) and
information content along a nearest-neighbour tour (5).  Designs come from
either Sobol sampling of the full objective or exhaustive sampling of the
elevation grid; the grid path contains no randomness at all, so its feature
vectors are bit-reproducible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist
from scipy.stats import gaussian_kde, kurtosis, qmc, skew

from .coverage import fitness
from .util import lower_median_ignore_nan

DISP_QUANTILES = (0.02, 0.05, 0.10, 0.25)
IC_EPS_GRID = np.logspace(-5.0, 15.0, 1000)
IC_H_THRESHOLD = 0.05

FEATURE_NAMES = (
    "ela_distr.skewness",
    "ela_distr.kurtosis",
    "ela_distr.number_of_peaks",
    "ela_meta.lin_simple.adj_r2",
    "ela_meta.lin_simple.intercept",
    "ela_meta.lin_simple.coef.min",
    "ela_meta.lin_simple.coef.max",
    "ela_meta.lin_simple.coef.max_by_min",
    "ela_meta.lin_w_interact.adj_r2",
    "ela_meta.quad_simple.adj_r2",
    "ela_meta.quad_simple.cond",
    "ela_meta.quad_w_interact.adj_r2",
    "disp.ratio_mean_02",
    "disp.ratio_mean_05",
    "disp.ratio_mean_10",
    "disp.ratio_mean_25",
    "disp.ratio_median_02",
    "disp.ratio_median_05",
    "disp.ratio_median_10",
    "disp.ratio_median_25",
    "disp.diff_mean_02",
    "disp.diff_mean_05",
    "disp.diff_mean_10",
    "disp.diff_mean_25",
    "disp.diff_median_02",
    "disp.diff_median_05",
    "disp.diff_median_10",
    "disp.diff_median_25",
    "ic.h_max",
    "ic.eps_s",
    "ic.eps_max",
    "ic.eps_ratio",
    "ic.m0",
)


@dataclass(frozen=True)
class Design:
    """Sample matrix X in the unit cube plus fitness values y.

    Needs at least 2d+2 points so every meta-model below is solvable.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or X.shape[0] != y.shape[0] or y.ndim != 1:
            raise ValueError("design needs an n x d matrix and n values")
        n, d = X.shape
        if n < 2 * d + 2:
            raise ValueError(f"need at least {2 * d + 2} points for d={d}, got {n}")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValueError("design contains non-finite entries")
        if X.min() < 0.0 or X.max() > 1.0:
            raise ValueError("sample points must lie in the unit cube")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


def sobol_design(instance, n: int = 750, rep_seed: int = 0) -> Design:
    """Evaluate ``n`` unscrambled Sobol points on an instance's objective.

    Repetition ``rep_seed`` starts ``rep_seed * n`` points into the
    sequence, so repetitions sample disjoint stretches.
    """
    engine = qmc.Sobol(d=15, scramble=False)
    offset = rep_seed * n
    if offset:
        engine.fast_forward(offset)
    with warnings.catch_warnings():
        # 750 is not a power of two; the balance warning is expected
        warnings.simplefilter("ignore", UserWarning)
        X = engine.random(n)
    y = np.array([fitness(instance, x) for x in X])
    return Design(X=X, y=y)


def dem_design(grid) -> Design:
    """Exhaustive design over a terrain grid: every cell centre, d = 2.

    Rows run south to north, west to east; coordinates are cell centres
    normalised to the unit square and y is the cell altitude.
    """
    nrows, ncols = grid.altitudes.shape
    xs = (np.arange(ncols) + 0.5) / ncols
    ys = (np.arange(nrows) + 0.5) / nrows
    gx, gy = np.meshgrid(xs, ys)
    X = np.column_stack([gx.ravel(), gy.ravel()])
    y = grid.altitudes.ravel().astype(float)
    return Design(X=X, y=y)


# --- distribution family ---------------------------------------------------

def _kde_peak_count(y: np.ndarray) -> float:
    kde = gaussian_kde(y, bw_method="silverman")
    bw = float(kde.factor) * float(np.std(y, ddof=1))
    grid = np.linspace(y.min() - 3.0 * bw, y.max() + 3.0 * bw, 512)
    dens = kde(grid)
    interior = (dens[1:-1] > dens[:-2]) & (dens[1:-1] > dens[2:])
    heights = dens[1:-1][interior]
    if heights.size == 0:
        return 1.0
    return float(np.sum(heights >= 0.1 * heights.max()))


def ela_distr(design: Design) -> dict:
    """Skewness, excess kurtosis and KDE mode count of the fitness values."""
    y = design.y
    if np.ptp(y) == 0.0:
        return {"ela_distr.skewness": float("nan"),
                "ela_distr.kurtosis": float("nan"),
                "ela_distr.number_of_peaks": 1.0}
    return {"ela_distr.skewness": float(skew(y, bias=False)),
            "ela_distr.kurtosis": float(kurtosis(y, fisher=True, bias=False)),
            "ela_distr.number_of_peaks": _kde_peak_count(y)}


# --- meta-model family -----------------------------------------------------

def _interactions(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    cols = [X[:, i] * X[:, j] for i in range(d) for j in range(i + 1, d)]
    if not cols:
        return np.empty((X.shape[0], 0))
    return np.column_stack(cols)


def _adj_r2(y: np.ndarray, pred: np.ndarray, n_predictors: int) -> float:
    n = y.shape[0]
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0 or n - n_predictors - 1 <= 0:
        return float("nan")
    ss_res = float(np.sum((y - pred) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    return 1.0 - (1.0 - r2) * (n - 1) / (n - n_predictors - 1)


def _fit(y: np.ndarray, *blocks) -> tuple[np.ndarray, float]:
    """Least-squares fit on [1 | blocks]; pseudo-inverse when singular."""
    A = np.column_stack([np.ones(y.shape[0])] + list(blocks))
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef, _adj_r2(y, A @ coef, A.shape[1] - 1)


def ela_meta(design: Design) -> dict:
    X, y = design.X, design.y
    inter = _interactions(X)
    sq = X ** 2

    lin_coef, lin_r2 = _fit(y, X)
    _, lin_int_r2 = _fit(y, X, inter)
    quad_coef, quad_r2 = _fit(y, X, sq)
    _, quad_int_r2 = _fit(y, X, sq, inter)

    abs_lin = np.abs(lin_coef[1:])
    abs_sq = np.abs(quad_coef[1 + design.dim:])
    c_min, c_max = float(abs_lin.min()), float(abs_lin.max())
    return {
        "ela_meta.lin_simple.adj_r2": lin_r2,
        "ela_meta.lin_simple.intercept": float(lin_coef[0]),
        "ela_meta.lin_simple.coef.min": c_min,
        "ela_meta.lin_simple.coef.max": c_max,
        "ela_meta.lin_simple.coef.max_by_min":
            c_max / c_min if c_min > 0.0 else float("inf"),
        "ela_meta.lin_w_interact.adj_r2": lin_int_r2,
        "ela_meta.quad_simple.adj_r2": quad_r2,
        "ela_meta.quad_simple.cond":
            float(abs_sq.max() / abs_sq.min()) if abs_sq.min() > 0.0
            else float("inf"),
        "ela_meta.quad_w_interact.adj_r2": quad_int_r2,
    }


# --- dispersion family -----------------------------------------------------

def disp(design: Design) -> dict:
    X, y = design.X, design.y
    full = pdist(X)
    full_mean = float(full.mean())
    full_median = float(np.median(full))
    out = {}
    for q in DISP_QUANTILES:
        subset = X[y <= np.quantile(y, q)]
        tag = f"{int(round(q * 100)):02d}"
        if subset.shape[0] < 2:
            sub_mean = sub_median = float("nan")
        else:
            d_sub = pdist(subset)
            sub_mean = float(d_sub.mean())
            sub_median = float(np.median(d_sub))
        out[f"disp.ratio_mean_{tag}"] = sub_mean / full_mean
        out[f"disp.ratio_median_{tag}"] = sub_median / full_median
        out[f"disp.diff_mean_{tag}"] = sub_mean - full_mean
        out[f"disp.diff_median_{tag}"] = sub_median - full_median
    return out


# --- information content family --------------------------------------------

def nn_tour(X: np.ndarray) -> np.ndarray:
    """Visit order of a greedy nearest-neighbour tour from row 0.

    Distance ties go to the lowest row index, which keeps the tour (and
    everything computed from it) deterministic for grid designs.
    """
    n = X.shape[0]
    dmat = cdist(X, X)
    order = np.empty(n, dtype=np.int64)
    visited = np.zeros(n, dtype=bool)
    current = 0
    order[0] = 0
    visited[0] = True
    for k in range(1, n):
        row = dmat[current].copy()
        row[visited] = np.inf
        current = int(np.argmin(row))  # argmin takes the first minimum
        order[k] = current
        visited[current] = True
    return order


def tour_deltas(design: Design) -> np.ndarray:
    """Distance-normalised fitness changes along the tour."""
    order = nn_tour(design.X)
    xs = design.X[order]
    ys = design.y[order]
    steps = np.sqrt(np.sum(np.diff(xs, axis=0) ** 2, axis=1))
    dy = np.diff(ys)
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = dy / steps
    delta[np.isnan(delta)] = 0.0  # coincident points with equal fitness
    return delta


def symbol_sequence(delta: np.ndarray, eps: float) -> np.ndarray:
    psi = np.sign(delta).astype(np.int8)
    psi[np.abs(delta) < eps] = 0
    return psi


def pair_entropy(psi: np.ndarray) -> float:
    """Base-6 entropy of the unequal consecutive symbol pairs."""
    if psi.size < 2:
        return 0.0
    a, b = psi[:-1], psi[1:]
    mask = a != b
    total = psi.size - 1
    h = 0.0
    for pa in (-1, 0, 1):
        for pb in (-1, 0, 1):
            if pa == pb:
                continue
            p = np.sum(mask & (a == pa) & (b == pb)) / total
            if p > 0.0:
                h -= p * np.log(p) / np.log(6.0)
    return float(h)


def partial_information(psi: np.ndarray) -> float:
    """Length of the zero-free, run-collapsed symbol string over len(psi)."""
    s = psi[psi != 0]
    if s.size == 0:
        return 0.0
    mu = 1 + int(np.sum(s[1:] != s[:-1]))
    return mu / psi.size


def ic(design: Design) -> dict:
    nan = float("nan")
    if np.ptp(design.y) == 0.0:
        return {"ic.h_max": 0.0, "ic.eps_s": nan, "ic.eps_max": nan,
                "ic.eps_ratio": nan, "ic.m0": nan}
    delta = tour_deltas(design)
    m0 = partial_information(symbol_sequence(delta, 0.0))

    h_vals = np.empty(IC_EPS_GRID.size)
    m_vals = np.empty(IC_EPS_GRID.size)
    for i, eps in enumerate(IC_EPS_GRID):
        psi = symbol_sequence(delta, eps)
        h_vals[i] = pair_entropy(psi)
        m_vals[i] = partial_information(psi)

    h_max = float(h_vals.max())
    eps_max = float(IC_EPS_GRID[int(np.argmax(h_vals))])
    below = np.nonzero(h_vals < IC_H_THRESHOLD)[0]
    eps_s = float(np.log10(IC_EPS_GRID[below[0]])) if below.size else nan
    ratio_idx = np.nonzero(m_vals < 0.5 * m0)[0]
    eps_ratio = (float(np.log10(IC_EPS_GRID[ratio_idx[0]]))
                 if m0 > 0.0 and ratio_idx.size else nan)
    return {"ic.h_max": h_max, "ic.eps_s": eps_s, "ic.eps_max": eps_max,
            "ic.eps_ratio": eps_ratio, "ic.m0": m0}


# --- assembly --------------------------------------------------------------

def features(design: Design) -> np.ndarray:
    """All 33 features as an array in FEATURE_NAMES order."""
    table = {}
    table.update(ela_distr(design))
    table.update(ela_meta(design))
    table.update(disp(design))
    table.update(ic(design))
    return np.array([table[name] for name in FEATURE_NAMES], dtype=float)


def median_aggregate(vectors) -> np.ndarray:
    """Per-feature lower median across repetitions, skipping NaN entries."""
    mat = np.asarray(list(vectors), dtype=float)
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise ValueError("need at least one feature vector")
    return np.array([lower_median_ignore_nan(col) for col in mat.T])
