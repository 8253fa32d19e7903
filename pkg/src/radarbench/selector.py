"""Performance analytics and landscape-aware algorithm selection.

Takes a table of median fitness per (instance, algorithm, budget) and
answers two kinds of questions: classical portfolio analytics (virtual and
single best solver, relative loss, Kolmogorov-Smirnov comparisons, SBS
stability under resampled instance splits) and learned selection, where one
random-forest regressor per algorithm predicts its median fitness from the
33 landscape features and the smallest prediction wins.

All ties anywhere break by the table's algorithm order, which defaults to
the canonical portfolio order.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import joblib
import numpy as np
from sklearn.ensemble import RandomForestRegressor

from .ela import FEATURE_NAMES
from .optimizers import PORTFOLIO_NAMES
from .util import lower_median

# pinned explicitly so library default drift cannot change the models
FOREST_SPEC = {
    "n_estimators": 100,
    "criterion": "squared_error",
    "max_features": None,
    "bootstrap": True,
    "min_samples_leaf": 1,
}

KS_CRITICAL = {0.01: 1.628}

_METADATA_FILE = "metadata.json"


@dataclass(frozen=True)
class PerformanceTable:
    """Median fitness per (instance, algorithm, budget), lower is better."""

    values: dict
    algorithms: tuple = PORTFOLIO_NAMES

    def value(self, instance: str, algorithm: str, budget: int) -> float:
        try:
            return self.values[(instance, algorithm, budget)]
        except KeyError:
            raise ValueError(
                f"no entry for {instance!r}/{algorithm!r} at budget {budget}"
            ) from None

    def instances(self, budget: int) -> list:
        return sorted({i for (i, _, b) in self.values if b == budget})

    def check_complete(self, instances, budget: int) -> None:
        for inst in instances:
            for algo in self.algorithms:
                self.value(inst, algo, budget)


# --- portfolio analytics ---------------------------------------------------

def vbs(table: PerformanceTable, instance: str, budget: int):
    """Best algorithm and its fitness on one instance."""
    best_algo, best_val = None, math.inf
    for algo in table.algorithms:
        v = table.value(instance, algo, budget)
        if v < best_val:
            best_algo, best_val = algo, v
    return best_algo, best_val


def relative_loss(table: PerformanceTable, algorithm: str, instance: str,
                  budget: int) -> float:
    """Percent loss of an algorithm against the instance's best.

    A zero best-fitness denominator yields 0 when the algorithm also
    reached zero and an infinite sentinel otherwise.
    """
    _, f_best = vbs(table, instance, budget)
    f_alg = table.value(instance, algorithm, budget)
    if f_best == 0.0:
        return 0.0 if f_alg == 0.0 else math.inf
    return 100.0 * (f_alg - f_best) / f_best


def median_relative_loss(table: PerformanceTable, algorithm: str, instances,
                         budget: int) -> float:
    return lower_median(
        relative_loss(table, algorithm, inst, budget) for inst in instances)


def sbs(table: PerformanceTable, instances, budget: int) -> str:
    """Single best solver: smallest median relative loss across instances."""
    if not instances:
        raise ValueError("sbs needs at least one instance")
    best_algo, best_loss = None, math.inf
    for algo in table.algorithms:
        loss = median_relative_loss(table, algo, instances, budget)
        if loss < best_loss:
            best_algo, best_loss = algo, loss
    if best_algo is None:  # every median was the infinite sentinel
        best_algo = table.algorithms[0]
    return best_algo


def split(instances, train_fraction: float = 0.8, seed: int = 0):
    """Uniform train/test split without replacement, sizes floor(f*n)/rest."""
    instances = list(instances)
    if len(instances) < 5:
        raise ValueError("need at least 5 instances to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(instances))
    n_train = int(train_fraction * len(instances))
    train_set = [instances[i] for i in perm[:n_train]]
    test_set = [instances[i] for i in perm[n_train:]]
    return train_set, test_set


def sbs_stability(table: PerformanceTable, budget: int, n_splits: int = 1000,
                  instances=None, train_fraction: float = 0.8) -> dict:
    """How often each algorithm wins SBS over resampled training splits."""
    if instances is None:
        instances = table.instances(budget)
    counts: dict = {}
    for k in range(n_splits):
        train_set, _ = split(instances, train_fraction, seed=k)
        winner = sbs(table, train_set, budget)
        counts[winner] = counts.get(winner, 0) + 1
    return counts


# --- two-sample Kolmogorov-Smirnov -----------------------------------------

@dataclass(frozen=True)
class KsResult:
    statistic: float
    critical: float
    reject: bool


def ks_test(sample_a, sample_b, alpha: float = 0.01) -> KsResult:
    """Two-sided two-sample KS test with the asymptotic critical value."""
    if alpha not in KS_CRITICAL:
        raise ValueError(f"no critical coefficient for alpha={alpha}")
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_test needs two non-empty samples")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    critical = KS_CRITICAL[alpha] * math.sqrt((a.size + b.size) / (a.size * b.size))
    return KsResult(statistic=d, critical=critical, reject=d > critical)


# --- learned selection -----------------------------------------------------

@dataclass
class Selector:
    """13 per-algorithm regressors plus the imputation vector they share."""

    models: dict
    imputation: np.ndarray
    feature_order: tuple
    budget: int
    seed: int

    @property
    def algorithms(self) -> tuple:
        return tuple(self.models)


def _forest_seed(seed: int, algo_index: int) -> int:
    return int(np.random.SeedSequence([seed, algo_index]).generate_state(1)[0])


def train(features: dict, table: PerformanceTable, budget: int,
          seed: int = 0) -> Selector:
    """Fit one forest per algorithm on the instances present in features.

    Features may contain NaN entries; they are imputed with the per-column
    median of the training matrix (0 if a column is entirely NaN).
    """
    names = sorted(features)
    if len(names) < 2:
        raise ValueError("need at least 2 training instances")
    X = np.array([features[n] for n in names], dtype=float)
    if X.shape[1] != len(FEATURE_NAMES):
        raise ValueError(f"feature vectors must have {len(FEATURE_NAMES)} entries")
    with np.errstate(all="ignore"):
        medians = np.nanmedian(X, axis=0)
    medians = np.nan_to_num(medians, nan=0.0)
    X = np.where(np.isnan(X), medians, X)

    models = {}
    for idx, algo in enumerate(table.algorithms):
        y = np.array([table.value(n, algo, budget) for n in names])
        forest = RandomForestRegressor(
            random_state=_forest_seed(seed, idx), **FOREST_SPEC)
        forest.fit(X, y)
        models[algo] = forest
    return Selector(models=models, imputation=medians,
                    feature_order=tuple(FEATURE_NAMES), budget=budget,
                    seed=seed)


def _impute(selector: Selector, feature_vec) -> np.ndarray:
    vec = np.asarray(feature_vec, dtype=float)
    if vec.shape != (len(selector.feature_order),):
        raise ValueError(
            f"expected {len(selector.feature_order)} features, got {vec.shape}")
    return np.where(np.isnan(vec), selector.imputation, vec)


def predict(selector: Selector, feature_vec) -> dict:
    """Predicted median fitness per algorithm."""
    row = _impute(selector, feature_vec)[None, :]
    return {algo: float(model.predict(row)[0])
            for algo, model in selector.models.items()}


def select(selector: Selector, feature_vec) -> list:
    """All algorithms ranked by predicted fitness, best first."""
    preds = predict(selector, feature_vec)
    order = {algo: i for i, algo in enumerate(selector.algorithms)}
    return sorted(preds, key=lambda a: (preds[a], order[a]))


@dataclass(frozen=True)
class SelectorEvaluation:
    picks: dict
    losses: dict

    @property
    def median_loss(self) -> float:
        return lower_median(self.losses.values())


def evaluate_selector(selector: Selector, features: dict,
                      table: PerformanceTable, instances,
                      budget: int) -> SelectorEvaluation:
    """Loss of always taking the selector's top pick, per test instance."""
    picks, losses = {}, {}
    for inst in instances:
        pick = select(selector, features[inst])[0]
        picks[inst] = pick
        losses[inst] = relative_loss(table, pick, inst, budget)
    return SelectorEvaluation(picks=picks, losses=losses)


# --- model persistence -----------------------------------------------------

def save_bundle(selector: Selector, path: str) -> None:
    """Write a selector as a directory: metadata.json + one file per forest."""
    os.makedirs(path, exist_ok=True)
    meta = {
        "algorithms": list(selector.algorithms),
        "feature_order": list(selector.feature_order),
        "imputation": [float(v) for v in selector.imputation],
        "budget": selector.budget,
        "seed": selector.seed,
        "forest": {k: v for k, v in FOREST_SPEC.items()},
    }
    with open(os.path.join(path, _METADATA_FILE), "w") as fh:
        json.dump(meta, fh, indent=2)
    for algo, model in selector.models.items():
        joblib.dump(model, os.path.join(path, f"forest_{algo}.joblib"))


def load_bundle(path: str) -> Selector:
    with open(os.path.join(path, _METADATA_FILE)) as fh:
        meta = json.load(fh)
    models = {}
    for algo in meta["algorithms"]:
        models[algo] = joblib.load(os.path.join(path, f"forest_{algo}.joblib"))
    return Selector(models=models,
                    imputation=np.array(meta["imputation"], dtype=float),
                    feature_order=tuple(meta["feature_order"]),
                    budget=meta["budget"], seed=meta["seed"])
