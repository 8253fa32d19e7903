"""CMA-ES with switchable modules: elitist selection, active covariance
updates, pairwise-selected mirrored sampling, and bipop restarts.

The baseline follows Hansen's standard parameterisation (rank-one plus
rank-mu covariance update, cumulative step-size adaptation).  Modules:

elitist            (mu + lambda): the parents of the previous generation
                   compete with the offspring for selection.
active             the worst mu offspring push the covariance away from
                   unpromising directions (negative rank-mu term).
mirrored_pairwise  offspring are drawn as mirrored pairs m +- sigma*y and
                   only the better of each pair enters selection.
bipop              on every numerical stop the search restarts, alternating
                   a doubled-size large population with the default size.

Restarts (any variant) trigger on covariance condition above 1e14, on a
numerically collapsed step size, or on 20 generations without measurable
change; they are events, not errors.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np


class CmaesState:
    def __init__(self, dim, rng, lam=None, sigma0=0.3,
                 elitist=False, active=False, mirrored_pairwise=False):
        self.dim = dim
        self.rng = rng
        self.lam = lam if lam is not None else default_lambda(dim)
        if mirrored_pairwise and self.lam % 2:
            self.lam += 1
        self.elitist = elitist
        self.active = active
        self.mirrored = mirrored_pairwise

        self.mu = self.lam // 2
        w = np.log((self.lam + 1) / 2.0) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / np.sum(self.weights ** 2)

        d, mueff = float(dim), self.mueff
        self.cc = (4 + mueff / d) / (d + 4 + 2 * mueff / d)
        self.cs = (mueff + 2) / (d + mueff + 5)
        self.c1 = 2 / ((d + 1.3) ** 2 + mueff)
        self.cmu = min(1 - self.c1,
                       2 * (mueff - 2 + 1 / mueff) / ((d + 2) ** 2 + mueff))
        self.damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (d + 1)) - 1) + self.cs
        self.chi_n = math.sqrt(d) * (1 - 1 / (4 * d) + 1 / (21 * d * d))
        self.beta_active = (4.0 * self.mu - 2.0) / ((d + 12) ** 2 + 4.0 * self.mu)

        self.mean = rng.uniform(0.0, 1.0, dim)
        self.sigma = float(sigma0)
        self.C = np.eye(dim)
        self.ps = np.zeros(dim)
        self.pc = np.zeros(dim)
        self.gen = 0
        self.parents: list[tuple[float, np.ndarray]] = []
        self.best_history: deque = deque(maxlen=20)
        self._decompose()

    def _decompose(self):
        self.C = (self.C + self.C.T) / 2.0
        evals, B = np.linalg.eigh(self.C)
        evals = np.maximum(evals, 1e-30)
        self.D = np.sqrt(evals)
        self.B = B
        self.invsqrt_c = (B / self.D) @ B.T

    def ask(self) -> np.ndarray:
        """Sample lambda candidates (unclamped)."""
        if self.mirrored:
            half = self.lam // 2
            z = self.rng.standard_normal((half, self.dim))
            y = (z * self.D) @ self.B.T
            x = np.empty((self.lam, self.dim))
            x[0::2] = self.mean + self.sigma * y
            x[1::2] = self.mean - self.sigma * y
        else:
            z = self.rng.standard_normal((self.lam, self.dim))
            y = (z * self.D) @ self.B.T
            x = self.mean + self.sigma * y
        return x

    def tell(self, x: np.ndarray, f) -> None:
        f = np.asarray(f, dtype=float)
        self.gen += 1

        if self.mirrored:
            keep = []
            for i in range(0, self.lam, 2):
                keep.append(i if f[i] <= f[i + 1] else i + 1)
            pool_x = [x[i] for i in keep]
            pool_f = [float(f[i]) for i in keep]
        else:
            pool_x = [x[i] for i in range(self.lam)]
            pool_f = [float(v) for v in f]

        if self.elitist:
            for pf, px in self.parents:
                pool_x.append(px)
                pool_f.append(pf)

        order = np.argsort(np.asarray(pool_f), kind="stable")
        n_sel = min(self.mu, len(order))
        sel = order[:n_sel]
        xs = np.array([pool_x[i] for i in sel])
        fs = [pool_f[i] for i in sel]
        w = self.weights[:n_sel]
        w = w / w.sum()

        mean_old = self.mean
        y_sel = (xs - mean_old) / self.sigma
        yw = w @ y_sel
        self.mean = mean_old + self.sigma * yw

        self.ps = ((1 - self.cs) * self.ps
                   + math.sqrt(self.cs * (2 - self.cs) * self.mueff)
                   * (self.invsqrt_c @ yw))
        ps_norm = float(np.linalg.norm(self.ps))
        hsig = (ps_norm / math.sqrt(1 - (1 - self.cs) ** (2 * self.gen))
                / self.chi_n) < (1.4 + 2 / (self.dim + 1))
        self.pc = ((1 - self.cc) * self.pc
                   + (math.sqrt(self.cc * (2 - self.cc) * self.mueff) * yw
                      if hsig else 0.0))

        rank1 = np.outer(self.pc, self.pc)
        rankmu = y_sel.T @ (w[:, None] * y_sel)
        self.C = ((1 - self.c1 - self.cmu) * self.C
                  + self.c1 * (rank1 + (0.0 if hsig else
                                        self.cc * (2 - self.cc)) * self.C)
                  + self.cmu * rankmu)

        if self.active:
            worst = np.argsort(f, kind="stable")[::-1][:self.mu]
            y_bad = (x[worst] - mean_old) / self.sigma
            self.C -= self.beta_active * (y_bad.T @ (self.weights[:, None] * y_bad))

        self.sigma *= math.exp((self.cs / self.damps) * (ps_norm / self.chi_n - 1))
        self.sigma = min(self.sigma, 1e6)

        self.parents = list(zip(fs, xs))
        self.best_history.append(min(pool_f))
        self._decompose()

    def should_restart(self) -> bool:
        cond = (self.D.max() / self.D.min()) ** 2
        if cond > 1e14:
            return True
        if self.sigma * self.D.max() < 1e-12:
            return True
        if len(self.best_history) == self.best_history.maxlen:
            if max(self.best_history) - min(self.best_history) < 1e-12:
                return True
        return False


def default_lambda(dim: int) -> int:
    return 4 + int(3 * math.log(dim))


def cma_es(objective, budget, rng, dim,
           elitist=False, active=False, mirrored_pairwise=False, bipop=False,
           sigma0=0.3, **_):
    """Run (restarting) CMA-ES until the budget error stops it."""
    lam0 = default_lambda(dim)
    lam = lam0
    n_large = 0
    restarts = 0
    events = getattr(objective, "events", None)
    while True:
        state = CmaesState(dim, rng, lam=lam, sigma0=sigma0, elitist=elitist,
                           active=active, mirrored_pairwise=mirrored_pairwise)
        pen_scale = 1.0
        while not state.should_restart():
            x = state.ask()
            # evaluate the clamped point, but rank by a penalised value so
            # the distribution mean cannot stall outside the cube
            f_true = np.empty(len(x))
            f_rank = np.empty(len(x))
            for i, xi in enumerate(x):
                xc = np.clip(xi, 0.0, 1.0)
                fv = objective(xc)
                f_true[i] = fv
                f_rank[i] = fv + pen_scale * float(np.sum((xi - xc) ** 2))
            state.tell(x, f_rank)
            pen_scale = max(1.0, abs(float(np.median(f_true))))
        restarts += 1
        if events is not None:
            events.append(("restart", objective.count))
        if bipop:
            # odd restarts grow the large regime, even ones probe small again
            if restarts % 2 == 1:
                n_large += 1
                lam = lam0 * (2 ** n_large)
            else:
                lam = lam0
