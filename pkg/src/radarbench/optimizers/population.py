"""Population and sampling optimizers: random/Sobol search, DE, PSO.

Every algorithm here loops until the counting objective raises its budget
error; the caller owns termination.  All candidate points are kept inside
the unit cube before evaluation.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc


def random_search(objective, budget, rng, dim, **_):
    while True:
        objective(rng.uniform(0.0, 1.0, dim))


def sobol_search(objective, budget, rng, dim, **_):
    """Unscrambled Sobol sweep, fast-forwarded by a seed-dependent offset so
    different seeds walk different stretches of the sequence."""
    offset = int(rng.integers(0, 2 ** 20))
    engine = qmc.Sobol(d=dim, scramble=False)
    if offset:
        # scipy's fast_forward chokes on 0
        engine.fast_forward(offset)
    while True:
        objective(engine.random(1)[0])


def differential_evolution(objective, budget, rng, dim,
                           popsize=15, mutation=(0.5, 1.0), recombination=0.7, **_):
    """DE/rand/1/bin.  ``popsize`` is the actual number of individuals.

    A (lo, hi) mutation re-draws the differential weight uniformly each
    generation; a scalar keeps it fixed.  Selection accepts equal fitness,
    which keeps the population moving on plateaus.
    """
    pop = rng.uniform(0.0, 1.0, (popsize, dim))
    fit = np.array([objective(x) for x in pop])
    while True:
        if isinstance(mutation, tuple):
            f_weight = rng.uniform(mutation[0], mutation[1])
        else:
            f_weight = float(mutation)
        for i in range(popsize):
            order = rng.permutation(popsize)
            r1, r2, r3 = [j for j in order if j != i][:3]
            mutant = pop[r1] + f_weight * (pop[r2] - pop[r3])
            cross = rng.random(dim) < recombination
            cross[rng.integers(dim)] = True
            trial = np.where(cross, mutant, pop[i])
            np.clip(trial, 0.0, 1.0, out=trial)
            f_trial = objective(trial)
            if f_trial <= fit[i]:
                pop[i] = trial
                fit[i] = f_trial


def particle_swarm(objective, budget, rng, dim,
                   swarm=10, inertia=0.7298, cognitive=1.49618, social=1.49618, **_):
    """Global-best PSO with the usual constriction-style coefficients.

    The global best refreshes once per sweep; velocities are clamped to the
    cube edge length and zeroed on dimensions that hit the boundary.
    """
    x = rng.uniform(0.0, 1.0, (swarm, dim))
    v = np.zeros((swarm, dim))
    pbest = x.copy()
    pfit = np.array([objective(p) for p in x])
    g = int(np.argmin(pfit))
    gbest, gfit = pbest[g].copy(), float(pfit[g])
    while True:
        for i in range(swarm):
            r1 = rng.random(dim)
            r2 = rng.random(dim)
            v[i] = (inertia * v[i]
                    + cognitive * r1 * (pbest[i] - x[i])
                    + social * r2 * (gbest - x[i]))
            np.clip(v[i], -1.0, 1.0, out=v[i])
            x[i] = x[i] + v[i]
            hit = (x[i] < 0.0) | (x[i] > 1.0)
            np.clip(x[i], 0.0, 1.0, out=x[i])
            v[i][hit] = 0.0
            f = objective(x[i])
            if f < pfit[i]:
                pfit[i] = f
                pbest[i] = x[i].copy()
        g = int(np.argmin(pfit))
        if pfit[g] < gfit:
            gbest, gfit = pbest[g].copy(), float(pfit[g])
