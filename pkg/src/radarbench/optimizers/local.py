"""Restarting wrappers around scipy local searches.

Each inner search runs with its normal convergence tolerances; when it stops
with budget left, a fresh uniform start point is drawn and the search runs
again.  Restarts are recorded on the objective's event list so run results
can report them.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize


def _note_restart(objective, n):
    events = getattr(objective, "events", None)
    if events is not None and n > 0:
        events.append(("restart", objective.count))


def _restarting_simplex_family(method):
    def algo(objective, budget, rng, dim, **options):
        def clamped(x):
            return objective(np.clip(x, 0.0, 1.0))

        starts = 0
        while True:
            _note_restart(objective, starts)
            x0 = rng.uniform(0.0, 1.0, dim)
            minimize(clamped, x0, method=method, options=dict(options))
            starts += 1
    algo.__name__ = method.replace("-", "").lower()
    return algo


nelder_mead = _restarting_simplex_family("Nelder-Mead")
powell = _restarting_simplex_family("Powell")


def lbfgsb(objective, budget, rng, dim, fd_step=0.01, **_):
    """L-BFGS-B with forward finite differences of step ``fd_step``.

    Bounds are native, so no clamping wrapper is needed.  On the piecewise
    constant coverage objective gradients vanish and the inner search stops
    almost immediately; the restart loop keeps consuming budget.
    """
    bounds = [(0.0, 1.0)] * dim
    starts = 0
    while True:
        _note_restart(objective, starts)
        x0 = rng.uniform(0.0, 1.0, dim)
        minimize(objective, x0, method="L-BFGS-B", bounds=bounds,
                 options={"eps": fd_step, "maxfun": 10_000_000,
                          "maxiter": 10_000_000})
        starts += 1
