"""Metric midpoints by alternating geodesic halving, and the reversal fix.

Iterating ``x <- sigma(x, y, 1/2)``, ``y <- sigma(y, x, 1/2)`` halves the gap
between the two sequences whenever the selection satisfies the conical
inequality, so both converge geometrically to a common metric midpoint.
Feeding the midpoint of ``sigma(x, y, t)`` and ``sigma(y, x, 1-t)`` back
through this map turns any conical selection into a reversible one.

Iteration state is local to each call; everything here is safe to run
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bicombings import Bicombing


class ConvergenceError(RuntimeError):
    """Raised when the halving iteration fails to contract.

    This signals that the underlying selection is not conical on the pair,
    since conical selections halve the gap at every step.
    """


@dataclass(frozen=True)
class MidpointConfig:
    """Stopping rule for the halving iteration.

    The default budget of 64 halvings is enough to underflow any diameter
    occurring here, so hitting ``max_iter`` means the gap did not contract.
    """

    tol: float = 1e-10
    max_iter: int = 64

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def midpoint_iteration(base, x, y, cfg=None):
    """Run the halving iteration and return ``(midpoints, gaps)``.

    ``gaps[i, n]`` is the distance between the two sequences of pair ``i``
    after ``n`` halvings, ``nan`` once that pair has stopped. Each pair stops
    at the first n with gap <= tol and its midpoint is frozen there.
    """
    cfg = cfg or MidpointConfig()
    X = np.array(np.atleast_2d(np.asarray(x, dtype=float)), copy=True)
    Y = np.array(np.atleast_2d(np.asarray(y, dtype=float)), copy=True)
    squeeze = np.asarray(x).ndim == 1 and np.asarray(y).ndim == 1
    if X.shape[0] != Y.shape[0]:
        n = max(X.shape[0], Y.shape[0])
        X = np.ascontiguousarray(np.broadcast_to(X, (n, 2)))
        Y = np.ascontiguousarray(np.broadcast_to(Y, (n, 2)))
    n = X.shape[0]
    gaps = np.full((n, cfg.max_iter + 1), np.nan)
    g = np.atleast_1d(np.asarray(base.dist(X, Y), dtype=float))
    gaps[:, 0] = g
    active = g > cfg.tol
    step = 0
    while active.any():
        if step >= cfg.max_iter:
            worst = float(np.max(g[active])) if active.any() else 0.0
            raise ConvergenceError(
                f"midpoint gap {worst:g} still above tol {cfg.tol:g} after "
                f"{cfg.max_iter} halvings; base selection is not conical here")
        step += 1
        Xa, Ya = X[active], Y[active]
        Xn = base.eval(Xa, Ya, 0.5)
        Yn = base.eval(Ya, Xa, 0.5)
        X[active] = Xn
        Y[active] = Yn
        ga = np.atleast_1d(np.asarray(base.dist(Xn, Yn), dtype=float))
        gaps[active, step] = ga
        g[active] = ga
        active[active] = ga > cfg.tol
    mids = X[0] if squeeze and n == 1 else X
    return mids, gaps


def midpoint(base, x, y, cfg=None):
    """Metric midpoint of ``x`` and ``y`` under the selection ``base``.

    Symmetric in its arguments and half way from either endpoint, each up to
    ``cfg.tol``. Raises :class:`ConvergenceError` when the iteration does not
    contract within ``cfg.max_iter`` halvings.
    """
    mids, _ = midpoint_iteration(base, x, y, cfg)
    return mids


def reversibilize(base, cfg=None):
    """Reversible bicombing built on top of a conical one.

    The returned selection evaluates the base geodesic in both orientations
    and takes the metric midpoint of the two, so forward and backward
    traversals agree within ``2 * cfg.tol``; the result stays geodesic and
    conical up to the same slack. Midpoint iteration failures propagate.
    """
    cfg = cfg or MidpointConfig()

    def ev(p, q, t):
        a = base.eval(p, q, t)
        b = base.eval(q, p, 1.0 - np.asarray(t, dtype=float))
        return midpoint(base, a, b, cfg)

    return Bicombing(name=f"reversibilized({base.name})", space=base.space,
                     domain=base.domain, eval=ev)
