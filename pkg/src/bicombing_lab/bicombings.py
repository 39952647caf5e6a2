"""Concrete geodesic bicombings on the planar counterexample spaces.

A bicombing selects, for every ordered pair of points, a constant-speed
geodesic between them. Besides the plain affine selection this module builds:

* ``sigma_delta`` on the antenna blob ``X`` (hybrid norm): geodesics joining
  the two antennas bow upward onto a shallow parabola of height controlled by
  ``delta``; all other geodesics are piecewise linear. Convex but not
  consistent for ``delta > 0``.
* ``sigma_tilde_delta``: same, except right-to-left antenna geodesics stay on
  the axis, which destroys reversibility.
* ``sigma_X1`` on the folded strip ``X1`` (max norm): retract an affine
  segment onto the strip, routing the two orientations through the two
  unfoldings. Conical but not reversible.
* ``tau_X1``: reroute every ``sigma_X1`` geodesic through the average of the
  two half-way points, which restores the midpoint property (but still not
  reversibility).
* ``pushforward``: conjugate any bicombing by a translation.

Evaluators are closed-form, pure and batch-aware: points may be ``(2,)`` or
``(n, 2)`` arrays and the parameter a scalar or a length-``n`` array.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import spaces

#: Largest admissible bulge parameter for ``sigma_delta``.
DELTA_MAX = 1.0 / 64.0

_X = spaces.Region("X")
_X1 = spaces.Region("X1")
_X2 = spaces.Region("X2")
_Y1 = spaces.Region("Y1")
_Y2 = spaces.Region("Y2")


@dataclass(frozen=True)
class Bicombing:
    """A geodesic selection together with its domain and ambient norm.

    ``eval(p, q, t)`` is the selected geodesic from ``p`` to ``q`` at
    parameter ``t``; instances are immutable and safe to share.
    """

    name: str
    space: str
    domain: spaces.Region
    eval: Callable

    def __call__(self, p, q, t):
        return self.eval(p, q, t)

    def dist(self, p, q):
        return spaces.dist(self.space, p, q)

    def sample(self, rng, count):
        return spaces.sample_region_rng(self.domain, rng, count)


def _check_delta(delta):
    if not 0.0 <= delta <= DELTA_MAX:
        raise ValueError(f"delta must lie in [0, 1/64], got {delta!r}")


def _pqt(p, q, t):
    """Normalize endpoints and parameter to ``(n, 2), (n, 2), (n,)`` arrays."""
    P = np.asarray(p, dtype=float)
    Q = np.asarray(q, dtype=float)
    squeeze = P.ndim == 1 and Q.ndim == 1 and np.ndim(t) == 0
    P = np.atleast_2d(P)
    Q = np.atleast_2d(Q)
    n = max(P.shape[0], Q.shape[0])
    if P.shape[0] != n:
        P = np.broadcast_to(P, (n, 2))
    if Q.shape[0] != n:
        Q = np.broadcast_to(Q, (n, 2))
    T = np.ascontiguousarray(np.broadcast_to(np.asarray(t, dtype=float), (n,)))
    return np.ascontiguousarray(P), np.ascontiguousarray(Q), T, squeeze


def _points(p):
    P = np.asarray(p, dtype=float)
    squeeze = P.ndim == 1
    return np.atleast_2d(P).astype(float, copy=True), squeeze


def _require_in(region, P, label, tol=spaces.DEFAULT_TOL):
    ok = np.atleast_1d(spaces.contains(region, P, tol))
    if not ok.all():
        bad = np.atleast_2d(P)[~ok][0]
        raise ValueError(f"{label} endpoint {tuple(bad)} lies outside {region.tag}")


def linear(p, q, t):
    """Affine interpolation ``(1-t) p + t q``."""
    P = np.asarray(p, dtype=float)
    Q = np.asarray(q, dtype=float)
    T = np.asarray(t, dtype=float)[..., None]
    return (1.0 - T) * P + T * Q


def _orient(P, Q, T):
    # canonical orientation, smaller x first (ties broken on y); running the
    # reversed pair through the identical branch makes reversibility hold bit
    # for bit whenever 1-(1-t) == t
    swap = (P[:, 0] > Q[:, 0]) | ((P[:, 0] == Q[:, 0]) & (P[:, 1] > Q[:, 1]))
    if not swap.any():
        return P, Q, T
    sw = swap[:, None]
    return (np.where(sw, Q, P), np.where(sw, P, Q), np.where(swap, 1.0 - T, T))


def _sigma_delta_core(delta, P, Q, T):
    # assumes rows oriented so that P precedes Q; case dispatch keys on the
    # closed antennas x <= -1 and x >= 1, the interior is open in x
    px, py = P[:, 0], P[:, 1]
    qx, qy = Q[:, 0], Q[:, 1]
    x = px + T * (qx - px)
    y = np.zeros_like(x)

    p_minus = px <= -1.0
    p_zero = (px > -1.0) & (px < 1.0)
    q_plus = qx >= 1.0
    q_zero = (qx > -1.0) & (qx < 1.0)

    c = p_minus & q_plus  # antenna to antenna: bow onto a shallow parabola
    if c.any():
        amp = delta * np.maximum(qx[c] - px[c] - 4.0, 0.0)
        y[c] = amp * np.maximum(0.0, 1.0 - x[c] * x[c])
    c = p_minus & q_zero  # climb a chord from the left antenna tip
    if c.any():
        y[c] = np.maximum(0.0, qy[c] / (qx[c] + 1.0) * (x[c] + 1.0))
    c = p_zero & q_plus  # descend a chord into the right antenna
    if c.any():
        y[c] = np.maximum(0.0, py[c] / (px[c] - 1.0) * (x[c] - 1.0))
    c = p_zero & q_zero  # interior pairs interpolate linearly
    if c.any():
        y[c] = py[c] + T[c] * (qy[c] - py[c])
    # remaining rows have both endpoints on one antenna and stay on the axis
    return np.stack([x, y], axis=-1)


def sigma_delta(delta, p, q, t):
    """Bulged geodesic selection on the antenna blob ``X``.

    Geodesics between the two antennas follow the parabola
    ``delta * max(span - 4, 0) * (1 - x^2)``; everything else is piecewise
    linear. Reversible by construction.
    """
    _check_delta(delta)
    P, Q, T, squeeze = _pqt(p, q, t)
    _require_in(_X, P, "p")
    _require_in(_X, Q, "q")
    A, B, S = _orient(P, Q, T)
    out = _sigma_delta_core(delta, A, B, S)
    return out[0] if squeeze else out


def sigma_tilde_delta(delta, p, q, t):
    """Like :func:`sigma_delta`, except geodesics from the right antenna to
    the left one run straight along the axis, which breaks reversibility."""
    _check_delta(delta)
    P, Q, T, squeeze = _pqt(p, q, t)
    _require_in(_X, P, "p")
    _require_in(_X, Q, "q")
    A, B, S = _orient(P, Q, T)
    out = _sigma_delta_core(delta, A, B, S)
    flat = (P[:, 0] >= 1.0) & (Q[:, 0] <= -1.0)
    if flat.any():
        out[flat, 0] = P[flat, 0] + T[flat] * (Q[flat, 0] - P[flat, 0])
        out[flat, 1] = 0.0
    return out[0] if squeeze else out


def fold_s(p):
    """Reflection across the x-axis."""
    P, squeeze = _points(p)
    P[:, 1] = -P[:, 1]
    return P[0] if squeeze else P


def _fold(P):
    # reflect the slanted antenna (x <= -1) across the x-axis; an involution
    # exchanging the folded strip with its mirror image, identity at x = -1
    flip = P[:, 0] <= -1.0
    R = P.copy()
    R[flip, 1] = -R[flip, 1]
    return R


def fold_f(p, direction):
    """Unfolding isometry between the strip ``X2`` and the strip ``X1``.

    ``forward`` maps ``X2`` to ``X1`` and ``inverse`` maps ``X1`` to ``X2``;
    both flip the antenna part ``x <= -1`` across the x-axis and fix the rest.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    P, squeeze = _points(p)
    src = _X2 if direction == "forward" else _X1
    _require_in(src, P, direction)
    out = _fold(P)
    return out[0] if squeeze else out


def _pi(P):
    x, y = P[:, 0], P[:, 1]
    cap = np.abs(np.abs(x) - 1.0)
    return np.stack([x, np.sign(y) * np.minimum(np.abs(y), cap)], axis=-1)


def retraction_pi(p):
    """Vertical 1-Lipschitz retraction of ``Y1 u Y2`` onto ``X1 u X2``.

    Clamps ``|y|`` to ``||x| - 1|`` while keeping the sign of ``y``; fixes
    ``X1 u X2`` pointwise and is idempotent.
    """
    P, squeeze = _points(p)
    ok = np.atleast_1d(spaces.contains(_Y1, P) | spaces.contains(_Y2, P))
    if not ok.all():
        bad = P[~ok][0]
        raise ValueError(f"point {tuple(bad)} lies outside Y1 u Y2")
    out = _pi(P)
    return out[0] if squeeze else out


def sigma_X1(p, q, t):
    """Retraction bicombing on the folded strip ``X1`` under the max norm.

    Left-to-right pairs retract the affine segment onto the strip; right-to-
    left pairs do the same in the mirror image and fold back, so the two
    orientations select genuinely different paths. Conical, not reversible.
    Ties ``p_x == q_x`` take the first branch.
    """
    P, Q, T, squeeze = _pqt(p, q, t)
    _require_in(_X1, P, "p")
    _require_in(_X1, Q, "q")
    out = np.empty_like(P)
    first = P[:, 0] <= Q[:, 0]
    if first.any():
        out[first] = _pi(linear(P[first], Q[first], T[first]))
    rest = ~first
    if rest.any():
        A = _fold(P[rest])
        B = _fold(Q[rest])
        out[rest] = _fold(_pi(linear(A, B, T[rest])))
    return out[0] if squeeze else out


def tau_X1(p, q, t):
    """Midpoint-modified retraction bicombing on ``X1``.

    Runs from ``p`` to the average ``m`` of the two half-way points of
    :func:`sigma_X1` and then from ``m`` to ``q``, each at double speed. Has
    the midpoint property by construction, yet is still not reversible.
    """
    P, Q, T, squeeze = _pqt(p, q, t)
    _require_in(_X1, P, "p")
    _require_in(_X1, Q, "q")
    M = 0.5 * (sigma_X1(P, Q, 0.5) + sigma_X1(Q, P, 0.5))
    ok = np.atleast_1d(spaces.contains(_X1, M))
    if not ok.all():
        bad = M[~ok][0]
        raise ValueError(f"averaged midpoint {tuple(bad)} escaped X1")
    out = np.empty_like(P)
    lo = T <= 0.5
    if lo.any():
        out[lo] = sigma_X1(P[lo], M[lo], 2.0 * T[lo])
    hi = ~lo
    if hi.any():
        out[hi] = sigma_X1(M[hi], Q[hi], 2.0 * T[hi] - 1.0)
    return out[0] if squeeze else out


def pushforward(shift, base, p, q, t):
    """Evaluate ``base`` conjugated by the translation about ``shift``."""
    shift = np.asarray(shift, dtype=float)
    P, Q, T, squeeze = _pqt(p, q, t)
    P0 = P - shift
    Q0 = Q - shift
    for label, Z in (("p", P0), ("q", Q0)):
        ok = np.atleast_1d(spaces.contains(base.domain, Z, spaces.DEFAULT_TOL))
        if not ok.all():
            bad = Z[~ok][0]
            raise ValueError(
                f"translated {label} endpoint {tuple(bad)} lies outside {base.domain.tag}")
    out = base.eval(P0, Q0, T) + shift
    return out[0] if squeeze else out


def linear_bicombing(space="euclid", domain=None, name="linear"):
    """The affine selection, by default on a large ball so it can be sampled."""
    if domain is None:
        domain = spaces.Region.ball((0.0, 0.0), 8.0, space)
    return Bicombing(name, space, domain, linear)


def sigma_delta_bicombing(delta=DELTA_MAX, name=None):
    _check_delta(delta)
    return Bicombing(name or f"sigma_delta[{delta:g}]", "hybrid", _X,
                     functools.partial(sigma_delta, delta))


def sigma_tilde_bicombing(delta=DELTA_MAX, name=None):
    _check_delta(delta)
    return Bicombing(name or f"sigma_tilde[{delta:g}]", "hybrid", _X,
                     functools.partial(sigma_tilde_delta, delta))


def sigma_X1_bicombing():
    return Bicombing("sigma_X1", "linf", _X1, sigma_X1)


def tau_X1_bicombing():
    return Bicombing("tau_X1", "linf", _X1, tau_X1)
