"""The space of strictly increasing normalized functions under the L1 metric.

Elements are piecewise-linear, strictly increasing functions on [0,1] with
f(0)=0 and f(1)=1. On this class the graph inversion f -> f^-1 is an exact
coordinate swap and the L1 distance has a closed form per segment, so the two
interpolation schemes of interest are exact:

* vertical: pointwise affine combination (1-t) f + t g,
* horizontal: invert, combine affinely, invert back (the graphs slide
  horizontally into each other).

Both are consistent conical geodesic selections for the L1 distance, and they
differ: averaging the square root function with the identity vertically or
horizontally gives visibly different curves.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True, eq=False)
class MonotoneFn:
    """Strictly increasing piecewise-linear function on [0,1], 0 -> 0, 1 -> 1.

    Values between breakpoints interpolate linearly. Instances are immutable;
    the breakpoint arrays are stored read-only.
    """

    xs: np.ndarray
    vs: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        vs = np.asarray(self.vs, dtype=float)
        if xs.ndim != 1 or xs.shape != vs.shape or len(xs) < 2:
            raise ValueError("breakpoints must be two equal-length 1-d arrays")
        if xs[0] != 0.0 or vs[0] != 0.0 or xs[-1] != 1.0 or vs[-1] != 1.0:
            raise ValueError("breakpoints must start at (0,0) and end at (1,1)")
        if not (np.diff(xs) > 0).all() or not (np.diff(vs) > 0).all():
            raise ValueError("breakpoints must be strictly increasing in both coordinates")
        xs = xs.copy()
        vs = vs.copy()
        xs.setflags(write=False)
        vs.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vs", vs)

    def __call__(self, x):
        return eval_fn(self, x)


def identity_fn():
    return MonotoneFn(np.array([0.0, 1.0]), np.array([0.0, 1.0]))


def from_breakpoints(pairs):
    pairs = np.asarray(pairs, dtype=float)
    return MonotoneFn(pairs[:, 0], pairs[:, 1])


def sqrt_approx(n=256):
    """Piecewise-linear square root on the graded mesh ``x_i = (i/n)^2``.

    The graded mesh puts the inverse (the squaring function) on a uniform
    mesh, so the function and its inverse are both well resolved near 0 where
    the square root has unbounded slope.
    """
    i = np.arange(n + 1) / n
    return MonotoneFn(i * i, i)


def eval_fn(f, x):
    """Evaluate at ``x`` in [0,1] (scalar or array) by linear interpolation."""
    return np.interp(x, f.xs, f.vs)


def l1_distance(f, g):
    """Exact L1 distance between two piecewise-linear functions.

    On the merged breakpoint grid the difference is linear per segment, so
    each segment integrates in closed form, solving the crossing point
    exactly where the difference changes sign.
    """
    xs = np.union1d(f.xs, g.xs)
    h = np.interp(xs, f.xs, f.vs) - np.interp(xs, g.xs, g.vs)
    w = np.diff(xs)
    ha, hb = h[:-1], h[1:]
    mean_abs = 0.5 * np.abs(ha + hb)
    cross = (ha * hb) < 0.0
    if cross.any():
        num = ha[cross] * ha[cross] + hb[cross] * hb[cross]
        mean_abs[cross] = num / (2.0 * np.abs(ha[cross] - hb[cross]))
    return float(np.dot(mean_abs, w))


def invert(f):
    """Exact inverse within the piecewise-linear class (coordinate swap)."""
    return MonotoneFn(f.vs, f.xs)


def _combine(f, g, t):
    xs = np.union1d(f.xs, g.xs)
    vs = (1.0 - t) * np.interp(xs, f.xs, f.vs) + t * np.interp(xs, g.xs, g.vs)
    # the exact endpoint values can round off by one ulp; pin them
    vs[0] = 0.0
    vs[-1] = 1.0
    return MonotoneFn(xs, vs)


def vertical_bicombing(f, g, t):
    """Pointwise affine interpolation ``(1-t) f + t g``."""
    if t == 0.0:
        return f
    if t == 1.0:
        return g
    return _combine(f, g, t)


def horizontal_bicombing(f, g, t):
    """Horizontal interpolation: slide the graphs into each other sideways.

    Equals inversion, vertical interpolation of the inverses, and inversion
    back; exact on the piecewise-linear class.
    """
    if t == 0.0:
        return f
    if t == 1.0:
        return g
    return invert(_combine(invert(f), invert(g), t))


def sqrt_identity_interpolant(x, t):
    """Closed form of the horizontal interpolation from sqrt to the identity:
    ``x -> (-t + sqrt(4 (1-t) x + t^2)) / (2 (1-t))``."""
    x = np.asarray(x, dtype=float)
    if t == 1.0:
        return x.copy()
    if t == 0.0:
        return np.sqrt(x)
    return (-t + np.sqrt(4.0 * (1.0 - t) * x + t * t)) / (2.0 * (1.0 - t))


def random_monotone_fn(rng, max_interior=6):
    """Random strictly increasing piecewise-linear function on [0,1]."""
    while True:
        k = int(rng.integers(0, max_interior + 1))
        xs = np.concatenate([[0.0], np.sort(rng.random(k)), [1.0]])
        vs = np.concatenate([[0.0], np.sort(rng.random(k)), [1.0]])
        if (np.diff(xs) > 1e-9).all() and (np.diff(vs) > 1e-9).all():
            return MonotoneFn(xs, vs)


def to_text(f):
    """Two-column text serialization: one "x v" line per breakpoint."""
    buf = io.StringIO()
    for x, v in zip(f.xs, f.vs):
        buf.write(f"{float(x)!r} {float(v)!r}\n")
    return buf.getvalue()


def from_text(text):
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    pairs = np.array([[float(a), float(b)] for a, b in rows])
    return MonotoneFn(pairs[:, 0], pairs[:, 1])


@dataclass(frozen=True, eq=False)
class FunctionBicombing:
    """Adapter exposing a function-space interpolation to the property engine.

    Batches are object arrays of :class:`MonotoneFn`; distances are L1. The
    sampler draws random piecewise-linear functions.
    """

    name: str
    combine: Callable

    def eval(self, fs, gs, t):
        if isinstance(fs, MonotoneFn):
            return self.combine(fs, gs, float(t))
        n = len(fs)
        ts = np.broadcast_to(np.asarray(t, dtype=float), (n,))
        out = np.empty(n, dtype=object)
        for i in range(n):
            out[i] = self.combine(fs[i], gs[i], float(ts[i]))
        return out

    def __call__(self, f, g, t):
        return self.eval(f, g, t)

    def dist(self, fs, gs):
        if isinstance(fs, MonotoneFn):
            return l1_distance(fs, gs)
        return np.array([l1_distance(fi, gi) for fi, gi in zip(fs, gs)])

    def sample(self, rng, count):
        out = np.empty(count, dtype=object)
        for i in range(count):
            out[i] = random_monotone_fn(rng)
        return out


def vertical_fn_bicombing():
    return FunctionBicombing("funcspace_vertical", vertical_bicombing)


def horizontal_fn_bicombing():
    return FunctionBicombing("funcspace_horizontal", horizontal_bicombing)
