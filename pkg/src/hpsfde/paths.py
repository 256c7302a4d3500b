"""Dense solution paths and the proportional-delay segment accessor.

A solution trajectory is stored as values on a strictly increasing time
grid covering [theta_lower * t0, T], with the initial segment populated
from the initial data before integration starts.  Evaluation between
grid points is piecewise linear, which matches the strong order of the
Euler scheme and makes segment sup-norms exact on the stored
representation.

The segment of a path at anchor time t is the function
phi(theta) = x(theta * t) on [theta_lower, 1]; phi(1) is the current
state.  Because theta <= 1, no segment lookup ever needs future data.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import OutOfDomain, PathExploded


def _atol(scale: float) -> float:
    return 1e-9 * max(1.0, abs(scale))


@dataclass(frozen=True)
class DensePath:
    """Piecewise-linear path with per-point regime labels.

    Fields:
      times: (m,) strictly increasing grid; times[0] = theta_lower * t0.
      values: (m, n) state at each grid point.
      regimes: (m,) regime in effect at each grid point, right-continuous;
        points before t0 carry the initial regime.
      theta_lower: proportional-delay bound in (0, 1).
      t0: integration start time (> 0).
      exploded_at: time the blow-up guard tripped, or None.  When set,
        the grid ends at exploded_at and later times cannot be evaluated.
    """

    times: np.ndarray
    values: np.ndarray
    regimes: np.ndarray
    theta_lower: float
    t0: float
    exploded_at: Optional[float] = None

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def scalar_values(self) -> np.ndarray:
        """The (m,) value series of a one-dimensional path."""
        if self.values.shape[1] != 1:
            raise ValueError("path is not one-dimensional")
        return self.values[:, 0]


def eval(path: DensePath, t):
    """Evaluate a path at time(s) t by piecewise-linear interpolation.

    Exact at grid points.  t may be a scalar or an array; the result has
    shape (n,) or (len(t), n).

    Raises:
      OutOfDomain: t outside [theta_lower*t0, last grid time].
      PathExploded: t past the blow-up time.
    """
    times = path.times
    t_arr = np.asarray(t, dtype=np.float64)
    lo, hi = times[0], times[-1]
    tol = _atol(hi)
    tmin = float(t_arr.min()) if t_arr.size else lo
    tmax = float(t_arr.max()) if t_arr.size else lo
    if path.exploded_at is not None and tmax > path.exploded_at + tol:
        raise PathExploded(
            "path exploded at t=%g, queried t=%g" % (path.exploded_at, tmax))
    if tmin < lo - tol or tmax > hi + tol:
        raise OutOfDomain(
            "t must lie in [%g, %g], got range [%g, %g]" % (lo, hi, tmin, tmax))
    tc = np.clip(t_arr, lo, hi)
    idx = np.searchsorted(times, tc, side="right") - 1
    idx = np.clip(idx, 0, len(times) - 2)
    h = times[idx + 1] - times[idx]
    w = (tc - times[idx]) / h
    left = path.values[idx]
    right = path.values[idx + 1]
    if t_arr.ndim == 0:
        return left * (1.0 - w) + right * w
    return left * (1.0 - w)[..., None] + right * w[..., None]


@dataclass(frozen=True)
class SegmentView:
    """Read-only view of a path's segment at anchor time t.

    Calling the view with theta in [theta_lower, 1] returns
    x(theta * t); the ``point`` property is the current state x(t).
    """

    path: DensePath
    t: float

    @property
    def theta_lower(self) -> float:
        return self.path.theta_lower

    @property
    def point(self) -> np.ndarray:
        return eval(self.path, self.t)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        lo = self.path.theta_lower
        tol = 1e-12
        if theta.size and (theta.min() < lo - tol or theta.max() > 1.0 + tol):
            raise OutOfDomain(
                "theta must lie in [%g, 1], got range [%g, %g]"
                % (lo, theta.min(), theta.max()))
        return eval(self.path, np.clip(theta, lo, 1.0) * self.t)


def segment(path: DensePath, t: float) -> SegmentView:
    """Segment view of ``path`` anchored at time t >= t0.

    Raises:
      OutOfDomain: t before t0 or past the stored horizon.
      PathExploded: t past the blow-up time.
    """
    tol = _atol(path.t_end)
    if t < path.t0 - tol:
        raise OutOfDomain("segment anchor t=%g is before t0=%g" % (t, path.t0))
    if path.exploded_at is not None and t > path.exploded_at + tol:
        raise PathExploded(
            "path exploded at t=%g, anchor t=%g" % (path.exploded_at, t))
    if t > path.t_end + tol:
        raise OutOfDomain(
            "segment anchor t=%g is past the stored horizon %g"
            % (t, path.t_end))
    return SegmentView(path=path, t=float(t))


def sup_norm(view: SegmentView, nodes: int = 64) -> float:
    """Supremum of |phi| over the segment [theta_lower, 1].

    For the piecewise-linear storage the maximum of the Euclidean norm
    over each linear piece is attained at its endpoints, so evaluating at
    the stored breakpoints inside [theta_lower*t, t] plus the two segment
    endpoints is exact.  ``nodes`` adds a uniform sampling fallback for
    non-grid-aligned queries; it never lowers the result.
    """
    if nodes < 2:
        raise ValueError("nodes must be >= 2")
    lo = view.path.theta_lower * view.t
    hi = view.t
    times = view.path.times
    inside = times[(times > lo) & (times < hi)]
    cand = np.concatenate((np.linspace(lo, hi, nodes), inside))
    vals = eval(view.path, cand)
    return float(np.sqrt((vals * vals).sum(axis=1)).max())


# ---------------------------------------------------------------------------
# Synthetic segments (no underlying path)
# ---------------------------------------------------------------------------

class ConstantSegment:
    """Segment that is identically equal to a fixed state.

    Useful for evaluating coefficients and the LV operator at
    hand-picked arguments, e.g. phi == 1.
    """

    def __init__(self, value, theta_lower: float):
        v = np.atleast_1d(np.asarray(value, dtype=np.float64))
        self.value = v
        self.theta_lower = float(theta_lower)

    @property
    def point(self) -> np.ndarray:
        return self.value

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.ndim == 0:
            return self.value.copy()
        return np.broadcast_to(self.value, theta.shape + self.value.shape).copy()


class FunctionSegment:
    """Segment defined by an arbitrary function of theta on [theta_lower, 1].

    Args:
      fn: maps a scalar theta to a scalar or an (n,) state.
      theta_lower: lower bound of the segment domain.
      vectorized: set True when fn already accepts theta arrays and
        returns a matching leading axis.
    """

    def __init__(self, fn: Callable, theta_lower: float, vectorized: bool = False):
        self.fn = fn
        self.theta_lower = float(theta_lower)
        self.vectorized = vectorized

    @property
    def point(self) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.fn(1.0), dtype=np.float64))

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        if self.vectorized:
            out = np.asarray(self.fn(theta), dtype=np.float64)
            if theta.ndim == 0:
                return np.atleast_1d(out)
            if out.ndim == theta.ndim:
                out = out[..., None]
            return out
        if theta.ndim == 0:
            return np.atleast_1d(np.asarray(self.fn(float(theta)), float))
        rows = [np.atleast_1d(np.asarray(self.fn(float(th)), float))
                for th in theta.ravel()]
        out = np.stack(rows)
        return out.reshape(theta.shape + (out.shape[-1],))


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def write_csv(path: DensePath, dest) -> None:
    """Write a path as CSV with columns time, regime, x_1..x_n.

    ``dest`` is a file path or a text file object.  Floats are written
    with 17 significant digits so a rewrite of the same path is
    byte-identical.
    """
    n = path.dim
    header = "time,regime," + ",".join("x_%d" % (j + 1) for j in range(n))
    lines = [header]
    for k in range(len(path.times)):
        cells = ["%.17g" % path.times[k], "%d" % path.regimes[k]]
        cells += ["%.17g" % v for v in path.values[k]]
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        with io.open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        dest.write(text)
