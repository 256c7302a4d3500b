"""Continuous-time Markov chains on a finite state space.

The regime process r(t) takes values in {1, ..., N} and is described by a
generator matrix whose off-diagonal entry (i, j) is the jump rate from
state i to state j.  Sampling uses the exact jump-chain construction:
the holding time in state i is Exponential(-rates[i, i]) and the next
state is drawn from the embedded chain.  Switch times are produced
verbatim so that an integrator can insert them into its time grid.

States are 1-based in every public interface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeOffDiagonal, ReducibleChain, RowSumNonZero

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class GeneratorMatrix:
    """Validated N x N transition-rate matrix.

    Use :func:`make_generator` to construct one; the constructor itself
    does not validate.
    """

    n_states: int
    rates: np.ndarray

    def exit_rate(self, i: int) -> float:
        """Total jump rate out of state i (1-based), i.e. -rates[i-1, i-1]."""
        return float(-self.rates[i - 1, i - 1])


def make_generator(rates) -> GeneratorMatrix:
    """Validate a rate matrix and wrap it as a GeneratorMatrix.

    Args:
      rates: square array-like of shape (N, N).  Off-diagonal entries are
        jump rates and must be >= 0; each row must sum to zero within
        1e-12 absolute.

    Returns:
      GeneratorMatrix with a read-only float64 copy of the rates.

    Raises:
      NegativeOffDiagonal: some rate (i, j), i != j, is negative.
      RowSumNonZero: some row sum exceeds the tolerance.
    """
    q = np.array(rates, dtype=np.float64)
    if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 1:
        raise ValueError("generator must be a square matrix with N >= 1")
    n = q.shape[0]
    off = q[~np.eye(n, dtype=bool)]
    if off.size and off.min() < 0.0:
        raise NegativeOffDiagonal(
            "off-diagonal rates must be nonnegative, min is %g" % off.min())
    sums = q.sum(axis=1)
    worst = np.abs(sums).max()
    if worst > ROW_SUM_TOL:
        raise RowSumNonZero(
            "row sums must be 0 within %g, worst is %g" % (ROW_SUM_TOL, worst))
    q.setflags(write=False)
    return GeneratorMatrix(n_states=n, rates=q)


@dataclass(frozen=True)
class RegimePath:
    """One sampled trajectory of the regime process on [t0, T].

    The path is piecewise constant and right-continuous: the process sits
    in states[k] on [jump_times[k-1], jump_times[k]) with the convention
    jump_times[-1] = t0.  Consecutive states always differ.
    """

    t0: float
    T: float
    jump_times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)

    def state_at(self, t):
        """Regime at time t (scalar or array), right-continuous.

        Times are clipped to [t0, T]; querying slightly outside the
        horizon returns the boundary regime.
        """
        idx = np.searchsorted(self.jump_times, t, side="right")
        out = self.states[idx]
        if np.ndim(t) == 0:
            return int(out)
        return out

    def occupation_fractions(self, n_states: int) -> np.ndarray:
        """Fraction of [t0, T] spent in each state, as a length-N vector."""
        edges = np.concatenate(([self.t0], self.jump_times, [self.T]))
        lengths = np.diff(edges)
        occ = np.zeros(n_states)
        np.add.at(occ, self.states - 1, lengths)
        return occ / (self.T - self.t0)

    @property
    def n_jumps(self) -> int:
        return len(self.jump_times)


def sample_regime_path(g: GeneratorMatrix, i0: int, t0: float, T: float,
                       seed) -> RegimePath:
    """Sample one regime trajectory by the exact jump-chain construction.

    Args:
      g: validated generator.
      i0: initial state in {1, ..., N}.
      t0, T: horizon with t0 < T.
      seed: anything np.random.default_rng accepts (int, SeedSequence,
        or Generator).  The draw order is fixed: one exponential per
        sojourn followed by one uniform for the destination, so a given
        seed always reproduces the same path.

    Returns:
      RegimePath with strictly increasing jump times in (t0, T).
    """
    if not 1 <= i0 <= g.n_states:
        raise ValueError("i0 must be in 1..%d, got %r" % (g.n_states, i0))
    if not t0 < T:
        raise ValueError("need t0 < T, got t0=%r T=%r" % (t0, T))
    rng = np.random.default_rng(seed)
    q = g.rates
    jumps = []
    states = [i0]
    t = t0
    i = i0
    while True:
        rate = float(-q[i - 1, i - 1])
        if rate <= 1e-300:
            break  # absorbing (mean holding time beyond any horizon)
        t = t + rng.exponential(1.0 / rate)
        if t >= T:
            break
        row = q[i - 1].copy()
        row[i - 1] = 0.0
        cum = np.cumsum(row / rate)
        u = rng.random()
        j = int(np.searchsorted(cum, u, side="right")) + 1
        j = min(j, g.n_states)
        jumps.append(t)
        states.append(j)
        i = j
    return RegimePath(t0=float(t0), T=float(T),
                      jump_times=np.asarray(jumps, dtype=np.float64),
                      states=np.asarray(states, dtype=np.int64))


def stationary_distribution(g: GeneratorMatrix) -> np.ndarray:
    """Stationary distribution pi with pi @ rates = 0 and sum(pi) = 1.

    Computed from the null space of the transposed generator via SVD.

    Raises:
      ReducibleChain: the null space has dimension > 1, so pi is not
        unique.
    """
    q = g.rates
    n = g.n_states
    if n == 1:
        return np.ones(1)
    _, s, vt = np.linalg.svd(q.T)
    scale = max(1.0, float(np.abs(q).max()))
    tol = scale * n * np.finfo(float).eps * 1e3
    null_dim = int(np.sum(s <= tol))
    if null_dim > 1:
        raise ReducibleChain(
            "null space of the transposed generator has dimension %d"
            % null_dim)
    pi = vt[-1]
    pi = pi / pi.sum()
    if pi.min() < -1e-9:
        raise ReducibleChain("stationary vector has negative entries")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()
