"""Path-parallel Euler integration of regime-switching pantograph SDEs.

Scheme: per step [s, s+h] the coefficients are evaluated at the left
endpoint with the segment frozen there,

    x(s+h) = x(s) + f(x_s, s, r(s)) h + g(x_s, s, r(s)) dB,

with dB ~ Normal(0, h).  The regime path is sampled exactly first and
its switch times are inserted into the grid, so no step straddles a
switch and the regime used on a step is always r(left endpoint).

Determinism contract: path p draws all its randomness from
SeedSequence(root_seed, spawn_key=(p,)), split once into a regime-chain
stream and a noise stream.  Paths are processed in fixed-size blocks
whose composition depends only on the path index; workers own whole
blocks and write into disjoint preallocated slices.  Rerunning with the
same root seed therefore reproduces every output bit at any worker
count.

Noise stream order: each path pre-draws one standard normal per uniform
step plus one per regime switch, consumed in time order (a step
containing q switches consumes q+1).  Pantograph lookups during
integration interpolate on the uniform grid plus the initial-segment
nodes; the finished DensePath additionally carries the exact values at
switch times.

Blow-up is data, not failure: a path whose state exceeds the threshold
(or turns non-finite) is marked exploded and frozen; the batch always
completes and reports explosion times.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import DimensionMismatch, NonFiniteState
from .markov import sample_regime_path
from .models import ModelSpec, _sum_terms
from .paths import DensePath

DEFAULT_BLOCK_SIZE = 1024


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, horizon, and guards for one batch.

    ``dt`` is snapped so that (T - t0) is a whole number of steps; the
    snapped value never differs by more than one part in 1e9 unless dt
    does not divide the horizon, in which case the step count rounds up.
    """

    dt: float
    T: float
    blowup_threshold: float = 1e8
    brownian_dim: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.blowup_threshold <= 0:
            raise ValueError("blowup_threshold must be positive")
        if self.brownian_dim != 1:
            raise DimensionMismatch(
                "only scalar driving noise is supported (brownian_dim=1)")


def uniform_grid(t0: float, T: float, dt: float) -> np.ndarray:
    """The uniform step grid on [t0, T] with dt snapped to divide evenly."""
    if not T > t0:
        raise ValueError("need T > t0, got t0=%r T=%r" % (t0, T))
    span = T - t0
    k_exact = span / dt
    k = int(round(k_exact))
    if k < 1 or abs(k_exact - k) > 1e-9 * max(1.0, k_exact):
        k = max(1, int(math.ceil(k_exact - 1e-12)))
    times = t0 + (span / k) * np.arange(k + 1)
    times[-1] = T
    return times


def initial_grid(m: ModelSpec, h: float) -> np.ndarray:
    """Sampling nodes for the initial segment on [theta_lower*t0, t0]."""
    lo = m.theta_lower * m.t0
    n = max(2, int(math.ceil((m.t0 - lo) / h)) + 1)
    times = np.linspace(lo, m.t0, n)
    if isinstance(m.initial_segment, tuple):
        knots = np.asarray(m.initial_segment[0], dtype=np.float64)
        inside = knots[(knots >= lo) & (knots <= m.t0)]
        times = np.unique(np.concatenate((times, inside)))
    return times


def path_streams(root_seed: int, p: int):
    """(chain, noise) seed sequences for path index p under a root seed."""
    base = np.random.SeedSequence(entropy=root_seed, spawn_key=(p,))
    return tuple(base.spawn(2))


class TabulatedWiener:
    """Brownian values on a fine grid, shared across refinement levels.

    ``values`` has shape (n_paths, len(times)).  ``increment(a, b)``
    returns W(b) - W(a) per path by linear interpolation, which is exact
    whenever a and b lie on the table's grid.  Intended for strong
    convergence studies where several step sizes must be driven by the
    same noise.
    """

    def __init__(self, times: np.ndarray, values: np.ndarray):
        self.times = np.asarray(times, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.times):
            raise ValueError("values must have shape (n_paths, len(times))")

    @classmethod
    def sample(cls, t0: float, T: float, dt: float, n_paths: int,
               root_seed: int) -> "TabulatedWiener":
        """Draw a table on the uniform grid, one noise stream per path."""
        times = uniform_grid(t0, T, dt)
        k = len(times) - 1
        values = np.empty((n_paths, k + 1))
        values[:, 0] = 0.0
        h = times[1] - times[0]
        for p in range(n_paths):
            _, noise_ss = path_streams(root_seed, p)
            rng = np.random.Generator(np.random.PCG64(noise_ss))
            values[p, 1:] = np.cumsum(
                math.sqrt(h) * rng.standard_normal(k))
        return cls(times, values)

    def _at(self, t: float) -> np.ndarray:
        j = int(np.searchsorted(self.times, t, side="right")) - 1
        j = min(max(j, 0), len(self.times) - 2)
        w = (t - self.times[j]) / (self.times[j + 1] - self.times[j])
        return self.values[:, j] * (1.0 - w) + self.values[:, j + 1] * w

    def increment(self, a: float, b: float) -> np.ndarray:
        return self._at(b) - self._at(a)


@dataclass(eq=False)
class SimulationBatch:
    """Results of integrating many independent paths of one model.

    ``uniform_values`` holds every path's state on the shared uniform
    grid (NaN after a path explodes); ``regimes_uniform`` the regime at
    each grid time; ``exploded_at`` the blow-up time per path (NaN when
    none).  ``paths`` carries full DensePath objects including switch
    times when the batch was run with keep_paths=True, else None.
    """

    model: Optional[ModelSpec]
    config: Optional[IntegratorConfig]
    n_paths: int
    i0: int
    root_seed: Optional[int]
    t0: float
    T: float
    uniform_times: np.ndarray = field(repr=False)
    uniform_values: np.ndarray = field(repr=False)
    regimes_uniform: np.ndarray = field(repr=False)
    exploded_at: np.ndarray = field(repr=False)
    n_switches: np.ndarray = field(repr=False)
    paths: Optional[List[DensePath]] = field(default=None, repr=False)

    @property
    def exploded_mask(self) -> np.ndarray:
        return ~np.isnan(self.exploded_at)

    @property
    def n_exploded(self) -> int:
        return int(self.exploded_mask.sum())

    @classmethod
    def synthetic(cls, times, values, t0: Optional[float] = None,
                  exploded_at: Optional[np.ndarray] = None
                  ) -> "SimulationBatch":
        """Wrap externally produced trajectories for the estimators.

        ``times`` is the shared grid, ``values`` an (n_paths, len(times))
        array.  Useful for analyzing data from other integrators or
        closed-form paths.
        """
        times = np.asarray(times, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(times):
            raise ValueError("values must have shape (n_paths, len(times))")
        n_paths = values.shape[0]
        if exploded_at is None:
            exploded_at = np.full(n_paths, np.nan)
        return cls(model=None, config=None, n_paths=n_paths, i0=1,
                   root_seed=None,
                   t0=float(times[0] if t0 is None else t0), T=float(times[-1]),
                   uniform_times=times, uniform_values=values,
                   regimes_uniform=np.ones((n_paths, len(times)),
                                           dtype=np.int16),
                   exploded_at=np.asarray(exploded_at, dtype=np.float64),
                   n_switches=np.zeros(n_paths, dtype=np.int64),
                   paths=None)


def _sample_block_chains(m, u_times, rows, i0, root_seed):
    """Regime paths, per-step switch map, and regime grid for one block."""
    b = len(rows)
    k = len(u_times) - 1
    t0, T = float(u_times[0]), float(u_times[-1])
    jumps = []
    states = []
    r_grid = np.empty((b, k + 1), dtype=np.int16)
    switch_map = {}
    for row, p in enumerate(rows):
        chain_ss, _ = path_streams(root_seed, p)
        rp = sample_regime_path(m.generator, i0, t0, T,
                                np.random.default_rng(chain_ss))
        jumps.append(rp.jump_times)
        states.append(rp.states)
        r_grid[row] = rp.states[np.searchsorted(rp.jump_times, u_times,
                                                side="right")]
        for s in rp.jump_times:
            step = int(np.searchsorted(u_times, s, side="right")) - 1
            if 0 <= step < k and u_times[step] < s < u_times[step + 1]:
                switch_map.setdefault(step, {}).setdefault(row, []).append(s)
    return jumps, states, r_grid, switch_map


def _draw_block_normals(rows, root_seed, n_steps, jump_counts):
    """Flat normal pool with per-path offsets, in canonical stream order."""
    chunks = []
    offsets = np.zeros(len(rows) + 1, dtype=np.int64)
    for row, p in enumerate(rows):
        _, noise_ss = path_streams(root_seed, p)
        rng = np.random.Generator(np.random.PCG64(noise_ss))
        need = n_steps + int(jump_counts[row])
        chunks.append(rng.standard_normal(need))
        offsets[row + 1] = offsets[row] + need
    return np.concatenate(chunks) if chunks else np.zeros(0), offsets


def _regime_at(jumps, states, t):
    return int(states[np.searchsorted(jumps, t, side="right")])


def _history_lookup(H, ht, filled, thetas, t):
    """Interpolated H columns at lookup times thetas * t, shape (J, B)."""
    lt = thetas * t
    j = np.searchsorted(ht[:filled + 1], lt, side="right") - 1
    j = np.clip(j, 0, filled - 1)
    w = (lt - ht[j]) / (ht[j + 1] - ht[j])
    return (H[:, j] * (1.0 - w) + H[:, j + 1] * w).T


def _scalar_lookup(H_row, ht, filled, t_left, local_t, local_x, thetas, t):
    """Segment lookup for one path inside a switch step.

    Times at or before the last uniform point use the block history;
    later times (possible when theta is close to 1) interpolate the
    substep states accumulated in local_t/local_x.
    """
    lt = thetas * t
    out = np.empty(len(lt))
    early = lt <= t_left + 1e-15
    if early.any():
        j = np.searchsorted(ht[:filled + 1], lt[early], side="right") - 1
        j = np.clip(j, 0, filled - 1)
        w = (lt[early] - ht[j]) / (ht[j + 1] - ht[j])
        out[early] = H_row[j] * (1.0 - w) + H_row[j + 1] * w
    late = ~early
    if late.any():
        out[late] = np.interp(lt[late], np.asarray(local_t),
                              np.asarray(local_x))
    return out


def _eval_regime_coeffs(m, X, phi_at, t):
    """Drift and diffusion stacks over all regimes, shape (N, B) each."""
    n = m.n_regimes
    f = np.empty((n, len(X)))
    g = np.empty((n, len(X)))
    for i in range(n):
        f[i] = _sum_terms(m.drift[i], X, phi_at, t)
        g[i] = _sum_terms(m.diffusion[i], X, phi_at, t)
    return f, g


def _integrate_block(m, cfg, u_times, init_times, init_vals, rows, i0,
                     root_seed, wiener, keep_paths, out):
    """Integrate one block of paths and write results into ``out``.

    ``out`` is a dict of preallocated batch arrays; this function only
    touches the slices belonging to ``rows``, so concurrent blocks never
    overlap.
    """
    b = len(rows)
    rows_arr = np.asarray(rows, dtype=np.int64)
    k_steps = len(u_times) - 1
    n_init = len(init_times)
    threshold = cfg.blowup_threshold

    jumps, states, r_grid, switch_map = _sample_block_chains(
        m, u_times, rows, i0, root_seed)
    jump_counts = np.array([len(j) for j in jumps], dtype=np.int64)
    if wiener is None:
        normals, offsets = _draw_block_normals(rows, root_seed, k_steps,
                                               jump_counts)
    else:
        if jump_counts.any():
            raise ValueError(
                "a Wiener table requires a switching-free model")
        normals, offsets = None, None

    ht = np.concatenate((init_times[:-1], u_times))
    H = np.empty((b, len(ht)))
    H[:, :n_init] = init_vals[None, :]
    base_col = n_init - 1
    X = H[:, base_col].copy()
    alive = np.ones(b, dtype=bool)
    exploded_at = np.full(b, np.nan)
    cursors = np.zeros(b, dtype=np.int64)
    row_idx = np.arange(b)
    switch_records = [[] for _ in range(b)]

    u_vals = out["uniform_values"]
    u_vals[rows_arr, 0] = X

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for k in range(k_steps):
            t = float(u_times[k])
            t_next = float(u_times[k + 1])
            h = t_next - t
            filled = base_col + k

            def phi_at(thetas, _f=filled, _t=t):
                return _history_lookup(H, ht, _f, thetas, _t)

            f_all, g_all = _eval_regime_coeffs(m, X, phi_at, t)
            reg0 = r_grid[:, k].astype(np.int64) - 1
            F = f_all[reg0, row_idx]
            G = g_all[reg0, row_idx]
            if wiener is None:
                z = normals[offsets[:-1] + cursors]
                cursors += 1
                dW = math.sqrt(h) * z
            else:
                dW = wiener.increment(t, t_next)[rows_arr]
            Xn = X + F * h + G * dW

            for row, ss in switch_map.get(k, {}).items():
                if not alive[row]:
                    continue
                cur = int(cursors[row]) - 1 if wiener is None else 0
                x = float(X[row])
                local_t = [t]
                local_x = [x]
                bounds = [t] + list(ss) + [t_next]
                dead_here = False
                for a, c_end in zip(bounds[:-1], bounds[1:]):
                    i_reg = _regime_at(jumps[row], states[row], a)
                    h_sub = c_end - a

                    def phi_s(thetas, _a=a):
                        return _scalar_lookup(H[row], ht, filled, t,
                                              local_t, local_x, thetas, _a)

                    f_s = float(_sum_terms(m.drift[i_reg - 1], x, phi_s, a))
                    g_s = float(_sum_terms(m.diffusion[i_reg - 1], x,
                                           phi_s, a))
                    z_s = float(normals[offsets[row] + cur])
                    cur += 1
                    x = x + f_s * h_sub + g_s * math.sqrt(h_sub) * z_s
                    if not math.isfinite(x):
                        exploded_at[row] = a
                        alive[row] = False
                        dead_here = True
                        break
                    local_t.append(c_end)
                    local_x.append(x)
                    if c_end in ss:
                        switch_records[row].append((c_end, x))
                    if abs(x) > threshold:
                        exploded_at[row] = c_end
                        if c_end == t_next:
                            u_vals[rows_arr[row], k + 1] = x
                        alive[row] = False
                        dead_here = True
                        break
                cursors[row] = cur
                if not dead_here:
                    Xn[row] = x

            finite = np.isfinite(Xn)
            over = finite & (np.abs(Xn) > threshold)
            newly_bad = alive & ~finite
            newly_over = alive & over
            if newly_bad.any():
                exploded_at[newly_bad] = t
                alive[newly_bad] = False
            if newly_over.any():
                sel = rows_arr[newly_over]
                u_vals[sel, k + 1] = Xn[newly_over]
                exploded_at[newly_over] = t_next
                alive[newly_over] = False
            X = np.where(alive, Xn, 0.0)
            X[~np.isfinite(X)] = 0.0
            H[:, base_col + k + 1] = X
            u_vals[rows_arr[alive], k + 1] = X[alive]

    out["regimes_uniform"][rows_arr] = r_grid
    out["exploded_at"][rows_arr] = exploded_at
    out["n_switches"][rows_arr] = jump_counts
    if keep_paths:
        for row, p in enumerate(rows):
            out["paths"][p] = _assemble_path(
                m, u_times, init_times, init_vals, out["uniform_values"][p],
                switch_records[row], jumps[row], states[row],
                exploded_at[row])


def _assemble_path(m, u_times, init_times, init_vals, u_row, sw_records,
                   jumps, states, exploded_at):
    """Merge uniform, initial and switch nodes into one DensePath."""
    exploded = not math.isnan(exploded_at)
    if exploded:
        u_keep = u_times <= exploded_at + 1e-15
        sw_records = [(s, v) for s, v in sw_records
                      if s <= exploded_at + 1e-15]
    else:
        u_keep = np.ones(len(u_times), dtype=bool)
    parts_t = [init_times[:-1], u_times[u_keep]]
    parts_v = [init_vals[:-1], u_row[u_keep]]
    if sw_records:
        sw_t = np.array([s for s, _ in sw_records])
        sw_v = np.array([v for _, v in sw_records])
        parts_t.append(sw_t)
        parts_v.append(sw_v)
    times = np.concatenate(parts_t)
    vals = np.concatenate(parts_v)
    order = np.argsort(times, kind="stable")
    times = times[order]
    vals = vals[order]
    regimes = states[np.searchsorted(jumps, times, side="right")]
    return DensePath(times=times, values=vals[:, None],
                     regimes=regimes.astype(np.int64),
                     theta_lower=m.theta_lower, t0=m.t0,
                     exploded_at=float(exploded_at) if exploded else None)


def run_batch(m: ModelSpec, cfg: IntegratorConfig, n_paths: int, i0: int,
              root_seed: int, workers: int = 1,
              block_size: int = DEFAULT_BLOCK_SIZE, keep_paths: bool = True,
              wiener: Optional[TabulatedWiener] = None) -> SimulationBatch:
    """Integrate ``n_paths`` independent paths of one model.

    Results are bit-identical for a fixed (model, config, n_paths, i0,
    root_seed) at any ``workers``/``block_size`` partitioning, and no
    single path's blow-up aborts the batch.

    Args:
      workers: thread count; blocks are distributed round-robin.
      block_size: paths per vectorized block (tuning only, not results).
      keep_paths: retain full DensePath objects (required by the
        martingale residual test); switch off for large batches where
        only the uniform-grid values are needed.
      wiener: optional Brownian table replacing the per-path noise
        streams; switching-free models only.
    """
    if m.dim != 1:
        raise DimensionMismatch("the integrator supports scalar models only")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    if not 1 <= i0 <= m.n_regimes:
        raise ValueError("i0 must be in 1..%d" % m.n_regimes)

    u_times = uniform_grid(m.t0, cfg.T, cfg.dt)
    h = float(u_times[1] - u_times[0])
    init_times = initial_grid(m, h)
    init_vals = m.initial_value(init_times)[:, 0]
    if not np.all(np.isfinite(init_vals)):
        raise NonFiniteState("initial data contains non-finite values")

    k1 = len(u_times)
    out = {
        "uniform_values": np.full((n_paths, k1), np.nan),
        "regimes_uniform": np.empty((n_paths, k1), dtype=np.int16),
        "exploded_at": np.full(n_paths, np.nan),
        "n_switches": np.zeros(n_paths, dtype=np.int64),
        "paths": [None] * n_paths if keep_paths else None,
    }
    blocks = [list(range(s, min(s + block_size, n_paths)))
              for s in range(0, n_paths, block_size)]

    def work(rows):
        _integrate_block(m, cfg, u_times, init_times, init_vals, rows, i0,
                         root_seed, wiener, keep_paths, out)

    if workers <= 1 or len(blocks) == 1:
        for rows in blocks:
            work(rows)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, blocks))

    return SimulationBatch(
        model=m, config=cfg, n_paths=n_paths, i0=i0, root_seed=root_seed,
        t0=m.t0, T=float(cfg.T), uniform_times=u_times,
        uniform_values=out["uniform_values"],
        regimes_uniform=out["regimes_uniform"],
        exploded_at=out["exploded_at"], n_switches=out["n_switches"],
        paths=out["paths"])


def integrate_path(m: ModelSpec, cfg: IntegratorConfig, i0: int,
                   seed: int) -> DensePath:
    """Integrate a single path.

    Defined as path 0 of a one-path batch with root seed ``seed``, so
    run_batch(..., n_paths=1, root_seed=s).paths[0] and
    integrate_path(..., seed=s) are the same path bit for bit.
    """
    batch = run_batch(m, cfg, n_paths=1, i0=i0, root_seed=seed, workers=1,
                      keep_paths=True)
    return batch.paths[0]
