"""Coefficient models for regime-switching pantograph SDEs.

A model describes
    dx(t) = f(x_t, t, r(t)) dt + g(x_t, t, r(t)) dB(t),  t >= t0 > 0,
where x_t is the proportional-delay segment x_t(theta) = x(theta*t) on
[theta_lower, 1] and r(t) is a Markov regime.  Drift and diffusion are
sums of two structured term kinds:

  * point polynomials in phi(1), e.g. -5(phi + phi^3 + phi^5);
  * pantograph integrals
        c * |phi(1)|^m1 * integral K(theta, t) D(phi(theta)) d nu(theta)
    with D either |phi(theta)|^m2 or signed phi(theta), nu a probability
    measure on [theta_lower, 1], and K an optional exponential decay
    kernel (absent kernel means K == 1).

Arbitrary callables can be attached through CustomTerm, but only the two
structured kinds are understood by the validation helpers.

The term interface is shape-agnostic: phi(1) may be a scalar, a vector
of Monte Carlo paths, or a vector of time points, and the delayed values
are supplied by a callback, so the same code serves the public
segment-based API, the path-parallel integrator, and time-vectorized
operator evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (DimensionMismatch, QuadratureUnsupported,
                     UnsupportedMeasure)
from .markov import GeneratorMatrix

MASS_TOL = 1e-12
DEFAULT_DENSITY_NODES = 64


# ---------------------------------------------------------------------------
# Measures on [theta_lower, 1]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Measure:
    """Probability measure used by pantograph integral terms.

    Two kinds are supported: finite atom lists and piecewise-constant
    densities (integrated by composite trapezoid with ``nodes`` points).
    Construct through :meth:`from_atoms`, :meth:`point_mass`,
    :meth:`piecewise_density` or :meth:`uniform`.
    """

    kind: str
    atoms: Tuple[Tuple[float, float], ...] = ()
    edges: Tuple[float, ...] = ()
    density_values: Tuple[float, ...] = ()
    nodes: int = DEFAULT_DENSITY_NODES

    @classmethod
    def from_atoms(cls, atoms: Sequence[Tuple[float, float]]) -> "Measure":
        atoms = tuple((float(t), float(w)) for t, w in atoms)
        if not atoms:
            raise UnsupportedMeasure("measure needs at least one atom")
        if any(w < 0 for _, w in atoms):
            raise UnsupportedMeasure("atom weights must be nonnegative")
        mass = sum(w for _, w in atoms)
        if abs(mass - 1.0) > MASS_TOL:
            raise UnsupportedMeasure(
                "atom weights must sum to 1 within %g, got %.17g"
                % (MASS_TOL, mass))
        return cls(kind="atoms", atoms=atoms)

    @classmethod
    def point_mass(cls, theta: float = 1.0) -> "Measure":
        return cls.from_atoms([(theta, 1.0)])

    @classmethod
    def piecewise_density(cls, edges: Sequence[float], values: Sequence[float],
                          nodes: int = DEFAULT_DENSITY_NODES) -> "Measure":
        edges = tuple(float(e) for e in edges)
        values = tuple(float(v) for v in values)
        if len(edges) != len(values) + 1 or len(values) < 1:
            raise UnsupportedMeasure(
                "need len(edges) == len(values) + 1 >= 2")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise UnsupportedMeasure("edges must be strictly increasing")
        if any(v < 0 for v in values):
            raise UnsupportedMeasure("density values must be nonnegative")
        widths = [b - a for a, b in zip(edges, edges[1:])]
        mass = sum(w * v for w, v in zip(widths, values))
        if abs(mass - 1.0) > MASS_TOL:
            raise UnsupportedMeasure(
                "density mass must be 1 within %g, got %.17g"
                % (MASS_TOL, mass))
        if nodes < 2:
            raise UnsupportedMeasure("nodes must be >= 2")
        return cls(kind="density", edges=edges, density_values=values,
                   nodes=int(nodes))

    @classmethod
    def uniform(cls, lo: float, hi: float,
                nodes: int = DEFAULT_DENSITY_NODES) -> "Measure":
        return cls.piecewise_density([lo, hi], [1.0 / (hi - lo)], nodes=nodes)

    def with_nodes(self, nodes: int) -> "Measure":
        """Copy of a density measure with a different quadrature density."""
        if self.kind != "density":
            return self
        return Measure.piecewise_density(self.edges, self.density_values,
                                         nodes=nodes)

    def support_range(self) -> Tuple[float, float]:
        if self.kind == "atoms":
            ts = [t for t, _ in self.atoms]
            return min(ts), max(ts)
        return self.edges[0], self.edges[-1]

    def quadrature(self) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights such that integral h dnu ~= sum w_j h(theta_j).

        Exact for atom measures.  For densities, composite trapezoid with
        at least 2 nodes per constant piece; ``nodes`` is the target
        total.
        """
        if self.kind == "atoms":
            thetas = np.array([t for t, _ in self.atoms])
            weights = np.array([w for _, w in self.atoms])
            return thetas, weights
        if self.kind != "density":
            raise QuadratureUnsupported(
                "no quadrature rule for measure kind %r" % self.kind)
        total_width = self.edges[-1] - self.edges[0]
        all_t = []
        all_w = []
        for a, b, v in zip(self.edges, self.edges[1:], self.density_values):
            n = max(2, int(math.ceil(self.nodes * (b - a) / total_width)))
            t = np.linspace(a, b, n)
            w = np.full(n, (b - a) / (n - 1) * v)
            w[0] *= 0.5
            w[-1] *= 0.5
            all_t.append(t)
            all_w.append(w)
        return np.concatenate(all_t), np.concatenate(all_w)


# ---------------------------------------------------------------------------
# Decay kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Kernel:
    """Exponential decay factor exp(-integral_0^t lambda(theta, u) du).

    The default form is lambda(theta, u) = beta * (1 - theta), giving the
    closed-form factor exp(-beta (1 - theta) t).  A custom rate can be
    supplied together with its time integral; it must satisfy
    lambda(theta, u) >= beta (1 - theta), which :meth:`validate` spot
    checks on a grid.
    """

    beta: float
    lambda_at: Optional[Callable] = None
    log_decay: Optional[Callable] = None

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if (self.lambda_at is None) != (self.log_decay is None):
            raise ValueError(
                "custom kernels need both lambda_at and log_decay")

    @classmethod
    def linear(cls, beta: float) -> "Kernel":
        return cls(beta=float(beta))

    def rate(self, theta, u):
        if self.lambda_at is not None:
            return self.lambda_at(theta, u)
        return self.beta * (1.0 - np.asarray(theta))

    def decay(self, theta, t):
        """The kernel value at delay fraction theta and time t."""
        if self.log_decay is not None:
            return np.exp(-np.asarray(self.log_decay(theta, t)))
        return np.exp(-self.beta * (1.0 - np.asarray(theta)) * np.asarray(t))

    def validate(self, theta_lower: float) -> None:
        """Spot-check lambda(theta, u) >= beta (1 - theta) on a grid."""
        thetas = np.linspace(theta_lower, 1.0, 17)
        for u in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0):
            lam = np.asarray(self.rate(thetas, u), dtype=np.float64)
            floor = self.beta * (1.0 - thetas)
            if np.any(lam < floor - 1e-12):
                raise ValueError(
                    "kernel rate drops below beta*(1-theta) at u=%g" % u)


# ---------------------------------------------------------------------------
# Coefficient terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolynomialTerm:
    """Sum of signed integer powers of the current state phi(1).

    ``coeffs`` is a sequence of (power, coefficient) pairs; the term
    value is sum c * phi(1)**p with p a nonnegative integer, so odd
    powers keep their sign.
    """

    coeffs: Tuple[Tuple[int, float], ...]

    def __init__(self, coeffs: Sequence[Tuple[float, float]]):
        norm = []
        for p, c in coeffs:
            if float(p) != int(p) or p < 0:
                raise ValueError(
                    "polynomial powers must be nonnegative integers, got %r"
                    % (p,))
            norm.append((int(p), float(c)))
        object.__setattr__(self, "coeffs", tuple(norm))

    def value(self, phi1, phi_at, t):
        phi1 = np.asarray(phi1, dtype=np.float64)
        out = np.zeros_like(phi1)
        for p, c in self.coeffs:
            out = out + c * phi1 ** p
        return out


@dataclass(frozen=True)
class PantographTerm:
    """Pantograph integral term against a probability measure.

    Value:
        coeff * |phi(1)|^point_exponent
              * integral K(theta, t) * D(phi(theta)) dnu(theta)
    with D(y) = y when ``signed`` (requires delay_exponent == 1), else
    |y|^delay_exponent.  ``kernel`` may be None, meaning K == 1.
    """

    coeff: float
    measure: Measure
    kernel: Optional[Kernel] = None
    point_exponent: float = 0.0
    delay_exponent: float = 1.0
    signed: bool = False
    _thetas: np.ndarray = field(init=False, default=None, repr=False,
                                compare=False)
    _weights: np.ndarray = field(init=False, default=None, repr=False,
                                 compare=False)

    def __post_init__(self):
        if self.point_exponent < 0 or self.delay_exponent < 0:
            raise ValueError("exponents must be nonnegative")
        if self.signed and self.delay_exponent != 1.0:
            raise ValueError("signed terms require delay_exponent == 1")
        thetas, weights = self.measure.quadrature()
        object.__setattr__(self, "_thetas", thetas)
        object.__setattr__(self, "_weights", weights)

    def value(self, phi1, phi_at, t):
        phi1 = np.asarray(phi1, dtype=np.float64)
        thetas = self._thetas
        delayed = np.asarray(phi_at(thetas), dtype=np.float64)
        if self.signed:
            d = delayed
        elif self.delay_exponent == 1.0:
            d = np.abs(delayed)
        else:
            d = np.abs(delayed) ** self.delay_exponent
        w = self._weights.reshape((len(thetas),) + (1,) * phi1.ndim)
        if self.kernel is not None:
            th = thetas.reshape(w.shape)
            w = w * self.kernel.decay(th, t)
        out = (w * d).sum(axis=0)
        if self.point_exponent != 0.0:
            out = out * np.abs(phi1) ** self.point_exponent
        return self.coeff * out


@dataclass(frozen=True)
class CustomTerm:
    """Escape hatch for coefficients outside the structured DSL.

    ``fn(phi1, phi_at, t)`` receives the current state (any array
    shape), a callback mapping a theta vector to delayed states with a
    leading theta axis, and the anchor time (scalar or an array matching
    phi1).  Custom terms are integrated like any other but are invisible
    to the structural validators.
    """

    fn: Callable

    def value(self, phi1, phi_at, t):
        return np.asarray(self.fn(phi1, phi_at, t), dtype=np.float64)


Term = Union[PolynomialTerm, PantographTerm, CustomTerm]


# ---------------------------------------------------------------------------
# Model specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Complete coefficient specification of one hybrid system.

    Fields:
      dim: state dimension n (the structured DSL requires n = 1).
      theta_lower: proportional-delay bound in (0, 1).
      t0: start time, > 0 (the earliest delayed lookup is theta_lower*t0).
      generator: regime generator matrix.
      drift, diffusion: per-regime term tuples, index regime-1.
      initial_segment: constant, (times, values) table on
        [theta_lower*t0, t0], or a callable t -> value.
    """

    dim: int
    theta_lower: float
    t0: float
    generator: GeneratorMatrix
    drift: Tuple[Tuple[Term, ...], ...]
    diffusion: Tuple[Tuple[Term, ...], ...]
    initial_segment: Union[float, Tuple, Callable]

    def __post_init__(self):
        if not 0.0 < self.theta_lower < 1.0:
            raise ValueError("theta_lower must lie in (0, 1)")
        if self.t0 <= 0.0:
            raise ValueError("t0 must be positive")
        n = self.generator.n_states
        if len(self.drift) != n or len(self.diffusion) != n:
            raise ValueError(
                "drift/diffusion need one term list per regime (%d)" % n)
        for terms in tuple(self.drift) + tuple(self.diffusion):
            for term in terms:
                self._check_term(term)

    def _check_term(self, term) -> None:
        if isinstance(term, PantographTerm):
            if self.dim != 1:
                raise DimensionMismatch(
                    "pantograph terms require scalar state (dim=1)")
            lo, hi = term.measure.support_range()
            if lo < self.theta_lower - 1e-12 or hi > 1.0 + 1e-12:
                raise UnsupportedMeasure(
                    "measure support [%g, %g] outside [%g, 1]"
                    % (lo, hi, self.theta_lower))
            if term.kernel is not None:
                term.kernel.validate(self.theta_lower)
        elif isinstance(term, PolynomialTerm):
            if self.dim != 1 and any(p != 1 for p, _ in term.coeffs):
                raise DimensionMismatch(
                    "polynomial powers != 1 require scalar state (dim=1)")

    @property
    def n_regimes(self) -> int:
        return self.generator.n_states

    def initial_value(self, t):
        """Initial data xi evaluated at time(s) t in [theta_lower*t0, t0].

        Returns an array of shape t.shape + (dim,).
        """
        t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
        xi = self.initial_segment
        if callable(xi):
            vals = np.array([np.atleast_1d(np.asarray(xi(float(ti)), float))
                             for ti in t_arr])
        elif isinstance(xi, tuple):
            knots, kvals = xi
            vals = np.interp(t_arr, np.asarray(knots, float),
                             np.asarray(kvals, float))[:, None]
        else:
            vals = np.broadcast_to(
                np.atleast_1d(np.asarray(xi, dtype=np.float64)),
                (len(t_arr), self.dim)).copy()
        if vals.shape[1] != self.dim:
            raise DimensionMismatch(
                "initial data has dimension %d, model has %d"
                % (vals.shape[1], self.dim))
        if np.ndim(t) == 0:
            return vals[0]
        return vals


def _sum_terms(terms, phi1, phi_at, t):
    out = np.zeros_like(np.asarray(phi1, dtype=np.float64))
    for term in terms:
        out = out + term.value(phi1, phi_at, t)
    return out


def _check_eval_args(m: ModelSpec, view, regime: int) -> None:
    if not 1 <= regime <= m.n_regimes:
        raise ValueError("regime must be in 1..%d, got %r"
                         % (m.n_regimes, regime))
    point = np.atleast_1d(np.asarray(view.point))
    if point.shape[-1] != m.dim:
        raise DimensionMismatch(
            "segment has dimension %d, model has %d"
            % (point.shape[-1], m.dim))


def eval_drift(m: ModelSpec, view, t: float, regime: int) -> np.ndarray:
    """Drift f(phi, t, i) for a segment-like view, as an (n,) vector.

    ``view`` must provide ``point`` (current state) and be callable on a
    theta vector; both SegmentView and the synthetic segments qualify.
    """
    _check_eval_args(m, view, regime)
    phi1 = float(np.atleast_1d(view.point)[0])
    val = _sum_terms(m.drift[regime - 1], phi1,
                     lambda th: np.asarray(view(th))[..., 0], t)
    return np.atleast_1d(np.asarray(val, dtype=np.float64))


def eval_diffusion(m: ModelSpec, view, t: float, regime: int) -> np.ndarray:
    """Diffusion g(phi, t, i) as an (n, d) matrix (scalar models: (1, 1))."""
    _check_eval_args(m, view, regime)
    phi1 = float(np.atleast_1d(view.point)[0])
    val = _sum_terms(m.diffusion[regime - 1], phi1,
                     lambda th: np.asarray(view(th))[..., 0], t)
    return np.atleast_1d(np.asarray(val, dtype=np.float64)).reshape(m.dim, -1)


def single_regime(m: ModelSpec, regime: int) -> ModelSpec:
    """Freeze one regime's coefficients as a switching-free model.

    The result has a one-state generator and regime 1 carrying the
    selected coefficient lists; useful for studying a subsystem on its
    own (e.g. an unstable regime that the full chain stabilizes).
    """
    from .markov import make_generator
    if not 1 <= regime <= m.n_regimes:
        raise ValueError("regime must be in 1..%d" % m.n_regimes)
    return ModelSpec(dim=m.dim, theta_lower=m.theta_lower, t0=m.t0,
                     generator=make_generator([[0.0]]),
                     drift=(m.drift[regime - 1],),
                     diffusion=(m.diffusion[regime - 1],),
                     initial_segment=m.initial_segment)


# ---------------------------------------------------------------------------
# Local Lipschitz probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LipschitzProbeReport:
    """Outcome of the randomized local Lipschitz probe.

    ``max_ratio`` is the largest |F(phi) - F(phi')| / ||phi - phi'||
    found; the remaining fields identify where it occurred.  This is a
    diagnostic, not a proof: a huge ratio flags likely non-Lipschitz
    coefficients, a moderate one is only evidence.
    """

    max_ratio: float
    component: str
    regime: int
    t: float
    trials: int
    radius: float


def validate_local_lipschitz_probe(m: ModelSpec, radius: float, trials: int,
                                   seed, times: Sequence[float] = None
                                   ) -> LipschitzProbeReport:
    """Estimate a local Lipschitz ratio for f and g by random probing.

    Random piecewise-linear segments with sup-norm <= radius are paired
    with perturbed copies at offsets spanning 1e-6..1 times the radius;
    the worst difference quotient over the probe times and regimes is
    reported.  Every 16th trial uses the zero segment as the base so
    that non-Lipschitz behavior at the origin (e.g. square-root terms)
    meets several offset scales, not just one.
    """
    from .paths import FunctionSegment
    if radius <= 0:
        raise ValueError("radius must be positive")
    if times is None:
        times = (m.t0, m.t0 + 1.0, 10.0 * m.t0)
    rng = np.random.default_rng(seed)
    grid = np.linspace(m.theta_lower, 1.0, 9)
    best = (0.0, "drift", 1, float(times[0]))
    for trial in range(trials):
        if trial % 16 == 0:
            base = np.zeros_like(grid)
        else:
            base = rng.uniform(-radius, radius, size=grid.shape)
        delta = radius * 10.0 ** rng.uniform(-6.0, 0.0)
        bump = rng.uniform(-1.0, 1.0, size=grid.shape)
        bump /= max(np.abs(bump).max(), 1e-30)
        other = np.clip(base + delta * bump, -radius, radius)
        dist = float(np.abs(base - other).max())
        if dist == 0.0:
            continue
        seg_a = FunctionSegment(lambda th, v=base: np.interp(th, grid, v),
                                m.theta_lower, vectorized=True)
        seg_b = FunctionSegment(lambda th, v=other: np.interp(th, grid, v),
                                m.theta_lower, vectorized=True)
        for t in times:
            for regime in range(1, m.n_regimes + 1):
                fa = eval_drift(m, seg_a, t, regime)
                fb = eval_drift(m, seg_b, t, regime)
                ratio = float(np.abs(fa - fb).max()) / dist
                if ratio > best[0]:
                    best = (ratio, "drift", regime, float(t))
                ga = eval_diffusion(m, seg_a, t, regime)
                gb = eval_diffusion(m, seg_b, t, regime)
                ratio = float(np.abs(ga - gb).max()) / dist
                if ratio > best[0]:
                    best = (ratio, "diffusion", regime, float(t))
    return LipschitzProbeReport(max_ratio=best[0], component=best[1],
                                regime=best[2], t=best[3], trials=trials,
                                radius=radius)
