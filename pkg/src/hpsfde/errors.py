"""Exception types shared across the package.

Every error raised by this package derives from :class:`Error`, so callers
can catch the whole family with one except clause.  The subclasses mirror
the distinct failure modes of the domain objects: generator matrices,
dense paths, coefficient models, batch statistics, and certificate
arithmetic.
"""


class Error(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# Markov chain generators
# ---------------------------------------------------------------------------

class NegativeOffDiagonal(Error):
    """An off-diagonal generator entry is negative."""


class RowSumNonZero(Error):
    """A generator row does not sum to zero within tolerance."""


class ReducibleChain(Error):
    """The generator's transpose has a null space of dimension > 1, so the
    stationary distribution is not unique."""


# ---------------------------------------------------------------------------
# Dense paths and segments
# ---------------------------------------------------------------------------

class OutOfDomain(Error):
    """A path or segment was evaluated outside its stored time range."""


class PathExploded(Error):
    """A path was evaluated past the time its blow-up guard tripped."""


class NonFiniteState(Error):
    """A state became NaN or infinite before the blow-up threshold."""


# ---------------------------------------------------------------------------
# Coefficient models
# ---------------------------------------------------------------------------

class DimensionMismatch(Error):
    """State dimension does not match what the model or function expects."""


class UnsupportedMeasure(Error):
    """A measure violates its constraints (mass, support, or kind)."""


class QuadratureUnsupported(Error):
    """No quadrature rule is available for the requested measure kind."""


# ---------------------------------------------------------------------------
# Batch statistics and estimators
# ---------------------------------------------------------------------------

class InsufficientPaths(Error):
    """Fewer usable paths than the statistic requires (minimum 100)."""


class AllExploded(Error):
    """Every path in the batch exploded before the evaluation time."""


class DegenerateWindow(Error):
    """The regression window contains too few grid points to fit a slope."""


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

class NotApplicable(Error):
    """The certificate data does not have the structure this check needs."""


class NonPositiveDenominator(Error):
    """A bound's denominator is not positive, so the bound is undefined."""


class ZeroEpsilon(Error):
    """A rate bound was requested with a non-positive epsilon."""


class Infeasible(Error):
    """A requested certificate does not hold for the supplied data."""
