"""Exception hierarchy shared by all glspaces modules."""


class GlsError(Exception):
    """Base class for every error raised by this package."""


class ExprSyntaxError(GlsError):
    """Source text does not match the expression grammar.

    ``offset`` is the byte offset of the offending token, ``expected``
    a short description of what would have been accepted there.
    """

    def __init__(self, message, offset=0, expected=()):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset
        self.expected = tuple(expected)


class UnknownIdentifier(ExprSyntaxError):
    """Identifier is not a known variable or function name."""

    def __init__(self, name, offset=0):
        super().__init__(f"unknown identifier {name!r}", offset=offset)
        self.name = name


class EvalDomainError(GlsError):
    """Evaluation left the real domain (log of non-positive, 0^negative,
    division by zero) or produced a non-finite result."""


class InvalidSupport(GlsError):
    """Support interval violates 1 <= A < B <= inf."""


class NonPositiveScale(GlsError):
    """Homothety factor must be strictly positive."""


class NowhereIntegrable(GlsError):
    """|f|_p diverges at every admissible exponent p."""


class MaxSubdivisionsExceeded(GlsError):
    """Quadrature could not conclude within the panel budget.

    Deliberately distinct from a divergence verdict: the integral may be
    finite, borderline, or divergent; the engine refuses to guess.
    """


class EstimationUnstable(GlsError):
    """Log-log regression for the endpoint exponent did not look like a
    power law."""


class RangeMismatch(GlsError):
    """Transformation maps sample points outside the target domain."""


class NotMonotone(GlsError):
    """Transformation is not strictly monotone on the probed grid."""


class InversionFailed(GlsError):
    """Numerical inversion of a monotone transformation failed."""


class SingularMatrix(GlsError):
    """Linear substitution matrix is (numerically) singular."""


class FactorizationMismatch(GlsError):
    """psi != zeta/tau on the requested grid."""


class DisjointSupports(GlsError):
    """Two generating functions share no exponent interval."""


class DivergentNorm(GlsError):
    """An operation contracted to return a finite norm hit divergence."""
