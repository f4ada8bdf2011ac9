"""Exception hierarchy shared by all dichoseq modules."""


class DichoseqError(Exception):
    """Base class for all errors raised by this package."""


# -- operator algebra ------------------------------------------------------

class DimensionMismatch(DichoseqError):
    pass


class RepresentationMismatch(DichoseqError):
    """Dense matrix applied to a sparse infinite vector (or vice versa)
    without an explicit truncation."""


# -- systems and cocycles --------------------------------------------------

class OutOfDomain(DichoseqError):
    pass


class ReversedIndices(DichoseqError):
    """Backward cocycle evaluation requested through the forward entry point."""


class DomainMismatch(DichoseqError):
    pass


# -- dichotomy verification ------------------------------------------------

class HorizonTooSmall(DichoseqError):
    pass


class NoDecay(DichoseqError):
    pass


class SpectralGapViolation(DichoseqError):
    pass


class IndeterminateGrowth(DichoseqError):
    pass


class KernelCollapse(DichoseqError):
    """Coefficient not injective on a propagated projection kernel."""


# -- admissibility ---------------------------------------------------------

class Unsolvable(DichoseqError):
    pass


class WindowTooSmall(DichoseqError):
    pass


class ComplementDegenerate(DichoseqError):
    pass


# -- triangular constructions ---------------------------------------------

class BlockNotDichotomic(DichoseqError):
    pass


class CouplerUnbounded(DichoseqError):
    pass


class TailBoundUnachievable(DichoseqError):
    pass


class TriangularNotDichotomic(DichoseqError):
    pass


class SampleInconsistency(DichoseqError):
    pass


class BlockNotInvertible(DichoseqError):
    pass


class PropagationIllConditioned(DichoseqError):
    pass


class EtaNotInS2(DichoseqError):
    pass


# -- gallery ---------------------------------------------------------------

class LambdaNotGreaterThanOne(DichoseqError):
    pass


# -- CLI / serialization ---------------------------------------------------

class SpecParseError(DichoseqError):
    """Raised for malformed system spec files; message carries the offending
    field path."""
