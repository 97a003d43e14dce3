"""Exception hierarchy for the dualdiv package."""


class DualDivError(Exception):
    """Base class for all errors raised by this package."""


class InvalidPhaseType(DualDivError):
    """Phase-type parameters do not define a proper distribution."""


class DimensionMismatch(InvalidPhaseType):
    """Phase-type vector/matrix dimensions are inconsistent."""


class NotSubordinatorViolation(DualDivError):
    """Model has monotone paths (sigma = 0 and nonpositive downward drift)."""


class SingularResolvent(DualDivError):
    """Resolvent argument too close to the spectrum of the subgenerator."""


class BracketFailure(DualDivError):
    """Failed to bracket a root; the model is likely invalid."""


class MultipleRootDetected(DualDivError):
    """Two roots of the exponent equation are numerically indistinct."""


class ContourTooClose(DualDivError):
    """Inversion contour cannot be placed far enough right of the dominant pole."""


class InvalidCost(DualDivError):
    """Capital injection cost must exceed 1."""


class KnotEvaluation(DualDivError):
    """Evaluation requested exactly at a knot without a one-sided mode."""


class ConfigError(DualDivError):
    """Simulation configuration violates a precondition."""


class ParseError(DualDivError):
    """Run configuration file or flags are malformed."""
