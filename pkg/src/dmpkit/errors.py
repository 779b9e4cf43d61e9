"""Exception hierarchy shared across the package."""


class DmpError(Exception):
    """Base class for every error raised by dmpkit."""


class DimensionMismatch(DmpError):
    """Array arguments disagree in shape or length."""


class DomainError(DmpError):
    """Input lies outside the mathematical domain of an operation."""


class NotSpd(DmpError):
    """Matrix is not symmetric positive definite."""


class InvalidArgument(DmpError):
    """Argument value is outside the accepted range."""


class InvalidStep(DmpError):
    """Nonpositive or nonfinite integration step."""


class StepTooLarge(DmpError):
    """Integration increment cannot be mapped through the manifold exponential."""


class DegenerateDemo(DmpError):
    """Demonstration is too short or carries no usable signal."""


class RankDeficient(DmpError):
    """Regression problem has no unique solution."""


class ZeroVariance(DmpError):
    """Statistic undefined because a weight vector is constant."""


class NoNeighbors(DmpError):
    """No library entry lies within the interpolation radius."""


class NoSwitch(DmpError):
    """A segment never met its hand-over condition."""


class LayoutMismatch(DmpError):
    """Models cannot be combined because their kernel layouts disagree."""


class ParseError(DmpError):
    """Malformed model or trajectory file."""


class InvariantViolation(DmpError):
    """File content breaks a state-space invariant (norm, orthogonality, ...)."""
