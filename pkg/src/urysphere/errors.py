"""Exception types shared across the package."""


class UryError(Exception):
    """Base class for every error raised by this package."""


class MalformedInput(UryError):
    """Structurally broken input: unknown labels, ragged matrices, bad types."""


class MetricViolation(UryError):
    """A candidate distance matrix breaks one or more metric axioms."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "metric violation")


class DomainMismatch(UryError):
    """A value map is not defined on exactly the expected point set."""


class Inadmissible(UryError):
    """A distance profile violates the one-point-extension constraints."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "inadmissible profile")


class LabelCollision(UryError):
    """A fresh label was requested but is already taken."""


class EmptyBase(UryError):
    """An operation needs a nonempty base set."""


class EmptySubset(UryError):
    """A restriction to the empty set was requested."""


class ParseError(UryError):
    """Malformed textual input; the message carries the position."""


class MalformedQuery(UryError):
    """An independence query with empty sides or unknown points."""


class BaseMismatch(UryError):
    """Two spaces to be amalgamated disagree on the shared base."""


class OutOfRange(UryError):
    """A rational parameter is outside its allowed interval."""


class StrategyExhausted(UryError):
    """An extension strategy failed to produce an admissible image."""


class IsometryViolation(UryError):
    """A (partial) isometry table fails exact distance preservation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "isometry violation")


class InconsistentChain(UryError):
    """A chain construction could not be embedded compatibly."""


class PreconditionFailed(UryError):
    """A witness construction was called outside its stated hypothesis."""


class OracleFailure(UryError):
    """A mover oracle did not deliver the outcome its contract promises."""


class LadderBroken(UryError):
    """A symbolic ladder line failed its exact arithmetic check."""
