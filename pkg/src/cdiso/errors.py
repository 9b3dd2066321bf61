"""Exception hierarchy. Every error carries a short machine-readable ``code``."""


class CdisoError(ValueError):
    code = "error"


class InvalidParametersError(CdisoError):
    code = "invalid-parameters"


class DegenerateModelError(CdisoError):
    code = "degenerate-model"


class ZeroMassError(CdisoError):
    code = "zero-mass"


class DomainTooLongError(CdisoError):
    code = "domain-too-long"


class NonNormalizedError(CdisoError):
    code = "non-normalized"


class RampOverlapError(CdisoError):
    code = "ramp-overlap"


class BudgetExceededError(CdisoError):
    code = "budget-exceeded"


class GenerationFailedError(CdisoError):
    code = "generation-failed"


class MalformedFixtureError(CdisoError):
    code = "malformed-fixture"


class ValidationFailedError(CdisoError):
    code = "validation-failed"
