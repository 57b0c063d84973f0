"""Exception hierarchy shared by all modules."""


class AlignError(Exception):
    """Base class for every error raised by this package."""


class InputError(AlignError):
    """Malformed input file or object."""


class InvalidNet(InputError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class UnknownNode(AlignError, KeyError):
    pass


class NotEnabled(AlignError):
    pass


class UnsafeMarking(AlignError):
    """Firing would put a second token on a place."""


class MixedCaseIds(InputError):
    pass


class EmptyInput(InputError):
    pass


class NegativeDuration(InputError):
    pass


class CyclicOrder(InputError):
    pass


class AlreadyExtended(AlignError):
    pass


class InvalidConfiguration(AlignError):
    pass


class ModelNotEasySound(AlignError):
    """The search space was exhausted without reaching the target."""

    def __init__(self, msg="no complete run reaches the final marking", stats=None):
        super().__init__(msg)
        self.stats = stats


class NoPath(ModelNotEasySound):
    pass


class BudgetExceeded(AlignError):
    def __init__(self, msg="budget exceeded", stats=None):
        super().__init__(msg)
        self.stats = stats


class InvalidSequence(AlignError):
    pass
