"""Exception hierarchy.

Everything raised on bad input derives from :class:`InputError`; failures of
the numerics themselves derive from :class:`NumericError`. The CLI maps the
two families to distinct exit codes.
"""


class UgvqError(Exception):
    pass


class InputError(UgvqError, ValueError):
    pass


class NumericError(UgvqError, ArithmeticError):
    pass


# pairdata
class UnknownWinner(InputError):
    pass


class SelfComparison(InputError):
    pass


class NeverCompared(InputError, KeyError):
    pass


# hodge
class NoEdges(InputError):
    pass


class ZeroFlow(NumericError):
    pass


# cluster
class EmptyGraph(InputError):
    pass


class SingularSystem(NumericError):
    pass


# metafeat
class MissingColumn(InputError):
    pass


class NonNumericValue(InputError):
    pass


class DuplicateItem(InputError):
    pass


# stats / regress
class LengthMismatch(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class DegenerateInput(InputError):
    pass


class EmptyData(InputError):
    pass


class NonConvergence(NumericError):
    pass
