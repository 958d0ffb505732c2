"""Exception hierarchy shared by every averkit module."""


class AverkitError(Exception):
    """Base class for all library errors."""


class GraphInputError(AverkitError, ValueError):
    """Raised when an edge list or graph file is malformed."""


class NegativeWeight(GraphInputError):
    pass


class DuplicateEdge(GraphInputError):
    pass


class NodeOutOfRange(GraphInputError):
    pass


class NumericalError(AverkitError, ArithmeticError):
    """Raised when a numerical routine cannot produce a trustworthy result."""


class ZeroOutDegree(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class MixingCapExceeded(NumericalError):
    pass


class MonteCarloCapExceeded(NumericalError):
    pass


class IllConditioned(NumericalError):
    pass


class TooLargeForExhaustive(NumericalError):
    pass


class PreconditionError(AverkitError):
    """A structural precondition on the graph does not hold."""


class NotConnected(PreconditionError):
    pass


class Disconnected(PreconditionError):
    pass


class NotUndirected(PreconditionError):
    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


class OverlappingGroups(PreconditionError):
    pass


class InvalidBlockStructure(PreconditionError):
    pass


class ModifiedGraphDisconnected(PreconditionError):
    pass


class ConnectivityRetriesExhausted(AverkitError):
    pass
