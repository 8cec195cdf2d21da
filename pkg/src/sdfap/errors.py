"""Exception hierarchy shared by every stage of the toolflow."""


class SdfapError(Exception):
    """Base class. Carries an optional source location."""

    def __init__(self, message, line=None, col=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def located(self, filename="<input>"):
        if self.line is None:
            return f"{filename}: {self.message}"
        return f"{filename}:{self.line}:{self.col}: {self.message}"

    def __str__(self):
        if self.line is None:
            return self.message
        return f"{self.line}:{self.col}: {self.message}"


class LexError(SdfapError):
    pass


class ParseError(SdfapError):
    pass


class ResolveError(SdfapError):
    """Duplicate definitions, unresolved names, arity problems, recursion."""


class ClassificationError(SdfapError):
    pass


class ShapeError(SdfapError):
    pass


class PatternError(SdfapError):
    pass


class PatternConflictError(PatternError):
    pass


class GraphError(SdfapError):
    pass


class EvalError(SdfapError):
    """Runtime failure of the golden evaluator (e.g. division by zero)."""


class SimulationFault(SdfapError):
    """Raised by the cycle simulator. `cycle` is the offending cycle index."""

    def __init__(self, message, cycle=None, where=None):
        super().__init__(message)
        self.cycle = cycle
        self.where = where


class OverflowFault(SimulationFault):
    pass


class UnderflowFault(SimulationFault):
    pass


class DeadlockError(SimulationFault):
    pass


class CycleLimitError(SimulationFault):
    pass
