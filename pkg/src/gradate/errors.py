"""Exception hierarchy shared across the package."""


class GradateError(Exception):
    """Base class for all errors raised by this package."""


class InfeasibleMarginals(GradateError):
    """A marginal is not a probability vector (negative mass or wrong total)."""


class NumericalFailure(GradateError):
    """An LP or iterative solver failed to produce a usable solution."""


class NonConvergence(GradateError):
    """An iterative solver exhausted its budget above tolerance."""


class DimensionMismatch(GradateError):
    """Operands disagree on a required dimension (features, nodes, ...)."""


class AsymmetryError(GradateError):
    """An adjacency matrix is not symmetric; directed input is rejected."""


class EmptyDataset(GradateError):
    """An operation that needs at least one graph received none."""


class ReferenceMismatch(GradateError):
    """Two embeddings were not built against the same reference graph."""


class EmptyClass(GradateError):
    """A label-specific measure has no support on one side."""

    def __init__(self, label, side):
        self.label = label
        self.side = side
        super().__init__(f"label {label!r} has no graphs on the {side} side")


class AllZeroWeights(GradateError):
    """A weight vector carries no mass at all."""


class ParseError(GradateError):
    """A flat file could not be parsed; carries the offending location."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class DanglingEdge(GradateError):
    """An edge references a node that belongs to no graph."""


class DatasetTooSmall(GradateError):
    """The dataset is too small to split into train/val/test."""


class SchemaError(GradateError):
    """A persisted object violates its schema or invariants."""


class HashMismatch(GradateError):
    """A persisted object references a different dataset than the one loaded."""


class ConfigInvalid(GradateError):
    """A configuration value is outside its allowed range."""
