"""Exception hierarchy shared by all analysis modules."""


class ToolError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(ToolError):
    """An input document does not match the expected JSON layout."""


class StructureError(ToolError):
    """A diagram violates a structural invariant (zero row/column, shape
    mismatch, negative rule evaluation, disconnected levels)."""


class ArgumentError(ToolError):
    """An operation was called with arguments outside its domain."""


class ParamError(ToolError):
    """A catalog family was requested with inadmissible parameters."""


class DepthError(ToolError):
    """A level beyond the materializable range was requested."""


class RankError(ToolError):
    """An analysis requiring a constant number of vertices per level was
    applied to a diagram whose level sizes vary."""


class PrimitivityError(ToolError):
    """A criterion assuming primitive matrices met a non-primitive one."""


class SingularError(ToolError):
    """A nonsingularity precondition failed."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class PartitionError(ToolError):
    """A vertex partition violates the block-structure requirements."""


class InvarianceError(ToolError):
    """A vector sequence fails the exact tail-invariance identity."""


class InfiniteExtensionError(ToolError):
    """A measure extension was requested although it is provably infinite."""


class ConvergenceError(ToolError):
    """An iteration hit its budget before reaching the requested width."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InconclusiveError(ToolError):
    """A decision needed by a downstream step could not be certified."""


class MaximalPathError(ToolError):
    """The successor map was applied to a maximal path prefix."""


class NotProlongableError(ToolError):
    """A substitution has no fixed point starting from the given letter."""


class WindowError(ToolError):
    """The requested factor length does not fit in the available prefix."""


class RarityError(ToolError):
    """A factor occurs too rarely in the window for return-word analysis."""
