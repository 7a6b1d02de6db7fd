"""Errors raised by the tensor library."""

from ..utils.error import NumericalError, PipelineError


class ShapeMismatch(PipelineError):
    """
    Raised when operand shapes are incompatible for an operation.

    Args:
        op (str): Operation name
        shapes (tuple): The offending operand shapes
    """

    def __init__(self, op, *shapes):
        self.op = op
        self.shapes = shapes
        rendered = ", ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"ShapeMismatch({op}: {rendered})")


class NonFiniteValue(NumericalError):
    """
    Raised when a forward operation produces NaN or Inf.

    Args:
        op (str): Operation that produced the non-finite value
    """

    def __init__(self, op):
        self.op = op
        super().__init__(f"non-finite output from {op}")


class NonScalarLoss(PipelineError):
    """
    Raised when backward is called on a tensor with more than one element.

    Args:
        shape (tuple): Shape of the offending tensor
    """

    def __init__(self, shape):
        self.shape = tuple(shape)
        super().__init__(f"NonScalarLoss({self.shape})")


class InvalidArgument(PipelineError):
    """
    Raised when a scalar argument is outside its valid range.

    Args:
        name (str): Argument name
        value: The rejected value
    """

    def __init__(self, name, value):
        self.name = name
        self.value = value
        super().__init__(f"InvalidArgument({name}={value!r})")


class EmptyMask(InvalidArgument):
    """
    Raised when a loss mask selects no position.

    Args:
        op (str): The loss that was requested
    """

    def __init__(self, op):
        super().__init__("mask", f"{op}: all weights are zero")
