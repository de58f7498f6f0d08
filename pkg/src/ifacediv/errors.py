"""Exception types raised by ifacediv."""


class IfaceDivError(ValueError):
    """Base class for all ifacediv errors."""


class EmptyInput(IfaceDivError):
    pass


class DimensionMismatch(IfaceDivError):
    pass


class EnumerationTooLarge(IfaceDivError):
    pass


class InvalidK(IfaceDivError):
    pass


class NotIdentical(IfaceDivError):
    """Closed-form k-of-N requested for interfaces that are not identical."""


class InfeasibleGrid(IfaceDivError):
    pass


class DomainError(IfaceDivError):
    pass


class NoOverlap(IfaceDivError):
    pass


class ParseError(IfaceDivError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
