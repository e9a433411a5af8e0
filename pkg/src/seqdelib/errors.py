"""Exceptions raised by seqdelib."""


class SeqDelibError(Exception):
    """Base class for every error raised by this package."""


class InputError(SeqDelibError, ValueError):
    """An argument is out of range or does not belong to the space."""


class DomainError(InputError):
    """A formula was evaluated outside its mathematical domain."""


class StructuralError(SeqDelibError):
    """The decision space lacks a structure the operation needs (median, connectivity)."""


class UnsupportedSpaceError(SeqDelibError):
    """The bargaining scheme is only defined on the line."""


class DegenerateReportError(SeqDelibError):
    """Every run produced an infinite distortion, so no statistic is defined."""
