"""Exception types shared across the toolkit."""


class SkatesegError(Exception):
    """Base class for all domain errors raised by this package."""


class DataFormatError(SkatesegError):
    """A file or payload does not conform to its documented format."""


class TaxonomyCountError(SkatesegError):
    """A taxonomy's label universe has the wrong size for its level."""


class UnknownLabelError(SkatesegError):
    """A label name could not be resolved against the taxonomy."""

    def __init__(self, name, row=None):
        self.name = name
        self.row = row
        where = f" (row {row})" if row is not None else ""
        super().__init__(f"unknown label name {name!r}{where}")


class DegenerateHipsError(SkatesegError):
    """Facing direction is undefined: hips masked or coincident."""
