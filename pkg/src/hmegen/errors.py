"""Exception types shared across the package."""


class InkmlParseError(ValueError):
    """Raised when an InkML file cannot be parsed as XML or as the expected dialect."""


class StructureError(ValueError):
    """Raised when a symbol relation tree or math annotation is structurally invalid."""


class AlignmentError(StructureError):
    """Raised when ground-truth structure cannot be aligned with the segmented symbols."""
