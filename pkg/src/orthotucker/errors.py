class DimensionError(ValueError):
    """Shapes of tensors / matrices do not fit together."""


class SymmetryError(ValueError):
    """A tensor expected to be symmetric is not."""


class OrthogonalityError(ValueError):
    """A matrix expected to be orthogonal is not."""


class InputFormatError(ValueError):
    """Malformed input file."""


class TNSFormatError(InputFormatError):
    """Malformed TNS v1 tensor file."""


class CSVFormatError(InputFormatError):
    """Malformed CSV sample file."""
