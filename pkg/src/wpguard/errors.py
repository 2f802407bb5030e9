"""Exception hierarchy shared by all wpguard modules.

Everything raised on bad data or bad math derives from :class:`WpguardError`
so the CLI can map failures to a single exit code.
"""


class WpguardError(Exception):
    """Base class for all toolkit errors."""


class ModelFormatError(WpguardError):
    """Base class for problems with a model interchange file."""


class ModelParseError(ModelFormatError):
    """The model file is not valid JSON."""


class ModelSchemaError(ModelFormatError):
    """A required field is missing or has an unusable value."""


class ModelDimensionError(ModelFormatError):
    """Layer shapes are inconsistent (bias length, layer chaining, ...)."""


class DimensionMismatchError(WpguardError):
    """Operands disagree on shape at call time."""


class DomainError(WpguardError):
    """A bound lies outside the invertible range of an activation."""


class ModeError(WpguardError):
    """The requested transform mode cannot express this operation."""


class UnsupportedPredicateError(WpguardError):
    """The predicate uses a comparison the consolidator cannot turn into bounds."""


class DatasetFormatError(WpguardError):
    """A CSV cell or header is unusable; message carries row/column coordinates."""


class EmptyDatasetError(WpguardError):
    """An operation that needs data rows received none."""


class DegenerateInputError(WpguardError):
    """Statistic undefined for this input (e.g. zero variance)."""
