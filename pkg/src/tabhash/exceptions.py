"""Custom exceptions for tabhash."""


class TabhashError(Exception):
    """Base exception for tabhash."""
    pass


class ConfigurationError(TabhashError):
    """Configuration-related errors."""
    pass


class FieldError(TabhashError):
    """Finite field construction or arithmetic errors."""
    pass


class UnsupportedFieldError(FieldError):
    """Requested field width is outside the supported range."""
    pass


class DerivationError(TabhashError):
    """Invalid derivation spec or key."""
    pass


class DerivationOverflowError(DerivationError):
    """A derived character does not fit the machine word."""
    pass


class FieldRangeError(DerivationError):
    """A key character is not an element of the derivation's field."""
    pass


class TableError(TabhashError):
    """Lookup table errors."""
    pass


class TableSizeError(TableError):
    """A derived character addresses a cell outside its table."""
    pass


class TableFormatError(TableError):
    """Malformed serialized table file."""
    pass


class DuplicateKeyError(TabhashError):
    """A key set that must be distinct contains a repeated key."""
    pass


class BudgetExceededError(TabhashError):
    """An exhaustive enumeration would exceed the configured budget."""
    pass


class ArrangementError(TabhashError):
    """Arrangement construction or verification errors."""
    pass


class ArrangementFormatError(ArrangementError):
    """Malformed arrangement text."""
    pass


class DisjointnessError(ArrangementError):
    """Doubling produced curves that collide with the original arrangement."""
    pass


class UnknownFamilyError(TabhashError):
    """Family identifier does not name a known hash family."""
    pass


class KeyFileError(TabhashError):
    """Malformed key file."""
    pass


class BenchmarkError(TabhashError):
    """Benchmark setup or execution errors."""
    pass
