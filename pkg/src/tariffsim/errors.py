"""Exception hierarchy shared across the simulator."""

from __future__ import annotations


class TariffSimError(Exception):
    """Base class for all simulator errors."""


class MalformedRow(TariffSimError):
    """A row (or the header) of a delimited input could not be parsed."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DomainError(TariffSimError):
    """A parsed value violates a field's domain (sign, bound, ordering)."""

    def __init__(self, line: int, field: str, message: str):
        super().__init__(f"line {line}, field {field!r}: {message}")
        self.line = line
        self.field = field


class EmptyInput(TariffSimError):
    """The input contained no data rows."""


class UnknownGroup(TariffSimError):
    """A country group name was referenced but never defined."""


class SchemaError(TariffSimError):
    """A scenario document does not match the expected schema."""


class OverlappingBands(SchemaError):
    """Two band rules cover a common rate."""

    def __init__(self, first: object, second: object):
        super().__init__(f"band rules overlap: {first} and {second}")
        self.pair = (first, second)


class InvalidRate(SchemaError):
    """A rate-valued field is out of range or not finite."""


class DegenerateWeights(TariffSimError):
    """A trade-response step produced a nonpositive factor or weight sum.

    Such inputs are outside the model's local-response validity; the
    affected product is aborted rather than clamped.
    """

    def __init__(self, message: str, product_code: str | None = None):
        super().__init__(message)
        self.product_code = product_code


class UnsupportedFormat(TariffSimError):
    """An output format name is not one of the supported renderers."""
