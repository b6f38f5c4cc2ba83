"""Error types raised by the data pipeline."""


class ParseError(ValueError):
    """Input file is structurally malformed (ragged rows, bad header, bad number)."""


class SchemaError(ValueError):
    """Data disagrees with the declared column schema."""


class DataError(ValueError):
    """Data is unusable for the requested operation (e.g. a fully missing column)."""


class StratificationError(DataError):
    """A class has too few patterns to stratify."""
