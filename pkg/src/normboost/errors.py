class InvalidInputError(ValueError):
    """Raised when caller-supplied data violates a precondition."""


class IngestionError(InvalidInputError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)


class ModelFormatError(ValueError):
    """A model document could not be decoded. ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
