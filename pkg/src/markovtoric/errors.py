"""Exception types shared across the package."""


class ModelError(Exception):
    """Base class for all errors raised by this package."""


class SpecificationError(ModelError):
    """A model specification violates a structural requirement."""


class InadmissiblePathError(ModelError):
    """A path or trajectory uses a forbidden transition, an unknown state,
    or a disallowed initial block."""


class ParameterError(ModelError):
    """A parameter point violates the model's normalization or support."""


class RelationError(ModelError):
    """A candidate relation is degenerate or used with the wrong model kind."""


class EstimationError(ModelError):
    """An estimate is undefined or inconsistent with the requested use."""


class ParseError(ModelError):
    """A file could not be parsed.

    Attributes:
        filename: path of the offending file, when known.
        line: 1-based line number, when known.
        column: 1-based column number, when known.
    """

    def __init__(self, message, filename=None, line=None, column=None):
        self.filename = filename
        self.line = line
        self.column = column
        where = ""
        if filename is not None:
            where = str(filename)
            if line is not None:
                where += f":{line}"
                if column is not None:
                    where += f":{column}"
            where += ": "
        super().__init__(where + message)
