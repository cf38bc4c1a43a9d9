"""Domain exceptions.

Library code raises these and never catches them; only the CLI maps them to exit codes.
"""


class GSDefendError(Exception):
    """Base class for all gsdefend errors."""


class InvalidParameterError(GSDefendError, ValueError):
    """A numeric parameter is non-finite or violates a precondition."""


class ConfigurationError(GSDefendError, ValueError):
    """A configuration value or config file is unusable."""


class ParseError(GSDefendError, ValueError):
    """A persisted artifact could not be decoded."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class UnsupportedVersionError(ParseError):
    """A persisted artifact has a format version this build cannot read."""


class DimensionMismatchError(GSDefendError, ValueError):
    """Two images or bundles that must align do not."""


class NonFiniteError(GSDefendError, FloatingPointError):
    """A NaN or infinity reached a place that requires finite values."""


class TrainingDivergedError(NonFiniteError):
    """The training loss became non-finite."""

    def __init__(self, message: str, view_index: int, dump_path: str | None = None):
        super().__init__(message)
        self.view_index = view_index
        self.dump_path = dump_path


class MissingArtifactError(GSDefendError, FileNotFoundError):
    """An input file or directory required by a command is absent."""
