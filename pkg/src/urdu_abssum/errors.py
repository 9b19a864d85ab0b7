"""Exception types shared across the package."""


class UrduAbssumError(Exception):
    """Base class for all package errors."""


class ParseError(UrduAbssumError):
    """A data file could not be parsed; carries file context and line number."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)


class DuplicateId(UrduAbssumError):
    """Two corpus documents share the same id."""


class TooFewDocuments(UrduAbssumError):
    """A split needs at least two documents."""


class EmptyAfterPreprocessing(UrduAbssumError):
    """Preprocessing removed every token of a document's source text."""


class ShapeMismatch(UrduAbssumError):
    """Operand shapes are incompatible."""


class IndexOutOfRange(UrduAbssumError):
    """A class/target index fell outside the probability vector."""


class IdOutOfRange(UrduAbssumError):
    """A token id fell outside the vocabulary."""


class NonFiniteLoss(UrduAbssumError):
    """The training loss evaluated to NaN or infinity."""


class NoScoredPositions(UrduAbssumError):
    """A target sequence contains no position to score (no tokens through EOS)."""


class NoUnmaskedPositions(UrduAbssumError):
    """Attention was asked to attend over an entirely padded source."""


class LengthMismatch(UrduAbssumError):
    """Parallel candidate/reference lists differ in length."""


class CheckpointError(UrduAbssumError):
    """A checkpoint file is malformed or inconsistent with its header."""
