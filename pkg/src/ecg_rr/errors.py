"""Exception types raised across the package."""


class NumericFailure(ArithmeticError):
    """A non-finite value appeared during a forward pass or training."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message if epoch is None else f"epoch {epoch}: {message}")
        self.epoch = epoch


class DegenerateInputError(ValueError):
    """Input carries no usable signal (e.g. a constant record)."""


class ModelFileError(ValueError):
    """Model file is malformed, truncated, or has an unsupported version."""


class ArchitectureMismatchError(ModelFileError):
    """Model file holds a different architecture than requested."""


class DatasetError(ValueError):
    """Dataset directory, manifest, or record file is missing or invalid."""


class GenerationError(RuntimeError):
    """Synthetic record generation could not satisfy its label constraints."""


class ConfigurationError(ValueError):
    """A learned estimation method was requested without a usable model."""
