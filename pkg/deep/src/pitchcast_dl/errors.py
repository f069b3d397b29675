class DeepModelError(Exception):
    """Base class for this package's errors."""


class ConfigError(DeepModelError):
    """Invalid model or training configuration."""


class ShapeMismatch(DeepModelError):
    """Tensor layout does not match what the model was built for."""


class NonFiniteLoss(DeepModelError):
    """Training produced a NaN or infinite loss."""
