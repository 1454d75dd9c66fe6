"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or unknown configuration input. Maps to CLI exit code 1."""


class StepSizeError(ValueError):
    """Integration step too coarse for the requested dither period."""


class NonFiniteDerivativeError(ArithmeticError):
    """A derivative evaluation produced NaN or infinity."""

    def __init__(self, stage: int, time: float):
        self.stage = stage
        self.time = time
        super().__init__(f"non-finite derivative at stage {stage}, t={time:.6g}")


class UnsupportedFieldError(TypeError):
    """Requested an analytic quantity the field variant does not define."""
