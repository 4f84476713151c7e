"""Exception hierarchy. Every error raised by the library derives from FaradayError."""


class FaradayError(Exception):
    """Base class for all library errors."""


class ModelError(FaradayError):
    """Problems with the molecular model input."""


class ParseError(ModelError):
    pass


class UnitError(ModelError):
    pass


class HermiticityViolation(ModelError):
    pass


class ShapeError(ModelError):
    pass


class DegenerateSpectrum(ModelError):
    """Non-degenerate perturbation formulas cannot be used (Faraday A/C terms unsupported)."""

    def __init__(self, pairs, message=None):
        self.pairs = list(pairs)
        if message is None:
            message = (
                f"degenerate level pairs {self.pairs}: Faraday A and C terms "
                "require degenerate perturbation theory and are not supported"
            )
        super().__init__(message)


class ConfigError(FaradayError):
    pass


class NumericalError(FaradayError):
    """Failures of the numerical machinery."""


class NearResonance(NumericalError):
    def __init__(self, message, detuning=None):
        self.detuning = detuning
        super().__init__(message)


class StepTooLarge(NumericalError):
    pass


class EmptyMode1(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class DimensionError(NumericalError):
    pass
