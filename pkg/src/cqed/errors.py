"""Exception types shared across the package."""


class CqedError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(CqedError, ValueError):
    """Invalid or inconsistent system parameters."""


class DegenerateSteadyStateError(CqedError):
    """Liouvillian null space is not one-dimensional."""


class ConvergenceError(CqedError):
    """An iterative search (truncation sweep, drive calibration) did not converge."""


class OverdampedError(CqedError):
    """Ng^2 <= (kappa - gamma/2)^2 / 4: the oscillatory weak-field expressions do not apply."""


class StepSizeError(CqedError):
    """Integration step too large: a jump probability or norm-change bound was violated."""


class CollapseError(CqedError):
    """A collapse operator annihilated the state (channel fired on an incompatible state)."""


class TailDecayError(CqedError):
    """Correlation series has not decayed to its asymptote within the tau grid."""


class NoZeroFrequencyPeakError(CqedError):
    """Spectrum has no local maximum at zero frequency."""


class NoStartsError(CqedError):
    """No cavity counts with full +/- tau_max context exist in the record set."""
