"""Exception hierarchy shared across the package."""


class KrylovLabError(Exception):
    """Base class for all domain errors."""


class HamiltonianFormatError(KrylovLabError):
    """Malformed Hamiltonian text (bad line, inconsistent widths, bad coefficient)."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DenseLimitError(KrylovLabError):
    """Requested a dense 2^N x 2^N object above the configured qubit limit."""


class StateError(KrylovLabError):
    """Invalid state construction or incompatible state pair."""


class SectorError(KrylovLabError):
    """Symmetry-sector requirement violated (non-orthogonal reference/target)."""


class EstimationError(KrylovLabError):
    """Estimator produced values outside its statistical contract."""


class SolverError(KrylovLabError):
    """Generalized eigensolver could not produce a usable solution."""


class ConfigError(KrylovLabError):
    """Bad run configuration (unknown key, missing section, bad value)."""
