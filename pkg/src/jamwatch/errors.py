"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: configuration/validation problems
(including plain ValueError) exit 1, data-dependent failures exit 2.
"""


class ConfigError(Exception):
    """A configuration value is invalid.

    ``field`` carries the dotted path of the offending field when known
    (e.g. ``"snlj.spike_width"``).
    """

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class DataError(Exception):
    """Base class for failures caused by the data itself."""


class TraceFormatError(DataError):
    """A trace file does not conform to the trace CSV/sidecar format."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}"
            if line is not None:
                prefix += f":{line}"
            prefix += ": "
        super().__init__(prefix + message)


class InsufficientDataError(DataError):
    """Not enough samples or windows to perform the requested operation."""


class DegenerateWindowError(DataError):
    """No split of the window yields usable (positive definite) scatters."""


class SingularMatrixError(ArithmeticError):
    """A symmetric matrix failed its positive-definite factorization.

    ``pivot_index`` identifies the Cholesky pivot that fell at or below
    the positive-definiteness tolerance.
    """

    def __init__(self, pivot_index, pivot_value):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        super().__init__(
            f"matrix is not positive definite: pivot {pivot_index} = {pivot_value:.6g}"
        )
