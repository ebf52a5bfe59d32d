"""Exception types shared across the package.

The CLI maps these onto exit codes, so raising the right class matters:
bad user input (files, literals, out-of-range arguments) is InputError,
blowing a configured enumeration/size cap is ResourceLimitError, and a
solve that ends without a usable optimum is SolverError.
"""


class ThetaBodyError(Exception):
    """Base class for all package errors."""


class InputError(ThetaBodyError):
    """Malformed or inconsistent input data (parse failures, bad dimensions,
    duplicate points, negative weights, unknown monomials, ...)."""


class ResourceLimitError(ThetaBodyError):
    """A configured cap was exceeded (enumeration cap, point/dimension cap)."""


class SolverError(ThetaBodyError):
    """The SDP solver finished without a certified optimum."""
