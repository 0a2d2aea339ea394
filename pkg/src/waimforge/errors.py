"""Exception types shared across the package."""


class WaimError(Exception):
    """Base class for package errors."""


class ValidationError(WaimError, ValueError):
    """One or more invalid inputs. ``errors`` lists every problem found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class NonFiniteError(WaimError, ArithmeticError):
    """A spectral quantity hit a pole or overflowed."""


class SingularSystemError(WaimError, ArithmeticError):
    """The moment matrix could not be factorised."""
