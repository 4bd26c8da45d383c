"""Exception types raised across the package."""

import numpy as np


class InvalidArgumentError(ValueError):
    """An argument has the wrong shape, type or value."""


class PreconditionError(ValueError):
    """A physical precondition does not hold (e.g. delay beyond the CP budget)."""


class SingularMatrixError(np.linalg.LinAlgError):
    """A linear system has no unique solution."""


class ConfigError(ValueError):
    """A scenario configuration is malformed.

    ``field`` is the dotted key path and ``line`` the 1-based source line when
    known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
