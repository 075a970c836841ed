"""Exception types raised by lextensor."""

import numpy as np


class ShapeError(ValueError):
    """Operand dimensions are inconsistent."""


class ModeError(ValueError):
    """A mode number lies outside ``[0, order)``."""


class TensorIndexError(IndexError):
    """A multi-index component or flat offset is out of range."""


class CapacityError(ValueError):
    """A size limit (index range or materialization cap) would be exceeded."""


class DefinitenessError(np.linalg.LinAlgError):
    """A covariance factor is not symmetric positive definite."""


class UnknownIdentityError(KeyError):
    """Requested identity id is not in the registry."""
