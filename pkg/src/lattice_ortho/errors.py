from __future__ import annotations


class LatticeOrthoError(Exception):
    """Base class for every error raised by this package."""


class InvalidFamilyError(LatticeOrthoError, ValueError):
    """Parameters do not describe a family of the supported class."""


class NodeCollisionError(InvalidFamilyError, ZeroDivisionError):
    """Two eigenvalues h_j, h_k or two nodes x_j, x_k coincide."""


class CanonicalizationError(LatticeOrthoError):
    """No hypergeometric parameter set reproduces the family's f_0 series."""


class ConvergenceConditionError(LatticeOrthoError, ValueError):
    """The weight series cannot converge at t = 1 for these parameters."""


class SeriesDefinitionError(LatticeOrthoError, ValueError):
    """A lower parameter hits a nonpositive integer before the series terminates."""
