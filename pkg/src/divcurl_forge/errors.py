r"""Errors
==========

Every failure raised by the library derives from :class:`DivCurlForgeError`,
so the command line can tell a bad configuration (exit status 2) from a
runtime failure (exit status 3).
"""

from typing import Any


class DivCurlForgeError(Exception):
    r"""Base class of library errors."""


class DegreeError(DivCurlForgeError, ValueError):
    r"""An operator was applied outside its range of form degrees."""


class ShapeMismatchError(DivCurlForgeError, ValueError):
    r"""Operands live on different grids, degrees or shapes."""


class ResolutionError(DivCurlForgeError, ValueError):
    r"""An oscillation is too fine for the grid that should carry it."""


class SingularOperatorError(DivCurlForgeError, ValueError):
    r"""A weight or metric that must be positive-definite is not."""


class ContainerError(DivCurlForgeError, ValueError):
    r"""A binary container is malformed."""


class ConvergenceError(DivCurlForgeError, RuntimeError):
    r"""An iterative solve stopped before reaching its tolerance."""

    def __init__(self, message: str, iterations: int, residual: float) -> None:
        r"""Init.

        :param message:
        :type message: str
        :param iterations:
        :type iterations: int
        :param residual:
        :type residual: float
        :rtype: None
        """
        super().__init__(
            f"{message} (iterations={iterations}, residual={residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


class GeometryError(DivCurlForgeError, ValueError):
    r"""A sampled geometric object breaks one of its invariants."""

    def __init__(
        self, message: str, node: tuple[int, ...] | None = None
    ) -> None:
        r"""Init.

        :param message:
        :type message: str
        :param node:
        :type node: tuple[int, ...] | None
        :rtype: None
        """
        if node is not None:
            message = f"{message} at node {node}"
        super().__init__(message)
        self.node = node


class ConfigError(DivCurlForgeError, ValueError):
    r"""A configuration failed validation."""

    def __init__(self, violations: list[Any]) -> None:
        r"""Init.

        :param violations:
        :type violations: list[Any]
        :rtype: None
        """
        super().__init__("\n".join(str(v) for v in violations))
        self.violations = violations
