from __future__ import annotations

from typing import Any

import pydantic
from pydantic import ConfigDict, Field

from .error import ArgumentError


class Tolerances(pydantic.BaseModel):
    """
    Represents the numerical configuration shared by every operation.

    The `Tolerances` class collects the relative tolerances and the iteration/grid caps in one
    immutable record. Operations take it as their `tol` argument, and `update()` returns a
    validated copy with some values overridden.

    Attributes:
        `root`: Relative accuracy of the inverse of psi.
        `convex`: Discrete convexity slack, relative to psi(t).
        `decay`: psi(T) < psi(1) * decay at the far end of a sampling grid.
        `quad`: Relative tolerance of tail integrals and kernel truncation.
        `slope`: Slack on finite-difference slopes of eta.
        `norm`: Relative tolerance of L_p norm refinement.
        `minimax`: Relative gap between discrete and continuous minimax error.
        `ls`: Gradient-to-objective ratio that stops the L_s descent.
        `slack`: Relative slack on every inequality verdict.
        `floor_eps`: Shift applied before taking integer parts.
        `smoothing`: Floor on |residual| inside |residual|^(s-2).
        `norm_grid_cap`: Largest quadrature grid for norms.
        `minimax_grid_cap`: Largest point set for the uniform solver.
        `iteration_cap`: Largest number of solver iterations.
        `term_cap`: Largest number of kernel terms.
    """

    model_config = ConfigDict(frozen=True, extra='forbid')

    root: float = Field(default=1e-12, gt=0)
    convex: float = Field(default=1e-10, gt=0)
    decay: float = Field(default=1e-6, gt=0)
    quad: float = Field(default=1e-10, gt=0)
    slope: float = Field(default=1e-3, gt=0)
    norm: float = Field(default=1e-9, gt=0)
    minimax: float = Field(default=1e-8, gt=0)
    ls: float = Field(default=1e-8, gt=0)
    slack: float = Field(default=1e-9, gt=0)
    floor_eps: float = Field(default=1e-9, gt=0)
    smoothing: float = Field(default=1e-12, gt=0)
    norm_grid_cap: int = Field(default=2**20, gt=0)
    minimax_grid_cap: int = Field(default=2**18, gt=0)
    iteration_cap: int = Field(default=10_000, gt=0)
    term_cap: int = Field(default=10**6, gt=0)

    def __str__(self) -> str:
        return f'Tolerances with values: {self.model_dump()}'

    def update(self, **kwargs: Any) -> Tolerances:
        """
        Returns a copy of the tolerances with the provided keyword arguments applied.

        Args:
            **kwargs: Tolerance names and their new positive values.

        Raises:
            ArgumentError: If a key is not a known tolerance, or a value is not positive.
        """
        values = self.model_dump()
        for k, v in kwargs.items():
            if k not in values:
                raise ArgumentError(f'Unknown tolerance {k!r}', field=k)
            values[k] = v
        try:
            return Tolerances.model_validate(values)
        except pydantic.ValidationError as e:
            field = str(e.errors()[0]['loc'][0]) if e.errors() else None
            raise ArgumentError(f'Invalid tolerance override: {e}', field=field)


DEFAULT_TOLERANCES = Tolerances()
