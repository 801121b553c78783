"""Momentum-space probability currents and the continuity residual.

The momentum density obeys d|psi~|^2/dt + div j = 0. Two constructions of j
are provided:

* closed form, for potentials of polynomial degree <= 2:
    Free            j = 0
    Linear(c)       j_k = -c_k |psi~|^2
    Harmonic(m, w)  j_k = m_k w_k^2 hbar Im(psi~* d psi~/dp_k)
* Poisson route, for any potential: solve laplacian(F) = I on the momentum
  grid and take j = grad F (curl-free by construction).

In 1d the additive constant of the Poisson current is fixed by the no-flux
convention: the current must die off where the state is silent, so the far-
field (grid edge) value is subtracted after the spectral solve. The zero-mean
gauge of the periodic solve alone leaves a spurious constant of order 1/L.
In 2d no constant shift can enforce decay in every direction, so only the
divergence of the two constructions is comparable there.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, UnsupportedPotentialError
from .grid import (
    ComplexField,
    GridSpec,
    Representation,
    spectral_divergence,
    spectral_gradient,
    spectral_inverse_laplacian,
)
from .potentials import Free, Harmonic, Linear, Potential, _per_axis, interaction_source


class CurrentMethod(Enum):
    CLOSED_FORM = "closed"
    POISSON = "poisson"


@dataclass(frozen=True)
class CurrentField:
    """Real current components on the momentum grid, one per dof."""

    grid: GridSpec
    components: np.ndarray
    method: CurrentMethod
    time: float = 0.0

    def __post_init__(self) -> None:
        comps = np.array(self.components, dtype=float, copy=True)
        if comps.shape != (self.grid.dof,) + self.grid.shape:
            raise ConfigurationError("current components must have shape (dof,) + grid.shape")
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)

    def divergence(self) -> np.ndarray:
        return spectral_divergence(self.components, self.grid, Representation.MOMENTUM)


def current_closed_form(potential: Potential, psi_p: ComplexField) -> CurrentField:
    """Closed-form current for Free, Linear, or Harmonic potentials."""
    if psi_p.rep is not Representation.MOMENTUM:
        raise ConfigurationError("current construction expects a momentum-representation field")
    grid = psi_p.grid
    if isinstance(potential, Free):
        comps = np.zeros((grid.dof,) + grid.shape)
    elif isinstance(potential, Linear):
        cs = _per_axis(potential.c, grid.dof, "linear coefficients")
        rho = psi_p.density()
        comps = np.stack([-cs[a] * rho for a in range(grid.dof)])
    elif isinstance(potential, Harmonic):
        ms = _per_axis(potential.mass, grid.dof, "harmonic masses")
        ws = _per_axis(potential.omega, grid.dof, "harmonic frequencies")
        grad = spectral_gradient(psi_p.values, grid, Representation.MOMENTUM)
        comps = np.stack(
            [
                ms[a] * ws[a] ** 2 * grid.hbar * np.imag(np.conj(psi_p.values) * grad[a])
                for a in range(grid.dof)
            ]
        )
    else:
        raise UnsupportedPotentialError(
            "closed-form currents exist only for free, linear, and harmonic potentials"
        )
    return CurrentField(grid, comps, CurrentMethod.CLOSED_FORM, psi_p.time)


EDGE_GAUGE_CELLS = 3


def current_poisson(source: np.ndarray, grid: GridSpec, time: float = 0.0) -> CurrentField:
    """Curl-free current j = grad(inverse_laplacian(source)) on the momentum grid.

    Raises IllPosedSourceError (via the inverse Laplacian) when the source
    does not integrate to zero. In 1d the far-field constant is removed so
    the current vanishes where the cumulative source vanishes.
    """
    F = spectral_inverse_laplacian(np.asarray(source, dtype=float), grid, Representation.MOMENTUM)
    comps = spectral_gradient(F, grid, Representation.MOMENTUM)
    if grid.dof == 1:
        edges = np.concatenate([comps[0][:EDGE_GAUGE_CELLS], comps[0][-EDGE_GAUGE_CELLS:]])
        comps = comps - edges.mean()
    return CurrentField(grid, comps, CurrentMethod.POISSON, time)


def current_for(
    potential: Potential,
    psi_x: ComplexField,
    psi_p: ComplexField,
    method: CurrentMethod,
) -> CurrentField:
    """Dispatch on the configured current construction."""
    if method is CurrentMethod.CLOSED_FORM:
        return current_closed_form(potential, psi_p)
    src = interaction_source(potential, psi_x, psi_p)
    return current_poisson(src, psi_p.grid, psi_p.time)


def continuity_residual(
    psi_p_before: ComplexField,
    psi_p_after: ComplexField,
    current_mid: CurrentField,
    dt: float,
) -> float:
    """Relative L2 residual of (rho_after - rho_before)/dt + div j.

    Falls back to the absolute norm when ||div j|| < 1e-14 (free evolution).
    """
    grid = psi_p_before.grid
    vol = grid.cell_volume(Representation.MOMENTUM)
    drho = (psi_p_after.density() - psi_p_before.density()) / dt
    div = current_mid.divergence()
    num = np.sqrt(np.sum((drho + div) ** 2) * vol)
    den = np.sqrt(np.sum(div**2) * vol)
    if den < 1e-14:
        return float(num)
    return float(num / den)
