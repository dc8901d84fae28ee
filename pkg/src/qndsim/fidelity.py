"""Information-gain versus state-disturbance figures for the chain.

Two global fidelities are tracked:

  F = int p(x) |<psi_s|psi_x>|^2 dx    (state fidelity: how close the
      conditional outputs stay to the input, on average over outcomes)
  G = ( int sqrt(p(x)) |psi_s(x)| dx )^2   (distribution fidelity: squared
      Bhattacharyya coefficient between the outcome density and the
      intrinsic quadrature density)

For Gaussian signal and probe both collapse to closed forms in the single
ratio x = sigma_p / (sigma_s tan phi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import (
    NULL_OUTCOME_DENSITY,
    check_phase,
    conditional_output,
    homodyne_distribution,
    outcome_grid,
)
from .errors import GridMismatchError, InvalidParameterError, ResourceLimitError
from .grids import Grid, WaveFunction, amplitude_interpolator, overlap

OUTCOME_NODES = 1024
ENSEMBLE_POINT_CAP = 4096


@dataclass(frozen=True)
class FidelityPair:
    """State fidelity F and distribution fidelity G at one operating point.

    x is the Gaussian filter ratio sigma_p / (sigma_s tan phi) when the
    point comes from Gaussian closed forms; None when it is not defined.
    """

    F: float
    G: float
    x: float | None = None

    @property
    def f_plus_g(self) -> float:
        return self.F + self.G


def _clamp_unit(value: float) -> float:
    return min(max(value, 0.0), 1.0)


def state_fidelity(
    signal: WaveFunction,
    probe: WaveFunction,
    phi: float,
    n_outcomes: int = OUTCOME_NODES,
) -> float:
    """Outcome-averaged overlap of the conditional outputs with the input.

    Outer trapezoidal quadrature over an outcome grid spanning 8 combined
    standard deviations; outcomes below the null-density threshold are
    skipped (their weight is negligible by construction).
    """
    check_phase(phi)
    ogrid = outcome_grid(signal, probe, phi, n_points=n_outcomes)
    p = homodyne_distribution(signal, probe, phi, out_grid=ogrid)
    acc = 0.0
    for x0, w, dens in zip(ogrid.points, ogrid.weights, p.density):
        if dens <= NULL_OUTCOME_DENSITY:
            continue
        psi = conditional_output(signal, probe, phi, float(x0))
        acc += w * dens * abs(overlap(signal, psi)) ** 2
    return _clamp_unit(acc)


def distribution_fidelity(
    signal: WaveFunction,
    probe: WaveFunction,
    phi: float,
    n_outcomes: int = OUTCOME_NODES,
) -> float:
    """Squared Bhattacharyya coefficient between p(x0) and |psi_s(x)|^2."""
    check_phase(phi)
    ogrid = outcome_grid(signal, probe, phi, n_points=n_outcomes)
    p = homodyne_distribution(signal, probe, phi, out_grid=ogrid)
    s_eval = amplitude_interpolator(signal)
    integrand = np.sqrt(p.density) * np.abs(s_eval(ogrid.points))
    coeff = float(ogrid.weights @ integrand)
    return _clamp_unit(coeff * coeff)


def gaussian_state_fidelity(x: float) -> float:
    """Closed-form F = sqrt(2) x / sqrt(1 + 2 x^2) for Gaussian signal and probe."""
    if x <= 0:
        raise InvalidParameterError(f"filter ratio x must be positive, got {x}")
    return math.sqrt(2.0) * x / math.sqrt(1.0 + 2.0 * x * x)


def gaussian_distribution_fidelity(x: float) -> float:
    """Closed-form G = 2 sqrt(1 + x^2) / (2 + x^2) for Gaussian signal and probe."""
    if x <= 0:
        raise InvalidParameterError(f"filter ratio x must be positive, got {x}")
    return 2.0 * math.sqrt(1.0 + x * x) / (2.0 + x * x)


def transfer_function(y1, y2, phi: float, sigma_p: float):
    """Gaussian-probe transfer kernel exp(-tan^2 phi (y1 - y2)^2 / (8 sigma_p^2))."""
    if sigma_p <= 0:
        raise InvalidParameterError(f"probe width sigma_p must be positive, got {sigma_p}")
    diff = np.asarray(y1, dtype=np.float64) - np.asarray(y2, dtype=np.float64)
    return np.exp(-(math.tan(phi) ** 2) * diff**2 / (8.0 * sigma_p**2))


def state_fidelity_via_transfer(signal: WaveFunction, phi: float, sigma_p: float) -> float:
    """State fidelity as a double quadrature against the transfer kernel.

    F = int int |psi_s(y')|^2 |psi_s(y'')|^2 T(y', y'') dy' dy'', valid for a
    Gaussian probe of wavefunction-density width sigma_p; the signal can be
    anything.  Cross-checks the outcome-integral route.
    """
    check_phase(phi)
    y = signal.grid.points
    mass = np.abs(signal.amplitudes) ** 2 * signal.grid.weights
    kernel = transfer_function(y[:, None], y[None, :], phi, sigma_p)
    return _clamp_unit(float(mass @ kernel @ mass))


@dataclass(frozen=True, eq=False)
class DensityMatrixGrid:
    """Discretized kernel rho(x, x') of the outcome-averaged output ensemble."""

    grid: Grid
    matrix: np.ndarray

    def trace(self) -> float:
        return float(self.grid.weights @ np.real(np.diagonal(self.matrix)))

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def expectation(self, wf: WaveFunction) -> float:
        """<psi| rho |psi> by double trapezoidal quadrature."""
        if wf.grid != self.grid:
            raise GridMismatchError("expectation needs the state on the kernel's grid")
        v = self.grid.weights * wf.amplitudes
        return float(np.real(np.conj(v) @ self.matrix @ v))

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of W^(1/2) rho W^(1/2) (W = quadrature weights).

        This symmetrized form is the discretization of the kernel as an
        operator on L2 of the grid, so its spectrum is real.
        """
        root = np.sqrt(self.grid.weights)
        sym = root[:, None] * self.matrix * root[None, :]
        sym = 0.5 * (sym + sym.conj().T)
        return float(np.linalg.eigvalsh(sym)[0])


def output_ensemble(
    signal: WaveFunction,
    probe: WaveFunction,
    phi: float,
    n_outcomes: int = OUTCOME_NODES,
) -> DensityMatrixGrid:
    """Outcome-averaged output state rho(x, x') = int p(x0) psi_x0(x) psi_x0*(x') dx0."""
    check_phase(phi)
    n = signal.grid.n_points
    if n > ENSEMBLE_POINT_CAP:
        raise ResourceLimitError(
            f"ensemble kernel needs n_points <= {ENSEMBLE_POINT_CAP}, got {n} "
            "(memory grows quadratically)"
        )
    ogrid = outcome_grid(signal, probe, phi, n_points=n_outcomes)
    p = homodyne_distribution(signal, probe, phi, out_grid=ogrid)
    columns = []
    masses = []
    for x0, w, dens in zip(ogrid.points, ogrid.weights, p.density):
        if dens <= NULL_OUTCOME_DENSITY:
            continue
        columns.append(conditional_output(signal, probe, phi, float(x0)).amplitudes)
        masses.append(w * dens)
    states = np.stack(columns, axis=1)
    mass = np.asarray(masses)
    matrix = (states * mass) @ states.conj().T
    return DensityMatrixGrid(signal.grid, matrix)
