"""The measurement chain: two-mode mixing, homodyne statistics, conditioning,
feedback displacement, output squeezing, and outcome sampling.

Stage by stage, for interferometer phase phi (c = cos phi, s = sin phi,
t = tan phi) and an inferred outcome x0:

  joint state      A(y1, y2) = psi_s(y1 c - y2 s) psi_p(y1 s + y2 c)
  outcome density  p(x0) = t * int |psi_s(y)|^2 |psi_p(t (y - x0))|^2 dy
  conditioning     phi_x0(y)  ~ psi_s(y c + x0 s^2) psi_p(y s - x0 c s)
  displacement     by d = x0 s t
  squeezing        axis rescale by c, i.e. psi(y) -> psi(y / c) / sqrt(c)
  net effect       psi_x0(x) ~ psi_s(x) psi_p((x - x0) t)

All operations are pure functions over immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import (
    DegeneratePhaseError,
    GridTooNarrowError,
    InvalidParameterError,
    NullOutcomeError,
)
from .grids import (
    Distribution,
    GaussianSpec,
    Grid,
    GridPolicy,
    WaveFunction,
    amplitude_interpolator,
)

PHASE_MARGIN = 1e-6  # sin(phi) and cos(phi) must both exceed this
NULL_OUTCOME_DENSITY = 1e-12  # conditioning below this density is meaningless
SUPPORT_CUTOFF = 1e-8  # relative amplitude defining the numerical support
OUTCOME_SPAN_SIGMAS = 8.0


def check_phase(phi: float) -> None:
    """Reject phases where either interferometer port coupling degenerates."""
    if not (math.sin(phi) > PHASE_MARGIN and math.cos(phi) > PHASE_MARGIN):
        raise DegeneratePhaseError(
            f"phi={phi} is degenerate: need sin(phi) > {PHASE_MARGIN} and "
            f"cos(phi) > {PHASE_MARGIN}, i.e. phi strictly inside (0, pi/2)"
        )


@dataclass(frozen=True)
class ChainConfig:
    """Interferometer phase, probe preparation, grid sizing, and sampling seed."""

    phi: float
    probe_spec: GaussianSpec
    grid_policy: GridPolicy = GridPolicy()
    seed: int = 0

    def __post_init__(self) -> None:
        check_phase(self.phi)
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def transmittivity(self) -> float:
        return math.cos(self.phi) ** 2

    @property
    def output_squeeze_factor(self) -> float:
        """Axis scale factor applied by the output squeezer (e^r = cos phi)."""
        return math.cos(self.phi)


@dataclass(frozen=True, eq=False)
class JointWaveFunction:
    """Two-mode amplitude matrix A[i, j] over grid1 x grid2."""

    grid1: Grid
    grid2: Grid
    amplitudes: np.ndarray

    def norm(self) -> float:
        prob = np.abs(self.amplitudes) ** 2
        return math.sqrt(float(self.grid1.weights @ (prob @ self.grid2.weights)))

    def marginal(self, mode: int) -> Distribution:
        """Quadrature density of one mode with the other integrated out."""
        prob = np.abs(self.amplitudes) ** 2
        if mode == 1:
            return Distribution.normalized(self.grid1, prob @ self.grid2.weights)
        if mode == 2:
            return Distribution.normalized(self.grid2, self.grid1.weights @ prob)
        raise InvalidParameterError(f"mode must be 1 or 2, got {mode}")

    def conditioned_on_mode2(self, reading: float) -> WaveFunction:
        """Mode-1 state after a sharp mode-2 projection at the given reading.

        The amplitude matrix is cubic-interpolated along mode 2 and the
        resulting slice is renormalized.
        """
        from scipy.interpolate import CubicSpline

        if not self.grid2.covers(reading, reading):
            raise GridTooNarrowError(
                f"mode-2 reading {reading} lies outside the grid "
                f"[{self.grid2.x_min}, {self.grid2.x_max}]"
            )
        spline = CubicSpline(self.grid2.points, self.amplitudes, axis=1)
        return WaveFunction.normalized(self.grid1, spline(reading))


@dataclass(frozen=True)
class Outcome:
    """One homodyne event mapped back to the inferred signal quadrature.

    raw_X is the actual detector reading; the inferred value is
    x0 = -raw_X / sin(phi).
    """

    x0: float
    raw_X: float
    density_at_x0: float


def make_outcome(dist: Distribution, x0: float, phi: float) -> Outcome:
    check_phase(phi)
    dens = float(np.interp(x0, dist.grid.points, dist.density, left=0.0, right=0.0))
    return Outcome(x0=float(x0), raw_X=-float(x0) * math.sin(phi), density_at_x0=dens)


def _support_bounds(wf: WaveFunction) -> tuple[float, float]:
    """Interval where |amplitude| exceeds SUPPORT_CUTOFF times the peak."""
    mag = np.abs(wf.amplitudes)
    idx = np.nonzero(mag >= SUPPORT_CUTOFF * mag.max())[0]
    return float(wf.grid.points[idx[0]]), float(wf.grid.points[idx[-1]])


def beam_splitter_transform(
    signal: WaveFunction,
    probe: WaveFunction,
    phi: float,
    out_grid1: Grid | None = None,
    out_grid2: Grid | None = None,
    n_points: int | None = None,
) -> JointWaveFunction:
    """Mix signal and probe: A(y1, y2) = psi_s(y1 c - y2 s) psi_p(y1 s + y2 c).

    Inputs are cubic-interpolated at the rotated arguments.  The output is
    deliberately not renormalized; norm preservation within 1e-6 is part of
    the contract and is what the tests check.
    """
    check_phase(phi)
    c, s = math.cos(phi), math.sin(phi)
    if out_grid1 is None or out_grid2 is None:
        # bounding box of the rotated input rectangle; nothing lives outside it
        n = n_points or max(signal.grid.n_points, probe.grid.n_points)
        box1_lo = signal.grid.x_min * c + probe.grid.x_min * s
        box1_hi = signal.grid.x_max * c + probe.grid.x_max * s
        box2_lo = -signal.grid.x_max * s + probe.grid.x_min * c
        box2_hi = -signal.grid.x_min * s + probe.grid.x_max * c
        out_grid1 = out_grid1 or Grid(box1_lo, box1_hi, n)
        out_grid2 = out_grid2 or Grid(box2_lo, box2_hi, n)
    s_lo, s_hi = _support_bounds(signal)
    p_lo, p_hi = _support_bounds(probe)
    if not out_grid1.covers(s_lo * c + p_lo * s, s_hi * c + p_hi * s):
        raise GridTooNarrowError("mode-1 output grid does not hold the rotated support")
    if not out_grid2.covers(-s_hi * s + p_lo * c, -s_lo * s + p_hi * c):
        raise GridTooNarrowError("mode-2 output grid does not hold the rotated support")
    s_eval = amplitude_interpolator(signal)
    p_eval = amplitude_interpolator(probe)
    y1 = out_grid1.points[:, None]
    y2 = out_grid2.points[None, :]
    amp = s_eval(y1 * c - y2 * s) * p_eval(y1 * s + y2 * c)
    return JointWaveFunction(out_grid1, out_grid2, amp)


def outcome_grid(
    signal: WaveFunction,
    probe: WaveFunction,
    phi: float,
    n_points: int | None = None,
    span_sigmas: float = OUTCOME_SPAN_SIGMAS,
) -> Grid:
    """Grid for inferred outcomes, sized to mean +/- span_sigmas combined sigma.

    The combined sigma is sqrt(sigma_s^2 + sigma_p^2 / tan^2 phi): signal
    spread plus the probe filter width.
    """
    check_phase(phi)
    t = math.tan(phi)
    center = signal.mean() - probe.mean() / t
    halfspan = span_sigmas * math.sqrt(signal.variance() + probe.variance() / t**2)
    n = n_points or signal.grid.n_points
    return Grid(center - halfspan, center + halfspan, n)


def homodyne_distribution(
    signal: WaveFunction,
    probe: WaveFunction,
    phi: float,
    out_grid: Grid | None = None,
) -> Distribution:
    """Density of the inferred outcome x0 = -X / sin(phi).

    p(x0) = tan(phi) * int |psi_s(y)|^2 |psi_p(tan(phi) (y - x0))|^2 dy,
    evaluated by direct quadrature over the signal grid (no joint state).
    """
    check_phase(phi)
    t = math.tan(phi)
    required = outcome_grid(signal, probe, phi)
    if out_grid is None:
        out_grid = required
    elif not out_grid.covers(required.x_min, required.x_max):
        raise GridTooNarrowError(
            f"outcome grid [{out_grid.x_min}, {out_grid.x_max}] must cover mean +/- "
            f"{OUTCOME_SPAN_SIGMAS} combined sigma, i.e. [{required.x_min}, {required.x_max}]"
        )
    p_eval = amplitude_interpolator(probe)
    y = signal.grid.points
    signal_mass = np.abs(signal.amplitudes) ** 2 * signal.grid.weights
    out = np.empty(out_grid.n_points)
    block = max(1, 2**20 // signal.grid.n_points)  # bound the scratch matrix size
    for start in range(0, out_grid.n_points, block):
        x0 = out_grid.points[start : start + block]
        filt = np.abs(p_eval(t * (y[None, :] - x0[:, None]))) ** 2
        out[start : start + block] = t * (filt @ signal_mass)
    return Distribution.normalized(out_grid, out)


def _outcome_density_at(signal: WaveFunction, probe: WaveFunction, phi: float, x0: float) -> float:
    t = math.tan(phi)
    p_eval = amplitude_interpolator(probe)
    filt = np.abs(p_eval(t * (signal.grid.points - x0))) ** 2
    mass = np.abs(signal.amplitudes) ** 2 * signal.grid.weights
    return t * float(filt @ mass)


def conditional_state_raw(
    signal: WaveFunction,
    probe: WaveFunction,
    phi: float,
    x0: float,
    out_grid: Grid | None = None,
) -> WaveFunction:
    """Kept-mode state right after the mode-2 projection, before any feedback.

    phi_x0(y) ~ psi_s(y cos phi + x0 sin^2 phi) psi_p(y sin phi - x0 cos phi sin phi),
    renormalized on the target grid (the signal grid unless one is given).
    """
    check_phase(phi)
    p_x0 = _outcome_density_at(signal, probe, phi, x0)
    if p_x0 <= NULL_OUTCOME_DENSITY:
        raise NullOutcomeError(
            f"outcome density p(x0)={p_x0:.3e} at x0={x0} is below {NULL_OUTCOME_DENSITY}"
        )
    c, s = math.cos(phi), math.sin(phi)
    grid = out_grid or signal.grid
    y = grid.points
    s_eval = amplitude_interpolator(signal)
    p_eval = amplitude_interpolator(probe)
    vals = s_eval(y * c + x0 * s * s) * p_eval(y * s - x0 * c * s)
    return WaveFunction.normalized(grid, vals)


def feedback_displace(state: WaveFunction, x0: float, phi: float) -> WaveFunction:
    """Shift the state by d = x0 sin(phi) tan(phi) along the quadrature axis."""
    check_phase(phi)
    d = x0 * math.sin(phi) * math.tan(phi)
    lo, hi = _support_bounds(state)
    if not state.grid.covers(lo + d, hi + d):
        raise GridTooNarrowError(
            f"displaced support [{lo + d}, {hi + d}] leaves the grid "
            f"[{state.grid.x_min}, {state.grid.x_max}]; the displaced support must fit the grid"
        )
    evaluate = amplitude_interpolator(state)
    return WaveFunction.normalized(state.grid, evaluate(state.grid.points - d))


def output_squeeze(state: WaveFunction, phi: float) -> WaveFunction:
    """Squeeze by rescaling the quadrature axis by cos(phi).

    With e^r = cos(phi), position kets map |y> -> e^(r/2) |e^r y>, so the
    wavefunction transforms as psi(y) -> psi(y / cos phi) / sqrt(cos phi),
    renormalized after interpolation.
    """
    check_phase(phi)
    c = math.cos(phi)
    lo, hi = _support_bounds(state)
    if not state.grid.covers(lo * c, hi * c):
        raise GridTooNarrowError(
            f"rescaled support [{lo * c}, {hi * c}] leaves the grid "
            f"[{state.grid.x_min}, {state.grid.x_max}]"
        )
    evaluate = amplitude_interpolator(state)
    vals = evaluate(state.grid.points / c) / math.sqrt(c)
    return WaveFunction.normalized(state.grid, vals)


def conditional_output(
    signal: WaveFunction, probe: WaveFunction, phi: float, x0: float
) -> WaveFunction:
    """Closed-form conditional output psi_x0(x) ~ psi_s(x) psi_p((x - x0) tan phi).

    Equals the three-stage pipeline (conditioning, displacement, squeezing)
    and lives on the signal grid.
    """
    check_phase(phi)
    t = math.tan(phi)
    p_eval = amplitude_interpolator(probe)
    vals = signal.amplitudes * p_eval(t * (signal.grid.points - x0))
    p_x0 = t * float(signal.grid.weights @ np.abs(vals) ** 2)
    if p_x0 <= NULL_OUTCOME_DENSITY:
        raise NullOutcomeError(
            f"outcome density p(x0)={p_x0:.3e} at x0={x0} is below {NULL_OUTCOME_DENSITY}"
        )
    return WaveFunction.normalized(signal.grid, vals)


def sample_outcomes(dist: Distribution, count: int, seed: int) -> np.ndarray:
    """Deterministic inverse-transform draws from the trapezoidal CDF.

    Generator: numpy PCG64 seeded with `seed` (via default_rng); each uniform
    u in [0, 1) is mapped through the piecewise-linear inverse of the
    cumulative trapezoid of the density.  Fixed seed, fixed stream.
    """
    if count <= 0:
        raise InvalidParameterError(f"sample count must be positive, got {count}")
    cdf = cumulative_trapezoid(dist.density, dist.grid.points, initial=0.0)
    cdf = cdf / cdf[-1]
    u = np.random.default_rng(seed).random(count)
    idx = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, dist.grid.n_points - 2)
    gap = cdf[idx + 1] - cdf[idx]
    safe = np.where(gap > 0, gap, 1.0)
    frac = np.where(gap > 0, (u - cdf[idx]) / safe, 0.0)
    return dist.grid.points[idx] + frac * dist.grid.step
