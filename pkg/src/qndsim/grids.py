"""Uniform quadrature grids and discretized single-mode wavefunctions.

Conventions: the quadrature is x = (a^dag + a)/2, so the vacuum state has
quadrature-density variance 1/4.  A state's "variance" always means the
variance of its quadrature density |psi(x)|^2.  All integrals are
trapezoidal sums on uniform grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GridMismatchError, GridTooNarrowError, InvalidParameterError

VACUUM_VARIANCE = 0.25

DEFAULT_GRID_POINTS = 2048
DEFAULT_SPAN_SIGMAS = 10.0


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D quadrature lattice; point k sits at x_min + k * step."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self) -> None:
        if not self.x_min < self.x_max:
            raise InvalidParameterError(
                f"grid needs x_min < x_max, got [{self.x_min}, {self.x_max}]"
            )
        if self.n_points < 16:
            raise InvalidParameterError(f"grid needs n_points >= 16, got {self.n_points}")

    @property
    def step(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @cached_property
    def points(self) -> np.ndarray:
        pts = self.x_min + self.step * np.arange(self.n_points)
        pts.flags.writeable = False
        return pts

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights matching `points`."""
        w = np.full(self.n_points, self.step)
        w[0] = w[-1] = 0.5 * self.step
        w.flags.writeable = False
        return w

    def covers(self, lo: float, hi: float) -> bool:
        """Whether [lo, hi] fits inside the grid, up to a relative slack."""
        pad = 1e-9 * (self.x_max - self.x_min)
        return self.x_min <= lo + pad and hi - pad <= self.x_max


@dataclass(frozen=True)
class GaussianSpec:
    """Mean and variance of a Gaussian quadrature density.

    variance = 1/4 is the vacuum; smaller is squeezed, larger anti-squeezed.
    """

    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not self.variance > 0:
            raise InvalidParameterError(f"variance must be positive, got {self.variance}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class CatSpec:
    """Even superposition of two Gaussians centered at +/- separation."""

    separation: float
    component_variance: float

    def __post_init__(self) -> None:
        if not self.component_variance > 0:
            raise InvalidParameterError(
                f"component variance must be positive, got {self.component_variance}"
            )
        if self.separation < 0:
            raise InvalidParameterError(f"separation must be >= 0, got {self.separation}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.component_variance)


StateSpec = Union[GaussianSpec, CatSpec]


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex amplitudes on a grid, held at unit L2 norm."""

    grid: Grid
    amplitudes: np.ndarray

    @classmethod
    def normalized(cls, grid: Grid, values: np.ndarray) -> "WaveFunction":
        amp = np.ascontiguousarray(values, dtype=np.complex128)
        if amp.shape != (grid.n_points,):
            raise InvalidParameterError(
                f"amplitude array of shape {amp.shape} does not match grid with "
                f"{grid.n_points} points"
            )
        norm_sq = float(grid.weights @ np.abs(amp) ** 2)
        if not math.isfinite(norm_sq) or norm_sq <= 0.0:
            raise InvalidParameterError("cannot normalize a null or non-finite wavefunction")
        amp = amp / math.sqrt(norm_sq)
        amp.flags.writeable = False
        return cls(grid, amp)

    def norm(self) -> float:
        return math.sqrt(float(self.grid.weights @ np.abs(self.amplitudes) ** 2))

    def mean(self) -> float:
        prob = np.abs(self.amplitudes) ** 2
        return float(self.grid.weights @ (self.grid.points * prob))

    def variance(self) -> float:
        prob = np.abs(self.amplitudes) ** 2
        m = float(self.grid.weights @ (self.grid.points * prob))
        return float(self.grid.weights @ ((self.grid.points - m) ** 2 * prob))

    def edge_leak(self) -> float:
        """Largest edge amplitude relative to the peak amplitude."""
        mag = np.abs(self.amplitudes)
        return float(max(mag[0], mag[-1]) / mag.max())


@dataclass(frozen=True, eq=False)
class Distribution:
    """Nonnegative density on a grid with unit trapezoidal integral."""

    grid: Grid
    density: np.ndarray

    @classmethod
    def normalized(cls, grid: Grid, values: np.ndarray) -> "Distribution":
        dens = np.ascontiguousarray(values, dtype=np.float64)
        if dens.shape != (grid.n_points,):
            raise InvalidParameterError(
                f"density array of shape {dens.shape} does not match grid with "
                f"{grid.n_points} points"
            )
        peak = float(dens.max(initial=0.0))
        if float(dens.min(initial=0.0)) < -1e-12 * max(peak, 1.0):
            raise InvalidParameterError("density has significantly negative values")
        dens = np.clip(dens, 0.0, None)
        total = float(grid.weights @ dens)
        if not math.isfinite(total) or total <= 0.0:
            raise InvalidParameterError("cannot normalize a null or non-finite density")
        dens = dens / total
        dens.flags.writeable = False
        return cls(grid, dens)

    def total(self) -> float:
        return float(self.grid.weights @ self.density)

    def mean(self) -> float:
        return float(self.grid.weights @ (self.grid.points * self.density))

    def variance(self) -> float:
        m = self.mean()
        return float(self.grid.weights @ ((self.grid.points - m) ** 2 * self.density))


def _require_cover(grid: Grid, lo: float, hi: float, what: str) -> None:
    if not grid.covers(lo, hi):
        raise GridTooNarrowError(
            f"grid [{grid.x_min}, {grid.x_max}] does not cover the {what} support "
            f"[{lo}, {hi}]"
        )


def build_gaussian(spec: GaussianSpec, grid: Grid) -> WaveFunction:
    """Gaussian wavefunction (2 pi v)^(-1/4) exp(-(x - m)^2 / (4 v)), renormalized.

    Its quadrature density is the normal density with the spec's mean and
    variance.  The grid must cover mean +/- 8 standard deviations.
    """
    _require_cover(grid, spec.mean - 8 * spec.sigma, spec.mean + 8 * spec.sigma, "gaussian")
    x = grid.points
    amp = (2 * math.pi * spec.variance) ** -0.25 * np.exp(
        -((x - spec.mean) ** 2) / (4 * spec.variance)
    )
    return WaveFunction.normalized(grid, amp)


def build_cat(separation: float, component_variance: float, grid: Grid) -> WaveFunction:
    """Normalized even superposition of two Gaussians at +/- separation."""
    spec = CatSpec(separation, component_variance)
    _require_cover(
        grid,
        -spec.separation - 8 * spec.sigma,
        spec.separation + 8 * spec.sigma,
        "cat",
    )
    x = grid.points
    v = spec.component_variance
    amp = np.exp(-((x - spec.separation) ** 2) / (4 * v)) + np.exp(
        -((x + spec.separation) ** 2) / (4 * v)
    )
    return WaveFunction.normalized(grid, amp)


def build_state(spec: StateSpec, grid: Grid) -> WaveFunction:
    if isinstance(spec, GaussianSpec):
        return build_gaussian(spec, grid)
    if isinstance(spec, CatSpec):
        return build_cat(spec.separation, spec.component_variance, grid)
    raise InvalidParameterError(f"unknown state spec {spec!r}")


def overlap(a: WaveFunction, b: WaveFunction) -> complex:
    """Inner product <a|b> by trapezoidal quadrature. Grids must be identical."""
    if a.grid != b.grid:
        raise GridMismatchError(
            f"overlap needs identical grids, got [{a.grid.x_min}, {a.grid.x_max}] x "
            f"{a.grid.n_points} vs [{b.grid.x_min}, {b.grid.x_max}] x {b.grid.n_points}"
        )
    return complex(a.grid.weights @ (np.conj(a.amplitudes) * b.amplitudes))


def density(a: WaveFunction) -> Distribution:
    """Quadrature density |psi(x)|^2 of a wavefunction."""
    return Distribution(a.grid, np.abs(a.amplitudes) ** 2)


def photon_number_paper(sigma2: float) -> float:
    """Mean photon number (sigma2 + 1/sigma2 - 2) / 4 of a squeezed vacuum.

    This reproduces the printed formula verbatim; note it treats sigma2 = 1
    (not the vacuum value 1/4) as the zero-photon point.
    """
    if sigma2 <= 0:
        raise InvalidParameterError(f"sigma2 must be positive, got {sigma2}")
    return (sigma2 + 1.0 / sigma2 - 2.0) / 4.0


def _extent(spec: StateSpec) -> tuple[float, float, float]:
    if isinstance(spec, GaussianSpec):
        return spec.mean, spec.mean, spec.sigma
    return -spec.separation, spec.separation, spec.sigma


def auto_grid(
    specs: Iterable[StateSpec],
    n_points: int = DEFAULT_GRID_POINTS,
    span_sigmas: float = DEFAULT_SPAN_SIGMAS,
) -> Grid:
    """Grid covering every spec's centers plus span_sigmas of the widest state."""
    specs = list(specs)
    if not specs:
        raise InvalidParameterError("auto_grid needs at least one state spec")
    los, his, sigmas = zip(*(_extent(s) for s in specs))
    pad = span_sigmas * max(sigmas)
    return Grid(min(los) - pad, max(his) + pad, n_points)


@dataclass(frozen=True)
class GridPolicy:
    """How grids are sized when the caller does not supply one.

    halfspan, when set, overrides the sigma-based span and centers the grid
    on the midpoint of the states' centers.
    """

    n_points: int = DEFAULT_GRID_POINTS
    span_sigmas: float = DEFAULT_SPAN_SIGMAS
    halfspan: float | None = None

    def grid_for(self, specs: Iterable[StateSpec]) -> Grid:
        specs = list(specs)
        if self.halfspan is None:
            return auto_grid(specs, self.n_points, self.span_sigmas)
        if not specs:
            raise InvalidParameterError("grid policy needs at least one state spec")
        los, his, _ = zip(*(_extent(s) for s in specs))
        center = 0.5 * (min(los) + max(his))
        return Grid(center - self.halfspan, center + self.halfspan, self.n_points)


def parse_state_spec(text: str) -> StateSpec:
    """Parse 'gaussian:<mean>,<variance>' or 'cat:<separation>,<variance>'.

    Decimal fields go through float(), which rounds the literal exactly once.
    """
    kind, colon, rest = text.partition(":")
    parts = rest.split(",") if colon else []
    if len(parts) != 2:
        raise InvalidParameterError(
            f"bad state spec {text!r}: expected gaussian:<mean>,<variance> "
            "or cat:<separation>,<variance>"
        )
    try:
        first, second = float(parts[0]), float(parts[1])
    except ValueError:
        raise InvalidParameterError(f"bad numeric field in state spec {text!r}") from None
    if kind == "gaussian":
        return GaussianSpec(mean=first, variance=second)
    if kind == "cat":
        return CatSpec(separation=first, component_variance=second)
    raise InvalidParameterError(f"unknown state kind {kind!r} in {text!r}")


def amplitude_interpolator(wf: WaveFunction) -> Callable[[np.ndarray], np.ndarray]:
    """Cubic-spline evaluator for the amplitudes, zero outside the grid.

    The evaluator is cached on the wavefunction (safe: amplitudes are
    immutable), so repeated conditioning against the same state is cheap.
    """
    cached = wf.__dict__.get("_cached_interpolator")
    if cached is not None:
        return cached
    spline = CubicSpline(wf.grid.points, wf.amplitudes)
    lo, hi = wf.grid.x_min, wf.grid.x_max

    def evaluate(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        inside = (x >= lo) & (x <= hi)
        vals = spline(np.clip(x, lo, hi))
        return np.where(inside, vals, 0.0)

    wf.__dict__["_cached_interpolator"] = evaluate
    return evaluate
