"""Scalar optimizers for the fidelity trade-off and phase tuning.

The sum F + G is not constant along the filter ratio x, so there is a
best operating point.  Closed-form Gaussian fidelities make that a cheap
1-D search; non-Gaussian signals go through the numeric fidelities.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .chain import PHASE_MARGIN, check_phase
from .errors import (
    BracketError,
    DegeneratePhaseError,
    InvalidParameterError,
    NonFiniteObjectiveError,
    NoSignChangeError,
    QndSimError,
)
from .fidelity import (
    FidelityPair,
    distribution_fidelity,
    gaussian_distribution_fidelity,
    gaussian_state_fidelity,
    state_fidelity,
)
from .grids import DEFAULT_GRID_POINTS, GaussianSpec, WaveFunction, auto_grid, build_gaussian

GOLDEN_SECTION = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_BRACKET = (0.05, 20.0)
COARSE_SCAN_POINTS = 64
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class TradeOffReport:
    """Optimal operating point of the trade-off plus the equal-fidelity point."""

    x_m: float
    F_at_xm: float
    G_at_xm: float
    x_e: float
    F_at_xe: float
    evaluations: int
    tolerance: float


def trade_off(x: float) -> FidelityPair:
    """Closed-form (F, G) at filter ratio x."""
    return FidelityPair(
        F=gaussian_state_fidelity(x),
        G=gaussian_distribution_fidelity(x),
        x=float(x),
    )


def maximize_trade_off(
    objective: Callable[[float], float], lo: float, hi: float, tol: float
) -> tuple[float, float]:
    """Golden-section maximizer guarded by a coarse unimodality pre-scan.

    A 64-point scan locates the bracket (and warns if the objective shows
    more than one strict local maximum); golden-section then shrinks it
    below tol and the midpoint is returned with its objective value.
    """
    if not lo < hi:
        raise BracketError(f"invalid bracket [{lo}, {hi}]: need lo < hi")
    if not tol > 0:
        raise InvalidParameterError(f"tolerance must be positive, got {tol}")
    xs = np.linspace(lo, hi, COARSE_SCAN_POINTS)
    vals = np.array([objective(float(x)) for x in xs], dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        bad = float(xs[np.nonzero(~np.isfinite(vals))[0][0]])
        raise NonFiniteObjectiveError(f"objective is not finite at x={bad}")
    interior_max = (vals[1:-1] > vals[:-2]) & (vals[1:-1] > vals[2:])
    if int(interior_max.sum()) > 1:
        warnings.warn(
            "objective shows multiple local maxima on the coarse scan; "
            "golden section may return a local optimum",
            RuntimeWarning,
            stacklevel=2,
        )
    peak = int(np.argmax(vals))
    a = float(xs[max(peak - 1, 0)])
    b = float(xs[min(peak + 1, len(xs) - 1)])
    c = b - GOLDEN_SECTION * (b - a)
    d = a + GOLDEN_SECTION * (b - a)
    fc, fd = objective(c), objective(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN_SECTION * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN_SECTION * (b - a)
            fd = objective(d)
    x_star = 0.5 * (a + b)
    return x_star, float(objective(x_star))


def _bisect(fn: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo < 0.0) == (f_hi < 0.0):
        raise NoSignChangeError(
            f"no sign change on [{lo}, {hi}]: f(lo)={f_lo:.6g}, f(hi)={f_hi:.6g}"
        )
    a, b, f_a = lo, hi, f_lo
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (a + b)
        f_mid = fn(mid)
        if abs(f_mid) < tol:
            return mid
        if (f_a < 0.0) == (f_mid < 0.0):
            a, f_a = mid, f_mid
        else:
            b = mid
    return 0.5 * (a + b)


def equal_fidelity_point(lo: float, hi: float, tol: float) -> float:
    """Bisection root of the closed-form F - G, stopping at |F - G| < tol."""
    if not lo < hi:
        raise BracketError(f"invalid bracket [{lo}, {hi}]: need lo < hi")
    if not tol > 0:
        raise InvalidParameterError(f"tolerance must be positive, got {tol}")
    return _bisect(
        lambda x: gaussian_state_fidelity(x) - gaussian_distribution_fidelity(x), lo, hi, tol
    )


def tune_phase(sigma_s: float, sigma_p: float, x_target: float) -> float:
    """Phase realizing x_target = sigma_p / (sigma_s tan phi) for fixed widths."""
    if sigma_s <= 0 or sigma_p <= 0 or x_target <= 0:
        raise InvalidParameterError(
            f"sigma_s, sigma_p and x_target must be positive, got "
            f"({sigma_s}, {sigma_p}, {x_target})"
        )
    phi = math.atan(sigma_p / (sigma_s * x_target))
    if not (math.sin(phi) > PHASE_MARGIN and math.cos(phi) > PHASE_MARGIN):
        raise DegeneratePhaseError(
            f"tuned phase {phi} falls outside the usable open interval (0, pi/2)"
        )
    return phi


def numeric_trade_off_curve(
    signal: WaveFunction,
    probe_variance_list: Sequence[float],
    phi: float,
    n_outcomes: int = 1024,
    grid_points: int = DEFAULT_GRID_POINTS,
    x_values: Sequence[float] | None = None,
) -> list[FidelityPair]:
    """Numeric (F, G) for one signal across a list of probe variances.

    Points evaluate in input order; a failure at point i re-raises the
    underlying error with the index and variance attached.  x_values, when
    given, annotates each pair with its known filter ratio.
    """
    check_phase(phi)
    if x_values is not None and len(x_values) != len(probe_variance_list):
        raise InvalidParameterError("x_values must match probe_variance_list in length")
    pairs: list[FidelityPair] = []
    for i, variance in enumerate(probe_variance_list):
        try:
            spec = GaussianSpec(mean=0.0, variance=float(variance))
            probe = build_gaussian(spec, auto_grid([spec], n_points=grid_points))
            f_val = state_fidelity(signal, probe, phi, n_outcomes=n_outcomes)
            g_val = distribution_fidelity(signal, probe, phi, n_outcomes=n_outcomes)
        except QndSimError as err:
            raise type(err)(
                f"trade-off point {i} (probe variance {variance}): {err}"
            ) from err
        x = float(x_values[i]) if x_values is not None else None
        pairs.append(FidelityPair(F=f_val, G=g_val, x=x))
    return pairs


def gaussian_trade_off_report(
    lo: float = DEFAULT_BRACKET[0],
    hi: float = DEFAULT_BRACKET[1],
    tol: float = 1e-4,
) -> TradeOffReport:
    """Locate the F + G maximum and the F = G crossing of the closed forms."""
    evaluations = 0

    def objective(x: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return gaussian_state_fidelity(x) + gaussian_distribution_fidelity(x)

    x_m, _ = maximize_trade_off(objective, lo, hi, tol)

    def difference(x: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return gaussian_state_fidelity(x) - gaussian_distribution_fidelity(x)

    x_e = _bisect(difference, lo, hi, tol)
    return TradeOffReport(
        x_m=x_m,
        F_at_xm=gaussian_state_fidelity(x_m),
        G_at_xm=gaussian_distribution_fidelity(x_m),
        x_e=x_e,
        F_at_xe=gaussian_state_fidelity(x_e),
        evaluations=evaluations,
        tolerance=tol,
    )


def numeric_trade_off_report(
    signal: WaveFunction,
    phi: float,
    lo: float = 0.2,
    hi: float = 5.0,
    tol: float = 1e-3,
    n_outcomes: int = 512,
    grid_points: int = 1024,
) -> TradeOffReport:
    """Trade-off report driven by the numeric fidelities.

    The filter ratio x maps to a probe variance (x sigma_s tan phi)^2 using
    the signal's numeric standard deviation, so non-Gaussian signals work.
    """
    check_phase(phi)
    sigma_s = math.sqrt(signal.variance())
    t = math.tan(phi)
    evaluations = 0

    def pair_at(x: float) -> FidelityPair:
        nonlocal evaluations
        evaluations += 1
        spec = GaussianSpec(mean=0.0, variance=(x * sigma_s * t) ** 2)
        probe = build_gaussian(spec, auto_grid([spec], n_points=grid_points))
        return FidelityPair(
            F=state_fidelity(signal, probe, phi, n_outcomes=n_outcomes),
            G=distribution_fidelity(signal, probe, phi, n_outcomes=n_outcomes),
            x=x,
        )

    x_m, _ = maximize_trade_off(lambda x: pair_at(x).f_plus_g, lo, hi, tol)
    best = pair_at(x_m)
    x_e = _bisect(lambda x: (lambda p: p.F - p.G)(pair_at(x)), lo, hi, tol)
    crossing = pair_at(x_e)
    return TradeOffReport(
        x_m=x_m,
        F_at_xm=best.F,
        G_at_xm=best.G,
        x_e=x_e,
        F_at_xe=crossing.F,
        evaluations=evaluations,
        tolerance=tol,
    )
