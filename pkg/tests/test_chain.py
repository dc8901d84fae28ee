"""Measurement-chain operations against analytic and cross-route oracles."""

import math

import numpy as np
import pytest
from scipy.interpolate import CubicSpline
from scipy.stats import norm

import qndsim as q
from qndsim.errors import (
    DegeneratePhaseError,
    GridTooNarrowError,
    InvalidParameterError,
    NullOutcomeError,
)

from helpers import gaussian_amplitude, gaussian_density, l1_distance, l2_distance

VACUUM = q.GaussianSpec(0.0, 0.25)
QUARTER_PI = math.pi / 4


def build(spec, grid):
    return q.build_gaussian(spec, grid)


def test_chain_config_derived_quantities():
    cfg = q.ChainConfig(phi=0.6, probe_spec=VACUUM, seed=3)
    assert cfg.transmittivity == pytest.approx(math.cos(0.6) ** 2)
    assert cfg.output_squeeze_factor == pytest.approx(math.cos(0.6))
    with pytest.raises(DegeneratePhaseError):
        q.ChainConfig(phi=math.pi / 2, probe_spec=VACUUM)
    with pytest.raises(InvalidParameterError):
        q.ChainConfig(phi=0.6, probe_spec=VACUUM, seed=-1)


# --- beam splitter -----------------------------------------------------------


def test_beam_splitter_identity_phase_equal_pair():
    # an equal-variance zero-mean pair is rotation invariant, so the tiny
    # phase must leave the product exactly (up to interpolation)
    spec = q.GaussianSpec(0.0, 0.17)
    grid = q.auto_grid([spec], n_points=512)
    pair = build(spec, grid)
    joint = q.beam_splitter_transform(pair, pair, 1e-4)
    expected = gaussian_amplitude(joint.grid1.points, 0.0, 0.17)[:, None] * gaussian_amplitude(
        joint.grid2.points, 0.0, 0.17
    )[None, :]
    dev = joint.amplitudes - expected
    l2 = math.sqrt(float(joint.grid1.weights @ (np.abs(dev) ** 2 @ joint.grid2.weights)))
    assert l2 < 1e-6
    assert abs(joint.norm() - 1.0) < 1e-6


def test_beam_splitter_identity_phase_marginals():
    specs = [q.GaussianSpec(0.0, 0.1), q.GaussianSpec(0.0, 0.5)]
    grid = q.auto_grid(specs, n_points=768)
    joint = q.beam_splitter_transform(build(specs[0], grid), build(specs[1], grid), 1e-4)
    m1, m2 = joint.marginal(1), joint.marginal(2)
    assert l1_distance(m1.grid, m1.density, gaussian_density(m1.grid.points, 0.0, 0.1)) < 1e-6
    assert l1_distance(m2.grid, m2.density, gaussian_density(m2.grid.points, 0.0, 0.5)) < 1e-6


def test_beam_splitter_swap_phase():
    specs = [q.GaussianSpec(0.0, 0.1), q.GaussianSpec(0.0, 0.5)]
    grid = q.auto_grid(specs, n_points=768)
    joint = q.beam_splitter_transform(
        build(specs[0], grid), build(specs[1], grid), math.pi / 2 - 1e-4
    )
    m1 = joint.marginal(1)
    assert l1_distance(m1.grid, m1.density, gaussian_density(m1.grid.points, 0.0, 0.5)) < 1e-5


def test_beam_splitter_vacuum_pair_invariant():
    grid = q.auto_grid([VACUUM], n_points=512)
    vac = build(VACUUM, grid)
    joint = q.beam_splitter_transform(vac, vac, QUARTER_PI)
    expected = gaussian_amplitude(joint.grid1.points, 0.0, 0.25)[:, None] * gaussian_amplitude(
        joint.grid2.points, 0.0, 0.25
    )[None, :]
    assert np.abs(joint.amplitudes - expected).max() < 1e-6


def test_beam_splitter_preserves_norm():
    specs = [q.GaussianSpec(0.2, 0.15), q.GaussianSpec(-0.1, 0.6)]
    grid = q.auto_grid(specs, n_points=768)
    signal, probe = build(specs[0], grid), build(specs[1], grid)
    for phi in (0.3, QUARTER_PI, 1.2):
        joint = q.beam_splitter_transform(signal, probe, phi)
        assert abs(joint.norm() - 1.0) < 1e-6


def test_beam_splitter_rejects_narrow_output_grid():
    grid = q.auto_grid([VACUUM], n_points=256)
    vac = build(VACUUM, grid)
    with pytest.raises(GridTooNarrowError):
        q.beam_splitter_transform(
            vac, vac, QUARTER_PI, out_grid1=q.Grid(-0.5, 0.5, 64), out_grid2=q.Grid(-9, 9, 64)
        )


# --- homodyne ----------------------------------------------------------------


def test_homodyne_vacuum_probe_blurs_by_quarter_tan():
    # gaussian signal + vacuum probe at pi/4: outcome variance 1/4 + 1/4 = 1/2
    grid = q.auto_grid([VACUUM])
    p = q.homodyne_distribution(build(VACUUM, grid), build(VACUUM, grid), QUARTER_PI)
    assert abs(p.variance() - 0.5) < 1e-6
    assert abs(p.total() - 1.0) < 1e-8


def test_homodyne_matches_joint_marginal():
    # cross-route: direct quadrature vs the mode-2 marginal of the joint
    # state mapped through x0 = -X / sin(phi) with Jacobian sin(phi)
    specs = [q.GaussianSpec(0.0, 0.25), q.GaussianSpec(0.0, 0.4)]
    grid = q.auto_grid(specs, n_points=1024)
    signal, probe = build(specs[0], grid), build(specs[1], grid)
    phi = 0.9
    p = q.homodyne_distribution(signal, probe, phi)
    m2 = q.beam_splitter_transform(signal, probe, phi).marginal(2)
    spline = CubicSpline(m2.grid.points, m2.density)
    mapped = math.sin(phi) * spline(-p.grid.points * math.sin(phi))
    assert l1_distance(p.grid, p.density, mapped) < 1e-4


def test_homodyne_vacuum_probe_convolution_off_balance():
    # vacuum probe at phi != pi/4: blur variance is 1 / (4 tan^2 phi)
    phi = 0.6
    grid = q.auto_grid([VACUUM])
    p = q.homodyne_distribution(build(VACUUM, grid), build(VACUUM, grid), phi)
    blur = 1.0 / (4.0 * math.tan(phi) ** 2)
    oracle = gaussian_density(p.grid.points, 0.0, 0.25 + blur)
    assert l1_distance(p.grid, p.density, oracle) < 1e-6


def test_homodyne_cat_signal_analytic_convolution():
    # |cat|^2 is a three-Gaussian mixture (two peaks plus the overlap term),
    # so the vacuum-probe outcome density is the same mixture blurred
    sep, v = 2.0, 0.25
    cat_spec = q.CatSpec(sep, v)
    cat = q.build_cat(sep, v, q.auto_grid([cat_spec]))
    probe = build(VACUUM, q.auto_grid([VACUUM]))
    p = q.homodyne_distribution(cat, probe, QUARTER_PI)
    blur = 0.25  # vacuum probe, tan(pi/4) = 1
    cross = 2.0 * math.exp(-(sep**2) / v)
    mix = (
        gaussian_density(p.grid.points, sep, v + blur)
        + gaussian_density(p.grid.points, -sep, v + blur)
        + cross * gaussian_density(p.grid.points, 0.0, v + blur)
    ) / (2.0 + cross)
    assert l1_distance(p.grid, p.density, mix) < 1e-6


def test_homodyne_anti_squeezed_flattens():
    probe_var = 2500.0  # filter variance 1e4 * sigma_s^2 at tan(phi) = 1
    probe_spec = q.GaussianSpec(0.0, probe_var)
    p = q.homodyne_distribution(
        build(VACUUM, q.auto_grid([VACUUM])),
        build(probe_spec, q.auto_grid([probe_spec])),
        QUARTER_PI,
    )
    assert abs(p.variance() - probe_var) / probe_var < 0.01
    assert abs(p.mean()) < 0.1


def test_homodyne_rejects_narrow_outcome_grid():
    grid = q.auto_grid([VACUUM])
    vac = build(VACUUM, grid)
    with pytest.raises(GridTooNarrowError):
        q.homodyne_distribution(vac, vac, QUARTER_PI, out_grid=q.Grid(-1.0, 1.0, 256))


def test_homodyne_degenerate_phase():
    grid = q.auto_grid([VACUUM])
    vac = build(VACUUM, grid)
    for phi in (0.0, math.pi / 2, 1.6, -0.3):
        with pytest.raises(DegeneratePhaseError):
            q.homodyne_distribution(vac, vac, phi)


# --- conditioning ------------------------------------------------------------


def test_conditional_raw_matches_joint_slice():
    specs = [q.GaussianSpec(0.0, 0.25), q.GaussianSpec(0.0, 0.4)]
    grid = q.auto_grid(specs, n_points=1024)
    signal, probe = build(specs[0], grid), build(specs[1], grid)
    phi, x0 = 0.9, 0.7
    joint = q.beam_splitter_transform(signal, probe, phi)
    sliced = joint.conditioned_on_mode2(-x0 * math.sin(phi))
    raw = q.conditional_state_raw(signal, probe, phi, x0, out_grid=joint.grid1)
    assert l2_distance(sliced, raw) < 1e-5


def test_conditional_raw_vacuum_pair_at_origin():
    # at pi/4 with vacuum pair and x0 = 0 the product collapses to a
    # zero-mean gaussian of the same variance
    grid = q.auto_grid([VACUUM])
    vac = build(VACUUM, grid)
    raw = q.conditional_state_raw(vac, vac, QUARTER_PI, 0.0)
    assert abs(raw.norm() - 1.0) < 1e-9
    assert abs(raw.mean()) < 1e-9
    assert abs(raw.variance() - 0.25) < 1e-9


def test_conditional_raw_null_outcome():
    squeezed = q.GaussianSpec(0.0, 2.5e-5)
    signal = build(VACUUM, q.auto_grid([VACUUM]))
    probe = build(squeezed, q.auto_grid([squeezed]))
    with pytest.raises(NullOutcomeError):
        q.conditional_state_raw(signal, probe, QUARTER_PI, 10.0)


# --- feedback displacement ---------------------------------------------------


def test_displace_zero_is_identity():
    grid = q.auto_grid([VACUUM])
    vac = build(VACUUM, grid)
    out = q.feedback_displace(vac, 0.0, 0.8)
    assert np.allclose(out.amplitudes, vac.amplitudes, atol=1e-12)


def test_displace_shifts_mean_by_x0_sin_tan():
    spec = q.GaussianSpec(-0.4, 0.3)
    wf = build(spec, q.auto_grid([spec]))
    phi, x0 = 0.8, 0.9
    shift = x0 * math.sin(phi) * math.tan(phi)
    out = q.feedback_displace(wf, x0, phi)
    assert abs(out.mean() - (-0.4 + shift)) < 1e-6
    assert abs(out.norm() - 1.0) < 1e-9


def test_displace_rejects_support_leaving_grid():
    spec = q.GaussianSpec(0.0, 0.25)
    wf = build(spec, q.Grid(-4.5, 4.5, 512))
    with pytest.raises(GridTooNarrowError):
        q.feedback_displace(wf, 4.0, 1.2)


def test_displaced_raw_matches_direct_pattern():
    # displacing the raw conditional state must land on the pattern
    # psi_s(y cos) psi_p(y sin - x0 tan), here evaluated from the analytic
    # gaussian forms rather than through the library interpolators
    sig_spec, probe_spec = q.GaussianSpec(0.0, 0.25), q.GaussianSpec(0.0, 0.3)
    grid = q.Grid(-15.0, 15.0, 4096)
    signal, probe = build(sig_spec, grid), build(probe_spec, grid)
    phi, x0 = 0.8, 0.9
    staged = q.feedback_displace(q.conditional_state_raw(signal, probe, phi, x0), x0, phi)
    y = grid.points
    pattern = gaussian_amplitude(y * math.cos(phi), 0.0, 0.25) * gaussian_amplitude(
        y * math.sin(phi) - x0 * math.tan(phi), 0.0, 0.3
    )
    expected = q.WaveFunction.normalized(grid, pattern)
    assert l2_distance(staged, expected) < 1e-6


# --- output squeezing --------------------------------------------------------


def test_squeeze_near_zero_phase_is_identity():
    grid = q.auto_grid([VACUUM])
    vac = build(VACUUM, grid)
    out = q.output_squeeze(vac, 1e-4)
    assert l2_distance(out, vac) < 1e-6


def test_squeeze_scales_variance_by_cos_squared():
    spec = q.GaussianSpec(0.0, 0.3)
    wf = build(spec, q.auto_grid([spec]))
    phi = 1.1
    out = q.output_squeeze(wf, phi)
    assert abs(out.variance() - 0.3 * math.cos(phi) ** 2) < 1e-6


def test_pipeline_equals_closed_form_single_combo():
    grid = q.Grid(-20.0, 20.0, 8192)
    signal = build(q.GaussianSpec(0.0, 0.25), grid)
    probe = build(q.GaussianSpec(0.0, 0.4), grid)
    phi, x0 = 0.9, -0.8
    staged = q.output_squeeze(
        q.feedback_displace(q.conditional_state_raw(signal, probe, phi, x0), x0, phi), phi
    )
    assert l2_distance(staged, q.conditional_output(signal, probe, phi, x0)) < 1e-6


# --- conditional output (closed form) ----------------------------------------


def test_conditional_output_gaussian_moments():
    sig_var, probe_var, phi, x0 = 0.25, 0.4, 0.9, 0.7
    specs = [q.GaussianSpec(0.0, sig_var), q.GaussianSpec(0.0, probe_var)]
    grid = q.auto_grid(specs)
    out = q.conditional_output(build(specs[0], grid), build(specs[1], grid), phi, x0)
    w = probe_var / math.tan(phi) ** 2
    assert abs(out.mean() - x0 * sig_var / (sig_var + w)) < 1e-6
    assert abs(out.variance() - sig_var * w / (sig_var + w)) < 1e-6
    assert abs(out.norm() - 1.0) < 1e-9


def test_conditional_output_projective_invariance():
    grid = q.auto_grid([VACUUM])
    signal = build(VACUUM, grid)
    probe = build(VACUUM, grid)
    reference = q.conditional_output(signal, probe, QUARTER_PI, 0.4)
    scaled_real = q.WaveFunction(grid, signal.amplitudes * 2.5)
    assert np.allclose(
        q.conditional_output(scaled_real, probe, QUARTER_PI, 0.4).amplitudes,
        reference.amplitudes,
        atol=1e-9,
    )
    scaled_complex = q.WaveFunction(grid, signal.amplitudes * (0.3 + 0.4j))
    out = q.conditional_output(scaled_complex, probe, QUARTER_PI, 0.4)
    assert abs(abs(q.overlap(out, reference)) - 1.0) < 1e-9


def test_conditional_output_null_outcome():
    squeezed = q.GaussianSpec(0.0, 2.5e-5)
    signal = build(VACUUM, q.auto_grid([VACUUM]))
    probe = build(squeezed, q.auto_grid([squeezed]))
    with pytest.raises(NullOutcomeError):
        q.conditional_output(signal, probe, QUARTER_PI, 10.0)


def test_outcome_record_maps_reading():
    grid = q.auto_grid([VACUUM])
    p = q.homodyne_distribution(build(VACUUM, grid), build(VACUUM, grid), QUARTER_PI)
    event = q.make_outcome(p, 0.5, QUARTER_PI)
    assert event.raw_X == -0.5 * math.sin(QUARTER_PI)
    assert event.density_at_x0 == pytest.approx(gaussian_density(0.5, 0.0, 0.5), rel=1e-4)


# --- sampling ----------------------------------------------------------------


@pytest.fixture(scope="module")
def vacuum_homodyne():
    grid = q.auto_grid([VACUUM])
    vac = q.build_gaussian(VACUUM, grid)
    return q.homodyne_distribution(vac, vac, QUARTER_PI)


def test_sampling_is_deterministic(vacuum_homodyne):
    a = q.sample_outcomes(vacuum_homodyne, 5000, seed=123)
    b = q.sample_outcomes(vacuum_homodyne, 5000, seed=123)
    assert np.array_equal(a, b)
    c = q.sample_outcomes(vacuum_homodyne, 5000, seed=124)
    assert not np.array_equal(a, c)


def test_sampling_passes_ks_against_exact_cdf(vacuum_homodyne):
    n = 100_000
    draws = np.sort(q.sample_outcomes(vacuum_homodyne, n, seed=7))
    cdf = norm.cdf(draws, scale=math.sqrt(0.5))
    ranks = np.arange(1, n + 1) / n
    ks = max(np.abs(cdf - ranks).max(), np.abs(cdf - (ranks - 1.0 / n)).max())
    assert ks < 1.63 / math.sqrt(n)


def test_sample_mean_within_four_sigma(vacuum_homodyne):
    n = 50_000
    draws = q.sample_outcomes(vacuum_homodyne, n, seed=11)
    assert abs(draws.mean() - vacuum_homodyne.mean()) < 4 * math.sqrt(0.5 / n)


def test_sampling_rejects_zero_count(vacuum_homodyne):
    with pytest.raises(InvalidParameterError):
        q.sample_outcomes(vacuum_homodyne, 0, seed=1)
