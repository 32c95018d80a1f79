import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from metascope.coding import BeamSpec, compensation_phases, synthesize
from metascope.core import ArrayGeometry, CodingMatrix, Direction, DomainError, FrequencySpec, MetaAtomResponse
from metascope.field import (
    FarFieldPattern,
    FeedModel,
    NearFieldPlane,
    angular_separation,
    aperture_far_field,
    aperture_power,
    default_grid,
    directivity_gain,
    far_field,
    far_field_csv,
    illuminate,
    intensity_ring_theta,
    main_lobe_correlation,
    mode_spectrum_csv,
    near_field_csv,
    nf_to_ff,
    oam_mode_spectrum,
    phase_winding,
    read_far_field_csv,
    sample_near_field,
    sidelobe_level,
    winding_number,
)


def deg(x):
    return math.degrees(x)


@pytest.fixture(scope="module")
def broadside(geom, freq, response, feed):
    coding = synthesize(geom, freq, BeamSpec.pencil(Direction(0.0, 0.0)))
    return coding, far_field(geom, freq, coding, response, feed)


# feed


def test_feed_exponent_and_power():
    f = FeedModel(10.0)
    assert f.q == pytest.approx(2.0)
    # numerical integral of |pattern|^2 over the forward hemisphere
    val, _ = integrate.quad(lambda a: f.pattern(math.cos(a)) ** 2 * math.sin(a), 0, math.pi / 2)
    assert 2 * math.pi * val == pytest.approx(f.total_power, rel=1e-10)
    assert f.total_power == pytest.approx(4 * math.pi)


def test_feed_pattern_peaks_at_boresight():
    f = FeedModel(10.0)
    ca = np.linspace(-1, 1, 101)
    assert np.argmax(f.pattern(ca)) == 100
    assert f.pattern(1.0) == pytest.approx(math.sqrt(10))


def test_feed_rejects_low_gain_and_rear_position(geom):
    with pytest.raises(DomainError):
        FeedModel(3.0)
    with pytest.raises(DomainError):
        FeedModel(position=(0.0, 0.0, -0.3)).resolve_position(geom)


def test_illuminate_center_of_odd_grid(freq, feed):
    g = ArrayGeometry(21, 21, 0.05, 0.364)
    a = illuminate(g, freq, feed)
    assert abs(a[10, 10]) == pytest.approx(math.sqrt(10) / 0.364, rel=1e-12)


def test_illuminate_phase(geom, freq, feed):
    a = illuminate(geom, freq, feed)
    L = geom.feed_distances()
    d = np.angle(a * np.exp(1j * freq.wavenumber * L))
    assert_allclose(d, 0.0, atol=1e-9)


def test_illuminate_edge_to_center_ratio(geom, freq, feed):
    # scalar oracle: sqrt(G) (F/L)^2 / L at elements (1, 10) and (10, 10)
    F = 0.364

    def mag(x, y):
        L = math.sqrt(x * x + y * y + F * F)
        return math.sqrt(10) * (F / L) ** 2 / L

    expected = mag(-0.475, -0.025) / mag(-0.025, -0.025)
    a = np.abs(illuminate(geom, freq, feed))
    assert a[0, 9] / a[9, 9] == pytest.approx(expected, rel=1e-12)


# far field


def test_single_element_isotropic_is_constant(freq):
    g = ArrayGeometry(1, 1, 0.05, 0.3)
    p = far_field(g, freq, CodingMatrix(np.zeros((1, 1), dtype=int)), MetaAtomResponse.ideal(), FeedModel(), element_pattern="isotropic")
    mag = np.abs(p.field)
    assert_allclose(mag, mag[0, 0], rtol=1e-12)


def test_far_field_dimension_mismatch(geom, freq, response, feed):
    with pytest.raises(ValueError):
        far_field(geom, freq, CodingMatrix(np.zeros((4, 4), dtype=int)), response, feed)
    with pytest.raises(ValueError):
        aperture_far_field(geom, freq, np.ones((20, 20)), theta=[], phi=[0.0])


def test_broadside_peak(broadside):
    _, p = broadside
    theta, _ = p.peak_direction()
    assert deg(theta) <= 1.5


@pytest.mark.parametrize("steer", [45.0, -30.0])
def test_steered_peak(geom, freq, response, feed, steer):
    coding = synthesize(geom, freq, BeamSpec.pencil(Direction.from_signed(steer, 0.0)))
    p = far_field(geom, freq, coding, response, feed)
    sep = angular_separation(p.peak_direction(), (math.radians(abs(steer)), 0.0 if steer > 0 else math.pi))
    assert deg(sep) <= 2.0
    assert sidelobe_level(p) > -40


def test_linearity_in_response(geom, freq, response, feed):
    coding = synthesize(geom, freq, BeamSpec.oam(1))
    c = 0.7 * np.exp(0.4j)
    scaled = MetaAtomResponse(response.freq, c * response.gamma0, c * response.gamma1)
    theta, phi = default_grid(1.0, 4.0)
    a = far_field(geom, freq, coding, response, feed, theta, phi)
    b = far_field(geom, freq, coding, scaled, feed, theta, phi)
    assert_allclose(b.field, c * a.field, rtol=1e-9, atol=1e-12 * np.abs(a.field).max())


def test_mirror_coding_mirrors_phi(geom, freq, response, feed):
    coding = synthesize(geom, freq, BeamSpec.pencil(Direction.from_degrees(25, 40)))
    mirrored = CodingMatrix(coding.bits[:, ::-1])
    theta, phi = default_grid(1.0, 2.0)
    a = far_field(geom, freq, coding, response, feed, theta, phi)
    b = far_field(geom, freq, mirrored, response, feed, theta, phi)
    neg = (-np.arange(phi.size)) % phi.size
    assert_allclose(b.field, a.field[:, neg], rtol=1e-9, atol=1e-9 * np.abs(a.field).max())


# directivity and gain


def test_uniform_aperture_directivity(geom, freq):
    p = aperture_far_field(geom, freq, np.ones(geom.shape, dtype=complex))
    analytic = 10 * math.log10(4 * math.pi * (20 * 0.05) ** 2 / freq.wavelength**2)
    assert directivity_gain(p).directivity_dbi == pytest.approx(analytic, abs=0.5)


def test_one_bit_penalty(geom, freq, ideal, feed):
    steer = BeamSpec.pencil(Direction(0.0, 0.0))
    a = illuminate(geom, freq, feed)
    cont = aperture_far_field(geom, freq, a * np.exp(1j * compensation_phases(geom, freq, steer)), reference_power=feed.total_power)
    onebit = far_field(geom, freq, synthesize(geom, freq, steer), ideal, feed)
    penalty = directivity_gain(cont).gain_dbi - directivity_gain(onebit).gain_dbi
    assert 3.0 <= penalty <= 4.0


def test_gain_requires_full_hemisphere(broadside):
    _, p = broadside
    half = FarFieldPattern(p.theta[:200], p.phi, p.field[:200], p.frequency)
    with pytest.raises(DomainError):
        directivity_gain(half)


def test_gain_rejects_coarse_grid(geom, freq, response, feed, broadside):
    coding, _ = broadside
    theta, phi = default_grid(15.0, 30.0)
    with pytest.raises(DomainError):
        directivity_gain(far_field(geom, freq, coding, response, feed, theta, phi))


def test_gain_without_reference_power(geom, freq):
    p = aperture_far_field(geom, freq, np.ones(geom.shape, dtype=complex))
    assert directivity_gain(p).gain_dbi is None


# sidelobes


def test_two_element_has_no_sidelobe(freq):
    g = ArrayGeometry(2, 1, freq.wavelength / 2, 0.3)
    p = aperture_far_field(g, freq, np.ones((2, 1)), *default_grid(0.5, 2.0))
    assert sidelobe_level(p) == float("-inf")


def test_broadside_sidelobe_level(broadside):
    _, p = broadside
    assert sidelobe_level(p) < -10.0


def test_sidelobes_grow_with_scan(geom, freq, response, feed, broadside):
    _, p0 = broadside
    coding = synthesize(geom, freq, BeamSpec.pencil(Direction.from_degrees(60, 0)))
    p60 = far_field(geom, freq, coding, response, feed)
    assert sidelobe_level(p60) > sidelobe_level(p0)


# OAM mode spectrum


def ring_pattern(values, n_theta=5):
    theta = np.radians(np.linspace(0, 90, n_theta))
    phi = np.arange(values.size) * 2 * np.pi / values.size
    return FarFieldPattern(theta, phi, np.tile(values, (n_theta, 1)), 3e9)


def test_pure_harmonic_mode():
    phi = np.arange(360) * 2 * np.pi / 360
    s = oam_mode_spectrum(ring_pattern(np.exp(2j * phi)), math.radians(45), 3)
    assert s.dominant() == 2
    assert s.fraction(2) == pytest.approx(1.0, abs=1e-12)
    assert s.captured == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(0, 5))
def test_mode_fractions_sum_to_one(seed, L):
    z = np.random.default_rng(seed).normal(size=(2, 64))
    s = oam_mode_spectrum(ring_pattern(z[0] + 1j * z[1]), 0.0, L)
    assert np.all(s.fractions >= 0)
    assert s.fractions.sum() == pytest.approx(1.0, abs=1e-9)
    assert list(s.modes) == list(range(-L, L + 1))


def test_mode_spectrum_errors():
    p = ring_pattern(np.ones(10))
    with pytest.raises(DomainError):
        oam_mode_spectrum(p, 0.0, 3)  # needs 14 samples
    q = ring_pattern(np.ones(64))
    with pytest.raises(DomainError):
        oam_mode_spectrum(FarFieldPattern(q.theta[:2], q.phi, q.field[:2], 3e9), math.radians(60), 2)


@pytest.mark.parametrize("ell", [0, 1, -2])
def test_simulated_mode_dominance(geom, freq, response, feed, ell):
    coding = synthesize(geom, freq, BeamSpec.oam(ell))
    p = far_field(geom, freq, coding, response, feed)
    s = oam_mode_spectrum(p, intensity_ring_theta(p), 5)
    assert s.dominant() == ell
    assert s.fraction(ell) > 0.5


# near field


def test_single_element_near_field_law(freq):
    g = ArrayGeometry(1, 1, 0.05, 0.3)
    coding = CodingMatrix(np.zeros((1, 1), dtype=int))
    ideal, feed = MetaAtomResponse.ideal(), FeedModel()
    a = illuminate(g, freq, feed)[0, 0]
    scale = freq.wavenumber * g.cell_area / (2 * math.pi)
    lam = freq.wavelength
    xs = np.array([-0.4, 0.0, 0.4]) * lam
    vals = {}
    for d in (1.0, 2.0):
        nf = sample_near_field(g, freq, coding, ideal, feed, z=d, x=xs, y=xs)
        e = nf.field[1, 1] / (scale * a)
        assert abs(e) == pytest.approx(1.0 / d, rel=1e-12)
        assert np.angle(e * np.exp(1j * freq.wavenumber * d)) == pytest.approx(0.0, abs=1e-9)
        vals[d] = abs(nf.field[1, 1])
    assert vals[2.0] == pytest.approx(vals[1.0] / 2, rel=1e-12)


def test_near_field_errors(geom, freq, response, feed):
    coding = synthesize(geom, freq, BeamSpec.oam(0))
    with pytest.raises(DomainError):
        sample_near_field(geom, freq, coding, response, feed, z=-0.1)
    with pytest.raises(DomainError):
        sample_near_field(geom, freq, coding, response, feed, z=0.0)
    coarse = np.arange(-5, 6) * 0.6 * freq.wavelength
    with pytest.raises(DomainError):
        sample_near_field(geom, freq, coding, response, feed, x=coarse, y=coarse)


def test_near_field_plane_validation():
    with pytest.raises(ValueError):
        NearFieldPlane(0.1, [0.0, 0.01], [0.0, 0.01, 0.02], np.zeros((2, 2)), 3e9)
    with pytest.raises(ValueError):
        NearFieldPlane(0.1, [0.0, 0.01, 0.03], [0.0, 0.01], np.zeros((2, 3)), 3e9)


@pytest.mark.parametrize("ell", [1, 2, 3, -2])
def test_near_field_winding(geom, freq, response, feed, ell):
    coding = synthesize(geom, freq, BeamSpec.oam(ell))
    nf = sample_near_field(geom, freq, coding, response, feed)
    assert winding_number(nf) == ell


def test_phase_winding_synthetic():
    x = y = np.linspace(-1, 1, 41)
    X, Y = np.meshgrid(x, y)
    plane = NearFieldPlane(0.1, x, y, (X + 1j * Y) ** 2, 1e8)
    assert phase_winding(plane, 0.5) == pytest.approx(2.0, abs=1e-9)
    assert winding_number(plane, 0.5) == 2


# NF to FF


def test_nf_to_ff_plane_wave(freq):
    lam, k = freq.wavelength, freq.wavenumber
    t0, p0 = math.radians(20), math.radians(50)
    kx, ky = k * math.sin(t0) * math.cos(p0), k * math.sin(t0) * math.sin(p0)
    x = y = np.arange(-40, 41) * 0.45 * lam
    X, Y = np.meshgrid(x, y)
    plane = NearFieldPlane(lam, x, y, np.exp(-1j * (kx * X + ky * Y)), freq.carrier)
    ff = nf_to_ff(plane, *default_grid(0.25, 1.0))
    assert deg(angular_separation(ff.peak_direction(), (t0, p0))) < 1.0


def test_nf_to_ff_rejects_undersampling(freq):
    x = np.arange(5) * 0.6 * freq.wavelength
    plane = NearFieldPlane(0.1, x, x, np.ones((5, 5)), freq.carrier)
    with pytest.raises(DomainError):
        nf_to_ff(plane)


@pytest.mark.parametrize("steer, tol", [(0.0, 1.0), (30.0, 1.5), (45.0, 1.5)])
def test_cross_method_pencil(geom, freq, response, feed, steer, tol):
    coding = synthesize(geom, freq, BeamSpec.pencil(Direction.from_degrees(steer, 0)))
    direct = far_field(geom, freq, coding, response, feed)
    via = nf_to_ff(sample_near_field(geom, freq, coding, response, feed))
    assert deg(angular_separation(direct.peak_direction(), via.peak_direction())) <= tol
    assert main_lobe_correlation(direct, via) > 0.95


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_cross_method_oam(geom, freq, response, feed, ell):
    # the vortex peak wanders around a near-uniform ring, so compare ring polar angle
    coding = synthesize(geom, freq, BeamSpec.oam(ell))
    direct = far_field(geom, freq, coding, response, feed)
    via = nf_to_ff(sample_near_field(geom, freq, coding, response, feed))
    assert abs(deg(intensity_ring_theta(direct) - intensity_ring_theta(via))) <= 1.5
    assert main_lobe_correlation(direct, via) > 0.95


# energy


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_energy_sanity_random_codes(geom, freq, response, feed, seed):
    coding = CodingMatrix(np.random.default_rng(seed).integers(0, 2, geom.shape))
    p = far_field(geom, freq, coding, response, feed)
    assert p.radiated_power() <= 1.01 * aperture_power(geom, illuminate(geom, freq, feed))


def test_energy_sanity_focused_beams(geom, freq, ideal, feed):
    a = illuminate(geom, freq, feed)
    limit = 1.01 * aperture_power(geom, a)
    for spec in (BeamSpec.pencil(Direction(0.0, 0.0)), BeamSpec.pencil(Direction.from_degrees(50, 10)), BeamSpec.oam(2)):
        assert far_field(geom, freq, synthesize(geom, freq, spec), ideal, feed).radiated_power() <= limit
        cont = aperture_far_field(geom, freq, a * np.exp(1j * compensation_phases(geom, freq, spec)))
        assert cont.radiated_power() <= limit


# exports


def test_far_field_csv(tmp_path, geom, freq, response, feed, broadside):
    coding, _ = broadside
    theta, phi = default_grid(5.0, 30.0)
    p = far_field(geom, freq, coding, response, feed, theta, phi)
    text = far_field_csv(p)
    lines = text.splitlines()
    assert lines[0] == "theta_deg,phi_deg,re,im,mag_db"
    assert len(lines) == 1 + theta.size * phi.size
    assert lines[1].startswith("0,0,") and lines[2].startswith("0,30,") and lines[13].startswith("5,0,")
    db = np.array([float(r.split(",")[4]) for r in lines[1:]])
    assert db.max() == 0.0
    path = tmp_path / "ff.csv"
    path.write_text(text)
    back = read_far_field_csv(path)
    assert_allclose(back.field, p.field, rtol=1e-9)
    assert text == far_field_csv(p)


def test_near_field_and_mode_csv(geom, freq, response, feed):
    coding = synthesize(geom, freq, BeamSpec.oam(1))
    x = np.array([-0.02, 0.0, 0.02])
    y = np.array([-0.01, 0.01])
    nf = sample_near_field(geom, freq, coding, response, feed, x=x, y=y)
    lines = near_field_csv(nf).splitlines()
    assert lines[0] == "x_m,y_m,re,im"
    assert [tuple(map(float, r.split(",")[:2])) for r in lines[1:]] == [(xv, yv) for yv in y for xv in x]
    p = far_field(geom, freq, coding, response, feed, *default_grid(1.0, 4.0))
    s = oam_mode_spectrum(p, intensity_ring_theta(p), 2)
    mlines = mode_spectrum_csv(s).splitlines()
    assert mlines[0] == "mode,fraction" and len(mlines) == 6
