"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import math
from pathlib import Path

import numpy as np
import pytest

from metascope.cli import main
from metascope.coding import BeamSpec, synthesize
from metascope.core import Direction, FrequencySpec, phase_difference_deg
from metascope.field import (
    angular_separation,
    default_grid,
    directivity_gain,
    far_field,
    intensity_ring_theta,
    main_lobe_correlation,
    nf_to_ff,
    oam_mode_spectrum,
    sample_near_field,
    winding_number,
)
from metascope.timemod import (
    ModulationPlan,
    default_plans,
    df_cell_geometry,
    df_experiment,
    fourier_coefficient,
)

from scipy.special import zeta

GAIN_TARGET_DBI = 25.36
SWEEP_HZ = [2.8e9, 2.9e9, 3.0e9, 3.1e9, 3.2e9]


@pytest.fixture(scope="module")
def grid():
    return default_grid(0.25, 1.0)


def test_criterion_01_meta_atom_table(response, verdict):
    band = (response.freq >= 2.72e9) & (response.freq <= 3.25e9)
    loss = np.concatenate([20 * np.log10(np.abs(g[band])) for g in (response.gamma0, response.gamma1)])
    dphi = phase_difference_deg(response)[band]
    ok = band.sum() > 0 and np.all(np.abs(loss) <= 0.6) and np.all((dphi >= 155) & (dphi <= 205))
    verdict(1, "meta-atom table", ok,
            f"{band.sum()} rows, max |loss| {np.abs(loss).max():.3f} dB, phase difference {dphi.min():.1f}..{dphi.max():.1f} deg")


def test_criterion_02_scan_accuracy(geom, freq, response, feed, grid, verdict):
    errs = []
    for preset in (0, 15, 30, 45, 60):
        coding = synthesize(geom, freq, BeamSpec.pencil(Direction.from_degrees(preset, 0)))
        pattern = far_field(geom, freq, coding, response, feed, *grid)
        errs.append(math.degrees(angular_separation(pattern.peak_direction(), (math.radians(preset), 0.0))))
    verdict(2, "beam-scanning accuracy", max(errs) <= 2.0,
            "peak offsets " + ", ".join(f"{e:.2f}" for e in errs) + " deg (limit 2)")


def broadside_gain(geom, f, response, feed, grid, coding):
    return directivity_gain(far_field(geom, FrequencySpec(f), coding, response, feed, *grid))


def test_criterion_03_broadside_gain(geom, freq, response, feed, grid, verdict):
    coding = synthesize(geom, freq, BeamSpec.pencil(Direction(0.0, 0.0)))
    g = broadside_gain(geom, freq.carrier, response, feed, grid, coding)
    verdict(3, "broadside gain", abs(g.gain_dbi - GAIN_TARGET_DBI) <= 2.0,
            f"realized gain {g.gain_dbi:.2f} dBi vs {GAIN_TARGET_DBI} +-2 (directivity {g.directivity_dbi:.2f} dBi)")


def test_criterion_04_gain_peaks_at_carrier(geom, freq, response, feed, grid, verdict):
    coding = synthesize(geom, freq, BeamSpec.pencil(Direction(0.0, 0.0)))
    gains = [broadside_gain(geom, f, response, feed, grid, coding).gain_dbi for f in SWEEP_HZ]
    best = SWEEP_HZ[int(np.argmax(gains))]
    verdict(4, "gain-vs-frequency peak", best == 3.0e9,
            "gains " + ", ".join(f"{f / 1e9:.1f} GHz {g:.2f}" for f, g in zip(SWEEP_HZ, gains))
            + f" dBi; maximum at {best / 1e9:.1f} GHz")


def test_criterion_05_oam_purity(geom, freq, response, feed, grid, verdict):
    parts, ok = [], True
    for ell in (0, 1, 2, 3):
        ff = far_field(geom, freq, synthesize(geom, freq, BeamSpec.oam(ell)), response, feed, *grid)
        spec = oam_mode_spectrum(ff, intensity_ring_theta(ff), 5)
        frac = spec.fraction(ell)
        ok &= spec.dominant() == ell and (ell == 0 or frac > 0.5)
        parts.append(f"l={ell} dominant {spec.dominant()} fraction {frac:.3f}")
    verdict(5, "OAM purity", ok, "; ".join(parts))


def test_criterion_06_phase_winding(geom, freq, response, feed, verdict):
    got = {}
    for ell in (0, 1, 2, 3, -1, -2, -3):
        plane = sample_near_field(geom, freq, synthesize(geom, freq, BeamSpec.oam(ell)), response, feed)
        got[ell] = winding_number(plane)
    verdict(6, "OAM phase winding", all(w == ell for ell, w in got.items()),
            ", ".join(f"l={ell}: {w}" for ell, w in got.items()))


def test_criterion_07_nf2ff(geom, freq, response, feed, grid, verdict):
    parts, ok = [], True
    for preset in (0, 30):
        coding = synthesize(geom, freq, BeamSpec.pencil(Direction.from_degrees(preset, 0)))
        direct = far_field(geom, freq, coding, response, feed, *grid)
        via = nf_to_ff(sample_near_field(geom, freq, coding, response, feed), *grid)
        sep = math.degrees(angular_separation(direct.peak_direction(), via.peak_direction()))
        corr = main_lobe_correlation(direct, via)
        ok &= sep <= 1.5 and corr > 0.95
        parts.append(f"{preset} deg: separation {sep:.2f} deg, correlation {corr:.4f}")
    verdict(7, "NF2FF equivalence", ok, "; ".join(parts))


def test_criterion_08_harmonic_analysis(verdict):
    worst_quad = 0.0
    samples = 1_000_000
    for plan in (ModulationPlan.uniform(2), ModulationPlan.uniform(4), ModulationPlan(n_slots=4, slots=(3, 1))):
        t = (np.arange(samples) + 0.5) / samples * plan.period
        for n in range(1, plan.n_subarrays + 1):
            g = plan.sequence(n, t)
            for h in range(-8, 9):
                num = np.mean(g * np.exp(-2j * np.pi * h * t / plan.period))
                worst_quad = max(worst_quad, abs(fourier_coefficient(plan, n, h) - num))
    sq = ModulationPlan.uniform(2)
    a1_err = abs(abs(fourier_coefficient(sq, 1, 1)) - 2 / math.pi)
    even = max(abs(fourier_coefficient(sq, 1, h)) for h in (-6, -4, -2, 0, 2, 4, 6))
    worst_parseval = 0.0
    H = 40
    for S, s in ((2, 1), (4, 3), (5, 2)):
        plan = ModulationPlan(n_slots=S, slots=(s,))
        head = sum(abs(fourier_coefficient(plan, 1, h)) ** 2 for h in range(-H, H + 1))
        tail = sum(math.sin(math.pi * (H + 1 + r) / S) ** 2 * zeta(2, (H + 1 + r) / S) / S**2 for r in range(S))
        worst_parseval = max(worst_parseval, abs(head + 8 / math.pi**2 * tail - 1))
    ok = worst_quad < 1e-9 and a1_err < 1e-9 and even < 1e-9 and worst_parseval < 1e-9
    verdict(8, "harmonic analysis", ok,
            f"quadrature {worst_quad:.1e}, |a1|-2/pi {a1_err:.1e}, even {even:.1e}, Parseval {worst_parseval:.1e}")


def test_criterion_09_df_round_trip(freq, verdict):
    cell = df_cell_geometry(freq, 0.364)
    plans = default_plans(cell)
    angles = [Direction.from_signed(a, 0.0) for a in range(-45, 50, 5)]
    clean = df_experiment(cell, freq, *plans, angles, trials=1, snr_db=None)
    noisy = df_experiment(cell, freq, *plans, angles, trials=3, snr_db=20.0, rng_seed=0)
    ok = clean.max_abs_error() < 0.5 and max(noisy.rmse_deg) < 2.7
    verdict(9, "DF round trip", ok,
            f"noiseless max error {clean.max_abs_error():.1e} deg, 20 dB max RMSE {max(noisy.rmse_deg):.3f} deg")


def test_criterion_10_determinism(tmp_path, verdict):
    small = "geometry: {rows: 10, cols: 10}\ngrid: {theta_step_deg: 1.0, phi_step_deg: 4.0}\n"
    configs = {
        "oam": small + "oam: {}\n",
        "scan": small + "scan: {}\n",
        "df": "df: {}\nseed: 42\n",
    }
    same = {}
    for cmd, body in configs.items():
        cfg = tmp_path / f"{cmd}.yaml"
        cfg.write_text(body)
        outs = []
        for rep in ("a", "b"):
            d = tmp_path / f"{cmd}_{rep}"
            assert main([cmd, "--config", str(cfg), "--out", str(d)]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "manifest.yaml"})
        same[cmd] = outs[0] == outs[1] and len(outs[0]) > 0
    verdict(10, "determinism", all(same.values()),
            ", ".join(f"{c} {'identical' if s else 'differs'}" for c, s in same.items()))
