"""``metascope oam|scan|df --config <path> [--out <dir>] [--seed <u64>] [--noiseless]``.

Exit status: 0 success, 1 configuration error, 2 numerical or domain error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__, field, timemod
from .coding import BeamSpec, synthesize
from .config import ConfigError, ScenarioConfig, dump_manifest, load_config, seed_value
from .core import Direction, DomainError, FrequencySpec, signed_angle

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
MANIFEST = "manifest.yaml"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _fmt(v) -> str:
    return format(float(v), ".10g")


def write_atomic(path: Path, content: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _mode_label(ell: int) -> str:
    return f"l{ell:+d}" if ell else "l0"


def _angle_label(a: float) -> str:
    return format(a, "+g") if a else "0"


def _grid(cfg: ScenarioConfig):
    return field.default_grid(cfg.grid["theta_step_deg"], cfg.grid["phi_step_deg"])


def run_oam(cfg: ScenarioConfig, out: Path, log=print) -> list:
    """Coding bitmap, far field, near-field plane and mode spectrum per mode."""
    geom, freq = cfg.array_geometry(), cfg.carrier()
    resp, feed = cfg.load_response(), field.FeedModel(cfg.feed["gain_dbi"])
    theta, phi = _grid(cfg)
    p = cfg.params
    lam = freq.wavelength
    written = []
    for ell in p["modes"]:
        coding = synthesize(geom, freq, BeamSpec.oam(ell))
        ff = field.far_field(geom, freq, coding, resp, feed, theta, phi)
        ring = field.intensity_ring_theta(ff)
        spectrum = field.oam_mode_spectrum(ff, ring, p["max_mode"])
        xs, ys = field.plane_grid(geom, freq, p["nf_extent_factor"], p["nf_pitch_wavelengths"])
        nf = field.sample_near_field(geom, freq, coding, resp, feed, p["nf_z_wavelengths"] * lam, xs, ys)
        tag = _mode_label(ell)
        files = {
            f"oam_{tag}_coding.txt": coding.to_bitmap(),
            f"oam_{tag}_farfield.csv": field.far_field_csv(ff),
            f"oam_{tag}_nearfield.csv": field.near_field_csv(nf),
            f"oam_{tag}_modes.csv": field.mode_spectrum_csv(spectrum),
        }
        for name, content in files.items():
            write_atomic(out / name, content)
            written.append(name)
        log(
            f"oam l={ell:+d}: ring theta {math.degrees(spectrum.ring_theta):.2f} deg, "
            f"dominant mode {spectrum.dominant():+d}, fraction {spectrum.fraction(spectrum.dominant()):.3f}"
        )
    return written


def run_scan(cfg: ScenarioConfig, out: Path, log=print) -> list:
    """Per-angle coding and far field, a summary table and a broadside frequency sweep."""
    geom, freq = cfg.array_geometry(), cfg.carrier()
    resp, feed = cfg.load_response(), field.FeedModel(cfg.feed["gain_dbi"])
    theta, phi = _grid(cfg)
    plane = cfg.params["plane_phi_deg"]
    written = []
    summary = ["preset_deg,peak_theta_deg,peak_phi_deg,gain_dbi,directivity_dbi,sll_db"]
    for a in cfg.params["angles_deg"]:
        coding = synthesize(geom, freq, BeamSpec.pencil(Direction.from_signed(a, plane)))
        ff = field.far_field(geom, freq, coding, resp, feed, theta, phi)
        g = field.directivity_gain(ff)
        sll = field.sidelobe_level(ff)
        pt, pp = signed_angle(g.theta, g.phi)
        summary.append(f"{_fmt(a)},{_fmt(pt)},{_fmt(pp)},{_fmt(g.gain_dbi)},{_fmt(g.directivity_dbi)},{_fmt(sll)}")
        tag = _angle_label(a)
        for name, content in (
            (f"scan_{tag}_coding.txt", coding.to_bitmap()),
            (f"scan_{tag}_farfield.csv", field.far_field_csv(ff)),
        ):
            write_atomic(out / name, content)
            written.append(name)
        log(f"scan {a:+g} deg: peak {pt:+.2f} deg, gain {g.gain_dbi:.2f} dBi, SLL {sll:.1f} dB")
    write_atomic(out / "scan_summary.csv", "\n".join(summary) + "\n")
    written.append("scan_summary.csv")
    sweep = cfg.frequency["sweep_hz"]
    if sweep:
        coding = synthesize(geom, freq, BeamSpec.pencil(Direction(0.0, 0.0)))
        rows = ["freq_hz,gain_dbi,directivity_dbi"]
        for f in sweep:
            ff = field.far_field(geom, FrequencySpec(f), coding, resp, feed, theta, phi)
            g = field.directivity_gain(ff)
            rows.append(f"{_fmt(f)},{_fmt(g.gain_dbi)},{_fmt(g.directivity_dbi)}")
        write_atomic(out / "scan_gain_vs_frequency.csv", "\n".join(rows) + "\n")
        written.append("scan_gain_vs_frequency.csv")
    return written


def run_df(cfg: ScenarioConfig, out: Path, log=print) -> list:
    """Estimates per (angle, trial), RMSE per angle and the harmonic envelope."""
    freq = cfg.carrier()
    p = cfg.params
    if p["aperture"] == "cell":
        geom = timemod.df_cell_geometry(freq, cfg.geometry["focal_length_m"])
    else:
        geom = cfg.array_geometry()
    kw = dict(period=p["period_s"], samples_per_period=p["samples_per_period"], n_periods=p["n_periods"])
    plan_x, plan_y = timemod.default_plans(geom, **kw)
    angles = [Direction.from_signed(a, p["plane_phi_deg"]) for a in p["angles_deg"]]
    result = timemod.df_experiment(geom, freq, plan_x, plan_y, angles, p["trials"], p["snr_db"], cfg.seed)
    orders, env = timemod.harmonic_envelope(plan_x, p["max_harmonic"])
    files = {
        "df_estimates.csv": timemod.estimates_csv(result),
        "df_rmse.csv": timemod.rmse_csv(result),
        "df_harmonics.csv": timemod.envelope_csv(orders, env),
    }
    for name, content in files.items():
        write_atomic(out / name, content)
    log(f"df: {len(angles)} angles x {p['trials']} trials, max RMSE {max(result.rmse_deg):.3f} deg")
    return list(files)


RUNNERS = {"oam": run_oam, "scan": run_scan, "df": run_df}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="metascope", description="1-bit coding metasurface simulations")
    parser.add_argument("--version", action="version", version=f"metascope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in RUNNERS:
        sp = sub.add_parser(name, help=f"run the {name} scenario")
        sp.add_argument("--config", required=True, help="scenario YAML file")
        sp.add_argument("--out", help="output directory (overrides output_dir)")
        sp.add_argument("--seed", help="master RNG seed, unsigned 64-bit (overrides seed)")
        sp.add_argument("--noiseless", action="store_true", help="disable receiver noise (df)")
    return parser


def resolve(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    if cfg.scenario != args.command:
        raise ConfigError(f"config holds a '{cfg.scenario}' scenario, not '{args.command}'", source=args.config)
    if args.seed is not None:
        try:
            cfg.seed = seed_value(int(args.seed, 0))
        except ValueError as exc:
            raise ConfigError(f"--seed {args.seed!r}: {exc}") from None
    if args.noiseless and cfg.scenario == "df":
        cfg.params["snr_db"] = None
    out = Path(args.out) if args.out else cfg.base_dir / cfg.output_dir
    cfg.output_dir = str(out.resolve())
    return cfg


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve(args)
    except ConfigError as exc:
        print(f"metascope: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"metascope: config error: output_dir: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with np.errstate(all="raise", under="ignore"):
            RUNNERS[cfg.scenario](cfg, out)
    except (DomainError, ValueError, ArithmeticError) as exc:
        print(f"metascope: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write_atomic(out / MANIFEST, dump_manifest(cfg, __version__))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
