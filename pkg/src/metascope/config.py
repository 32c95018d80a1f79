"""Scenario configuration: YAML with strict keys and line-numbered diagnostics.

A config holds shared blocks (``geometry``, ``frequency``, ``feed``,
``grid``), top-level ``response``, ``seed`` and ``output_dir``, and exactly
one scenario block: ``oam``, ``scan`` or ``df``. Missing keys take defaults
matching the 20x20 S-band build. A ``toolkit`` block is accepted so a run
manifest can be fed back in as a config.
"""

from __future__ import annotations

import copy
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import yaml

from .core import ArrayGeometry, DomainError, FrequencySpec, MetaAtomResponse

SCENARIOS = ("oam", "scan", "df")
U64_MAX = 2**64 - 1


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a sign, e.g. ``3e9``."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*(?:\.[0-9_]*)?|\.[0-9_]+)[eE][-+]?[0-9]+$"),
    list("-+0123456789."),
)


class ConfigError(ValueError):
    """Invalid configuration; carries the file, line and field when known."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None, source=None):
        self.field = field
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        prefix = f"{where} " if where else ""
        label = f"{field}: " if field else ""
        super().__init__(f"{prefix}{label}{message}")


# validators return the normalized value or raise ValueError with a reason


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def positive_int(v):
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ValueError("must be a positive integer")
    return v


def nonneg_int(v):
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise ValueError("must be a non-negative integer")
    return v


def real(v):
    if not _is_real(v) or not math.isfinite(v):
        raise ValueError("must be a finite number")
    return float(v)


def positive(v):
    v = real(v)
    if v <= 0:
        raise ValueError("must be positive")
    return v


def optional(check: Callable) -> Callable:
    def inner(v):
        return None if v is None else check(v)

    return inner


def list_of(check: Callable, allow_empty: bool = False) -> Callable:
    def inner(v):
        if not isinstance(v, list):
            raise ValueError("must be a list")
        if not v and not allow_empty:
            raise ValueError("must not be empty")
        out = []
        for i, item in enumerate(v):
            try:
                out.append(check(item))
            except ValueError as exc:
                raise ValueError(f"item {i}: {exc}") from None
        return out

    return inner


def integer(v):
    if not isinstance(v, int) or isinstance(v, bool):
        raise ValueError("must be an integer")
    return v


def signed_angle_deg(v):
    v = real(v)
    if not -90 < v < 90:
        raise ValueError("must lie strictly between -90 and 90 degrees")
    return v


def one_of(*choices) -> Callable:
    def inner(v):
        if v not in choices:
            raise ValueError(f"must be one of {', '.join(map(str, choices))}")
        return v

    return inner


def seed_value(v):
    if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v <= U64_MAX:
        raise ValueError("must be an integer in [0, 2**64)")
    return v


def text(v):
    if not isinstance(v, str) or not v:
        raise ValueError("must be a non-empty string")
    return v


def step_dividing(total: float) -> Callable:
    def inner(v):
        v = positive(v)
        n = total / v
        if abs(n - round(n)) > 1e-9:
            raise ValueError(f"must divide {total:g} degrees evenly")
        return v

    return inner


def feed_gain(v):
    v = real(v)
    if v <= 10 * math.log10(2):
        raise ValueError("must exceed 3.01 dBi (cos^q pattern needs q > 0)")
    return v


DEFAULT_SWEEP_HZ = [2.8e9, 2.9e9, 3.0e9, 3.1e9, 3.2e9]

SCHEMA = {
    "geometry": {
        "rows": (positive_int, 20),
        "cols": (positive_int, 20),
        "pitch_m": (positive, 0.05),
        "focal_length_m": (positive, 0.364),
    },
    "frequency": {
        "carrier_hz": (positive, 3.0e9),
        "sweep_hz": (list_of(positive, allow_empty=True), DEFAULT_SWEEP_HZ),
    },
    "feed": {"gain_dbi": (feed_gain, 10.0)},
    "grid": {
        "theta_step_deg": (step_dividing(90.0), 0.25),
        "phi_step_deg": (step_dividing(360.0), 1.0),
    },
    "oam": {
        "modes": (list_of(integer), [0, 1, 2, 3]),
        "max_mode": (nonneg_int, 5),
        "nf_z_wavelengths": (positive, 2.0),
        "nf_extent_factor": (positive, 1.5),
        "nf_pitch_wavelengths": (positive, 0.45),
    },
    "scan": {
        "angles_deg": (list_of(signed_angle_deg), [0.0, 15.0, 30.0, 45.0, 60.0]),
        "plane_phi_deg": (real, 0.0),
    },
    "df": {
        "angles_deg": (list_of(signed_angle_deg), [float(a) for a in range(-45, 50, 5)]),
        "plane_phi_deg": (real, 0.0),
        "trials": (positive_int, 3),
        "snr_db": (optional(real), 20.0),
        "aperture": (one_of("cell", "full"), "cell"),
        "period_s": (positive, 10e-6),
        "samples_per_period": (positive_int, 128),
        "n_periods": (positive_int, 8),
        "max_harmonic": (positive_int, 8),
    },
    "toolkit": {"version": (text, None)},
}

TOP_LEVEL = {
    "response": (text, "default"),
    "seed": (seed_value, 0),
    "output_dir": (text, "metascope-out"),
}

SHARED_BLOCKS = ("geometry", "frequency", "feed", "grid")


@dataclass
class ScenarioConfig:
    """Resolved configuration; every field has its default filled in."""

    scenario: str
    geometry: dict
    frequency: dict
    feed: dict
    grid: dict
    params: dict
    response: str = "default"
    seed: int = 0
    output_dir: str = "metascope-out"
    base_dir: Path = Path(".")

    def array_geometry(self) -> ArrayGeometry:
        g = self.geometry
        return ArrayGeometry(g["rows"], g["cols"], g["pitch_m"], g["focal_length_m"])

    def carrier(self) -> FrequencySpec:
        return FrequencySpec(self.frequency["carrier_hz"])

    def response_path(self) -> Optional[Path]:
        if self.response in ("default", "ideal"):
            return None
        p = Path(self.response)
        return p if p.is_absolute() else (self.base_dir / p).resolve()

    def load_response(self) -> MetaAtomResponse:
        if self.response == "default":
            return MetaAtomResponse.default()
        if self.response == "ideal":
            return MetaAtomResponse.ideal()
        return MetaAtomResponse.from_csv(self.response_path())

    def to_dict(self, version: str) -> dict:
        """Manifest form: toolkit version plus the fully resolved config."""
        resp = self.response
        if self.response_path() is not None:
            resp = str(self.response_path())
        return {
            "toolkit": {"version": version},
            "seed": self.seed,
            "output_dir": str(Path(self.output_dir)),
            "response": resp,
            "geometry": dict(self.geometry),
            "frequency": dict(self.frequency),
            "feed": dict(self.feed),
            "grid": dict(self.grid),
            self.scenario: dict(self.params),
        }


def _mark_line(node) -> int:
    return node.start_mark.line + 1


def _construct(loader, node):
    return loader.construct_object(node, deep=True)


def _check_block(loader, name: str, node, source) -> dict:
    schema = SCHEMA[name]
    out = {}
    if node is None or (isinstance(node, yaml.ScalarNode) and node.tag == "tag:yaml.org,2002:null"):
        pairs = []
    elif isinstance(node, yaml.MappingNode):
        pairs = node.value
    else:
        raise ConfigError("block must be a mapping", name, _mark_line(node), source)
    for knode, vnode in pairs:
        key = _construct(loader, knode)
        field = f"{name}.{key}"
        if key not in schema:
            raise ConfigError(f"unknown key (allowed: {', '.join(schema)})", field, _mark_line(knode), source)
        if key in out:
            raise ConfigError("duplicate key", field, _mark_line(knode), source)
        check, _ = schema[key]
        try:
            out[key] = check(_construct(loader, vnode))
        except ValueError as exc:
            raise ConfigError(str(exc), field, _mark_line(vnode), source) from None
    for key, (_, default) in schema.items():
        if key not in out and default is not None:
            out[key] = copy.deepcopy(default)
    return out


def parse_config(text_: str, source=None, base_dir: Optional[Path] = None) -> ScenarioConfig:
    """Parse and validate config text. ``base_dir`` anchors relative paths."""
    loader = _Loader(text_)
    try:
        try:
            root = loader.get_single_node()
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ConfigError(f"not valid YAML: {getattr(exc, 'problem', exc)}", None, line, source) from None
        if root is None:
            raise ConfigError("config is empty; it needs one of the blocks oam, scan, df", None, None, source)
        if not isinstance(root, yaml.MappingNode):
            raise ConfigError("top level must be a mapping", None, _mark_line(root), source)
        blocks, top, seen = {}, {}, {}
        for knode, vnode in root.value:
            key = _construct(loader, knode)
            line = _mark_line(knode)
            if key in seen:
                raise ConfigError("duplicate key", str(key), line, source)
            seen[key] = line
            if key in SCHEMA:
                blocks[key] = _check_block(loader, key, vnode, source)
            elif key in TOP_LEVEL:
                check, _ = TOP_LEVEL[key]
                try:
                    top[key] = check(_construct(loader, vnode))
                except ValueError as exc:
                    raise ConfigError(str(exc), key, _mark_line(vnode), source) from None
            else:
                allowed = ", ".join(list(SCHEMA) + list(TOP_LEVEL))
                raise ConfigError(f"unknown key (allowed: {allowed})", str(key), line, source)
    finally:
        loader.dispose()

    present = [s for s in SCENARIOS if s in blocks]
    if len(present) != 1:
        line = seen[present[1]] if len(present) > 1 else None
        raise ConfigError(
            f"exactly one scenario block (oam, scan, df) is required, found {len(present)}", None, line, source
        )
    scenario = present[0]
    for name in SHARED_BLOCKS:
        if name not in blocks:
            blocks[name] = _check_block(loader, name, None, source)
    cfg = ScenarioConfig(
        scenario=scenario,
        geometry=blocks["geometry"],
        frequency=blocks["frequency"],
        feed=blocks["feed"],
        grid=blocks["grid"],
        params=blocks[scenario],
        base_dir=base_dir if base_dir is not None else Path("."),
        **{k: top.get(k, d) for k, (_, d) in TOP_LEVEL.items()},
    )
    _check_physics(cfg, seen, source)
    return cfg


def _check_physics(cfg: ScenarioConfig, lines: dict, source):
    """Cross-field checks that still count as configuration errors."""
    try:
        cfg.array_geometry()
    except (ValueError, DomainError) as exc:
        raise ConfigError(str(exc), "geometry", lines.get("geometry"), source) from None
    try:
        resp = cfg.load_response()
    except FileNotFoundError:
        raise ConfigError(f"response table not found: {cfg.response_path()}", "response", lines.get("response"), source) from None
    except (ValueError, KeyError, OSError) as exc:
        raise ConfigError(f"bad response table: {exc}", "response", lines.get("response"), source) from None
    lo, hi = float(resp.freq[0]), float(resp.freq[-1])
    wanted = [("frequency.carrier_hz", cfg.frequency["carrier_hz"])]
    if cfg.scenario == "scan":
        wanted += [("frequency.sweep_hz", f) for f in cfg.frequency["sweep_hz"]]
    for field, f in wanted:
        if not lo <= f <= hi:
            raise ConfigError(
                f"{f:g} Hz outside the response table range [{lo:g}, {hi:g}] Hz", field, lines.get("frequency"), source
            )
    if cfg.scenario == "df":
        p = cfg.params
        if p["samples_per_period"] % 4:
            raise ConfigError("must be a multiple of 4 (slot count)", "df.samples_per_period", lines.get("df"), source)
        if p["samples_per_period"] < 2 * p["max_harmonic"]:
            raise ConfigError("must be at least 2 * df.max_harmonic", "df.samples_per_period", lines.get("df"), source)
        if p["aperture"] == "full" and min(cfg.geometry["rows"], cfg.geometry["cols"]) < 2:
            raise ConfigError("full-aperture direction finding needs at least 2 rows and 2 columns", "df.aperture", lines.get("df"), source)
    if cfg.scenario == "oam" and cfg.params["nf_pitch_wavelengths"] > 0.5:
        raise ConfigError("must not exceed 0.5 (Nyquist)", "oam.nf_pitch_wavelengths", lines.get("oam"), source)


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    try:
        raw = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror or exc}", source=str(p)) from None
    return parse_config(raw, source=str(p), base_dir=p.resolve().parent)


def dump_manifest(cfg: ScenarioConfig, version: str) -> str:
    return yaml.safe_dump(cfg.to_dict(version), sort_keys=False, default_flow_style=None)
