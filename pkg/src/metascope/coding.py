"""Compensation-phase maps for vortex (OAM) and pencil beams, and their
1-bit quantization into coding matrices.

All phase maps are (M, N) float arrays wrapped to ``[0, 2*pi)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import ArrayGeometry, CodingMatrix, Direction, FrequencySpec, wrap_phase

MAX_RESOLVED_MODE = 3


def oam_azimuthal_phase(x, y, ell: int):
    """Helical phase ``ell * atan2(y, x)`` wrapped to ``[0, 2*pi)``.

    The azimuth at the origin is undefined; it is taken as 0 and a
    ``RuntimeWarning`` is issued.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    at_origin = (x == 0) & (y == 0)
    if np.any(at_origin):
        warnings.warn("azimuth undefined at the origin; using 0", RuntimeWarning, stacklevel=2)
    az = np.where(at_origin, 0.0, np.arctan2(y, x))
    return wrap_phase(ell * az)


def _focusing_phase(geometry: ArrayGeometry, freq: FrequencySpec) -> np.ndarray:
    X, Y = geometry.grid()
    F = geometry.focal_length
    return 2 * np.pi * (np.sqrt(X**2 + Y**2 + F**2) - F) / freq.wavelength


def oam_phase_map(geometry: ArrayGeometry, freq: FrequencySpec, ell: int) -> np.ndarray:
    """Spherical-wave focusing plus helical phase for every element."""
    X, Y = geometry.grid()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        az = oam_azimuthal_phase(X, Y, ell)
    return wrap_phase(_focusing_phase(geometry, freq) + az)


def oam_compensation_phase(
    geometry: ArrayGeometry, freq: FrequencySpec, ell: int, m: int, n: int
) -> float:
    geometry.check_index(m, n)
    return float(oam_phase_map(geometry, freq, ell)[m - 1, n - 1])


def pencil_phase_map(
    geometry: ArrayGeometry, freq: FrequencySpec, steer: Direction
) -> np.ndarray:
    """``k0 * (L_mn - p_mn . r0)`` wrapped, for a beam toward ``steer``."""
    X, Y = geometry.grid()
    r0 = steer.unit_vector()
    L = geometry.feed_distances()
    return wrap_phase(freq.wavenumber * (L - (X * r0[0] + Y * r0[1])))


def pencil_compensation_phase(
    geometry: ArrayGeometry, freq: FrequencySpec, steer: Direction, m: int, n: int
) -> float:
    geometry.check_index(m, n)
    return float(pencil_phase_map(geometry, freq, steer)[m - 1, n - 1])


def quantize_1bit(phases) -> CodingMatrix:
    """Bit 0 for phase in ``[0, pi)``, bit 1 for ``[pi, 2*pi)``.

    Inputs outside ``[0, 2*pi)`` are wrapped first, so the half-open intervals
    repeat every ``2*pi``.
    """
    p = wrap_phase(np.atleast_2d(np.asarray(phases, dtype=float)))
    return CodingMatrix((p >= np.pi).astype(np.uint8))


@dataclass(frozen=True)
class BeamSpec:
    """What to synthesize: a vortex of mode ``oam_mode`` or a pencil beam."""

    kind: str
    oam_mode: int = 0
    steer: Optional[Direction] = None

    def __post_init__(self):
        if self.kind not in ("oam", "pencil"):
            raise ValueError(f"beam kind must be 'oam' or 'pencil', got {self.kind!r}")
        if self.kind == "pencil" and self.steer is None:
            raise ValueError("pencil beam needs a steer direction")
        if self.kind == "oam":
            if int(self.oam_mode) != self.oam_mode:
                raise ValueError("OAM mode must be an integer")
            if abs(self.oam_mode) > MAX_RESOLVED_MODE:
                warnings.warn(
                    f"OAM mode {self.oam_mode} exceeds +-{MAX_RESOLVED_MODE}; the grid may "
                    "undersample the helical phase",
                    UserWarning,
                    stacklevel=2,
                )

    @classmethod
    def oam(cls, ell: int) -> "BeamSpec":
        return cls("oam", oam_mode=int(ell))

    @classmethod
    def pencil(cls, steer: Direction) -> "BeamSpec":
        return cls("pencil", steer=steer)


def compensation_phases(
    geometry: ArrayGeometry, freq: FrequencySpec, spec: BeamSpec
) -> np.ndarray:
    if spec.kind == "oam":
        return oam_phase_map(geometry, freq, spec.oam_mode)
    return pencil_phase_map(geometry, freq, spec.steer)


def synthesize(geometry: ArrayGeometry, freq: FrequencySpec, spec: BeamSpec) -> CodingMatrix:
    return quantize_1bit(compensation_phases(geometry, freq, spec))


def ring_transitions(coding: CodingMatrix, geometry: ArrayGeometry, radius_sq_units: int) -> int:
    """Count bit changes walking counterclockwise around an equal-radius ring.

    The ring holds every element whose squared distance from the array centre
    equals ``radius_sq_units * (P/2)**2``. Half-pitch units keep the test exact
    on even grids, where coordinates are odd multiples of P/2.
    """
    X, Y = geometry.grid()
    half = geometry.pitch / 2
    r2 = np.rint((X**2 + Y**2) / half**2).astype(int)
    sel = r2 == radius_sq_units
    if sel.sum() < 2:
        raise ValueError(f"no ring with squared radius {radius_sq_units} (half-pitch units)")
    order = np.argsort(np.arctan2(Y[sel], X[sel]))
    bits = coding.bits[sel][order]
    return int(np.count_nonzero(bits != np.roll(bits, 1)))


def write_bitmap(coding: CodingMatrix, path, quadrant_split: bool = False) -> None:
    Path(path).write_text(coding.to_bitmap(quadrant_split=quadrant_split))


def read_bitmap(path) -> CodingMatrix:
    return CodingMatrix.from_bitmap(Path(path).read_text())
