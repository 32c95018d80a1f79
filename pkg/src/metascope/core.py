"""Shared physical data model: array geometry, meta-atom states, coding
matrices, directions and frequency handling.

Formulas index elements 1-based (``m`` in ``1..M``, ``n`` in ``1..N``); every
array stored by this package is 0-based, row ``m-1`` and column ``n-1``.
Row index runs along x and column index along y.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

PathLike = Union[str, Path]

RESPONSE_HEADER = ("freq_hz", "mag0_db", "phase0_deg", "mag1_db", "phase1_deg")


class DomainError(ValueError):
    """A numerical or physical precondition does not hold."""


def wrap_phase(phase):
    """Wrap radians into ``[0, 2*pi)``.

    ``np.mod`` can return exactly ``2*pi`` for tiny negative inputs; those are
    folded back to 0.
    """
    out = np.mod(phase, 2 * np.pi)
    out = np.where(out >= 2 * np.pi, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class FrequencySpec:
    """Carrier frequency with its derived wavelength and wavenumber."""

    carrier: float

    def __post_init__(self):
        if not (math.isfinite(self.carrier) and self.carrier > 0):
            raise DomainError(f"carrier frequency must be positive, got {self.carrier}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier

    @property
    def wavenumber(self) -> float:
        return 2 * np.pi * self.carrier / SPEED_OF_LIGHT


@dataclass(frozen=True)
class Direction:
    """Propagation direction; ``theta`` from +z, ``phi`` from +x in the xOy plane.

    ``phi`` is wrapped into ``[0, 2*pi)`` on construction.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta < np.pi / 2):
            raise DomainError(f"theta must lie in [0, pi/2), got {self.theta}")
        object.__setattr__(self, "phi", wrap_phase(float(self.phi)))

    @classmethod
    def from_degrees(cls, theta_deg: float, phi_deg: float = 0.0) -> "Direction":
        return cls(math.radians(theta_deg), math.radians(phi_deg))

    @classmethod
    def from_signed(cls, theta_deg: float, plane_phi_deg: float = 0.0) -> "Direction":
        """Direction for a signed polar angle in the cut plane at ``plane_phi_deg``.

        Negative angles point into the opposite half of the plane.
        """
        if theta_deg < 0:
            return cls.from_degrees(-theta_deg, plane_phi_deg + 180.0)
        return cls.from_degrees(theta_deg, plane_phi_deg)

    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )


def signed_angle(theta: float, phi: float):
    """Fold (theta, phi) into a signed theta on the cut plane through phi.

    Directions with phi in [90, 270) deg become negative theta on the plane
    ``phi - 180``. Returns degrees.
    """
    pd = math.degrees(phi) % 360.0
    td = math.degrees(theta)
    if 90.0 <= pd < 270.0:
        return -td, pd - 180.0
    return td, (pd + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class ArrayGeometry:
    """Rectangular M x N meta-atom grid centred on the origin in the z=0 plane.

    Parameters
    ----------
    rows, cols : int
        Element counts M (along x) and N (along y).
    pitch : float
        Element spacing P in meters, identical along x and y.
    focal_length : float
        Feed distance F in meters.
    feed_position : 3-sequence, optional
        Feed phase centre; defaults to ``(0, 0, F)``.
    """

    rows: int
    cols: int
    pitch: float
    focal_length: float
    feed_position: Optional[tuple] = None

    def __post_init__(self):
        if int(self.rows) != self.rows or self.rows < 1:
            raise DomainError(f"rows must be a positive integer, got {self.rows}")
        if int(self.cols) != self.cols or self.cols < 1:
            raise DomainError(f"cols must be a positive integer, got {self.cols}")
        if not self.pitch > 0:
            raise DomainError(f"pitch must be positive, got {self.pitch}")
        if not self.focal_length > 0:
            raise DomainError(f"focal_length must be positive, got {self.focal_length}")
        feed = self.feed_position
        if feed is None:
            feed = (0.0, 0.0, float(self.focal_length))
        feed = tuple(float(v) for v in feed)
        if len(feed) != 3:
            raise DomainError("feed_position must have three components")
        object.__setattr__(self, "rows", int(self.rows))
        object.__setattr__(self, "cols", int(self.cols))
        object.__setattr__(self, "feed_position", feed)

    @property
    def shape(self) -> tuple:
        return (self.rows, self.cols)

    @property
    def x(self) -> np.ndarray:
        """x coordinates of the rows, shape (M,)."""
        m = np.arange(1, self.rows + 1)
        return (m - (self.rows + 1) / 2) * self.pitch

    @property
    def y(self) -> np.ndarray:
        """y coordinates of the columns, shape (N,)."""
        n = np.arange(1, self.cols + 1)
        return (n - (self.cols + 1) / 2) * self.pitch

    def grid(self):
        """Element x and y coordinates as two (M, N) arrays."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def feed_distances(self) -> np.ndarray:
        """Distance from the feed to every element, shape (M, N)."""
        X, Y = self.grid()
        fx, fy, fz = self.feed_position
        return np.sqrt((X - fx) ** 2 + (Y - fy) ** 2 + fz**2)

    @property
    def cell_area(self) -> float:
        return self.pitch**2

    def check_index(self, m: int, n: int) -> None:
        if not (1 <= m <= self.rows and 1 <= n <= self.cols):
            raise IndexError(
                f"element ({m}, {n}) outside 1..{self.rows} x 1..{self.cols}"
            )


def element_position(geometry: ArrayGeometry, m: int, n: int) -> np.ndarray:
    """Centre of element (m, n), 1-based, as a 3-vector in meters."""
    geometry.check_index(m, n)
    P = geometry.pitch
    return np.array(
        [(m - (geometry.rows + 1) / 2) * P, (n - (geometry.cols + 1) / 2) * P, 0.0]
    )


def feed_distance(geometry: ArrayGeometry, m: int, n: int) -> float:
    """Feed-to-element path length L_mn for element (m, n), 1-based."""
    p = element_position(geometry, m, n)
    fx, fy, fz = geometry.feed_position
    return math.sqrt((p[0] - fx) ** 2 + (p[1] - fy) ** 2 + fz**2)


@dataclass(frozen=True)
class CodingMatrix:
    """M x N grid of 1-bit states: 0 -> reflection phase 0, 1 -> phase pi."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2 or bits.size == 0:
            raise ValueError("coding matrix must be a non-empty 2-D array")
        if not np.all((bits == 0) | (bits == 1)):
            raise ValueError("coding matrix entries must be 0 or 1")
        bits = bits.astype(np.uint8)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def shape(self) -> tuple:
        return self.bits.shape

    def check_geometry(self, geometry: ArrayGeometry) -> None:
        if self.shape != geometry.shape:
            raise ValueError(
                f"coding matrix {self.shape} does not match geometry {geometry.shape}"
            )

    def complement(self) -> "CodingMatrix":
        return CodingMatrix(1 - self.bits)

    def __eq__(self, other):
        if not isinstance(other, CodingMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.all(self.bits == other.bits))

    def __hash__(self):
        return hash((self.shape, self.bits.tobytes()))

    def to_bitmap(self, quadrant_split: bool = False) -> str:
        """Text bitmap: one line of '0'/'1' characters per row, row 0 first."""
        lines = []
        if quadrant_split:
            lines.append("# quadrant-split: 2x2")
        lines.extend("".join("01"[b] for b in row) for row in self.bits)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_bitmap(cls, text: str) -> "CodingMatrix":
        rows = []
        for lineno, line in enumerate(text.split("\n"), start=1):
            if not line or line.startswith("#"):
                continue
            if set(line) - {"0", "1"}:
                raise ValueError(f"bitmap line {lineno}: only '0' and '1' allowed")
            rows.append([int(ch) for ch in line])
        if not rows:
            raise ValueError("bitmap holds no rows")
        if len({len(r) for r in rows}) != 1:
            raise ValueError("bitmap rows have unequal length")
        return cls(np.array(rows, dtype=np.uint8))

    def quadrants(self):
        """Split into the four bias-line quadrants (top-left, top-right,
        bottom-left, bottom-right); odd sizes put the extra row/column in the
        lower/right halves."""
        M, N = self.shape
        r, c = M // 2, N // 2
        b = self.bits
        return b[:r, :c], b[:r, c:], b[r:, :c], b[r:, c:]


@dataclass(frozen=True)
class MetaAtomResponse:
    """Tabulated complex reflection of the two meta-atom states vs frequency.

    Lookups between table rows interpolate magnitude and unwrapped phase
    linearly; lookups outside the table raise :class:`DomainError`.
    """

    freq: np.ndarray
    gamma0: np.ndarray
    gamma1: np.ndarray
    _mag: tuple = field(init=False, repr=False, compare=False)
    _phase: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        freq = np.asarray(self.freq, dtype=float)
        g0 = np.asarray(self.gamma0, dtype=complex)
        g1 = np.asarray(self.gamma1, dtype=complex)
        if freq.ndim != 1 or freq.size == 0 or g0.shape != freq.shape or g1.shape != freq.shape:
            raise ValueError("response table columns must be equal-length 1-D arrays")
        if np.any(np.diff(freq) <= 0):
            raise ValueError("response table frequencies must be strictly increasing")
        for name, g in (("gamma0", g0), ("gamma1", g1)):
            if np.any(np.abs(g) > 1 + 1e-12):
                raise DomainError(f"{name} exceeds unit magnitude (active reflection)")
        for arr in (freq, g0, g1):
            arr.setflags(write=False)
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "gamma0", g0)
        object.__setattr__(self, "gamma1", g1)
        object.__setattr__(self, "_mag", (np.abs(g0), np.abs(g1)))
        object.__setattr__(
            self, "_phase", (np.unwrap(np.angle(g0)), np.unwrap(np.angle(g1)))
        )

    @classmethod
    def ideal(cls, f_lo: float = 1e6, f_hi: float = 1e12) -> "MetaAtomResponse":
        """Lossless response with states exactly +1 and -1."""
        f = np.array([f_lo, f_hi])
        return cls(f, np.ones(2), -np.ones(2))

    @classmethod
    def from_csv(cls, source) -> "MetaAtomResponse":
        """Load ``freq_hz,mag0_db,phase0_deg,mag1_db,phase1_deg`` rows."""
        if isinstance(source, (str, Path)):
            text = Path(source).read_text()
        else:
            text = source.read()
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != RESPONSE_HEADER:
            raise ValueError(f"response CSV header must be {','.join(RESPONSE_HEADER)}")
        rows = [[float(v) for v in row] for row in reader if row]
        if not rows:
            raise ValueError("response CSV has no data rows")
        a = np.array(rows)
        if a.shape[1] != 5:
            raise ValueError("response CSV rows must have five columns")
        g0 = 10 ** (a[:, 1] / 20) * np.exp(1j * np.radians(a[:, 2]))
        g1 = 10 ** (a[:, 3] / 20) * np.exp(1j * np.radians(a[:, 4]))
        return cls(a[:, 0], g0, g1)

    @classmethod
    def default(cls) -> "MetaAtomResponse":
        """The shipped table, 2.6-3.4 GHz in 10 MHz steps."""
        ref = resources.files("metascope") / "data" / "default_response.csv"
        return cls.from_csv(io.StringIO(ref.read_text()))

    def to_csv(self) -> str:
        out = [",".join(RESPONSE_HEADER)]
        for f, g0, g1 in zip(self.freq, self.gamma0, self.gamma1):
            out.append(
                f"{f:.10g},{20 * np.log10(abs(g0)):.6f},{np.degrees(np.angle(g0)):.6f},"
                f"{20 * np.log10(abs(g1)):.6f},{np.degrees(np.angle(g1)):.6f}"
            )
        return "\n".join(out) + "\n"

    def at(self, f: float):
        """Interpolated ``(gamma0, gamma1)`` at frequency ``f``."""
        if not (self.freq[0] <= f <= self.freq[-1]):
            raise DomainError(
                f"frequency {f:g} Hz outside table [{self.freq[0]:g}, {self.freq[-1]:g}]"
            )
        hit = np.flatnonzero(self.freq == f)
        if hit.size:
            i = hit[0]
            return complex(self.gamma0[i]), complex(self.gamma1[i])
        j = int(np.searchsorted(self.freq, f))
        vals = []
        for g, mag, ph in zip((self.gamma0, self.gamma1), self._mag, self._phase):
            if g[j - 1] == g[j]:
                vals.append(g[j])  # flat segment: skip the polar round trip
            else:
                vals.append(np.interp(f, self.freq, mag) * np.exp(1j * np.interp(f, self.freq, ph)))
        return complex(vals[0]), complex(vals[1])


def meta_response_at(response: MetaAtomResponse, f: float, bit: int) -> complex:
    """Reflection coefficient of state ``bit`` (0 or 1) at frequency ``f``."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    return response.at(f)[bit]


def phase_difference_deg(response: MetaAtomResponse) -> np.ndarray:
    """Unwrapped state phase difference per table row, folded into [0, 360)."""
    d = np.degrees(response._phase[0] - response._phase[1])
    return np.mod(d, 360.0)


def fractional_bandwidth(f_lo: float, f_hi: float) -> float:
    """Bandwidth relative to the band centre, ``2 (f_hi - f_lo) / (f_hi + f_lo)``."""
    if not 0 < f_lo < f_hi:
        raise ValueError("need 0 < f_lo < f_hi")
    return 2 * (f_hi - f_lo) / (f_hi + f_lo)


def conforming_band(
    response: MetaAtomResponse,
    max_loss_db: float = 0.6,
    phase_tolerance_deg: float = 25.0,
) -> Optional[tuple]:
    """Widest contiguous run of table frequencies meeting the 1-bit envelope.

    Both states must lose at most ``max_loss_db`` and the phase difference must
    stay within ``180 +- phase_tolerance_deg``. Returns ``(f_lo, f_hi)`` or
    None when no row qualifies.
    """
    loss_ok = (20 * np.log10(np.abs(response.gamma0)) >= -max_loss_db) & (
        20 * np.log10(np.abs(response.gamma1)) >= -max_loss_db
    )
    dphi = phase_difference_deg(response)
    ok = loss_ok & (np.abs(dphi - 180.0) <= phase_tolerance_deg)
    best, start = None, None
    for i, flag in enumerate(list(ok) + [False]):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if best is None or (i - start) > (best[1] - best[0]):
                best = (start, i)
            start = None
    if best is None:
        return None
    return float(response.freq[best[0]]), float(response.freq[best[1] - 1])


def as_coding(bits: Union[CodingMatrix, Sequence, np.ndarray]) -> CodingMatrix:
    return bits if isinstance(bits, CodingMatrix) else CodingMatrix(np.asarray(bits))
