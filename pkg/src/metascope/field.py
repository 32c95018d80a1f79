"""Radiated fields of a feed-illuminated, coded array.

Field values carry the physical-optics prefactor ``k * A_cell / (2*pi)``.
Under it, ``integral |E|^2 dOmega`` is power in the same units as
``sum |incident|^2 * A_cell``, and the feed radiates ``4*pi`` in total.
The far field drops the common ``exp(-jkr)/r`` factor.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import kernels
from .core import (
    ArrayGeometry,
    CodingMatrix,
    DomainError,
    FrequencySpec,
    MetaAtomResponse,
)

DEFAULT_THETA_STEP_DEG = 0.25
DEFAULT_PHI_STEP_DEG = 1.0


@dataclass(frozen=True)
class FeedModel:
    """Horn feed with field pattern ``sqrt(G) * cos(alpha)**q`` about its boresight.

    ``q`` follows from ``G = 2 (2q + 1)``; 10 dBi gives ``q = 2``. The
    boresight points from the feed at the array centre.
    """

    gain_dbi: float = 10.0
    position: Optional[tuple] = None

    def __post_init__(self):
        if self.q <= 0:
            raise DomainError(f"feed gain {self.gain_dbi} dBi is too low for a cos^q pattern")

    @property
    def gain(self) -> float:
        return 10 ** (self.gain_dbi / 10)

    @property
    def q(self) -> float:
        return (self.gain / 2 - 1) / 2

    @property
    def total_power(self) -> float:
        """Power radiated by the feed: ``G * 2*pi / (2q+1) = 4*pi``."""
        return self.gain * 2 * np.pi / (2 * self.q + 1)

    def resolve_position(self, geometry: ArrayGeometry) -> np.ndarray:
        pos = self.position if self.position is not None else geometry.feed_position
        pos = np.asarray(pos, dtype=float)
        if pos[2] <= 0:
            raise DomainError("feed must sit in front of the array (z > 0)")
        return pos

    def pattern(self, cos_alpha):
        ca = np.clip(np.asarray(cos_alpha, dtype=float), 0.0, 1.0)
        return math.sqrt(self.gain) * ca**self.q


def illuminate(geometry: ArrayGeometry, freq: FrequencySpec, feed: FeedModel) -> np.ndarray:
    """Complex feed field at every element: ``pattern * exp(-j k L) / L``."""
    pos = feed.resolve_position(geometry)
    X, Y = geometry.grid()
    dx, dy, dz = X - pos[0], Y - pos[1], -pos[2]
    L = np.sqrt(dx**2 + dy**2 + dz**2)
    bore = -pos / np.linalg.norm(pos)
    cos_alpha = (dx * bore[0] + dy * bore[1] + dz * bore[2]) / L
    return feed.pattern(cos_alpha) * np.exp(-1j * freq.wavenumber * L) / L


def reflection_weights(coding: CodingMatrix, response: MetaAtomResponse, f: float) -> np.ndarray:
    g0, g1 = response.at(f)
    return np.where(coding.bits == 1, g1, g0)


def aperture_power(geometry: ArrayGeometry, excitation) -> float:
    """``sum |a|^2 * A_cell``, the power carried by the element excitations."""
    return float(np.sum(np.abs(excitation) ** 2) * geometry.cell_area)


def default_grid(theta_step_deg=DEFAULT_THETA_STEP_DEG, phi_step_deg=DEFAULT_PHI_STEP_DEG):
    """Forward hemisphere ``theta in [0, 90]``, ``phi in [0, 360)``, in radians."""
    n_theta = int(round(90.0 / theta_step_deg)) + 1
    n_phi = int(round(360.0 / phi_step_deg))
    theta = np.radians(np.linspace(0.0, 90.0, n_theta))
    phi = np.radians(np.arange(n_phi) * (360.0 / n_phi))
    return theta, phi


@dataclass
class FarFieldPattern:
    """Complex field on a rectangular (theta, phi) grid.

    ``field[i, j]`` belongs to ``theta[i]``, ``phi[j]``. ``reference_power``
    is the power fed into the system (feed total power), used for gain.
    """

    theta: np.ndarray
    phi: np.ndarray
    field: np.ndarray
    frequency: float
    reference_power: Optional[float] = None

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        self.field = np.asarray(self.field, dtype=complex)
        if self.field.shape != (self.theta.size, self.phi.size):
            raise ValueError(
                f"field shape {self.field.shape} does not match grid "
                f"({self.theta.size}, {self.phi.size})"
            )

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.field) ** 2

    def peak_index(self):
        return np.unravel_index(int(np.argmax(self.intensity)), self.field.shape)

    def peak_direction(self):
        """(theta, phi) of the strongest sample, radians."""
        i, j = self.peak_index()
        return float(self.theta[i]), float(self.phi[j])

    def radiated_power(self) -> float:
        """``integral |E|^2 sin(theta) dtheta dphi`` over the sampled hemisphere."""
        _require_hemisphere(self)
        dphi = 2 * np.pi / self.phi.size
        ring = self.intensity.sum(axis=1) * dphi
        return float(np.trapezoid(ring * np.sin(self.theta), self.theta))

    def cut(self, phi_deg: float):
        """Signed-theta cut through ``phi_deg`` and ``phi_deg + 180``.

        Returns (theta_signed_rad, field) sorted by angle.
        """
        j0 = _nearest_phi(self.phi, math.radians(phi_deg))
        j1 = _nearest_phi(self.phi, math.radians(phi_deg + 180.0))
        t = np.concatenate([-self.theta[:0:-1], self.theta])
        e = np.concatenate([self.field[:0:-1, j1], self.field[:, j0]])
        return t, e


def _nearest_phi(phi, target):
    d = np.angle(np.exp(1j * (phi - target)))
    return int(np.argmin(np.abs(d)))


def _require_hemisphere(pattern: FarFieldPattern):
    th, ph = pattern.theta, pattern.phi
    if th.size < 2 or abs(th[0]) > 1e-12 or abs(th[-1] - np.pi / 2) > 1e-9:
        raise DomainError("pattern must cover theta from 0 to 90 deg")
    step = 2 * np.pi / ph.size
    if abs(ph[0]) > 1e-12 or not np.allclose(np.diff(ph), step, rtol=0, atol=1e-9):
        raise DomainError("pattern must sample phi uniformly over the full circle")


def aperture_far_field(
    geometry: ArrayGeometry,
    freq: FrequencySpec,
    excitation,
    theta=None,
    phi=None,
    element_pattern: str = "cos",
    reference_power: Optional[float] = None,
) -> FarFieldPattern:
    """Far field of arbitrary complex element excitations (M, N)."""
    if theta is None or phi is None:
        t0, p0 = default_grid()
        theta = t0 if theta is None else theta
        phi = p0 if phi is None else phi
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if theta.size == 0 or phi.size == 0:
        raise ValueError("observation grid is empty")
    excitation = np.asarray(excitation, dtype=complex)
    if excitation.shape != geometry.shape:
        raise ValueError(f"excitation {excitation.shape} does not match geometry {geometry.shape}")
    k = freq.wavenumber
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    u = (np.sin(TH) * np.cos(PH)).ravel()
    v = (np.sin(TH) * np.sin(PH)).ravel()
    af = kernels.array_factor(excitation, geometry.x, geometry.y, u, v, k).reshape(TH.shape)
    if element_pattern == "cos":
        af = af * np.cos(TH)
    elif element_pattern != "isotropic":
        raise ValueError(f"unknown element pattern {element_pattern!r}")
    scale = k * geometry.cell_area / (2 * np.pi)
    return FarFieldPattern(theta, phi, scale * af, freq.carrier, reference_power)


def far_field(
    geometry: ArrayGeometry,
    freq: FrequencySpec,
    coding: CodingMatrix,
    response: MetaAtomResponse,
    feed: FeedModel,
    theta=None,
    phi=None,
    element_pattern: str = "cos",
) -> FarFieldPattern:
    """Far field of the coded surface under feed illumination at ``freq``."""
    coding.check_geometry(geometry)
    a = illuminate(geometry, freq, feed) * reflection_weights(coding, response, freq.carrier)
    return aperture_far_field(
        geometry, freq, a, theta, phi, element_pattern, reference_power=feed.total_power
    )


@dataclass(frozen=True)
class GainResult:
    directivity_dbi: float
    gain_dbi: Optional[float]
    theta: float
    phi: float


def half_power_samples(pattern: FarFieldPattern) -> int:
    """Samples inside the -3 dB main lobe along the theta cut through the peak."""
    _, phi0 = pattern.peak_direction()
    t, e = pattern.cut(math.degrees(phi0))
    p = np.abs(e) ** 2
    i = int(np.argmax(p))
    half = p[i] / 2
    lo = i
    while lo > 0 and p[lo - 1] >= half:
        lo -= 1
    hi = i
    while hi < p.size - 1 and p[hi + 1] >= half:
        hi += 1
    return hi - lo + 1


def directivity_gain(pattern: FarFieldPattern) -> GainResult:
    """Peak directivity and, with a reference power, realized gain in dBi.

    Directivity is ``4*pi |E_peak|^2`` over the radiated hemisphere power;
    gain uses the power delivered by the feed instead. Spillover, taper,
    quantization and state losses are already in the field sum, so the gain
    adds no loss terms of its own.
    """
    _require_hemisphere(pattern)
    if half_power_samples(pattern) < 2:
        raise DomainError("grid too coarse: fewer than 2 samples across the half-power beamwidth")
    peak = float(pattern.intensity.max())
    prad = pattern.radiated_power()
    if peak <= 0 or prad <= 0:
        raise DomainError("pattern carries no power")
    d = 10 * math.log10(4 * np.pi * peak / prad)
    g = None
    if pattern.reference_power:
        g = 10 * math.log10(4 * np.pi * peak / pattern.reference_power)
    theta, phi = pattern.peak_direction()
    return GainResult(d, g, theta, phi)


def _neighbours(i, j, n_theta, n_phi):
    if i == 0:
        # the pole row is a single point shared by every phi
        for jj in range(n_phi):
            yield 0, jj
        if n_theta > 1:
            yield 1, j
        return
    yield i - 1, j
    if i + 1 < n_theta:
        yield i + 1, j
    yield i, (j - 1) % n_phi
    yield i, (j + 1) % n_phi


def descent_region(pattern: FarFieldPattern, start=None) -> np.ndarray:
    """Samples reachable from ``start`` along paths that never climb.

    Flooding from the peak covers the main lobe down to its surrounding nulls
    and any valleys beyond, but never climbs onto a sidelobe.
    """
    mag = np.abs(pattern.field)
    n_theta, n_phi = mag.shape
    if start is None:
        start = pattern.peak_index()
    region = np.zeros(mag.shape, dtype=bool)
    region[start] = True
    queue = deque([start])
    while queue:
        i, j = queue.popleft()
        level = mag[i, j]
        for ii, jj in _neighbours(i, j, n_theta, n_phi):
            if not region[ii, jj] and mag[ii, jj] <= level:
                region[ii, jj] = True
                queue.append((ii, jj))
    return region


def _index_of(pattern, direction):
    if direction is None:
        return pattern.peak_index()
    theta, phi = direction
    i = int(np.argmin(np.abs(pattern.theta - theta)))
    return i, _nearest_phi(pattern.phi, phi)


def sidelobe_level(pattern: FarFieldPattern, peak_direction=None) -> float:
    """Strongest lobe outside the main-lobe descent region, dB below the peak.

    Returns ``-inf`` when nothing lies outside, e.g. for tiny arrays.
    """
    start = _index_of(pattern, peak_direction)
    region = descent_region(pattern, start)
    mag = np.abs(pattern.field)
    outside = mag[~region]
    if outside.size == 0 or outside.max() <= 0:
        return float("-inf")
    return float(20 * np.log10(outside.max() / mag[start]))


def main_lobe_mask(pattern: FarFieldPattern, floor_db: float = -10.0, start=None) -> np.ndarray:
    """Connected samples around the peak within ``floor_db`` of it."""
    mag = np.abs(pattern.field)
    if start is None:
        start = pattern.peak_index()
    keep = mag >= mag[start] * 10 ** (floor_db / 20)
    n_theta, n_phi = mag.shape
    mask = np.zeros(mag.shape, dtype=bool)
    mask[start] = True
    queue = deque([start])
    while queue:
        i, j = queue.popleft()
        for ii, jj in _neighbours(i, j, n_theta, n_phi):
            if keep[ii, jj] and not mask[ii, jj]:
                mask[ii, jj] = True
                queue.append((ii, jj))
    return mask


def main_lobe_correlation(reference: FarFieldPattern, other: FarFieldPattern, floor_db=-10.0) -> float:
    """Normalized correlation of |E| over the reference pattern's main lobe."""
    if reference.field.shape != other.field.shape:
        raise ValueError("patterns must share a grid")
    mask = main_lobe_mask(reference, floor_db)
    a = np.abs(reference.field[mask])
    b = np.abs(other.field[mask])
    return float(np.dot(a, b) / math.sqrt(np.dot(a, a) * np.dot(b, b)))


def angular_separation(dir_a, dir_b) -> float:
    """Great-circle angle between two (theta, phi) directions, radians."""
    def vec(t, p):
        return np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])

    c = float(np.clip(np.dot(vec(*dir_a), vec(*dir_b)), -1.0, 1.0))
    return math.acos(c)


@dataclass(frozen=True)
class ModeSpectrum:
    """Power fraction per azimuthal mode on one ring.

    ``fractions`` sum to 1 over ``modes``; ``captured`` is the share of the
    ring's total power that falls in those modes.
    """

    modes: np.ndarray
    fractions: np.ndarray
    ring_theta: float
    captured: float

    def dominant(self) -> int:
        return int(self.modes[int(np.argmax(self.fractions))])

    def fraction(self, mode: int) -> float:
        hit = np.flatnonzero(self.modes == mode)
        if hit.size == 0:
            raise KeyError(mode)
        return float(self.fractions[hit[0]])


def ring_index(pattern: FarFieldPattern, ring_theta: float) -> int:
    th = pattern.theta
    if not (th.min() - 1e-12 <= ring_theta <= th.max() + 1e-12):
        raise DomainError(f"ring theta {ring_theta} outside the sampled grid")
    return int(np.argmin(np.abs(th - ring_theta)))


def oam_mode_spectrum(pattern: FarFieldPattern, ring_theta: float, max_mode: int) -> ModeSpectrum:
    """Azimuthal Fourier decomposition of the field on the ring at ``ring_theta``."""
    if max_mode < 0:
        raise ValueError("max_mode must be non-negative")
    n_phi = pattern.phi.size
    if n_phi < 4 * max_mode + 2:
        raise DomainError(f"ring has {n_phi} samples; need at least {4 * max_mode + 2}")
    step = 2 * np.pi / n_phi
    if not np.allclose(np.diff(pattern.phi), step, rtol=0, atol=1e-9):
        raise DomainError("ring samples must be uniform in phi")
    i = ring_index(pattern, ring_theta)
    ring = pattern.field[i]
    coeffs = np.fft.fft(ring) / n_phi
    power = np.abs(coeffs) ** 2
    modes = np.arange(-max_mode, max_mode + 1)
    sel = power[modes % n_phi]
    total = float(power.sum())
    if total <= 0:
        raise DomainError("no field on the ring")
    kept = float(sel.sum())
    return ModeSpectrum(modes, sel / kept, float(pattern.theta[i]), kept / total)


def intensity_ring_theta(pattern: FarFieldPattern, max_theta_deg: float = 45.0) -> float:
    """Polar angle where the azimuth-averaged intensity peaks."""
    lim = pattern.theta <= math.radians(max_theta_deg)
    ring = pattern.intensity.mean(axis=1)
    i = int(np.argmax(np.where(lim, ring, -np.inf)))
    return float(pattern.theta[i])


@dataclass
class NearFieldPlane:
    """Complex field sampled on a plane ``z = z_plane``; ``field[iy, ix]``."""

    z: float
    x: np.ndarray
    y: np.ndarray
    field: np.ndarray
    frequency: float

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.field = np.asarray(self.field, dtype=complex)
        if self.field.shape != (self.y.size, self.x.size):
            raise ValueError("plane field must have shape (len(y), len(x))")
        if self.x.size < 2 or self.y.size < 2:
            raise ValueError("plane needs at least two samples per axis")
        dx, dy = np.diff(self.x), np.diff(self.y)
        if not (np.allclose(dx, dx[0]) and np.allclose(dy, dy[0])) or dx[0] <= 0 or dy[0] <= 0:
            raise ValueError("plane samples must be uniform and increasing")

    @property
    def pitch(self):
        return float(self.x[1] - self.x[0]), float(self.y[1] - self.y[0])

    def check_sampling(self):
        lam = FrequencySpec(self.frequency).wavelength
        if max(self.pitch) > lam / 2 * (1 + 1e-9):
            raise DomainError(
                f"plane pitch {max(self.pitch):.4g} m exceeds lambda/2 = {lam / 2:.4g} m"
            )

    def interpolate(self, xs, ys):
        """Bilinear complex interpolation at arbitrary in-plane points."""
        f = RegularGridInterpolator((self.y, self.x), self.field, method="linear")
        return f(np.column_stack([np.ravel(ys), np.ravel(xs)]))


def plane_grid(geometry: ArrayGeometry, freq: FrequencySpec, extent_factor=1.5, pitch_wl=0.45):
    """Default sample coordinates: ``extent_factor`` times the array span at
    ``pitch_wl`` wavelengths, centred on the array axis."""
    lam = freq.wavelength
    pitch = pitch_wl * lam
    span = max(geometry.rows, geometry.cols) * geometry.pitch * extent_factor
    half = int(math.ceil(span / 2 / pitch))
    coords = np.arange(-half, half + 1) * pitch
    return coords, coords.copy()


def sample_near_field(
    geometry: ArrayGeometry,
    freq: FrequencySpec,
    coding: CodingMatrix,
    response: MetaAtomResponse,
    feed: FeedModel,
    z: Optional[float] = None,
    x=None,
    y=None,
) -> NearFieldPlane:
    """Exact spherical-wave sum of the element fields on a plane at ``z``.

    Defaults: ``z = 2*lambda`` and the :func:`plane_grid` sampling.
    """
    coding.check_geometry(geometry)
    lam, k = freq.wavelength, freq.wavenumber
    if z is None:
        z = 2 * lam
    if z <= 0:
        raise DomainError("near-field plane must lie in front of the array (z > 0)")
    if x is None or y is None:
        gx, gy = plane_grid(geometry, freq)
        x = gx if x is None else x
        y = gy if y is None else y
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = illuminate(geometry, freq, feed) * reflection_weights(coding, response, freq.carrier)
    EX, EY = geometry.grid()
    SY, SX = np.meshgrid(y, x, indexing="ij")
    vals = kernels.near_field(a, EX, EY, SX, SY, z, k)
    scale = k * geometry.cell_area / (2 * np.pi)
    plane = NearFieldPlane(z, x, y, scale * vals.reshape(SY.shape), freq.carrier)
    plane.check_sampling()
    return plane


def nf_to_ff(plane: NearFieldPlane, theta=None, phi=None, pad: int = 8) -> FarFieldPattern:
    """Plane-wave-spectrum transform of a sampled plane to the far field.

    The zero-padded 2-D FFT gives the spectrum on a (kx, ky) grid. It is
    back-propagated to z = 0 and read off at ``kx = k sin(theta) cos(phi)``,
    ``ky = k sin(theta) sin(phi)``. The far field is then
    ``j k cos(theta) / (2*pi) * spectrum``.
    """
    plane.check_sampling()
    if pad < 2:
        raise ValueError("zero-padding factor must be at least 2")
    if theta is None or phi is None:
        t0, p0 = default_grid()
        theta = t0 if theta is None else theta
        phi = p0 if phi is None else phi
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    freq = FrequencySpec(plane.frequency)
    k = freq.wavenumber
    dx, dy = plane.pitch
    ny, nx = plane.field.shape
    Nx = 1 << int(math.ceil(math.log2(pad * nx)))
    Ny = 1 << int(math.ceil(math.log2(pad * ny)))
    # sum E exp(+j(kx x + ky y)) == N * ifft for kx = 2*pi*p/(N*dx)
    spec = np.fft.ifft2(plane.field, s=(Ny, Nx)) * (Nx * Ny) * dx * dy
    kx = 2 * np.pi * np.fft.fftfreq(Nx, dx)
    ky = 2 * np.pi * np.fft.fftfreq(Ny, dy)
    spec = spec * np.exp(1j * (ky[:, None] * plane.y[0] + kx[None, :] * plane.x[0]))
    spec = np.fft.fftshift(spec)
    kx = np.fft.fftshift(kx)
    ky = np.fft.fftshift(ky)
    KY, KX = np.meshgrid(ky, kx, indexing="ij")
    kz = np.sqrt(np.maximum(k**2 - KX**2 - KY**2, 0.0))
    propagating = KX**2 + KY**2 <= k**2
    spec = np.where(propagating, spec * np.exp(1j * kz * plane.z), 0.0)
    interp = RegularGridInterpolator((ky, kx), spec, method="linear", bounds_error=False, fill_value=0.0)
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    pts = np.column_stack([(k * np.sin(TH) * np.sin(PH)).ravel(), (k * np.sin(TH) * np.cos(PH)).ravel()])
    S = interp(pts).reshape(TH.shape)
    E = 1j * k * np.cos(TH) / (2 * np.pi) * S
    return FarFieldPattern(theta, phi, E, plane.frequency)


def _fmt(v: float) -> str:
    return format(float(v), ".10g")


def far_field_csv(pattern: FarFieldPattern) -> str:
    """``theta_deg,phi_deg,re,im,mag_db`` rows, theta-major; dB relative to peak."""
    mag = np.abs(pattern.field)
    peak = mag.max()
    with np.errstate(divide="ignore"):
        db = np.where(mag > 0, 20 * np.log10(mag / peak), -400.0) if peak > 0 else np.full(mag.shape, -400.0)
    db = np.maximum(db, -400.0)
    th = np.degrees(pattern.theta)
    ph = np.degrees(pattern.phi)
    lines = ["theta_deg,phi_deg,re,im,mag_db"]
    for i in range(th.size):
        t = _fmt(th[i])
        for j in range(ph.size):
            e = pattern.field[i, j]
            lines.append(f"{t},{_fmt(ph[j])},{_fmt(e.real)},{_fmt(e.imag)},{_fmt(db[i, j])}")
    return "\n".join(lines) + "\n"


def near_field_csv(plane: NearFieldPlane) -> str:
    """``x_m,y_m,re,im`` rows, y-major."""
    lines = ["x_m,y_m,re,im"]
    for iy, yv in enumerate(plane.y):
        ys = _fmt(yv)
        for ix, xv in enumerate(plane.x):
            e = plane.field[iy, ix]
            lines.append(f"{_fmt(xv)},{ys},{_fmt(e.real)},{_fmt(e.imag)}")
    return "\n".join(lines) + "\n"


def mode_spectrum_csv(spectrum: ModeSpectrum) -> str:
    lines = ["mode,fraction"]
    lines.extend(f"{int(m)},{_fmt(f)}" for m, f in zip(spectrum.modes, spectrum.fractions))
    return "\n".join(lines) + "\n"


def read_far_field_csv(path) -> FarFieldPattern:
    a = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    th = np.unique(a[:, 0])
    ph = np.unique(a[:, 1])
    E = (a[:, 2] + 1j * a[:, 3]).reshape(th.size, ph.size)
    return FarFieldPattern(np.radians(th), np.radians(ph), E, float("nan"))


def phase_winding(plane: NearFieldPlane, radius: float, n: int = 720, centre=(0.0, 0.0)) -> float:
    """Net phase advance around a counterclockwise circle, in turns."""
    a = np.linspace(0, 2 * np.pi, n, endpoint=False)
    xs = centre[0] + radius * np.cos(a)
    ys = centre[1] + radius * np.sin(a)
    vals = plane.interpolate(xs, ys)
    d = np.angle(np.roll(vals, -1) / vals)
    return float(d.sum() / (2 * np.pi))


def intensity_ring_radius(plane: NearFieldPlane, n_radii: int = 64, n: int = 720) -> float:
    """Radius where the azimuth-averaged plane intensity peaks.

    Radii run from one sample pitch to 90 % of the plane's half-extent.
    """
    half = min(-plane.x[0], plane.x[-1], -plane.y[0], plane.y[-1])
    lo = max(plane.pitch)
    if half * 0.9 <= lo:
        raise DomainError("plane too small to hold a ring around the axis")
    radii = np.linspace(lo, 0.9 * half, n_radii)
    a = np.linspace(0, 2 * np.pi, n, endpoint=False)
    xs = np.outer(radii, np.cos(a))
    ys = np.outer(radii, np.sin(a))
    power = (np.abs(plane.interpolate(xs, ys)) ** 2).reshape(radii.size, n).mean(axis=1)
    return float(radii[int(np.argmax(power))])


def winding_number(plane: NearFieldPlane, radius: Optional[float] = None, n: int = 720) -> int:
    """Integer phase winding around the axis on the bright ring (or ``radius``)."""
    if radius is None:
        radius = intensity_ring_radius(plane, n=n)
    return int(round(phase_winding(plane, radius, n)))
