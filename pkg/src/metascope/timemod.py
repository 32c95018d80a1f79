"""Time-modulated direction finding.

Each subarray switches its reflection between +1 and -1 once per modulation
period. The received signal then carries harmonics at multiples of the
modulation frequency. The ratio of the first harmonic to the fundamental
encodes the incidence angle along the strip axis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import ArrayGeometry, Direction, DomainError, FrequencySpec, signed_angle

# R / tan(pi D/lambda * direction cosine) for the default two-subarray plan
RATIO_CONSTANT = -2 * (1 + 1j) / math.pi
DEFAULT_MAX_HARMONIC = 8


@dataclass(frozen=True)
class ModulationPlan:
    """Periodic +-1 sequences for a set of strip subarrays.

    Subarray ``n`` (1-based, strips ordered by increasing coordinate along
    ``axis``) holds +1 during slot ``slots[n-1]`` of ``n_slots`` equal slots,
    i.e. on ``((s-1)/n_slots * T, s/n_slots * T]``, and -1 elsewhere.
    ``spacing`` is the distance between neighbouring strip phase centres.
    """

    period: float = 10e-6
    n_slots: int = 4
    slots: tuple = (3, 1)
    axis: str = "x"
    spacing: Optional[float] = None
    samples_per_period: int = 128
    n_periods: int = 8

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(int(s) for s in self.slots))
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValueError("modulation period must be positive and finite")
        if self.n_slots < 1:
            raise ValueError("n_slots must be at least 1")
        if not self.slots:
            raise ValueError("plan needs at least one subarray")
        if any(not 1 <= s <= self.n_slots for s in self.slots):
            raise ValueError(f"slot indices must lie in 1..{self.n_slots}")
        if self.axis not in ("x", "y"):
            raise ValueError("axis must be 'x' or 'y'")
        if self.spacing is not None and not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if self.samples_per_period < 1 or self.n_periods < 1:
            raise ValueError("samples_per_period and n_periods must be positive")

    @classmethod
    def uniform(cls, n_sub: int, **kw) -> "ModulationPlan":
        """Subarray ``n`` holds slot ``n`` of ``n_sub``: the staggered identity plan."""
        return cls(n_slots=n_sub, slots=tuple(range(1, n_sub + 1)), **kw)

    @classmethod
    def direction_finding(cls, axis: str, spacing: float, **kw) -> "ModulationPlan":
        """Two strips on quarter-period slots 3 and 1 of a 4-slot frame.

        This gives ``a_0 = -1/2`` and first harmonics ``+-(1-j)/pi``, so the
        harmonic ratio is ``-2(1+j)/pi * tan(pi D/lambda * direction cosine)``.
        """
        return cls(n_slots=4, slots=(3, 1), axis=axis, spacing=spacing, **kw)

    @property
    def n_subarrays(self) -> int:
        return len(self.slots)

    @property
    def modulation_frequency(self) -> float:
        return 1.0 / self.period

    def sample_times(self) -> np.ndarray:
        """Sample instants at the centre of each sampling interval."""
        k = self.samples_per_period
        return (np.arange(k * self.n_periods) + 0.5) * (self.period / k)

    def sequence(self, n: int, t) -> np.ndarray:
        """Value of ``g_n`` at times ``t`` (seconds)."""
        s = self._slot(n)
        frac = np.mod(np.asarray(t, dtype=float) / self.period, 1.0)
        lo, hi = (s - 1) / self.n_slots, s / self.n_slots
        # slot is open at its start, closed at its end; frac == 0 is the end of the previous period
        on = ((frac > lo) & (frac <= hi)) | ((frac == 0.0) & (s == self.n_slots))
        return np.where(on, 1.0, -1.0)

    def _slot(self, n: int) -> int:
        if not 1 <= n <= self.n_subarrays:
            raise IndexError(f"subarray {n} outside 1..{self.n_subarrays}")
        return self.slots[n - 1]


def fourier_coefficient(plan: ModulationPlan, n: int, h: int) -> complex:
    """Closed-form ``(1/T) * integral g_n(t) exp(-j 2 pi h t / T) dt`` over one period."""
    s = plan._slot(n)
    S = plan.n_slots
    if h == 0:
        return complex(-1.0 + 2.0 / S)
    # g = -1 + 2 * indicator(slot); the constant drops out for h != 0
    w = -2j * math.pi * h / S
    return complex(1j / (math.pi * h) * (np.exp(w * s) - np.exp(w * (s - 1))))


def harmonic_envelope(plan: ModulationPlan, max_order: int):
    """RMS coefficient magnitude over subarrays for orders ``-H..H``, peak-normalized.

    Returns (orders, amplitudes). Coefficients depend on ``t / T`` only, so the
    envelope does not change with the period.
    """
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    orders = np.arange(-max_order, max_order + 1)
    amp = np.array(
        [
            math.sqrt(np.mean([abs(fourier_coefficient(plan, n, int(h))) ** 2 for n in range(1, plan.n_subarrays + 1)]))
            for h in orders
        ]
    )
    return orders, amp / amp.max()


def strip_labels(geometry: ArrayGeometry, plan: ModulationPlan) -> np.ndarray:
    """1-based subarray label for every element, (M, N).

    Strips are contiguous groups of rows (axis x) or columns (axis y) in order
    of increasing coordinate.
    """
    count = geometry.rows if plan.axis == "x" else geometry.cols
    if plan.n_subarrays > count:
        raise DomainError(f"{plan.n_subarrays} strips do not fit {count} lines of elements")
    groups = np.array_split(np.arange(count), plan.n_subarrays)
    line_label = np.empty(count, dtype=int)
    for n, g in enumerate(groups, start=1):
        line_label[g] = n
    if plan.axis == "x":
        return np.repeat(line_label[:, None], geometry.cols, axis=1)
    return np.repeat(line_label[None, :], geometry.rows, axis=0)


def strip_spacing(geometry: ArrayGeometry, axis: str, n_sub: int = 2) -> float:
    """Mean distance between neighbouring strip phase centres."""
    coords = geometry.x if axis == "x" else geometry.y
    if n_sub < 2 or n_sub > coords.size:
        raise DomainError(f"cannot form {n_sub} strips from {coords.size} lines")
    centres = [coords[g].mean() for g in np.array_split(np.arange(coords.size), n_sub)]
    return float(np.mean(np.diff(centres)))


def df_cell_geometry(freq: FrequencySpec, focal_length: float) -> ArrayGeometry:
    """2x2 cell at half-wavelength pitch: two strips per axis, spaced lambda/2."""
    return ArrayGeometry(2, 2, freq.wavelength / 2, focal_length)


def default_plans(geometry: ArrayGeometry, **kw):
    """Lateral (x) and vertical (y) direction-finding plans for ``geometry``."""
    return (
        ModulationPlan.direction_finding("x", strip_spacing(geometry, "x"), **kw),
        ModulationPlan.direction_finding("y", strip_spacing(geometry, "y"), **kw),
    )


def _check_sampling(plan: ModulationPlan, max_order: int):
    k = plan.samples_per_period
    if k < 2 * max_order:
        raise DomainError(f"{k} samples per period cannot resolve harmonic {max_order}")
    if k % plan.n_slots:
        raise DomainError("samples_per_period must be a multiple of n_slots")


def subarray_weights(
    geometry: ArrayGeometry, freq: FrequencySpec, plan: ModulationPlan, incident: Direction
) -> np.ndarray:
    """Static complex path weight of each subarray, incident wave to feed."""
    k = freq.wavenumber
    r = incident.unit_vector()
    X, Y = geometry.grid()
    L = geometry.feed_distances()
    w = np.exp(1j * k * (X * r[0] + Y * r[1])) * np.exp(-1j * k * L) / L
    labels = strip_labels(geometry, plan)
    return np.array([w[labels == n].sum() for n in range(1, plan.n_subarrays + 1)])


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def synthesize_received(
    geometry: ArrayGeometry,
    freq: FrequencySpec,
    plan: ModulationPlan,
    incident: Direction,
    snr_db: Optional[float] = None,
    rng_seed=None,
    max_order: int = DEFAULT_MAX_HARMONIC,
) -> np.ndarray:
    """Complex baseband at the feed over ``plan.n_periods`` periods.

    Reflection states are +-1 (no absorption state). With ``snr_db`` set,
    complex white Gaussian noise is added per sample with power
    ``|fundamental|^2 / 10**(snr_db/10)``.
    """
    _check_sampling(plan, max_order)
    if snr_db is not None and not math.isfinite(snr_db):
        raise DomainError(f"SNR must be finite, got {snr_db}")
    if plan.modulation_frequency > freq.carrier / 1e4:
        warnings.warn("modulation frequency is not much smaller than the carrier", RuntimeWarning, stacklevel=2)
    W = subarray_weights(geometry, freq, plan, incident)
    t = plan.sample_times()
    U = np.stack([plan.sequence(n, t) for n in range(1, plan.n_subarrays + 1)])
    signal = W @ U
    if snr_db is None:
        return signal.astype(complex)
    fundamental = sum(fourier_coefficient(plan, n, 0) * W[n - 1] for n in range(1, plan.n_subarrays + 1))
    ref = abs(fundamental) ** 2
    if ref == 0:
        # noise is referenced to the fundamental; a zero-DC plan has none
        raise DomainError("fundamental component is zero; SNR is undefined")
    sigma = math.sqrt(ref / 10 ** (snr_db / 10) / 2)
    noise = _rng(rng_seed).standard_normal((2, t.size))
    return signal + sigma * (noise[0] + 1j * noise[1])


@dataclass(frozen=True)
class HarmonicSet:
    """Complex Fourier coefficients of the received signal for orders ``-H..H``."""

    orders: np.ndarray
    amplitudes: np.ndarray

    def at(self, h: int) -> complex:
        hit = np.flatnonzero(self.orders == h)
        if hit.size == 0:
            raise KeyError(h)
        return complex(self.amplitudes[hit[0]])

    def normalized(self, reference: complex) -> np.ndarray:
        return self.amplitudes / reference


def extract_harmonics(signal, plan: ModulationPlan, max_order: int = DEFAULT_MAX_HARMONIC) -> HarmonicSet:
    """DFT bins at ``h * F_p`` mapped to continuous Fourier coefficients.

    The baseband is constant over each sampling interval, so the bin value is
    corrected by the interval's zero-order-hold response.
    """
    x = np.asarray(signal, dtype=complex)
    K = plan.samples_per_period
    if x.size == 0 or x.size % K:
        raise DomainError(f"{x.size} samples is not a whole number of {K}-sample periods")
    _check_sampling(plan, max_order)
    n_per = x.size // K
    X = np.fft.fft(x) / x.size
    orders = np.arange(-max_order, max_order + 1)
    bins = X[(orders * n_per) % x.size]
    hold = np.exp(-1j * np.pi * orders / K) * np.sinc(orders / K)
    return HarmonicSet(orders, bins * hold)


def harmonic_ratio(harmonics: HarmonicSet, rel_floor: float = 1e-12) -> complex:
    """First harmonic over fundamental."""
    a0 = harmonics.at(0)
    scale = float(np.abs(harmonics.amplitudes).max())
    if abs(a0) <= rel_floor * scale or a0 == 0:
        raise DomainError("fundamental vanishes; harmonic ratio undefined")
    return harmonics.at(1) / a0


@dataclass(frozen=True)
class DfEstimate:
    theta: float
    phi: float
    r1: complex
    r2: complex
    u: float
    v: float
    phi_defined: bool = True
    residue: float = 0.0

    def signed_degrees(self):
        """(signed theta, cut-plane phi) in degrees; see :func:`signed_angle`."""
        return signed_angle(self.theta, self.phi)


def estimate_direction(
    r1: complex,
    r2: complex,
    plan: ModulationPlan,
    freq: FrequencySpec,
    undefined_tol: float = 1e-12,
) -> DfEstimate:
    """Invert the lateral and vertical harmonic ratios to (theta, phi).

    ``u = arctan(Re(R1/c))`` and ``v = arctan(Re(R2/c))`` give
    ``pi D/lambda`` times the two direction cosines. ``residue`` is the larger
    imaginary part of ``R/c``, which the ideal model makes zero.
    """
    if not (np.isfinite(r1) and np.isfinite(r2)):
        raise DomainError("harmonic ratios must be finite")
    if plan.spacing is None:
        raise ValueError("plan has no phase-centre spacing")
    lam = freq.wavelength
    if plan.spacing > lam / 2 * (1 + 1e-9):
        warnings.warn(
            f"spacing {plan.spacing:.4g} m exceeds lambda/2; angle estimates are ambiguous",
            RuntimeWarning,
            stacklevel=2,
        )
    q1, q2 = r1 / RATIO_CONSTANT, r2 / RATIO_CONSTANT
    u, v = math.atan(q1.real), math.atan(q2.real)
    residue = max(abs(q1.imag), abs(q2.imag))
    rho = math.hypot(u, v)
    s = lam * rho / (math.pi * plan.spacing)
    if s > 1 + 1e-12:
        raise DomainError(f"estimate out of range: sin(theta) = {s:.6g} > 1")
    theta = math.asin(min(s, 1.0))
    if rho <= undefined_tol:
        return DfEstimate(0.0, 0.0, complex(r1), complex(r2), u, v, False, residue)
    phi = math.atan2(v, u) % (2 * math.pi)
    return DfEstimate(theta, phi, complex(r1), complex(r2), u, v, True, residue)


def measure_ratio(geometry, freq, plan, incident, snr_db, rng) -> complex:
    sig = synthesize_received(geometry, freq, plan, incident, snr_db, rng)
    return harmonic_ratio(extract_harmonics(sig, plan))


def trial_seed(master: int, angle_index: int, trial: int) -> int:
    """Independent 64-bit sub-seed for one (angle, trial) work unit."""
    ss = np.random.SeedSequence([int(master), int(angle_index), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class DfRecord:
    preset: Direction
    estimate: DfEstimate
    trial: int
    seed: int

    @property
    def error_deg(self) -> float:
        return self.estimate.signed_degrees()[0] - signed_angle(self.preset.theta, self.preset.phi)[0]


@dataclass
class DfResult:
    records: list = field(default_factory=list)
    rmse_deg: list = field(default_factory=list)
    presets: list = field(default_factory=list)

    def max_abs_error(self) -> float:
        return max(abs(r.error_deg) for r in self.records)


def df_experiment(
    geometry: ArrayGeometry,
    freq: FrequencySpec,
    plan_x: ModulationPlan,
    plan_y: ModulationPlan,
    angles: Sequence[Direction],
    trials: int = 3,
    snr_db: Optional[float] = 20.0,
    rng_seed: int = 0,
    repeat_trials: bool = False,
) -> DfResult:
    """Lateral then vertical modulation phase per trial; RMSE over trials per angle.

    Each (angle, trial) unit draws from its own sub-seed, so results do not
    depend on evaluation order. ``repeat_trials`` reuses trial 0's seed for
    every trial.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if plan_x.axis != "x" or plan_y.axis != "y":
        raise ValueError("plan_x must modulate along x and plan_y along y")
    result = DfResult()
    for i, d in enumerate(angles):
        errs = []
        for tr in range(trials):
            seed = trial_seed(rng_seed, i, 0 if repeat_trials else tr)
            rng = np.random.default_rng(seed)
            r1 = measure_ratio(geometry, freq, plan_x, d, snr_db, rng)
            r2 = measure_ratio(geometry, freq, plan_y, d, snr_db, rng)
            rec = DfRecord(d, estimate_direction(r1, r2, plan_x, freq), tr, seed)
            result.records.append(rec)
            errs.append(rec.error_deg)
        result.presets.append(d)
        result.rmse_deg.append(_rms(errs))
    return result


def _rms(values) -> float:
    # scaled by the largest magnitude so equal values return exactly that magnitude
    a = np.abs(np.asarray(values, dtype=float))
    top = float(a.max())
    if top == 0 or not math.isfinite(top):
        return top
    return top * math.sqrt(float(np.mean(np.square(a / top))))


def _fmt(v) -> str:
    return format(float(v), ".10g")


def estimates_csv(result: DfResult) -> str:
    lines = ["theta_preset_deg,phi_preset_deg,theta_est_deg,phi_est_deg,trial,seed"]
    for r in result.records:
        tp, pp = signed_angle(r.preset.theta, r.preset.phi)
        te, pe = r.estimate.signed_degrees()
        lines.append(f"{_fmt(tp)},{_fmt(pp)},{_fmt(te)},{_fmt(pe)},{r.trial},{r.seed}")
    return "\n".join(lines) + "\n"


def rmse_csv(result: DfResult) -> str:
    lines = ["theta_preset_deg,rmse_deg"]
    for d, e in zip(result.presets, result.rmse_deg):
        lines.append(f"{_fmt(signed_angle(d.theta, d.phi)[0])},{_fmt(e)}")
    return "\n".join(lines) + "\n"


def envelope_csv(orders, amplitudes) -> str:
    lines = ["order,amplitude"]
    lines.extend(f"{int(h)},{_fmt(a)}" for h, a in zip(orders, amplitudes))
    return "\n".join(lines) + "\n"
