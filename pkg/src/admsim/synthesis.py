"""Test-signal generators: LNA-scaled sines, band-limited background noise and
background-plus-burst composites standing in for filtered iEEG."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .adaptive import lpf_first_order
from .errors import InvalidSpec
from .types import Signal

KINDS = ("sine", "band_noise", "hfo_composite")

# keeps windowed burst samples away from exact zeros of the carrier
BURST_PHASE_RAD = 0.5


class Burst(NamedTuple):
    start_s: float
    duration_s: float
    center_hz: float
    amplitude: float


@dataclass(frozen=True)
class SynthSpec:
    """What to generate.

    ``amplitude`` is the peak amplitude for ``sine`` and the RMS of the
    background for the noise kinds. ``gain_db`` models an ideal amplifier
    applied to the whole output. ``filter_order`` is the number of cascaded
    first-order sections at each band edge.
    """

    kind: str = "sine"
    amplitude: float = 1.0
    frequency_hz: float = 10.0
    band: tuple[float, float] = (80.0, 250.0)
    duration_s: float = 1.0
    sample_rate_hz: float = 2000.0
    seed: int = 0
    gain_db: float = 0.0
    bursts: tuple[Burst, ...] = field(default_factory=tuple)
    filter_order: int = 4

    def __post_init__(self):
        object.__setattr__(self, "band", tuple(float(b) for b in self.band))
        object.__setattr__(self, "bursts", tuple(Burst(*map(float, b)) for b in self.bursts))
        self.validate()

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))

    @property
    def gain(self) -> float:
        return 10.0 ** (self.gain_db / 20.0)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise InvalidSpec(f"kind must be one of {KINDS}, got {self.kind!r}")
        for name in ("amplitude", "frequency_hz", "duration_s", "sample_rate_hz", "gain_db"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidSpec(f"{name} must be finite")
        if not self.sample_rate_hz > 0:
            raise InvalidSpec("sample_rate_hz must be > 0")
        if not self.duration_s > 0 or self.n_samples < 1:
            raise InvalidSpec("duration_s must cover at least one sample")
        if self.amplitude < 0:
            raise InvalidSpec("amplitude must be >= 0")
        nyquist = self.sample_rate_hz / 2
        if self.kind == "sine":
            if not 0 <= self.frequency_hz < nyquist:
                raise InvalidSpec(f"frequency_hz must be in [0, {nyquist}) Hz")
            return
        lo, hi = self.band
        if len(self.band) != 2 or not 0 < lo < hi < nyquist:
            raise InvalidSpec(f"band must satisfy 0 < low < high < {nyquist} Hz, got {self.band}")
        if self.filter_order < 1:
            raise InvalidSpec("filter_order must be >= 1")
        if self.kind == "band_noise" and self.bursts:
            raise InvalidSpec("bursts are only valid for hfo_composite")
        for b in self.bursts:
            if b.start_s < 0 or b.duration_s <= 0 or b.start_s + b.duration_s > self.duration_s + 1e-12:
                raise InvalidSpec(f"burst {b} does not fit in {self.duration_s} s")
            if not lo <= b.center_hz <= hi:
                raise InvalidSpec(f"burst centre {b.center_hz} Hz outside band {self.band}")


def _sine(spec: SynthSpec) -> np.ndarray:
    t = np.arange(spec.n_samples) / spec.sample_rate_hz
    return spec.amplitude * np.sin(2 * np.pi * spec.frequency_hz * t)


def _band_noise(spec: SynthSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    fs = spec.sample_rate_hz
    sig = Signal(rng.standard_normal(spec.n_samples), fs)
    lo, hi = spec.band
    tau_lo = 1.0 / (2 * np.pi * lo)
    tau_hi = 1.0 / (2 * np.pi * hi)
    for _ in range(spec.filter_order):
        sig = sig.with_samples(sig.samples - lpf_first_order(sig, tau_lo).samples)
    for _ in range(spec.filter_order):
        sig = lpf_first_order(sig, tau_hi)
    x = sig.samples
    rms = float(np.sqrt(np.mean(x**2)))
    if spec.amplitude == 0 or rms == 0:
        return np.zeros_like(x)
    return x * (spec.amplitude / rms)


def burst_span(burst: Burst, sample_rate_hz: float) -> tuple[int, int]:
    """Sample range ``[start, stop)`` touched by ``burst``."""
    i0 = int(round(burst.start_s * sample_rate_hz))
    return i0, i0 + int(round(burst.duration_s * sample_rate_hz))


def burst_waveform(burst: Burst, sample_rate_hz: float) -> np.ndarray:
    """Hann-windowed tone; the window excludes its zero end-points so every
    sample of the span is modified."""
    i0, i1 = burst_span(burst, sample_rate_hz)
    n = i1 - i0
    w = np.hanning(n + 2)[1:-1]
    t = np.arange(n) / sample_rate_hz
    return burst.amplitude * w * np.sin(2 * np.pi * burst.center_hz * t + BURST_PHASE_RAD)


def _hfo_composite(spec: SynthSpec) -> np.ndarray:
    x = _band_noise(spec).copy()
    for b in spec.bursts:
        i0, i1 = burst_span(b, spec.sample_rate_hz)
        i1 = min(i1, x.size)
        x[i0:i1] += burst_waveform(b, spec.sample_rate_hz)[: i1 - i0]
    return x


def synthesize(spec: SynthSpec) -> Signal:
    raw = {"sine": _sine, "band_noise": _band_noise, "hfo_composite": _hfo_composite}[spec.kind](spec)
    if spec.gain_db != 0:
        raw = raw * spec.gain
    return Signal(raw, spec.sample_rate_hz)


def synth_sine(spec: SynthSpec) -> Signal:
    return synthesize(_as_kind(spec, "sine"))


def synth_band_noise(spec: SynthSpec) -> Signal:
    return synthesize(_as_kind(spec, "band_noise"))


def synth_hfo_composite(spec: SynthSpec) -> Signal:
    return synthesize(_as_kind(spec, "hfo_composite"))


def _as_kind(spec: SynthSpec, kind: str) -> SynthSpec:
    if spec.kind == kind:
        return spec
    if kind == "band_noise":
        return replace(spec, kind=kind, bursts=())
    return replace(spec, kind=kind)


def burst_mask(spec: SynthSpec) -> np.ndarray:
    """True on every sample covered by a burst."""
    mask = np.zeros(spec.n_samples, dtype=bool)
    for b in spec.bursts:
        i0, i1 = burst_span(b, spec.sample_rate_hz)
        mask[i0:i1] = True
    return mask


def default_hfo_spec(seed: int = 0) -> SynthSpec:
    """Background at 2 kHz filtered to 80-250 Hz with three HFO-like bursts."""
    return SynthSpec(
        kind="hfo_composite",
        amplitude=1.0,
        band=(80.0, 250.0),
        duration_s=8.0,
        sample_rate_hz=2000.0,
        seed=seed,
        bursts=(
            Burst(3.0, 0.1, 150.0, 6.0),
            Burst(4.6, 0.08, 200.0, 6.0),
            Burst(6.2, 0.12, 120.0, 6.0),
        ),
    )
