"""Core value types: sampled signals, UP/DN events and encoder configs.

Event times are kept as integer sample indices; seconds only appear at the
I/O boundary (``index / sample_rate_hz``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    EmptySignal,
    InvalidConfig,
    InvalidGainCode,
    InvalidSampleRate,
    NonFiniteSample,
)


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled real-valued trace.

    ``samples`` is stored as a read-only float64 array. Construction does not
    reject empty or non-finite data; call :func:`validate_signal` for that.
    """

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return np.arange(len(self)) / self.sample_rate_hz

    def with_samples(self, samples) -> "Signal":
        """Same rate, new samples."""
        return Signal(samples, self.sample_rate_hz)


def validate_signal(signal: Signal) -> None:
    """Raise if ``signal`` is not usable for processing.

    Raises
    ------
    InvalidSampleRate
        Rate is not a positive finite number.
    EmptySignal
        No samples.
    NonFiniteSample
        First NaN/Inf sample, with its index.
    """
    fs = signal.sample_rate_hz
    if not (math.isfinite(fs) and fs > 0):
        raise InvalidSampleRate(f"sample rate must be > 0, got {fs!r}")
    if len(signal) == 0:
        raise EmptySignal("signal has no samples")
    bad = np.flatnonzero(~np.isfinite(signal.samples))
    if bad.size:
        raise NonFiniteSample(int(bad[0]))


class Polarity(enum.IntEnum):
    DN = -1
    UP = 1

    @property
    def sign(self) -> int:
        return int(self)


UP = Polarity.UP
DN = Polarity.DN


class Event(NamedTuple):
    index: int
    polarity: Polarity


@dataclass(frozen=True)
class EventStream:
    """Time-ordered UP/DN events produced from a signal of known length and rate."""

    events: tuple[Event, ...]
    source_sample_rate_hz: float
    source_length: int

    def __post_init__(self):
        events = tuple(Event(int(e[0]), Polarity(e[1])) for e in self.events)
        object.__setattr__(self, "events", events)
        fs = float(self.source_sample_rate_hz)
        if not (math.isfinite(fs) and fs > 0):
            raise InvalidSampleRate(f"sample rate must be > 0, got {fs!r}")
        object.__setattr__(self, "source_sample_rate_hz", fs)
        if self.source_length < 0:
            raise InvalidConfig("source_length must be >= 0")
        prev = -1
        for ev in events:
            if ev.index <= prev:
                raise InvalidConfig(f"events not strictly increasing at index {ev.index}")
            prev = ev.index
        if events and events[-1].index >= self.source_length:
            raise InvalidConfig(
                f"event index {events[-1].index} outside source of length {self.source_length}"
            )

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def n_up(self) -> int:
        return sum(1 for e in self.events if e.polarity is UP)

    @property
    def n_dn(self) -> int:
        return len(self.events) - self.n_up

    def indices(self) -> np.ndarray:
        return np.fromiter((e.index for e in self.events), dtype=np.int64, count=len(self.events))

    def signs(self) -> np.ndarray:
        return np.fromiter((int(e.polarity) for e in self.events), dtype=np.int64, count=len(self.events))

    def times_s(self) -> np.ndarray:
        return self.indices() / self.source_sample_rate_hz

    @property
    def duration_s(self) -> float:
        return self.source_length / self.source_sample_rate_hz

    def rate_hz(self) -> float:
        """Mean event rate over the whole source duration."""
        if self.source_length == 0:
            return 0.0
        return len(self.events) / self.duration_s

    def window(self, start: int, stop: int) -> "EventStream":
        """Events with ``start <= index < stop``, re-indexed from ``start``."""
        start = max(0, start)
        stop = min(self.source_length, stop)
        kept = tuple(Event(e.index - start, e.polarity) for e in self.events if start <= e.index < stop)
        return EventStream(kept, self.source_sample_rate_hz, max(0, stop - start))


DEFAULT_GAIN_TABLE: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)


@dataclass(frozen=True)
class AdmConfig:
    """Fixed-threshold encoder settings.

    ``v_thu``/``v_thd`` are the distances above/below the tracked baseline that
    trigger UP/DN. ``gain_code`` selects one of four front-end gains.
    """

    v_thu: float
    v_thd: float
    t_rfr_s: float = 0.0
    gain_code: int = 0

    def __post_init__(self):
        for name in ("v_thu", "v_thd"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise InvalidConfig(f"{name} must be > 0, got {v!r}")
            object.__setattr__(self, name, v)
        t = float(self.t_rfr_s)
        if not (math.isfinite(t) and t >= 0):
            raise InvalidConfig(f"t_rfr_s must be >= 0, got {t!r}")
        object.__setattr__(self, "t_rfr_s", t)
        if isinstance(self.gain_code, bool) or int(self.gain_code) != self.gain_code or not 0 <= self.gain_code <= 3:
            raise InvalidGainCode(f"gain_code must be in {{0,1,2,3}}, got {self.gain_code!r}")
        object.__setattr__(self, "gain_code", int(self.gain_code))

    @classmethod
    def symmetric(cls, v_th: float, t_rfr_s: float = 0.0, gain_code: int = 0) -> "AdmConfig":
        return cls(v_th, v_th, t_rfr_s, gain_code)

    def refractory_samples(self, sample_rate_hz: float) -> int:
        return refractory_samples(self.t_rfr_s, sample_rate_hz)


def refractory_samples(t_rfr_s: float, sample_rate_hz: float) -> int:
    """Refractory period in whole samples, rounded up.

    Products that land within float noise of an integer (0.1 ms at 1 MHz
    gives 100.00000000000001 on some paths) are snapped to that integer.
    """
    x = t_rfr_s * sample_rate_hz
    nearest = round(x)
    if abs(x - nearest) <= 1e-9 * abs(x):
        return int(nearest)
    return int(math.ceil(x))


def _positive(name: str, value) -> float:
    v = float(value)
    if not (math.isfinite(v) and v > 0):
        raise InvalidConfig(f"{name} must be > 0, got {value!r}")
    return v


@dataclass(frozen=True)
class AdaptiveConfig:
    """Parameters of the adaptive threshold chain.

    The defaults target background/burst separation for 80-250 Hz bursts
    sampled at 2 kHz: background tracking runs two orders of magnitude slower
    than the oscillations.
    """

    tau_env_attack_s: float = 2e-3
    tau_env_release_s: float = 50e-3
    tau1_s: float = 200e-3
    tau2_s: float = 20e-3
    g2: float = 0.9
    tau3_s: float = 500e-3
    t_ext_s: float = 100e-3
    k_th: float = 2.0
    v_th_min: float = 1e-6

    def __post_init__(self):
        for name in (
            "tau_env_attack_s",
            "tau_env_release_s",
            "tau1_s",
            "tau2_s",
            "tau3_s",
            "t_ext_s",
            "k_th",
            "v_th_min",
        ):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))
        if not self.tau1_s > self.tau2_s:
            raise InvalidConfig(f"tau1_s ({self.tau1_s}) must exceed tau2_s ({self.tau2_s})")
        g2 = float(self.g2)
        if not 0.0 < g2 < 1.0:
            raise InvalidConfig(f"g2 must be in (0, 1), got {self.g2!r}")
        object.__setattr__(self, "g2", g2)


def as_signal(samples: Sequence[float] | np.ndarray, sample_rate_hz: float) -> Signal:
    return Signal(np.asarray(samples, dtype=np.float64), sample_rate_hz)


__all__ = [
    "AdaptiveConfig",
    "AdmConfig",
    "DEFAULT_GAIN_TABLE",
    "DN",
    "Event",
    "EventStream",
    "Polarity",
    "Signal",
    "UP",
    "as_signal",
    "refractory_samples",
    "validate_signal",
]
