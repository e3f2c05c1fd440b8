"""Staircase reconstruction from UP/DN events and error measures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adaptive import lpf_first_order
from .errors import EmptyStreamLength, InvalidConfig, InvalidCutoff, LengthMismatch
from .types import EventStream, Signal, validate_signal


@dataclass(frozen=True)
class ReconstructionConfig:
    v_thu: float
    v_thd: float
    initial_level: float = 0.0
    highpass_cutoff_hz: float = 0.0

    def __post_init__(self):
        for name in ("v_thu", "v_thd"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise InvalidConfig(f"{name} must be > 0, got {v!r}")
            object.__setattr__(self, name, v)
        fc = float(self.highpass_cutoff_hz)
        if not (math.isfinite(fc) and fc >= 0):
            raise InvalidConfig(f"highpass_cutoff_hz must be >= 0, got {fc!r}")
        object.__setattr__(self, "highpass_cutoff_hz", fc)
        object.__setattr__(self, "initial_level", float(self.initial_level))

    @classmethod
    def symmetric(cls, v_th: float, highpass_cutoff_hz: float = 0.0, initial_level: float = 0.0):
        return cls(v_th, v_th, initial_level, highpass_cutoff_hz)


def reconstruct(events: EventStream, config: ReconstructionConfig) -> Signal:
    """Zero-order-hold staircase: each event steps the level by ``+v_thu`` / ``-v_thd``
    from its own sample onwards."""
    n = events.source_length
    if n == 0:
        raise EmptyStreamLength("event stream has source_length 0")
    steps = np.zeros(n)
    if len(events):
        signs = events.signs()
        steps[events.indices()] = np.where(signs > 0, config.v_thu, -config.v_thd)
    return Signal(config.initial_level + np.cumsum(steps), events.source_sample_rate_hz)


def highpass_detrend(signal: Signal, cutoff_hz: float) -> Signal:
    """First-order high-pass: the input minus its first-order low-pass,
    with ``tau = 1 / (2 pi cutoff_hz)``."""
    validate_signal(signal)
    if not (0 < cutoff_hz < signal.sample_rate_hz / 2):
        raise InvalidCutoff(
            f"cutoff must lie in (0, {signal.sample_rate_hz / 2}) Hz, got {cutoff_hz!r}"
        )
    tau = 1.0 / (2.0 * math.pi * cutoff_hz)
    low = lpf_first_order(signal, tau, 1.0)
    return signal.with_samples(signal.samples - low.samples)


def rmse(a: Signal, b: Signal, remove_mean: bool = True) -> float:
    """Root-mean-square difference; both traces are mean-removed by default."""
    if len(a) != len(b) or a.sample_rate_hz != b.sample_rate_hz:
        raise LengthMismatch(
            f"cannot compare {len(a)} @ {a.sample_rate_hz} Hz with {len(b)} @ {b.sample_rate_hz} Hz"
        )
    x = a.samples
    y = b.samples
    if remove_mean:
        x = x - x.mean()
        y = y - y.mean()
    return float(np.sqrt(np.mean((x - y) ** 2)))


def reconstruction_error(reference: Signal, events: EventStream, config: ReconstructionConfig) -> float:
    """Shape error between ``reference`` and the staircase rebuilt from ``events``.

    When ``config.highpass_cutoff_hz`` is set, both traces go through the same
    high-pass before comparison, so the filter's own phase shift cancels and
    only the staircase's drift is removed.
    """
    recon = reconstruct(events, config)
    ref = reference
    if config.highpass_cutoff_hz > 0:
        recon = highpass_detrend(recon, config.highpass_cutoff_hz)
        ref = highpass_detrend(reference, config.highpass_cutoff_hz)
    return rmse(ref, recon)
