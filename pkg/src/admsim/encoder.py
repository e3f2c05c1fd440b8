"""Discrete-time asynchronous delta modulator.

The modulator tracks a baseline (the level the amplifier output is reset
to). Whenever the gained input rises ``v_thu`` above the baseline it emits
UP and moves the baseline up by ``v_thu``; a drop of ``v_thd`` below emits
DN and moves it down by ``v_thd``. After each event the comparators are
blind for a refractory period, which hard-caps the event rate.

Only one event can be emitted per sample: a jump of several thresholds is
worked off over the following samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidConfig, InvalidGainCode, LengthMismatch, NonPositiveThreshold
from .types import (
    DEFAULT_GAIN_TABLE,
    DN,
    UP,
    AdmConfig,
    Event,
    EventStream,
    Polarity,
    Signal,
    refractory_samples,
    validate_signal,
)


@dataclass(frozen=True)
class GainTable:
    """Four front-end gains selected by a 2-bit code, strictly increasing."""

    gains: tuple[float, float, float, float] = DEFAULT_GAIN_TABLE

    def __post_init__(self):
        gains = tuple(float(g) for g in self.gains)
        if len(gains) != 4:
            raise InvalidConfig(f"gain table needs exactly 4 entries, got {len(gains)}")
        if not all(g > 0 for g in gains):
            raise InvalidConfig("gains must be positive")
        if not all(a < b for a, b in zip(gains, gains[1:])):
            raise InvalidConfig("gains must be strictly increasing")
        object.__setattr__(self, "gains", gains)

    def __getitem__(self, code: int) -> float:
        return select_gain(code, self)


def select_gain(gain_code: int, table: GainTable | Sequence[float] = GainTable()) -> float:
    if not isinstance(table, GainTable):
        table = GainTable(tuple(table))
    if isinstance(gain_code, bool) or int(gain_code) != gain_code or not 0 <= gain_code <= 3:
        raise InvalidGainCode(f"gain_code must be in {{0,1,2,3}}, got {gain_code!r}")
    return table.gains[int(gain_code)]


@dataclass(frozen=True)
class EncoderState:
    baseline: float
    refractory_remaining: int = 0
    sample_cursor: int = 0


# Comparators trip when the excursion is within this relative margin of the
# threshold, so a baseline built from repeated float increments still fires
# when the input lands exactly on a threshold multiple.
COMPARATOR_RTOL = 1e-9


def _transition(baseline, rfr, x, v_thu, v_thd, n_rfr):
    # Returns (baseline, rfr, sign) with sign in {+1, -1, 0}.
    if rfr > 0:
        return baseline, rfr - 1, 0
    if x - baseline >= v_thu * (1.0 - COMPARATOR_RTOL):
        return baseline + v_thu, n_rfr, 1
    if baseline - x >= v_thd * (1.0 - COMPARATOR_RTOL):
        return baseline - v_thd, n_rfr, -1
    return baseline, 0, 0


def step(
    state: EncoderState,
    sample: float,
    v_thu: float,
    v_thd: float,
    refractory_samples: int,
) -> tuple[EncoderState, Optional[Event]]:
    """Advance the encoder by one (already gained) sample."""
    baseline, rfr, sign = _transition(
        state.baseline, state.refractory_remaining, sample, v_thu, v_thd, refractory_samples
    )
    event = Event(state.sample_cursor, Polarity(sign)) if sign else None
    return EncoderState(baseline, rfr, state.sample_cursor + 1), event


def initial_state(first_sample: float) -> EncoderState:
    return EncoderState(baseline=float(first_sample))


def _run(x: np.ndarray, v_thu, v_thd, n_rfr: int) -> list[Event]:
    # v_thu / v_thd are either floats or per-sample lists
    xs = x.tolist()
    per_sample = not isinstance(v_thu, float)
    baseline = xs[0]
    rfr = 0
    out = []
    tr = _transition
    for n, xn in enumerate(xs):
        if per_sample:
            baseline, rfr, sign = tr(baseline, rfr, xn, v_thu[n], v_thd[n], n_rfr)
        else:
            baseline, rfr, sign = tr(baseline, rfr, xn, v_thu, v_thd, n_rfr)
        if sign:
            out.append(Event(n, UP if sign > 0 else DN))
    return out


def gained_samples(signal: Signal, config: AdmConfig, table: GainTable = GainTable()) -> np.ndarray:
    return signal.samples * select_gain(config.gain_code, table)


def encode(signal: Signal, config: AdmConfig, table: GainTable = GainTable()) -> EventStream:
    """Encode ``signal`` with fixed thresholds.

    Equivalent to folding :func:`step` over the gained samples, starting
    from a baseline equal to the first sample.
    """
    validate_signal(signal)
    x = gained_samples(signal, config, table)
    n_rfr = config.refractory_samples(signal.sample_rate_hz)
    events = _run(x, config.v_thu, config.v_thd, n_rfr)
    return EventStream(tuple(events), signal.sample_rate_hz, len(signal))


def encode_with_threshold_trace(
    signal: Signal,
    v_th_trace: Signal,
    config: AdmConfig,
    table: GainTable = GainTable(),
) -> EventStream:
    """Encode with a symmetric, time-varying threshold.

    ``config.v_thu``/``v_thd`` are ignored; ``t_rfr_s`` and ``gain_code``
    still apply. The threshold is compared against the gained signal.
    """
    validate_signal(signal)
    validate_signal(v_th_trace)
    if len(v_th_trace) != len(signal) or v_th_trace.sample_rate_hz != signal.sample_rate_hz:
        raise LengthMismatch(
            f"threshold trace ({len(v_th_trace)} @ {v_th_trace.sample_rate_hz} Hz) does not match "
            f"signal ({len(signal)} @ {signal.sample_rate_hz} Hz)"
        )
    bad = np.flatnonzero(v_th_trace.samples <= 0)
    if bad.size:
        raise NonPositiveThreshold(int(bad[0]))
    x = gained_samples(signal, config, table)
    th = v_th_trace.samples.tolist()
    n_rfr = config.refractory_samples(signal.sample_rate_hz)
    events = _run(x, th, th, n_rfr)
    return EventStream(tuple(events), signal.sample_rate_hz, len(signal))


def max_rate_hz(t_rfr_s: float, sample_rate_hz: float) -> float:
    """Steady-state event rate ceiling: one event, then the refractory hold."""
    return sample_rate_hz / (refractory_samples(t_rfr_s, sample_rate_hz) + 1)
