"""Adaptive threshold chain.

envelope -> slow/fast first-order filters -> crossover gate -> pulse
extender -> gated (track-and-hold) filter -> threshold trace.

The slow and fast filters both follow the envelope; the fast one is scaled
by ``g2 < 1`` so that it sits below the slow one whenever the envelope is
steady. A sharp rise in the envelope lets the fast filter overtake the slow
one, which raises the gate. While the (extended) gate is high the threshold
filter holds its value, so the threshold keeps reflecting background
activity and bursts are encoded with the low, pre-burst threshold.

All filters use the exponential-integrator discretisation, which is exact
for piecewise-constant input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .encoder import GainTable, encode_with_threshold_trace, gained_samples
from .errors import InvalidConfig, LengthMismatch
from .types import AdaptiveConfig, AdmConfig, EventStream, Signal, refractory_samples, validate_signal


def _alpha(tau_s: float, dt: float) -> float:
    if not tau_s > 0:
        raise InvalidConfig(f"time constant must be > 0, got {tau_s!r}")
    return 1.0 - math.exp(-dt / tau_s)


def _check_same_grid(a: Signal, b: Signal) -> None:
    if len(a) != len(b) or a.sample_rate_hz != b.sample_rate_hz:
        raise LengthMismatch(
            f"traces differ: {len(a)} @ {a.sample_rate_hz} Hz vs {len(b)} @ {b.sample_rate_hz} Hz"
        )


@dataclass(frozen=True)
class FilterState:
    y: float
    tau_s: float
    gain: float = 1.0

    def update(self, x: float, dt: float) -> "FilterState":
        a = _alpha(self.tau_s, dt)
        return FilterState(self.y + a * (self.gain * x - self.y), self.tau_s, self.gain)


def envelope(signal: Signal, tau_attack_s: float, tau_release_s: float) -> Signal:
    """Rectify and track with separate attack and release time constants."""
    validate_signal(signal)
    a_att = _alpha(tau_attack_s, signal.dt)
    a_rel = _alpha(tau_release_s, signal.dt)
    xs = np.abs(signal.samples).tolist()
    out = [0.0] * len(xs)
    e = xs[0]
    out[0] = e
    for n in range(1, len(xs)):
        r = xs[n]
        e = e + (a_att if r > e else a_rel) * (r - e)
        out[n] = e
    return signal.with_samples(out)


def lpf_first_order(signal: Signal, tau_s: float, gain: float = 1.0) -> Signal:
    """First-order low-pass ``tau dy/dt + y = gain * x``, started at ``gain * x[0]``."""
    validate_signal(signal)
    if not gain > 0:
        raise InvalidConfig(f"gain must be > 0, got {gain!r}")
    a = _alpha(tau_s, signal.dt)
    xs = signal.samples.tolist()
    out = [0.0] * len(xs)
    y = gain * xs[0]
    out[0] = y
    for n in range(1, len(xs)):
        y = y + a * (gain * xs[n] - y)
        out[n] = y
    return signal.with_samples(out)


def crossover_gate(slow: Signal, fast: Signal) -> np.ndarray:
    """Boolean trace, true where ``fast > slow`` (ties are false)."""
    _check_same_grid(slow, fast)
    return fast.samples > slow.samples


def extension_samples(t_ext_s: float, sample_rate_hz: float) -> int:
    if not t_ext_s > 0:
        raise InvalidConfig(f"t_ext_s must be > 0, got {t_ext_s!r}")
    return refractory_samples(t_ext_s, sample_rate_hz)


def extend_pulses(gate, t_ext_s: float, sample_rate_hz: float) -> np.ndarray:
    """Retriggerable pulse extension.

    Every true input sample keeps the output high for that sample and the
    following ``ceil(t_ext_s * fs)`` samples.
    """
    g = np.asarray(gate, dtype=bool)
    width = extension_samples(t_ext_s, sample_rate_hz)
    out = np.zeros(g.shape, dtype=bool)
    hold = -1
    for n, v in enumerate(g.tolist()):
        if v:
            hold = width
        if hold >= 0:
            out[n] = True
            hold -= 1
    return out


def gated_lpf(signal: Signal, gate, tau_s: float) -> Signal:
    """First-order low-pass that freezes its output wherever ``gate`` is true."""
    validate_signal(signal)
    g = np.asarray(gate, dtype=bool)
    if g.shape != (len(signal),):
        raise LengthMismatch(f"gate length {g.size} != signal length {len(signal)}")
    a = _alpha(tau_s, signal.dt)
    xs = signal.samples.tolist()
    gs = g.tolist()
    out = [0.0] * len(xs)
    y = xs[0]
    out[0] = y
    for n in range(1, len(xs)):
        if not gs[n]:
            y = y + a * (xs[n] - y)
        out[n] = y
    return signal.with_samples(out)


@dataclass(frozen=True)
class AdaptiveDiagnostics:
    envelope: Signal
    slow: Signal
    fast: Signal
    gate: np.ndarray
    base: Signal


def adaptive_threshold(
    signal: Signal, config: AdaptiveConfig = AdaptiveConfig()
) -> tuple[Signal, AdaptiveDiagnostics]:
    """Threshold trace tracking background activity and holding through bursts.

    Returns the clamped threshold ``max(v_th_min, k_th * base)`` and the
    intermediate traces.
    """
    env = envelope(signal, config.tau_env_attack_s, config.tau_env_release_s)
    slow = lpf_first_order(env, config.tau1_s, 1.0)
    fast = lpf_first_order(env, config.tau2_s, config.g2)
    gate = extend_pulses(crossover_gate(slow, fast), config.t_ext_s, signal.sample_rate_hz)
    base = gated_lpf(env, gate, config.tau3_s)
    v_th = np.maximum(config.v_th_min, config.k_th * base.samples)
    return signal.with_samples(v_th), AdaptiveDiagnostics(env, slow, fast, gate, base)


def encode_adaptive(
    signal: Signal,
    config: AdaptiveConfig = AdaptiveConfig(),
    adm: Optional[AdmConfig] = None,
    table: GainTable = GainTable(),
) -> tuple[EventStream, Signal, AdaptiveDiagnostics]:
    """Run the threshold chain on ``signal`` and encode with the result.

    ``adm`` supplies the refractory period and gain code; its fixed
    thresholds are unused. The chain sees the same gained signal as the
    comparators.
    """
    adm = adm or AdmConfig(1.0, 1.0)
    gained = signal.with_samples(gained_samples(signal, adm, table))
    v_th, diag = adaptive_threshold(gained, config)
    # threshold already applies to gained samples; encode at unit gain
    unit = AdmConfig(adm.v_thu, adm.v_thd, adm.t_rfr_s, 0)
    events = encode_with_threshold_trace(gained, v_th, unit)
    return events, v_th, diag


@dataclass(frozen=True)
class AdaptiveState:
    """Per-stream state of the threshold chain for sample-by-sample use.

    ``hold_remaining`` counts samples of gate extension still pending after
    the current one; -1 means the gate is released.
    """

    env: float
    slow: float
    fast: float
    base: float
    hold_remaining: int = -1


class AdaptiveStepper:
    """Sample-at-a-time version of :func:`adaptive_threshold`.

    Feeding a trace through :meth:`start` and then :meth:`step` yields the
    same threshold and gate values as the batch function, bit for bit.
    """

    def __init__(self, config: AdaptiveConfig, sample_rate_hz: float):
        dt = 1.0 / sample_rate_hz
        self.config = config
        self._a_att = _alpha(config.tau_env_attack_s, dt)
        self._a_rel = _alpha(config.tau_env_release_s, dt)
        self._a1 = _alpha(config.tau1_s, dt)
        self._a2 = _alpha(config.tau2_s, dt)
        self._a3 = _alpha(config.tau3_s, dt)
        self._width = extension_samples(config.t_ext_s, sample_rate_hz)

    def _threshold(self, base: float) -> float:
        return max(self.config.v_th_min, self.config.k_th * base)

    def start(self, x0: float) -> tuple[AdaptiveState, float, bool]:
        # g2 < 1 and e >= 0, so the gate cannot fire on the first sample
        e = abs(x0)
        state = AdaptiveState(env=e, slow=e, fast=self.config.g2 * e, base=e)
        return state, self._threshold(e), False

    def step(self, state: AdaptiveState, x: float) -> tuple[AdaptiveState, float, bool]:
        r = abs(x)
        e = state.env
        e = e + (self._a_att if r > e else self._a_rel) * (r - e)
        slow = state.slow + self._a1 * (e - state.slow)
        fast = state.fast + self._a2 * (self.config.g2 * e - state.fast)
        hold = self._width if fast > slow else state.hold_remaining
        gated = hold >= 0
        base = state.base if gated else state.base + self._a3 * (e - state.base)
        new = AdaptiveState(e, slow, fast, base, hold - 1 if gated else -1)
        return new, self._threshold(base), gated
