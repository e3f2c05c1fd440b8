import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from admsim import (
    AdaptiveConfig,
    AdaptiveStepper,
    FilterState,
    Signal,
    SynthSpec,
    adaptive_threshold,
    crossover_gate,
    default_hfo_spec,
    encode_adaptive,
    envelope,
    extend_pulses,
    gated_lpf,
    lpf_first_order,
    synth_band_noise,
    synthesize,
)
from admsim.errors import InvalidConfig, LengthMismatch
from admsim.synthesis import burst_mask, burst_span


# -- envelope ---------------------------------------------------------------


def test_envelope_of_zero_is_zero():
    e = envelope(Signal(np.zeros(500), 2000.0), 2e-3, 50e-3)
    assert np.all(e.samples == 0.0)


def test_envelope_of_sine_settles_in_band():
    fs, f, amp = 10_000.0, 100.0, 1.0
    t = np.arange(int(fs)) / fs
    e = envelope(Signal(amp * np.sin(2 * np.pi * f * t), fs), 2e-3, 50e-3).samples
    tail = e[int(10 * fs / f) :]
    assert tail.min() >= 0.5 * amp
    assert tail.max() <= amp
    assert (tail.max() - tail.min()) / tail.mean() < 0.2


def test_envelope_attack_reaches_midpoint_quickly():
    fs, amp, tau_att = 10_000.0, 1.0, 2e-3
    x = np.concatenate([np.full(1000, amp), np.full(1000, 3 * amp)])
    e = envelope(Signal(x, fs), tau_att, 50e-3).samples
    k = int(np.argmax(e >= 2 * amp))
    assert e[k] >= 2 * amp
    assert (k - 1000) / fs <= 3 * tau_att
    # closed form of the attack: crosses 2A at tau * ln 2
    assert (k - 1000) / fs == pytest.approx(tau_att * math.log(2), abs=1 / fs)


def test_envelope_is_non_negative():
    rng = np.random.default_rng(4)
    e = envelope(Signal(rng.standard_normal(2000), 2000.0), 2e-3, 50e-3)
    assert e.samples.min() >= 0.0


# -- lpf_first_order ----------------------------------------------------------


def test_lpf_constant_input_converges_to_gain_times_input():
    fs, tau, g, c = 1000.0, 0.05, 0.7, 2.0
    x = np.concatenate([[0.0], np.full(999, c)])
    y = lpf_first_order(Signal(x, fs), tau, g).samples
    n = np.arange(len(y))
    late = n / fs > 5 * tau
    assert np.all(np.abs(y[late] - g * c) < 0.01 * g * c)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_lpf_step_response(k):
    tau = 0.01
    fs = 100 / tau
    x = np.ones(400)
    x[0] = 0.0
    y = lpf_first_order(Signal(x, fs), tau).samples
    assert y[100 * k] == pytest.approx(1 - math.exp(-k), rel=0.005)


def test_lpf_zero_input():
    assert np.all(lpf_first_order(Signal(np.zeros(100), 100.0), 0.1).samples == 0.0)


def test_lpf_rejects_bad_parameters():
    s = Signal(np.ones(4), 10.0)
    with pytest.raises(InvalidConfig):
        lpf_first_order(s, 0.0)
    with pytest.raises(InvalidConfig):
        lpf_first_order(s, 0.1, gain=0.0)


def test_filter_state_matches_batch():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(300)
    ref = lpf_first_order(Signal(x, 1000.0), 0.02, 0.9).samples
    st_ = FilterState(0.9 * x[0], 0.02, 0.9)
    out = [st_.y]
    for v in x[1:]:
        st_ = st_.update(v, 1e-3)
        out.append(st_.y)
    assert np.array_equal(out, ref)


# -- crossover gate ---------------------------------------------------------------


def test_gate_steady_ordering_is_false():
    n = 50
    assert not crossover_gate(Signal(np.ones(n), 100.0), Signal(np.full(n, 0.9), 100.0)).any()


def test_gate_tie_is_false():
    s = Signal(np.ones(20), 100.0)
    assert not crossover_gate(s, s).any()


def test_gate_length_mismatch():
    with pytest.raises(LengthMismatch):
        crossover_gate(Signal(np.ones(3), 10.0), Signal(np.ones(4), 10.0))


def test_gate_on_step_matches_closed_form_crossings():
    tau1, tau2, g2 = 0.1, 0.01, 0.9
    fs = 10_000.0
    c0, c1 = 1.0, 3.0
    n0 = 1000
    x = np.concatenate([np.full(n0, c0), np.full(4000, c1)])
    env = Signal(x, fs)
    slow = lpf_first_order(env, tau1)
    fast = lpf_first_order(env, tau2, g2)
    gate = crossover_gate(slow, fast)

    # sample n0 + j has taken j + 1 updates towards c1; exact for piecewise-constant input
    def diff(u):
        s = c1 + (c0 - c1) * math.exp(-u / tau1)
        f = g2 * (c1 + (c0 - c1) * math.exp(-u / tau2))
        return f - s

    t_peak = 0.02
    u_rise = brentq(diff, 0.0, t_peak, xtol=1e-14)
    u_fall = brentq(diff, t_peak, 0.4, xtol=1e-14)
    on = np.flatnonzero(gate)
    assert on.size
    assert on[0] - n0 + 1 == math.floor(u_rise * fs) + 1
    assert on[-1] - n0 + 1 == math.ceil(u_fall * fs) - 1
    assert (on[0] - n0) / fs <= 5e-3
    # one contiguous pulse
    assert np.all(np.diff(on) == 1)


# -- extend_pulses ---------------------------------------------------------------


def _window_union(gate, width):
    out = np.zeros(len(gate), dtype=bool)
    for k in np.flatnonzero(gate):
        out[k : k + width + 1] = True
    return out


def test_extend_all_false():
    assert not extend_pulses(np.zeros(30, bool), 0.01, 1000.0).any()


def test_extend_single_pulse():
    g = np.zeros(40, bool)
    g[7] = True
    out = extend_pulses(g, 10 / 1000.0, 1000.0)
    assert np.array_equal(np.flatnonzero(out), np.arange(7, 18))


def test_extend_merges_close_pulses():
    g = np.zeros(50, bool)
    g[[5, 10]] = True
    out = extend_pulses(g, 0.01, 1000.0)
    assert np.array_equal(out, _window_union(g, 10))
    on = np.flatnonzero(out)
    assert np.all(np.diff(on) == 1)
    assert (on[0], on[-1]) == (5, 20)


def test_extend_rejects_non_positive_window():
    with pytest.raises(InvalidConfig):
        extend_pulses(np.zeros(3, bool), 0.0, 1000.0)


@settings(max_examples=150)
@given(st.lists(st.booleans(), min_size=1, max_size=200), st.integers(1, 30))
def test_extend_is_window_union(gate, width):
    fs = 1000.0
    g = np.array(gate)
    assert np.array_equal(extend_pulses(g, width / fs, fs), _window_union(g, width))


@given(st.integers(0, 80), st.integers(1, 20), st.integers(1, 20))
def test_extend_idempotent_on_isolated_pulse(start, length, width):
    fs = 1000.0
    g = np.zeros(150, bool)
    g[start : start + length] = True
    once = extend_pulses(g, width / fs, fs)
    twice = extend_pulses(once, width / fs, fs)
    # a second pass only lengthens the tail by another window
    assert np.array_equal(twice, _window_union(once, width))
    assert np.array_equal(twice[: start + length + width], once[: start + length + width])


# -- gated_lpf ---------------------------------------------------------------


def test_gated_lpf_open_switch_is_plain_lpf():
    rng = np.random.default_rng(1)
    s = Signal(rng.standard_normal(400), 1000.0)
    assert np.array_equal(gated_lpf(s, np.zeros(400, bool), 0.05).samples, lpf_first_order(s, 0.05).samples)


def test_gated_lpf_closed_switch_holds_first_sample():
    rng = np.random.default_rng(2)
    s = Signal(rng.standard_normal(100), 1000.0)
    y = gated_lpf(s, np.ones(100, bool), 0.05).samples
    assert np.all(y == s.samples[0])


def test_gated_lpf_holds_through_burst():
    fs = 2000.0
    x = np.ones(2000)
    x[800:1000] = 10.0
    gate = np.zeros(2000, bool)
    gate[800:1000] = True
    y = gated_lpf(Signal(x, fs), gate, 0.1).samples
    assert np.all(y[800:1000] == y[799])


def test_gated_lpf_length_mismatch():
    with pytest.raises(LengthMismatch):
        gated_lpf(Signal(np.ones(5), 10.0), np.zeros(4, bool), 0.1)


# -- full chain ---------------------------------------------------------------


def test_threshold_stable_on_background():
    s = synth_band_noise(SynthSpec(kind="band_noise", duration_s=10.0, sample_rate_hz=2000.0, seed=3))
    v, _ = adaptive_threshold(s, AdaptiveConfig())
    tail = v.samples[len(v) // 2 :]
    med = np.median(tail)
    assert np.all(np.abs(tail - med) <= 0.1 * med)


def test_threshold_holds_through_burst_and_burst_is_dense():
    spec = default_hfo_spec(0)
    x = synthesize(spec)
    fs = spec.sample_rate_hz
    events, v, diag = encode_adaptive(x, AdaptiveConfig())
    th = v.samples
    for b in spec.bursts:
        i0, i1 = burst_span(b, fs)
        # the gate rises a few ms into the Hann onset; the threshold barely moves before that
        assert np.all(np.abs(th[i0:i1] - th[i0 - 1]) <= 0.01 * th[i0 - 1])
        gated = np.flatnonzero(diag.gate[i0:i1]) + i0
        assert gated.size > 0.5 * (i1 - i0)
    idx = events.indices()
    mask = burst_mask(spec)
    settle = int(2.5 * fs)
    in_rate = mask[idx].sum() / (mask.sum() / fs)
    late = idx[idx >= settle]
    bg_rate = (~mask[late]).sum() / ((~mask[settle:]).sum() / fs)
    assert in_rate >= 10 * bg_rate


def test_hold_is_exact_wherever_gate_is_high():
    x = synthesize(default_hfo_spec(0))
    v, diag = adaptive_threshold(x)
    th = v.samples
    g = diag.gate
    assert np.all(th[1:][g[1:]] == th[:-1][g[1:]])


def test_zero_signal_sits_at_floor():
    cfg = AdaptiveConfig()
    v, diag = adaptive_threshold(Signal(np.zeros(1000), 2000.0), cfg)
    assert np.all(v.samples == cfg.v_th_min)
    assert not diag.gate.any()


def test_stepper_is_bit_identical_to_batch():
    x = synthesize(default_hfo_spec(0))
    cfg = AdaptiveConfig()
    v, diag = adaptive_threshold(x, cfg)
    stepper = AdaptiveStepper(cfg, x.sample_rate_hz)
    xs = x.samples.tolist()
    state, th, g = stepper.start(xs[0])
    ths, gs = [th], [g]
    for s in xs[1:]:
        state, th, g = stepper.step(state, s)
        ths.append(th)
        gs.append(g)
    assert np.array_equal(ths, v.samples)
    assert np.array_equal(gs, diag.gate)


# -- properties ---------------------------------------------------------------


adaptive_params = st.tuples(
    st.floats(-4, 0),  # log10 tau2
    st.floats(1.0001, 100.0),  # tau1 / tau2
    st.floats(0.01, 0.99),  # g2
)


@settings(max_examples=60, deadline=None)
@given(adaptive_params, st.floats(1e-3, 1e3))
def test_steady_ordering(params, level):
    log_tau2, ratio, g2 = params
    tau2 = 10**log_tau2
    tau1 = ratio * tau2
    fs = 10 / tau2
    n = int(math.ceil(5 * tau1 * fs)) + 1
    env = Signal(np.full(n, level), fs)
    slow = lpf_first_order(env, tau1)
    fast = lpf_first_order(env, tau2, g2)
    assert np.all(fast.samples < slow.samples)
    assert not crossover_gate(slow, fast).any()


@settings(max_examples=80, deadline=None)
@given(
    st.floats(-4, 0),
    st.floats(10.0, 100.0),
    st.floats(0.5, 0.99),
    st.floats(1.0, 20.0),
    st.floats(1e-3, 1e3),
)
def test_gate_rises_on_rapid_envelope_step(log_tau2, ratio, g2, margin, level):
    tau2 = 10**log_tau2
    tau1 = ratio * tau2
    fs = 20 / tau2
    rel_step = 2 * (1 - g2) / g2 * margin
    pre = int(math.ceil(fs * tau2))
    post = int(math.ceil(5 * tau2 * fs))
    env = Signal(np.concatenate([np.full(pre, level), np.full(post, level * (1 + rel_step))]), fs)
    gate = crossover_gate(lpf_first_order(env, tau1), lpf_first_order(env, tau2, g2))
    assert not gate[:pre].any()
    assert gate[pre:].any()


@settings(max_examples=20, deadline=None)
@given(st.integers(-6, 6), st.integers(0, 50))
def test_power_of_two_scaling_is_exact(k, seed):
    c = 2.0**k
    x = synth_band_noise(SynthSpec(kind="band_noise", duration_s=1.0, sample_rate_hz=2000.0, seed=seed))
    cfg = AdaptiveConfig()
    _, d1 = adaptive_threshold(x, cfg)
    _, d2 = adaptive_threshold(x.with_samples(c * x.samples), cfg)
    assert np.array_equal(d1.gate, d2.gate)
    for name in ("envelope", "slow", "fast", "base"):
        assert np.array_equal(getattr(d2, name).samples, c * getattr(d1, name).samples)
