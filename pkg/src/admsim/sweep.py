"""Grid sweeps over threshold and refractory period.

``rmse_sweep`` traces reconstruction error against threshold for several
refractory periods; ``rate_model_fit`` checks that, away from the
refractory limit, the event rate scales as amplitude * frequency / threshold.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .encoder import encode, gained_samples, max_rate_hz
from .errors import EmptyRecords, InvalidConfig, SaturatedRegime
from .reconstruction import ReconstructionConfig, reconstruction_error
from .synthesis import SynthSpec, synthesize
from .types import AdmConfig, Signal

DEFAULT_T_RFR_S = (0.0, 0.1e-3, 0.5e-3, 1e-3, 2e-3)


def default_sweep_signal() -> SynthSpec:
    return SynthSpec(kind="sine", amplitude=1.0, frequency_hz=20.0, duration_s=0.25, sample_rate_hz=50_000.0)


def log_grid(lo: float, hi: float, n: int) -> tuple[float, ...]:
    return tuple(float(v) for v in np.geomspace(lo, hi, n))


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian grid of symmetric thresholds and refractory periods.

    Only ``initial_level`` and ``highpass_cutoff_hz`` of ``reconstruction``
    are used; its step sizes are replaced by each cell's threshold.
    """

    v_th_values: tuple[float, ...] = log_grid(0.004, 0.4, 16)
    t_rfr_values: tuple[float, ...] = DEFAULT_T_RFR_S
    signal_spec: SynthSpec = field(default_factory=default_sweep_signal)
    # cutoff = sweep sine frequency / 20
    reconstruction: ReconstructionConfig = ReconstructionConfig(1.0, 1.0, 0.0, 1.0)
    gain_code: int = 0

    def __post_init__(self):
        v = tuple(float(x) for x in self.v_th_values)
        t = tuple(float(x) for x in self.t_rfr_values)
        if not v or not t:
            raise InvalidConfig("sweep grids must be non-empty")
        if list(v) != sorted(v) or list(t) != sorted(t):
            raise InvalidConfig("sweep grids must be sorted ascending")
        for x in v:
            AdmConfig.symmetric(x)
        for x in t:
            AdmConfig.symmetric(1.0, x)
        AdmConfig.symmetric(1.0, 0.0, self.gain_code)
        object.__setattr__(self, "v_th_values", v)
        object.__setattr__(self, "t_rfr_values", t)

    def cells(self) -> list[tuple[float, float]]:
        """(v_th, t_rfr) pairs in record order: t_rfr outer, v_th inner."""
        return [(v, t) for t in self.t_rfr_values for v in self.v_th_values]


def default_grid() -> SweepGrid:
    return SweepGrid()


@dataclass(frozen=True)
class SweepRecord:
    v_th: float
    t_rfr: float
    rmse: float
    event_count: int
    event_rate_hz: float


def evaluate_cell(
    signal: Signal,
    v_th: float,
    t_rfr: float,
    reconstruction: ReconstructionConfig,
    gain_code: int = 0,
) -> SweepRecord:
    """Encode, rebuild and score one grid point."""
    adm = AdmConfig.symmetric(v_th, t_rfr, gain_code)
    events = encode(signal, adm)
    reference = signal.with_samples(gained_samples(signal, adm))
    rc = replace(reconstruction, v_thu=v_th, v_thd=v_th)
    err = reconstruction_error(reference, events, rc)
    return SweepRecord(v_th, t_rfr, err, len(events), events.rate_hz())


def _cell_job(args):
    return evaluate_cell(*args)


def rmse_sweep(grid: SweepGrid, cells: Optional[Sequence[tuple[float, float]]] = None, max_workers: int = 1) -> list[SweepRecord]:
    """Score every grid cell against one synthesized signal.

    ``cells`` overrides the evaluation order (default :meth:`SweepGrid.cells`).
    With ``max_workers > 1`` cells run in worker processes; records still come
    back in request order.
    """
    signal = synthesize(grid.signal_spec)
    order = list(cells) if cells is not None else grid.cells()
    jobs = [(signal, v, t, grid.reconstruction, grid.gain_code) for v, t in order]
    if max_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(_cell_job, jobs, chunksize=max(1, len(jobs) // (4 * max_workers))))
    return [_cell_job(j) for j in jobs]


def find_min_rmse(records: Iterable[SweepRecord]) -> tuple[float, float, float]:
    """Grid point of least RMSE; ties go to smaller v_th, then smaller t_rfr."""
    records = list(records)
    if not records:
        raise EmptyRecords("no sweep records")
    best = min(records, key=lambda r: (r.rmse, r.v_th, r.t_rfr))
    return best.v_th, best.t_rfr, best.rmse


def curve(records: Iterable[SweepRecord], t_rfr: float) -> tuple[np.ndarray, np.ndarray]:
    """(v_th, rmse) arrays for one refractory period, sorted by v_th."""
    rows = sorted((r.v_th, r.rmse) for r in records if r.t_rfr == t_rfr)
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def is_quasi_convex(values: Sequence[float], rel_tol: float = 0.02) -> bool:
    """True if ``values`` falls then rises, allowing wiggles below ``rel_tol``.

    Differences smaller than ``rel_tol`` times the larger neighbour are
    treated as flat; the remaining signs may change at most once, and only
    from falling to rising.
    """
    v = np.asarray(values, dtype=float)
    signs = []
    for a, b in zip(v[:-1], v[1:]):
        if abs(b - a) <= rel_tol * max(abs(a), abs(b)):
            continue
        signs.append(1 if b > a else -1)
    changes = sum(1 for s0, s1 in zip(signs, signs[1:]) if s0 != s1)
    if changes == 0:
        return True
    return changes == 1 and signs[0] == -1


def is_binding(t_rfr: float, grid: SweepGrid) -> bool:
    """Whether the refractory cap sits below the event rate that tracking the
    sweep sine at the smallest threshold would need."""
    if t_rfr <= 0:
        return False
    spec = grid.signal_spec
    amp = spec.amplitude * spec.gain
    needed = 4 * amp * spec.frequency_hz / grid.v_th_values[0]
    return max_rate_hz(t_rfr, spec.sample_rate_hz) < needed


@dataclass(frozen=True)
class RateMeasurement:
    amplitude: float
    frequency_hz: float
    v_th: float
    rate_hz: float

    @property
    def drive(self) -> float:
        return self.amplitude * self.frequency_hz / self.v_th


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit ``rate = k * A * f / v_th`` through the origin.

    ``r_squared`` uses the centred total sum of squares.
    """

    k: float
    r_squared: float
    measurements: tuple[RateMeasurement, ...]

    def predict(self, amplitude: float, frequency_hz: float, v_th: float) -> float:
        return self.k * amplitude * frequency_hz / v_th


def fit_through_origin(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k = float(np.dot(x, y) / np.dot(x, x))
    ss_res = float(np.sum((y - k * x) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return k, r2


def rate_model_fit(
    amplitudes: Sequence[float],
    frequencies: Sequence[float],
    v_th_values: Sequence[float],
    t_rfr: float,
    template: SynthSpec,
) -> RateFit:
    """Measure the event rate on every (A, f, v_th) sine and fit the rate model.

    Raises
    ------
    SaturatedRegime
        When ``t_rfr > 0`` and some rate reaches half the refractory limit,
        i.e. the proportional regime was left.
    """
    out = []
    for a in amplitudes:
        for f in frequencies:
            spec = replace(template, kind="sine", amplitude=float(a), frequency_hz=float(f))
            sig = synthesize(spec)
            for v in v_th_values:
                rate = encode(sig, AdmConfig.symmetric(v, t_rfr)).rate_hz()
                out.append(RateMeasurement(float(a), float(f), float(v), rate))
    if t_rfr > 0:
        worst = max(m.rate_hz for m in out)
        if worst >= 0.5 / t_rfr:
            raise SaturatedRegime(
                f"rate {worst:.1f} Hz reaches half the refractory limit {1 / t_rfr:.1f} Hz"
            )
    k, r2 = fit_through_origin([m.drive for m in out], [m.rate_hz for m in out])
    return RateFit(k, r2, tuple(out))


def ideal_rate_hz(amplitude: float, frequency_hz: float, v_th: float) -> float:
    """Events per second for a sine tracked without rate limit: total
    variation ``4 A f`` divided by the step size."""
    return 4.0 * amplitude * frequency_hz / v_th


__all__ = [
    "DEFAULT_T_RFR_S",
    "RateFit",
    "RateMeasurement",
    "SweepGrid",
    "SweepRecord",
    "curve",
    "default_grid",
    "default_sweep_signal",
    "evaluate_cell",
    "find_min_rmse",
    "fit_through_origin",
    "ideal_rate_hz",
    "is_binding",
    "is_quasi_convex",
    "log_grid",
    "rate_model_fit",
    "rmse_sweep",
]
