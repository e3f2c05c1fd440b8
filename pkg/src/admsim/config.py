"""TOML run configuration.

One file describes one experiment. Sections::

    [signal]          synthesis spec keys, or ``path`` (+ optional ``column``)
    [adm]             v_thu, v_thd (or v_th), t_rfr_s, gain_code, gain_table
    [adaptive]        AdaptiveConfig keys, plus settle_s and sparsity_bound_hz
    [reconstruction]  initial_level, highpass_cutoff_hz
    [sweep]           v_th_values or v_th_min/v_th_max/v_th_points, t_rfr_values, workers
    [decode]          events, original
    [output]          dir

Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .encoder import GainTable
from .errors import InvalidConfig
from .reconstruction import ReconstructionConfig
from .sweep import DEFAULT_T_RFR_S, SweepGrid, default_sweep_signal, log_grid
from .synthesis import Burst, SynthSpec
from .types import AdaptiveConfig, AdmConfig

SECTIONS = {"signal", "adm", "adaptive", "reconstruction", "sweep", "decode", "output"}


@dataclass(frozen=True)
class RunConfig:
    source: Path
    signal_spec: Optional[SynthSpec] = None
    input_path: Optional[Path] = None
    input_column: Optional[str] = None
    adm: AdmConfig = AdmConfig(0.1, 0.1)
    gain_table: GainTable = GainTable()
    adaptive: Optional[AdaptiveConfig] = None
    settle_s: float = 0.0
    sparsity_bound_hz: Optional[float] = None
    initial_level: float = 0.0
    highpass_cutoff_hz: Optional[float] = None
    sweep: Optional[dict] = None
    events_path: Optional[Path] = None
    original_path: Optional[Path] = None
    output_dir: Optional[Path] = None

    @property
    def has_signal(self) -> bool:
        return self.signal_spec is not None or self.input_path is not None

    def reconstruction(self) -> ReconstructionConfig:
        return ReconstructionConfig(
            self.adm.v_thu, self.adm.v_thd, self.initial_level, self.highpass_cutoff_hz or 0.0
        )

    def with_seed(self, seed: int) -> "RunConfig":
        if self.signal_spec is None:
            return self
        return replace(self, signal_spec=replace(self.signal_spec, seed=seed))

    def sweep_grid(self) -> SweepGrid:
        """Grid from ``[sweep]``; the signal defaults to the canonical sweep sine."""
        spec = self.signal_spec or default_sweep_signal()
        if spec.kind != "sine":
            raise InvalidConfig("sweeps run on a sine signal")
        s = self.sweep or {}
        if "v_th_values" in s:
            v = tuple(s["v_th_values"])
        else:
            amp = spec.amplitude * spec.gain
            lo = float(s.get("v_th_min", 0.004 * amp))
            hi = float(s.get("v_th_max", 0.4 * amp))
            v = log_grid(lo, hi, int(s.get("v_th_points", 16)))
        t = tuple(s.get("t_rfr_values", DEFAULT_T_RFR_S))
        cutoff = self.highpass_cutoff_hz
        if cutoff is None:
            cutoff = spec.frequency_hz / 20
        rc = ReconstructionConfig(1.0, 1.0, self.initial_level, cutoff)
        return SweepGrid(v, t, spec, rc, self.adm.gain_code)


def _take(section: dict, name: str, allowed: set) -> dict:
    unknown = set(section) - allowed
    if unknown:
        raise InvalidConfig(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    return dict(section)


def _resolve(base: Path, p) -> Path:
    p = Path(p)
    return p if p.is_absolute() else base / p


def _signal(sec: dict, base: Path):
    spec_keys = {f.name for f in fields(SynthSpec)}
    if "path" in sec:
        extra = set(sec) - {"path", "column"}
        if extra:
            raise InvalidConfig(
                f"[signal] has both a path and synthesis keys ({', '.join(sorted(extra))}); give exactly one source"
            )
        return None, _resolve(base, sec["path"]), sec.get("column")
    sec = _take(sec, "signal", spec_keys)
    if "bursts" in sec:
        try:
            sec["bursts"] = tuple(
                Burst(b["start_s"], b["duration_s"], b["center_hz"], b["amplitude"]) if isinstance(b, dict) else Burst(*b)
                for b in sec["bursts"]
            )
        except (KeyError, TypeError) as exc:
            raise InvalidConfig(f"bad burst entry: {exc}") from None
    if "band" in sec:
        sec["band"] = tuple(sec["band"])
    try:
        return SynthSpec(**sec), None, None
    except TypeError as exc:
        raise InvalidConfig(f"[signal] {exc}") from None


def _adm(sec: dict) -> tuple[AdmConfig, GainTable]:
    sec = _take(sec, "adm", {"v_th", "v_thu", "v_thd", "t_rfr_s", "gain_code", "gain_table"})
    table = GainTable(tuple(sec.pop("gain_table", GainTable().gains)))
    if "v_th" in sec:
        if "v_thu" in sec or "v_thd" in sec:
            raise InvalidConfig("[adm] give either v_th or v_thu/v_thd")
        v = sec.pop("v_th")
        sec["v_thu"] = sec["v_thd"] = v
    try:
        return AdmConfig(**sec), table
    except TypeError as exc:
        raise InvalidConfig(f"[adm] {exc}") from None


def parse_config(doc: dict[str, Any], source: Path) -> RunConfig:
    unknown = set(doc) - SECTIONS
    if unknown:
        raise InvalidConfig(f"unknown section(s): {', '.join(sorted(unknown))}")
    base = source.parent
    kw: dict[str, Any] = {"source": source}
    if "signal" in doc:
        kw["signal_spec"], kw["input_path"], kw["input_column"] = _signal(doc["signal"], base)
    if "adm" in doc:
        kw["adm"], kw["gain_table"] = _adm(doc["adm"])
    if "adaptive" in doc:
        sec = _take(doc["adaptive"], "adaptive", {f.name for f in fields(AdaptiveConfig)} | {"settle_s", "sparsity_bound_hz"})
        kw["settle_s"] = float(sec.pop("settle_s", 0.0))
        if kw["settle_s"] < 0:
            raise InvalidConfig("settle_s must be >= 0")
        if "sparsity_bound_hz" in sec:
            kw["sparsity_bound_hz"] = float(sec.pop("sparsity_bound_hz"))
        try:
            kw["adaptive"] = AdaptiveConfig(**sec)
        except TypeError as exc:
            raise InvalidConfig(f"[adaptive] {exc}") from None
    if "reconstruction" in doc:
        sec = _take(doc["reconstruction"], "reconstruction", {"initial_level", "highpass_cutoff_hz"})
        kw["initial_level"] = float(sec.get("initial_level", 0.0))
        if "highpass_cutoff_hz" in sec:
            kw["highpass_cutoff_hz"] = float(sec["highpass_cutoff_hz"])
    if "sweep" in doc:
        kw["sweep"] = _take(
            doc["sweep"], "sweep", {"v_th_values", "v_th_min", "v_th_max", "v_th_points", "t_rfr_values", "workers"}
        )
    if "decode" in doc:
        sec = _take(doc["decode"], "decode", {"events", "original"})
        if "events" in sec:
            kw["events_path"] = _resolve(base, sec["events"])
        if "original" in sec:
            kw["original_path"] = _resolve(base, sec["original"])
    if "output" in doc:
        sec = _take(doc["output"], "output", {"dir"})
        if "dir" in sec:
            kw["output_dir"] = _resolve(base, sec["dir"])
    return RunConfig(**kw)


def load_config(path) -> RunConfig:
    """Read and validate a TOML run config.

    Raises OSError when the file cannot be read and InvalidConfig (an
    AdmError) for syntax or content problems.
    """
    path = Path(path)
    text = path.read_text()
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InvalidConfig(f"{path}: {exc}") from None
    return parse_config(doc, path)
