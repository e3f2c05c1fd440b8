"""Command-line driver: ``admsim {synth,encode,decode,sweep,adaptive}``.

Exit codes: 0 success, 1 validation or domain error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as fio
from .adaptive import encode_adaptive
from .config import RunConfig, load_config
from .encoder import encode, gained_samples
from .errors import AdmError, InvalidConfig
from .reconstruction import reconstruct, reconstruction_error
from .svg import Panel, Series, decimate, write_svg
from .sweep import curve, find_min_rmse, rmse_sweep
from .synthesis import default_hfo_spec, synthesize
from .types import EventStream, Signal

OUT_ENV = "ADMSIM_OUT"

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


class _Ctx:
    def __init__(self, args, cfg: RunConfig):
        self.args = args
        self.cfg = cfg
        out = args.out or cfg.output_dir or os.environ.get(OUT_ENV) or "out"
        self.out = Path(out)

    def say(self, msg: str) -> None:
        if not self.args.quiet:
            print(msg)

    def outfile(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name


def _load_signal(cfg: RunConfig, default=None) -> Signal:
    if cfg.input_path is not None:
        return fio.read_signal(cfg.input_path, cfg.input_column)
    if cfg.signal_spec is not None:
        return synthesize(cfg.signal_spec)
    if default is not None:
        return synthesize(default)
    raise InvalidConfig("config has no [signal] section")


def _summary(events: EventStream) -> str:
    return (
        f"{len(events)} events, rate {events.rate_hz():.3f} Hz, "
        f"UP {events.n_up} / DN {events.n_dn}"
    )


def cmd_synth(ctx: _Ctx) -> int:
    sig = _load_signal(ctx.cfg)
    path = fio.write_trace(ctx.outfile("signal.csv"), {"signal": sig.samples}, sig.sample_rate_hz)
    ctx.say(f"wrote {len(sig)} samples @ {sig.sample_rate_hz:g} Hz to {path}")
    return EXIT_OK


def _settled(events: EventStream, settle_s: float) -> EventStream:
    if settle_s <= 0:
        return events
    start = int(round(settle_s * events.source_sample_rate_hz))
    kept = tuple(e for e in events.events if e.index >= start)
    return EventStream(kept, events.source_sample_rate_hz, events.source_length)


def _steady_rate(events: EventStream, settle_s: float) -> float:
    span = events.duration_s - settle_s
    return len(events) / span if span > 0 else 0.0


def cmd_encode(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    sig = _load_signal(cfg)
    if cfg.adaptive is not None:
        events, _, _ = encode_adaptive(sig, cfg.adaptive, cfg.adm, cfg.gain_table)
        events = _settled(events, cfg.settle_s)
    else:
        events = encode(sig, cfg.adm, cfg.gain_table)
    fio.write_trace(ctx.outfile("signal.csv"), {"signal": sig.samples}, sig.sample_rate_hz)
    path = fio.write_events(ctx.outfile("events.csv"), events)
    ctx.say(_summary(events))
    ctx.say(f"events written to {path}")
    return EXIT_OK


def cmd_decode(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    events_path = ctx.args.events or cfg.events_path
    if events_path is None:
        raise InvalidConfig("no event file given (--events or [decode] events)")
    original_path = ctx.args.original or cfg.original_path
    events = fio.read_events(events_path)
    rc = cfg.reconstruction()
    recon = reconstruct(events, rc)
    path = fio.write_trace(ctx.outfile("reconstruction.csv"), {"reconstruction": recon.samples}, recon.sample_rate_hz)
    ctx.say(f"reconstructed {len(recon)} samples from {len(events)} events to {path}")
    if original_path is not None:
        original = fio.read_signal(original_path)
        reference = original.with_samples(gained_samples(original, cfg.adm, cfg.gain_table))
        err = reconstruction_error(reference, events, rc)
        ctx.outfile("rmse.txt").write_text(f"{err!r}\n")
        ctx.say(f"rmse={err!r}")
    return EXIT_OK


def cmd_sweep(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    grid = cfg.sweep_grid()
    workers = int((cfg.sweep or {}).get("workers", 1))
    records = rmse_sweep(grid, max_workers=workers)
    csv_path = fio.write_records(ctx.outfile("sweep.csv"), records)
    panel = Panel(title="reconstruction RMSE vs threshold", xlabel="v_th", ylabel="RMSE", logx=True)
    for t in grid.t_rfr_values:
        v, r = curve(records, t)
        panel.series.append(Series(f"t_rfr={t * 1e3:g} ms", v, r, markers=True))
    write_svg(ctx.outfile("sweep.svg"), [panel])
    v, t, e = find_min_rmse(records)
    ctx.say(f"{len(records)} cells written to {csv_path}")
    ctx.say(f"min rmse={e!r} at v_th={v!r}, t_rfr={t!r}")
    return EXIT_OK


def cmd_adaptive(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    if cfg.adaptive is None:
        raise InvalidConfig("adaptive command needs an [adaptive] section")
    sig = _load_signal(cfg, default=default_hfo_spec())
    events, v_th, diag = encode_adaptive(sig, cfg.adaptive, cfg.adm, cfg.gain_table)
    events = _settled(events, cfg.settle_s)
    gained = gained_samples(sig, cfg.adm, cfg.gain_table)
    cols = {
        "input": gained,
        "envelope": diag.envelope.samples,
        "slow": diag.slow.samples,
        "fast": diag.fast.samples,
        "gate": diag.gate.astype(np.int64),
        "v_th": v_th.samples,
    }
    fio.write_trace(ctx.outfile("adaptive_traces.csv"), cols, sig.sample_rate_hz)
    fio.write_events(ctx.outfile("events.csv"), events)
    _adaptive_figure(ctx.outfile("adaptive.svg"), sig.times(), cols, events)
    ctx.say(_summary(events))
    rate = _steady_rate(events, cfg.settle_s)
    line = f"steady rate {rate:.3f} Hz after {cfg.settle_s:g} s"
    if cfg.sparsity_bound_hz is not None:
        ok = rate <= cfg.sparsity_bound_hz
        line += f" ({'within' if ok else 'ABOVE'} sparsity bound {cfg.sparsity_bound_hz:g} Hz)"
    ctx.say(line)
    ctx.say(f"gate high on {int(diag.gate.sum())} of {len(sig)} samples")
    return EXIT_OK


def _adaptive_figure(path: Path, t: np.ndarray, cols: dict, events: EventStream) -> None:
    def tr(label, y, **kw):
        x, yy = decimate(t, np.asarray(y, dtype=float))
        return Series(label, x, yy, **kw)

    top = Panel(title="input, envelope and threshold", ylabel="amplitude")
    top.series = [tr("input", cols["input"]), tr("envelope", cols["envelope"]), tr("v_th", cols["v_th"], dashed=True)]
    scale = max(float(np.max(cols["slow"])), float(np.max(cols["fast"])), 1e-300)
    mid = Panel(title="slow / fast filters and hold gate", ylabel="filter output")
    mid.series = [
        tr("slow", cols["slow"]),
        tr("fast", cols["fast"]),
        tr("gate", np.asarray(cols["gate"]) * scale, dashed=True),
    ]
    bot = Panel(title="UP / DN events", xlabel="time (s)", ylabel="polarity")
    bot.series = [Series("events", events.times_s(), events.signs(), kind="stems")]
    write_svg(path, [top, mid, bot])


COMMANDS = {
    "synth": cmd_synth,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "sweep": cmd_sweep,
    "adaptive": cmd_adaptive,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="admsim", description="Asynchronous delta modulator simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="TOML run config")
        p.add_argument("--out", type=Path, default=None, help=f"output directory (default: [output] dir, ${OUT_ENV}, ./out)")
        p.add_argument("--seed", type=int, default=None, help="override the synthesis seed")
        p.add_argument("--quiet", action="store_true", help="suppress the summary")
        if name == "decode":
            p.add_argument("--events", type=Path, default=None, help="event file to decode")
            p.add_argument("--original", type=Path, default=None, help="original trace for the RMSE")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        return COMMANDS[args.command](_Ctx(args, cfg))
    except AdmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        name = exc.filename if exc.filename is not None else ""
        print(f"I/O error: {name}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
