"""Command-line front door.

Subcommands map one-to-one onto library operations: simulate (chain
propagation, per-probe spectrum CSVs), sweep (two-tone power sweep),
ip3 (sweep plus intercept fit), evm (spur budget), plan (spur
enumeration or grid search), alias-check (sampler collisions),
coupling (S-parameter dataset report and channel matrix), leveling
(doubler transfer curve).

Exit codes: 0 success, 1 config error, 2 runtime/validation error,
3 I/O error.  All file output is deterministic byte-for-byte for fixed
inputs, including across thread counts.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from . import analysis, engine, mimo, planner
from .chainconfig import parse_chain_config, parse_frequency, validate_chain
from .components import DoublerSpec
from .errors import ConfigError, SpurlineError
from .mimo import ManifestError
from .units import DEFAULT_FLOOR_DBM, SummationMode

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_IO = 3

ALIAS_CSV_HEADER = "rx_if_hz,n,m_tx,m_rx,alias_hz,desired_alias_hz,distance_hz"
LEVELING_CSV_HEADER = "pin_dbm,pout_dbm"

_MODES = {"power_sum": SummationMode.POWER_SUM, "worst_case": SummationMode.WORST_CASE}


def _ghz(f_hz: int) -> str:
    return f"{f_hz / 1e9:.9f}"


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _floor_dbm() -> float:
    raw = os.environ.get("SPURLINE_FLOOR_DBM")
    if raw is None:
        return DEFAULT_FLOOR_DBM
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"SPURLINE_FLOOR_DBM must be a number, got {raw!r}") from None
    if math.isnan(value):
        raise ConfigError("SPURLINE_FLOOR_DBM must not be NaN")
    return value


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


# -----------------------------------------------------------------------------
# svg emitter
# -----------------------------------------------------------------------------

_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_line_chart(
    series: list[tuple[str, list[tuple[float, float]]]],
    title: str,
    x_label: str,
    y_label: str,
) -> str:
    """Minimal fixed-styling line chart; one polyline per series."""
    pts = [
        (x, y)
        for _, data in series
        for x, y in data
        if math.isfinite(x) and math.isfinite(y)
    ]
    if not pts:
        raise SpurlineError("nothing to plot: no finite data points")
    x_min = min(p[0] for p in pts)
    x_max = max(p[0] for p in pts)
    y_min = min(p[1] for p in pts)
    y_max = max(p[1] for p in pts)
    if x_max == x_min:
        x_min, x_max = x_min - 1.0, x_max + 1.0
    if y_max == y_min:
        y_min, y_max = y_min - 1.0, y_max + 1.0
    pad = 0.05 * (y_max - y_min)
    y_min -= pad
    y_max += pad

    width, height = 640.0, 400.0
    left, right, top, bottom = 62.0, 18.0, 34.0, 46.0
    plot_w = width - left - right
    plot_h = height - top - bottom

    def sx(x: float) -> float:
        return left + (x - x_min) / (x_max - x_min) * plot_w

    def sy(y: float) -> float:
        return top + (y_max - y) / (y_max - y_min) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="monospace" font-size="13">{title}</text>',
        f'<rect x="{left:.1f}" y="{top:.1f}" width="{plot_w:.1f}" height="{plot_h:.1f}" '
        f'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    for i in range(5):
        t = i / 4.0
        xv = x_min + t * (x_max - x_min)
        yv = y_min + t * (y_max - y_min)
        out.append(
            f'<text x="{sx(xv):.1f}" y="{height - bottom + 16:.1f}" text-anchor="middle" '
            f'font-family="monospace" font-size="10">{xv:.6g}</text>'
        )
        out.append(
            f'<text x="{left - 6:.1f}" y="{sy(yv) + 3:.1f}" text-anchor="end" '
            f'font-family="monospace" font-size="10">{yv:.6g}</text>'
        )
    out.append(
        f'<text x="{left + plot_w / 2:.1f}" y="{height - 8:.1f}" text-anchor="middle" '
        f'font-family="monospace" font-size="11">{x_label}</text>'
    )
    out.append(
        f'<text x="14" y="{top + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="monospace" font-size="11" '
        f'transform="rotate(-90 14 {top + plot_h / 2:.1f})">{y_label}</text>'
    )
    for i, (label, data) in enumerate(series):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        finite = [(x, y) for x, y in data if math.isfinite(x) and math.isfinite(y)]
        if finite:
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in finite)
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        ly = top + 14 + 14 * i
        out.append(
            f'<rect x="{width - right - 130:.1f}" y="{ly - 8:.1f}" width="10" height="10" fill="{color}"/>'
        )
        out.append(
            f'<text x="{width - right - 116:.1f}" y="{ly:.1f}" '
            f'font-family="monospace" font-size="10">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -----------------------------------------------------------------------------
# subcommands
# -----------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    chain = parse_chain_config(_read_text(args.config), args.set)
    if args.lint:
        for w in validate_chain(chain):
            print(f"warning: {w.code}: {w.stage_id}: {w.message}", file=sys.stderr)
    result = engine.propagate(
        chain,
        mode=_MODES[args.mode],
        floor_dbm=_floor_dbm(),
        desired_only=args.desired_only,
    )
    sections = [("final", result.final)]
    sections.extend((name, result.probe_spectra[name]) for name in sorted(result.probe_spectra))
    if args.output is None:
        parts = []
        for name, spectrum in sections:
            parts.append(f"# spectrum {name}\n" + engine.spectrum_to_csv(spectrum))
        sys.stdout.write("\n".join(parts))
    else:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        for name, spectrum in sections:
            (out / f"{name}.csv").write_text(
                engine.spectrum_to_csv(spectrum), encoding="utf-8"
            )
    return EXIT_OK


def _run_sweep(args) -> engine.SweepResult:
    chain = parse_chain_config(_read_text(args.config), args.set)
    return engine.run_two_tone_sweep(
        chain,
        parse_frequency(args.f_center, "--f-center"),
        parse_frequency(args.spacing, "--spacing"),
        args.start,
        args.stop,
        args.step,
        mode=_MODES[args.mode],
        floor_dbm=_floor_dbm(),
        threads=args.threads,
    )


def cmd_sweep(args) -> int:
    sweep = _run_sweep(args)
    _emit(sweep.to_csv(), args.output)
    if args.svg:
        series = []
        for label, pick in (
            ("fund", lambda r: r.fund_dbm),
            ("im3_low", lambda r: r.im3_low_dbm),
            ("im3_high", lambda r: r.im3_high_dbm),
            ("im5_low", lambda r: r.im5_low_dbm),
            ("im5_high", lambda r: r.im5_high_dbm),
        ):
            data = [(r.pin_dbm, pick(r)) for r in sweep.rows if pick(r) is not None]
            if data:
                series.append((label, data))
        Path(args.svg).write_text(
            svg_line_chart(series, "two-tone sweep", "input power (dBm)", "output (dBm)"),
            encoding="utf-8",
        )
    return EXIT_OK


def cmd_ip3(args) -> int:
    fit = analysis.fit_ip3(_run_sweep(args))
    _emit(fit.to_csv() if args.format == "csv" else fit.to_report(), args.output)
    return EXIT_OK


def cmd_evm(args) -> int:
    contributions = []
    for i, item in enumerate(args.levels.split(","), start=1):
        item = item.strip()
        if not item:
            raise ConfigError("--levels contains an empty entry")
        if ":" in item:
            label, _, value = item.partition(":")
            label = label.strip()
        else:
            label, value = f"spur_{i}", item
        try:
            contributions.append((label, float(value)))
        except ValueError:
            raise ConfigError(f"bad dBc level {value!r} in --levels") from None
    if args.mode == "both" and args.format == "csv":
        raise ConfigError("--mode both is report-only; pick power_sum or worst_case for CSV")
    modes = (
        (SummationMode.POWER_SUM, SummationMode.WORST_CASE)
        if args.mode == "both"
        else (_MODES[args.mode],)
    )
    chunks = []
    for mode in modes:
        budget = analysis.make_evm_budget(contributions, mode)
        chunks.append(budget.to_csv() if args.format == "csv" else budget.to_report())
    _emit("\n".join(chunks) if len(chunks) > 1 else chunks[0], args.output)
    return EXIT_OK


def _plan_report_text(report: planner.SpurReport) -> str:
    plan = report.plan
    lines = [
        f"PLAN f_if={_ghz(plan.f_if_hz)} GHz f_lo_tx={_ghz(plan.f_lo_tx_hz)} GHz "
        f"f_lo_rx={_ghz(plan.f_lo_rx_hz)} GHz sideband={plan.sideband}",
        f"DESIRED_RF: {_ghz(plan.desired_rf_hz)} GHz",
        f"DESIRED_RX_IF: {_ghz(report.desired_rx_if_hz)} GHz",
        f"ENTRIES: {len(report.entries)}",
    ]
    worst = report.worst_inband_dbc()
    lines.append(
        "WORST_INBAND_DBC: none"
        if worst == -math.inf
        else f"WORST_INBAND_DBC: {worst:.2f}"
    )
    if report.degenerate:
        orders = report.collision_orders()
        at = f"{_ghz(report.desired_rx_if_hz)} GHz"
        if orders:
            joined = ",".join(str(o) for o in orders)
            lines.append(f"DEGENERATE: yes (orders {joined} collide at {at})")
        else:
            lines.append(f"DEGENERATE: yes (image path collides at {at})")
    else:
        lines.append("DEGENERATE: no")
    return "\n".join(lines) + "\n"


def _search_report_text(ranked: list[planner.RankedPlan]) -> str:
    lines = [f"SEARCH RESULTS: {len(ranked)} plans"]
    for rank, r in enumerate(ranked, start=1):
        p = r.plan
        worst = "none" if r.worst_inband_dbc == -math.inf else f"{r.worst_inband_dbc:.2f}"
        lines.append(
            f"#{rank} f_if={_ghz(p.f_if_hz)} GHz f_lo_tx={_ghz(p.f_lo_tx_hz)} GHz "
            f"f_lo_rx={_ghz(p.f_lo_rx_hz)} GHz degenerate={r.degenerate_count} "
            f"worst_inband_dbc={worst} violations={r.sampler_violations}"
        )
    return "\n".join(lines) + "\n"


def cmd_plan(args) -> int:
    cfg = planner.parse_plan_config(_read_text(args.config), args.set)
    if cfg.constraints is not None and not args.enumerate:
        ranked = planner.search_plans(cfg.constraints, threads=args.threads)
        text = (
            planner.ranked_plans_to_csv(ranked)
            if args.format == "csv"
            else _search_report_text(ranked)
        )
    else:
        report = planner.enumerate_rx_spurs(
            cfg.plan, cfg.n_max, cfg.m_max, cfg.tx_mixer, cfg.rx_mixer
        )
        text = report.to_csv() if args.format == "csv" else _plan_report_text(report)
    _emit(text, args.output)
    return EXIT_OK


def cmd_alias_check(args) -> int:
    cfg = planner.parse_plan_config(_read_text(args.config), args.set)
    report = planner.enumerate_rx_spurs(
        cfg.plan, cfg.n_max, cfg.m_max, cfg.tx_mixer, cfg.rx_mixer
    )
    fs = parse_frequency(args.fs, "--fs") if args.fs is not None else None
    guard = parse_frequency(args.guard, "--guard") if args.guard is not None else None
    violations = planner.check_sampler_collisions(report, fs, guard)
    fs_eff = fs if fs is not None else cfg.plan.sampler_fs_hz
    guard_eff = guard if guard is not None else cfg.plan.guard_hz
    if args.format == "csv":
        lines = [ALIAS_CSV_HEADER]
        for v in violations:
            e = v.entry
            lines.append(
                f"{e.rx_if_hz},{e.n},{e.m_tx:+d},{e.m_rx:+d},"
                f"{v.alias_hz},{v.desired_alias_hz},{v.distance_hz}"
            )
        text = "\n".join(lines) + "\n"
    else:
        desired_alias = planner.alias_frequency(report.desired_rx_if_hz, fs_eff)
        lines = [
            f"ALIAS CHECK fs={_ghz(fs_eff)} GHz guard={_ghz(guard_eff)} GHz",
            f"DESIRED_ALIAS: {_ghz(desired_alias)} GHz",
            f"VIOLATIONS: {len(violations)}",
        ]
        for v in violations:
            e = v.entry
            lines.append(
                f"  n={e.n} m_tx={e.m_tx:+d} m_rx={e.m_rx:+d} rx_if={_ghz(e.rx_if_hz)} GHz "
                f"alias={_ghz(v.alias_hz)} GHz distance={v.distance_hz} Hz"
            )
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def _fmt_complex(c: complex) -> str:
    return f"{c.real:.6e}{c.imag:+.6e}j"


def cmd_coupling(args) -> int:
    dataset = mimo.load_coupling_dataset(args.manifest)
    f_hz = parse_frequency(args.freq, "--freq")
    if args.separation is not None:
        c = mimo.coupling_at(dataset, f_hz, args.separation, args.pol)
        ch = mimo.build_channel_matrix(
            1.0 + 0j, c, complex(args.mismatch_tx), complex(args.mismatch_rx)
        )
        lines = [
            f"CHANNEL AT {_ghz(f_hz)} GHz, {format(args.separation, 'g')} mm, {args.pol}",
            f"COUPLING_S21_DB: {20.0 * math.log10(abs(c)):.6f}",
            f"H11: {_fmt_complex(ch.h11)}",
            f"H12: {_fmt_complex(ch.h12)}",
            f"H21: {_fmt_complex(ch.h21)}",
            f"H22: {_fmt_complex(ch.h22)}",
            f"CONDITION_NUMBER: {ch.condition_number:.8f}",
        ]
        _emit("\n".join(lines) + "\n", args.output)
        return EXIT_OK
    text = mimo.coupling_report_csv(dataset, f_hz)
    _emit(text, args.output)
    if args.svg:
        series = []
        for pol in mimo.POLARIZATIONS:
            data = [
                (
                    r.separation_mm,
                    20.0 * math.log10(abs(r.sparams.at_frequency(f_hz)[1])),
                )
                for r in dataset.for_polarization(pol)
            ]
            if data:
                series.append((pol, data))
        Path(args.svg).write_text(
            svg_line_chart(
                series, f"coupling at {_ghz(f_hz)} GHz", "separation (mm)", "|s21| (dB)"
            ),
            encoding="utf-8",
        )
    return EXIT_OK


def cmd_leveling(args) -> int:
    chain = parse_chain_config(_read_text(args.config), args.set)
    spec = next((s for _, s in chain.stages if isinstance(s, DoublerSpec)), None)
    if spec is None:
        raise ConfigError("leveling needs a chain with a doubler stage")
    if args.step <= 0:
        raise ConfigError(f"--step must be > 0 (got {args.step})")
    if args.start > args.stop:
        raise ConfigError("--start must be <= --stop")
    curve = []
    i = 0
    while True:
        pin = args.start + i * args.step
        if pin > args.stop + 1e-9:
            break
        curve.append((pin, engine.doubler_output_dbm(pin, spec)))
        i += 1
    threshold = analysis.detect_leveling_threshold(curve)
    lines = [LEVELING_CSV_HEADER]
    lines.extend(f"{pin:.6f},{pout:.6f}" for pin, pout in curve)
    lines.append(f"threshold,{threshold:.6f}")
    _emit("\n".join(lines) + "\n", args.output)
    if args.svg:
        Path(args.svg).write_text(
            svg_line_chart(
                [("pout", curve)], "doubler leveling", "input power (dBm)", "output power (dBm)"
            ),
            encoding="utf-8",
        )
    return EXIT_OK


# -----------------------------------------------------------------------------
# parser
# -----------------------------------------------------------------------------

def _add_common(p, config_help: str):
    p.add_argument("--config", required=True, help=config_help)
    p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="BLOCK.KEY=VALUE",
        help="override one config value (repeatable)",
    )
    p.add_argument("--output", help="write to this file instead of stdout")


def _add_sweep_args(p):
    p.add_argument("--f-center", default="28 GHz", help="two-tone center frequency (default: 28 GHz)")
    p.add_argument("--spacing", default="10 MHz", help="tone spacing (default: 10 MHz)")
    p.add_argument("--start", type=float, default=-30.0, help="sweep start power, dBm (default: -30)")
    p.add_argument("--stop", type=float, default=-10.0, help="sweep stop power, dBm (default: -10)")
    p.add_argument("--step", type=float, default=1.0, help="sweep step, dB (default: 1)")
    p.add_argument("--mode", choices=tuple(_MODES), default="power_sum", help="collision summation mode")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spurline",
        description="Behavioral RF chain simulator: spurs, intermods, frequency plans, coupling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="propagate a chain and emit spectrum CSVs")
    _add_common(p, "chain scenario file (.chain)")
    p.add_argument("--mode", choices=tuple(_MODES), default="power_sum", help="collision summation mode")
    p.add_argument("--desired-only", action="store_true", help="suppress spur and intermod products")
    p.add_argument("--lint", action="store_true", help="print chain warnings to stderr")
    p.set_defaults(func=cmd_simulate)
    # with --output, one CSV per spectrum lands in that directory

    p = sub.add_parser("sweep", help="two-tone power sweep through a source-free chain")
    _add_common(p, "chain scenario file (.chain), no source blocks")
    _add_sweep_args(p)
    p.add_argument("--svg", help="also write a line chart to this SVG file")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ip3", help="two-tone sweep plus third-order intercept fit")
    _add_common(p, "chain scenario file (.chain), no source blocks")
    _add_sweep_args(p)
    p.add_argument("--format", choices=("report", "csv"), default="report")
    p.set_defaults(func=cmd_ip3)

    p = sub.add_parser("evm", help="EVM budget from a spur list")
    p.add_argument(
        "--levels",
        required=True,
        metavar="DBC[,DBC...]",
        help="comma-separated spur levels in dBc, optionally label:level",
    )
    p.add_argument("--mode", choices=("power_sum", "worst_case", "both"), default="both")
    p.add_argument("--format", choices=("report", "csv"), default="report")
    p.add_argument("--output", help="write to this file instead of stdout")
    p.set_defaults(func=cmd_evm)

    p = sub.add_parser("plan", help="classify a frequency plan or search a grid")
    _add_common(p, "plan file (.plan)")
    p.add_argument("--format", choices=("report", "csv"), default="report")
    p.add_argument("--threads", type=int, default=1, help="worker threads for grid search")
    p.add_argument(
        "--enumerate",
        action="store_true",
        help="report the base [plan] even when a [search] block exists",
    )
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("alias-check", help="sampler sub-Nyquist collision check")
    _add_common(p, "plan file (.plan)")
    p.add_argument("--fs", help="sampling rate, overrides the plan's sampler_fs")
    p.add_argument("--guard", help="alias guard band, overrides the plan's guard")
    p.add_argument("--format", choices=("report", "csv"), default="report")
    p.set_defaults(func=cmd_alias_check)

    p = sub.add_parser("coupling", help="antenna coupling report or channel matrix")
    p.add_argument("--manifest", required=True, help="coupling dataset manifest.csv")
    p.add_argument("--freq", default="30 GHz", help="evaluation frequency (default: 30 GHz)")
    p.add_argument("--separation", type=float, help="emit the channel matrix at this separation (mm)")
    p.add_argument("--pol", choices=mimo.POLARIZATIONS, default="co")
    p.add_argument("--mismatch-tx", type=float, default=0.0, help="|reflection| at the transmit ports")
    p.add_argument("--mismatch-rx", type=float, default=0.0, help="|reflection| at the receive ports")
    p.add_argument("--output", help="write to this file instead of stdout")
    p.add_argument("--svg", help="also write a line chart to this SVG file")
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("leveling", help="doubler transfer curve and threshold")
    _add_common(p, "chain scenario file (.chain) containing a doubler")
    p.add_argument("--start", type=float, default=-30.0, help="input sweep start, dBm (default: -30)")
    p.add_argument("--stop", type=float, default=0.0, help="input sweep stop, dBm (default: 0)")
    p.add_argument("--step", type=float, default=0.5, help="input sweep step, dB (default: 0.5)")
    p.add_argument("--svg", help="also write a line chart to this SVG file")
    p.set_defaults(func=cmd_leveling)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ManifestError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SpurlineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
