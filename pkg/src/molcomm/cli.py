"""Command-line front end.

Every subcommand prints CSV (6 significant digits, one header row with
units) or JSON (full precision) to stdout or ``--out``.  Subcommands with a
report path also accept ``--figure PATH`` to render a plot next to the data.

Exit status: 0 on success, 2 on usage or parse errors, 3 when a parameter
fails validation.  Output never contains colour codes, so ``NO_COLOR`` needs
no special handling.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import multihop, omdm
from .channel import ChannelParams, impulse_response, parse_length, peak_concentration
from .errors import MolcommError, ParameterError
from .modem import DpConfig, as_bits, bits_to_str
from .simkit import (
    BIT_DISTRIBUTION,
    ConfigParseError,
    ExperimentConfig,
    LinkScheme,
    generate_bits,
    run_link_experiment,
    simulate_samples,
    sweep,
)

EXIT_USAGE = 2
EXIT_INVALID = 3

PRESETS = {
    "paper-k4": {"diffusion": 0.43, "distance": "1.5cm", "quantity": 1000.0, "k": 4.0,
                 "history": 20, "bits": 1000},
    "paper-k2": {"diffusion": 0.43, "distance": "1.5cm", "quantity": 1000.0, "k": 2.0,
                 "history": 40, "bits": 1000},
}
LINK_DEFAULTS = dict(PRESETS["paper-k4"], seed=0, scheme=LinkScheme.BCSK_DP.value,
                     secondary_diffusion=None)

# field names in validation messages -> the flag a user would fix
FIELD_FLAGS = {
    "diffusion_coefficient": "--diffusion",
    "distance": "--distance",
    "base_quantity": "--quantity",
    "spacing_factor": "--k",
    "history_depth": "--history",
    "bit_count": "--bits",
    "seed": "--seed",
    "symbol_count": "--bits",
}


class UsageError(Exception):
    """Bad input detected after argparse (unreadable or malformed files)."""


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    if value is None:
        return ""
    return str(value)


def render(columns, rows, fmt: str, meta: dict | None = None, extra: dict | None = None) -> str:
    """Serialise a table; JSON also carries ``meta`` and any ``extra`` fields."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()
    doc = {}
    if meta:
        doc["meta"] = meta
    if extra:
        doc.update(extra)
    doc["columns"] = list(columns)
    doc["rows"] = [[_jsonable(v) for v in row] for row in rows]
    return json.dumps(doc, indent=2) + "\n"


def _jsonable(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def emit(text: str, out: str | None) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)


def _distance(text) -> float:
    try:
        return parse_length(text)
    except ParameterError as exc:
        raise ParameterError(f"--distance: {exc}") from None


# --- subcommands -------------------------------------------------------------

def cmd_impulse(args) -> None:
    if args.samples < 2:
        raise ParameterError(f"--samples must be >= 2, got {args.samples}")
    if not args.t_max > 0:
        raise ParameterError(f"--t-max must be > 0, got {args.t_max}")
    params = ChannelParams(args.diffusion, _distance(args.distance))
    times = np.linspace(0.0, args.t_max, args.samples)
    values = impulse_response(params, args.quantity, times)
    meta = {"diffusion_cm2_per_s": params.diffusion_coefficient, "distance_cm": params.distance,
            "quantity": args.quantity, "peak_time_s": params.peak_time,
            "peak_concentration": peak_concentration(params, args.quantity)}
    emit(render(["t_s", "concentration_molecules_per_cm3"], zip(times, values),
                args.format, meta), args.out)
    if args.figure:
        from .plotting import plot_impulse

        plot_impulse(times, values, params.peak_time, meta["peak_concentration"], args.figure)


def link_config(args) -> ExperimentConfig:
    """Resolve config file, preset and explicit flags (later wins) into a config."""
    if args.config and args.preset:
        raise UsageError("--config and --preset are mutually exclusive")
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError(f"--config {args.config}: expected a JSON object")
        try:
            base = ExperimentConfig.from_dict(doc)
        except ConfigParseError as exc:
            raise UsageError(f"--config {args.config}: {exc}") from None
        values = {
            "diffusion": base.channel.diffusion_coefficient, "distance": base.channel.distance,
            "quantity": base.dp.base_quantity, "k": base.dp.spacing_factor,
            "history": base.dp.history_depth, "bits": base.bit_count, "seed": base.seed,
            "scheme": base.scheme.value, "secondary_diffusion": base.secondary_diffusion,
        }
    else:
        values = dict(LINK_DEFAULTS)
        if args.preset:
            values.update(PRESETS[args.preset])
    for key in values:
        given = getattr(args, key, None)
        if given is not None:
            values[key] = given
    return ExperimentConfig(
        seed=values["seed"],
        bit_count=values["bits"],
        channel=ChannelParams(values["diffusion"], _distance(values["distance"])),
        dp=DpConfig(values["quantity"], values["k"], values["history"]),
        scheme=LinkScheme(values["scheme"]),
        secondary_diffusion=values["secondary_diffusion"],
    )


RESULT_COLUMNS = ["scheme", "bit_count", "bit_errors", "ber", "ones_to_zeros", "zeros_to_ones",
                  "molecules_emitted_total", "molecules_saved_vs_no_dp", "clamp_events",
                  "subchannel_ber_1", "subchannel_ber_2", "padded_bits"]


def _result_row(result) -> list:
    d = result.to_dict()
    sub = d.pop("subchannel_ber") or [None, None]
    return [d["scheme"], d["bit_count"], d["bit_errors"], d["ber"], d["ones_to_zeros"],
            d["zeros_to_ones"], d["molecules_emitted_total"], d["molecules_saved_vs_no_dp"],
            d["clamp_events"], sub[0], sub[1], d["padded_bits"]]


def cmd_ber(args) -> None:
    cfg = link_config(args)
    result = run_link_experiment(cfg)
    if args.format == "json":
        doc = {"meta": {"bit_distribution": BIT_DISTRIBUTION},
               "config": cfg.to_dict(), "result": result.to_dict(include_timing=args.timing)}
        emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        columns, row = list(RESULT_COLUMNS), _result_row(result)
        if args.timing:
            columns.append("wall_time_s")
            row.append(result.wall_time)
        emit(render(columns, [row], "csv"), args.out)


def cmd_sweep(args) -> None:
    base = link_config(args)
    grid = []
    for m in args.history_values:
        for i in range(args.repeats):
            grid.append(ExperimentConfig(base.seed + i, base.bit_count, base.channel,
                                         DpConfig(base.dp.base_quantity, base.dp.spacing_factor, m),
                                         base.scheme, base.secondary_diffusion))
    results = sweep(grid, workers=args.workers)
    rows = [[cfg.dp.history_depth, cfg.seed] + _result_row(res) for cfg, res in zip(grid, results)]
    emit(render(["history_depth", "seed"] + RESULT_COLUMNS, rows, args.format,
                {"bit_distribution": BIT_DISTRIBUTION, "spacing_factor": base.dp.spacing_factor}),
         args.out)
    if args.figure:
        from .plotting import plot_ber_sweep

        mean_ber = [float(np.mean([r.ber for c, r in zip(grid, results)
                                   if c.dp.history_depth == m])) for m in args.history_values]
        plot_ber_sweep(args.history_values, mean_ber, args.figure,
                       label=f"k = {base.dp.spacing_factor:g}")


def cmd_omdm(args) -> None:
    registry = omdm.MoleculeRegistry.load(args.registry)
    spec1, spec2 = (registry.get(name) for name in args.species)
    distance = _distance(args.distance)
    sub1, sub2 = omdm.make_subchannels(spec1, spec2, args.k, distance)
    if args.bits is not None:
        bits = as_bits(args.bits)
        if bits.size == 0:
            raise ParameterError("--bits must not be empty")
    else:
        bits = generate_bits(args.seed, args.count)
    frame = omdm.omdm_encode(bits, sub1, sub2, args.quantity, args.history)
    samples = [simulate_samples(sub.params, sched, sub.peak_time)
               for sub, sched in zip((sub1, sub2), frame.schedules)]
    decoded = omdm.omdm_decode(samples[0], samples[1], sub1, sub2, args.quantity,
                               bit_count=int(bits.size))
    usage = omdm.consumption_compare(bits, args.quantity)
    q = frame.quantities
    rows = [(i, frame.slot_times[i], int(frame.schedules[0].bits[i]), int(frame.schedules[1].bits[i]),
             q[i, 0], q[i, 1]) for i in range(frame.slot_count)]
    columns = ["slot", "release_time_s", "bit_species1", "bit_species2",
               "q_species1_molecules", "q_species2_molecules"]
    if args.format == "csv":
        emit(render(columns, rows, "csv"), args.out)
        return
    extra = {
        "species": [spec1.name, spec2.name],
        "k1": sub1.spacing_factor,
        "k2": sub2.spacing_factor,
        "symbol_duration_s": sub1.symbol_duration,
        "sent": bits_to_str(bits),
        "decoded": bits_to_str(decoded),
        "match": bool(np.array_equal(bits, decoded)),
        "padded": frame.padded,
        "epochs": frame.slot_count,
        "molecules_emitted_total": frame.total_molecules,
        "clamp_events": frame.clamp_events,
        "consumption": usage.as_dict(),
    }
    emit(render(columns, rows, "json", {"bit_distribution": BIT_DISTRIBUTION}, extra), args.out)


def cmd_multihop(args) -> None:
    template = multihop.HopPlan(_distance(args.distance), 1, args.efficiency, args.k,
                                args.diffusion)
    rows = multihop.hops_series(template, args.hops)
    meta = {"distance_cm": template.distance, "diffusion_cm2_per_s": template.diffusion_coefficient,
            "spacing_factor": template.spacing_factor,
            "bandwidth_efficiency": template.bandwidth_efficiency,
            "bandwidth_efficiency_assumed": args.efficiency_assumed}
    emit(render(["hops", "throughput_bit_per_s", "per_emission_ratio", "route_total_ratio"],
                rows, args.format, meta), args.out)
    if args.figure:
        from .plotting import plot_throughput

        plot_throughput(rows, args.figure)


def cmd_plan(args) -> None:
    reference = None
    if args.diffusion is not None:
        reference = ChannelParams(args.diffusion, _distance(args.distance))
    plan = omdm.plan_network(args.isomers, args.scheme, reference, args.k if reference else None)
    columns = ["scheme", "isomers", "channels", "bits_per_symbol_per_channel",
               "aggregate_bits_per_symbol", "molecules_per_bit_in_q", "aggregate_bits_per_s",
               "summary"]
    row = [plan.scheme.value, plan.isomer_count, plan.channels, plan.bits_per_symbol_per_channel,
           plan.aggregate_bits_per_symbol, plan.molecules_per_bit, plan.aggregate_bits_per_second,
           plan.summary]
    emit(render(columns, [row], args.format), args.out)


def cmd_budget(args) -> None:
    if args.dp:
        cfg = DpConfig(args.quantity, args.k, args.history)
        bits = generate_bits(args.seed, args.bits)
        params = ChannelParams(args.diffusion, _distance(args.distance) / args.hops)
        from .modem import dp_encode

        report = multihop.budget_report(args.quantity, schedule=dp_encode(cfg, bits, params.peak_time),
                                        reservoir=args.reservoir, hops=args.hops,
                                        distance=_distance(args.distance))
    else:
        report = multihop.budget_report(args.quantity, message_length=args.bits,
                                        reservoir=args.reservoir, hops=args.hops,
                                        distance=_distance(args.distance))
    columns = ["q_multi", "q_one_hop_equivalent", "route_total", "reservoir", "message_total",
               "messages_deliverable", "no_consumption", "hop_peak_concentration"]
    row = [report.q_multi, report.q_one_hop_equivalent, report.route_total, report.reservoir,
           report.message_total, report.messages_deliverable, report.no_consumption,
           report.hop_peak_concentration]
    emit(render(columns, [row], args.format), args.out)


# --- parser ------------------------------------------------------------------

def _output_flags(p, figure=False):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", metavar="PATH", help="write here instead of stdout")
    if figure:
        p.add_argument("--figure", metavar="PATH", help="also render a figure (png, svg, pdf)")


def _link_flags(p):
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", metavar="PATH", help="JSON file with ExperimentConfig fields")
    p.add_argument("--diffusion", type=float, help="diffusion coefficient, cm^2/s")
    p.add_argument("--distance", help="link distance, e.g. 1.5cm or 10um (default unit cm)")
    p.add_argument("--quantity", type=float, help="molecules per uncompensated '1'")
    p.add_argument("--k", type=float, help="symbol duration in units of the peak time")
    p.add_argument("--history", type=int, help="compensated prior symbols m")
    p.add_argument("--bits", type=int, help="number of random bits")
    p.add_argument("--seed", type=int)
    p.add_argument("--scheme", choices=[s.value for s in LinkScheme])
    p.add_argument("--secondary-diffusion", type=float, dest="secondary_diffusion",
                   help="second species' D for B_OMDM (default: same as --diffusion)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="molcomm", description="Diffusion-based molecular communication link toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("impulse", help="impulse response series")
    p.add_argument("--diffusion", type=float, default=0.43)
    p.add_argument("--distance", default="1.5cm")
    p.add_argument("--quantity", type=float, default=1000.0)
    p.add_argument("--t-max", type=float, default=5.0, dest="t_max")
    p.add_argument("--samples", type=int, default=501)
    _output_flags(p, figure=True)
    p.set_defaults(func=cmd_impulse)

    p = sub.add_parser("ber", help="seeded end-to-end BER experiment")
    _link_flags(p)
    p.add_argument("--timing", action="store_true", help="include wall time (not reproducible)")
    _output_flags(p)
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("sweep", help="BER over a range of history depths")
    _link_flags(p)
    p.add_argument("--history-values", type=int, nargs="+", default=[0, 5, 10, 20],
                   dest="history_values")
    p.add_argument("--repeats", type=int, default=1, help="seeds per depth (seed, seed+1, ...)")
    p.add_argument("--workers", type=int, default=1)
    _output_flags(p, figure=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("omdm", help="B-OMDM roundtrip over two registry species")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--bits", help="bit string to send, e.g. 1001")
    src.add_argument("--count", type=int, default=200, help="random bits when --bits is absent")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--registry", metavar="PATH", help="molecule registry JSON (default: bundled)")
    p.add_argument("--species", nargs=2, required=True, metavar=("FIRST", "SECOND"))
    p.add_argument("--k", type=float, default=4.0, help="spacing factor of the first species")
    p.add_argument("--distance", default="10um")
    p.add_argument("--quantity", type=float, default=1000.0)
    p.add_argument("--history", type=int, default=20)
    _output_flags(p)
    p.set_defaults(func=cmd_omdm)

    p = sub.add_parser("multihop", help="throughput and molecule ratios against hop count")
    p.add_argument("--distance", default="10um")
    p.add_argument("--diffusion", type=float, default=multihop.FIG3_DIFFUSION)
    p.add_argument("--k", type=float, default=multihop.FIG3_SPACING)
    p.add_argument("--efficiency", "-n", type=float, default=None,
                   help="bits per symbol (default 1, flagged as assumed)")
    p.add_argument("--hops", type=int, default=10, help="largest hop count N_max")
    _output_flags(p, figure=True)
    p.set_defaults(func=cmd_multihop)

    p = sub.add_parser("plan", help="isomer alphabet network planning")
    p.add_argument("--isomers", type=int, default=omdm.IMOSK_ISOMERS)
    p.add_argument("--scheme", choices=[s.value for s in omdm.Scheme], required=True)
    p.add_argument("--diffusion", type=float, help="reference species D for a bit/s figure")
    p.add_argument("--distance", default="10um")
    p.add_argument("--k", type=float, default=2.0)
    _output_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("budget", help="messages deliverable from one reservoir")
    p.add_argument("--quantity", type=float, default=1000.0)
    p.add_argument("--bits", type=int, default=1000, help="message length in bits")
    p.add_argument("--reservoir", type=float, default=multihop.RESERVOIR_MOLECULES)
    p.add_argument("--hops", type=int, default=1)
    p.add_argument("--distance", default="1.5cm")
    p.add_argument("--dp", action="store_true", help="cost a seeded DP-encoded message instead")
    p.add_argument("--diffusion", type=float, default=0.43)
    p.add_argument("--k", type=float, default=4.0)
    p.add_argument("--history", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    _output_flags(p)
    p.set_defaults(func=cmd_budget)
    return parser


def _flag_message(exc: Exception) -> str:
    text = str(exc)
    for field_name, flag in FIELD_FLAGS.items():
        if text.startswith(field_name) or f" {field_name} " in text:
            return text.replace(field_name, flag, 1)
    return text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "efficiency", "unset") is None:
        args.efficiency, args.efficiency_assumed = multihop.FIG3_EFFICIENCY, True
    elif hasattr(args, "efficiency"):
        args.efficiency_assumed = False
    try:
        args.func(args)
    except UsageError as exc:
        print(f"molcomm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MolcommError as exc:
        print(f"molcomm: invalid parameter: {_flag_message(exc)}", file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
