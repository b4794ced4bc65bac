"""Experiment runner: single runs, parameter sweeps, and oracle verification.

Output is a flat CSV (or JSON) with one row per replication plus a summary
row; sweeps emit one aggregated row per parameter cell. Identical
invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from itertools import product

from . import analysis, metrics, oracle
from .config import Channel, ConfigError, SimConfig, derive_seed, rep_streams
from .engine import run_simulation
from .topology import generate_topology

COLUMNS = [
    "rep", "seed", "n", "l", "d_target", "d_measured", "k", "p", "per", "channel",
    "cn", "aod_mean", "aod_normstd", "cr", "csize_mean", "csize_normstd",
    "nclusters", "msg_chad", "msg_jreq", "msg_per_node", "term_time",
]

ANALYSIS_COLUMNS = [
    "pred_csize", "pred_aod", "pred_mchad", "pred_mjreq", "pred_msg_node",
    "pred_adjacent",
]

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    return f"{v:.10g}"


def _jsonable(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def _write_rows(rows: list[dict], columns: list[str], out_path: str | None, fmt: str) -> None:
    if fmt == "csv":
        lines = [",".join(columns)]
        lines.extend(",".join(_fmt(row[c]) for c in columns) for row in rows)
        text = "\n".join(lines) + "\n"
    else:
        reps = [r for r in rows if r["rep"] != "summary"]
        summaries = [r for r in rows if r["rep"] == "summary"]
        payload: dict = {}
        if reps:
            payload["replications"] = [{c: _jsonable(r[c]) for c in columns} for r in reps]
        if len(summaries) == 1 and reps:
            payload["summary"] = {c: _jsonable(summaries[0][c]) for c in columns}
        elif summaries:
            payload["cells"] = [{c: _jsonable(r[c]) for c in columns} for r in summaries]
        text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_row(config: SimConfig, rep, seed: int) -> dict:
    return {
        "rep": rep,
        "seed": seed,
        "n": config.n,
        "l": config.l,
        "d_target": config.d_target,
        "k": config.k,
        "p": config.p,
        "per": config.channel.per,
        "channel": config.channel.kind,
    }


def _run_reps(config: SimConfig) -> tuple[list[dict], dict]:
    """Execute config.reps replications; returns (per-rep rows, summary row)."""
    reports = []
    rows = []
    measured = []
    for rep in range(config.reps):
        streams = rep_streams(config.seed, rep)
        topo = generate_topology(config, streams.topology)
        if topo.n > 1 and not topo.is_connected():
            print(f"warning: rep {rep} topology is disconnected", file=sys.stderr)
        result = run_simulation(config, topo, streams)
        report = metrics.compute_report(result)
        reports.append(report)
        measured.append(topo.avg_degree)
        row = _config_row(config, rep, config.seed)
        row["d_measured"] = topo.avg_degree
        row.update(asdict(report))
        rows.append(row)
    summary = _config_row(config, "summary", config.seed)
    summary["d_measured"] = sum(measured) / len(measured)
    summary.update(asdict(metrics.summarize(reports)))
    return rows, summary


def _make_channel(kind: str, per: float, jitter_max: float | None) -> Channel:
    if kind == "contention":
        return Channel(kind, per=per, jitter_max=jitter_max or 0.0)
    return Channel(kind, per=per)


def _scalar_config(args) -> SimConfig:
    return SimConfig(
        n=args.n,
        l=args.l,
        tx_range=args.tx_range,
        d_target=args.d,
        k=args.k,
        p=args.p,
        o=args.o,
        t_hop=args.t_hop,
        delta=args.delta,
        c=args.c,
        channel=_make_channel(args.channel, args.per, args.jitter_max),
        seed=args.seed,
        reps=args.reps,
        wrap_area=args.wrap_area,
    )


def cmd_run(args) -> int:
    config = _scalar_config(args)
    rows, summary = _run_reps(config)
    _write_rows(rows + [summary], COLUMNS, args.out, args.format)
    return EXIT_OK


def cmd_sweep(args) -> int:
    for axis in ("n", "d", "k", "p", "per"):
        if not getattr(args, axis):
            raise ConfigError("--" + axis, "sweep axis is empty")
    columns = COLUMNS + (ANALYSIS_COLUMNS if args.with_analysis else [])
    rows = []
    for cell_index, (n, d, k, p, per) in enumerate(
        product(args.n, args.d, args.k, args.p, args.per)
    ):
        cell_seed = derive_seed(args.seed, cell_index)
        config = SimConfig(
            n=int(n),
            l=args.l,
            d_target=d,
            k=int(k),
            p=p,
            o=args.o,
            t_hop=args.t_hop,
            delta=args.delta,
            c=args.c,
            channel=_make_channel(args.channel, per, args.jitter_max),
            seed=cell_seed,
            reps=args.reps,
            wrap_area=args.wrap_area,
        )
        _, summary = _run_reps(config)
        if args.with_analysis:
            pred = analysis.analytical_report(n=int(n), p=p, d=d, k=int(k))
            summary.update(
                pred_csize=pred.expected_cluster_size,
                pred_aod=pred.aod,
                pred_mchad=pred.m_chad,
                pred_mjreq=pred.m_jreq,
                pred_msg_node=pred.m_node,
                pred_adjacent=pred.expected_adjacent,
            )
        rows.append(summary)
    _write_rows(rows, columns, args.out, args.format)
    return EXIT_OK


def cmd_verify(args) -> int:
    config = _scalar_config(args)
    failures = 0
    for rep in range(config.reps):
        streams = rep_streams(config.seed, rep)
        topo = generate_topology(config, streams.topology)
        result = run_simulation(config, topo, streams)
        view = metrics.build_cluster_view(result)
        heads = result.head_ids(include_late=not args.first_wave_only)

        ok, witness = oracle.verify_coverage(topo, heads, config.k)
        if ok:
            print(f"rep {rep}: coverage ok ({len(heads)} heads)")
        else:
            failures += 1
            print(f"rep {rep}: coverage FAILED, node {witness} is uncovered")

        if oracle.verify_overlap_condition(view, config.o):
            print(f"rep {rep}: overlap ok (threshold {config.o})")
        else:
            failures += 1
            print(f"rep {rep}: overlap FAILED at threshold {config.o}")

        if oracle.verify_connectivity(view):
            print(f"rep {rep}: connectivity ok")
        else:
            failures += 1
            print(f"rep {rep}: connectivity FAILED (overlap graph is disconnected)")
    return EXIT_VERIFY_FAILED if failures else EXIT_OK


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _read_config_file(path: str) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError("config", f"line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


_DEFAULTS = {
    "l": 100.0,
    "o": 1,
    "t_hop": 1.0,
    "c": 2.0,
    "channel": "ideal",
    "reps": 1,
    "wrap_area": False,
    "format": "csv",
}
_SCALAR_DEFAULTS = {"per": 0.0}
_SWEEP_DEFAULTS = {"per": [0.0]}

_SCALAR_TYPES = {
    "n": int, "k": int, "o": int, "seed": int, "reps": int,
    "l": float, "d": float, "tx_range": float, "p": float, "t_hop": float,
    "delta": float, "c": float, "per": float, "jitter_max": float,
    "wrap_area": lambda s: s.lower() in ("1", "true", "yes", "on"),
    "first_wave_only": lambda s: s.lower() in ("1", "true", "yes", "on"),
}
_SWEEP_TYPES = dict(_SCALAR_TYPES, n=_float_list, d=_float_list, k=_float_list,
                    p=_float_list, per=_float_list)


def _add_common(parser: argparse.ArgumentParser, sweep: bool = False) -> None:
    listy = {"type": _float_list, "metavar": "LIST"} if sweep else {}
    parser.add_argument("--config", help="flat key=value file; flags override it")
    parser.add_argument("--n", **(listy or {"type": int}), help="node count")
    parser.add_argument("--d", **(listy or {"type": float}),
                        help="target average degree (alternative to --tx-range)")
    parser.add_argument("--k", **(listy or {"type": int}), help="cluster radius in hops")
    parser.add_argument("--p", **(listy or {"type": float}), help="cluster-head probability")
    parser.add_argument("--per", **(listy or {"type": float}),
                        help="packet error rate (default 0)")
    if not sweep:
        parser.add_argument("--tx-range", type=float,
                            help="transmission range (alternative to --d)")
    parser.add_argument("--l", type=float, help="deployment side length (default 100)")
    parser.add_argument("--o", type=int, help="overlap threshold (default 1)")
    parser.add_argument("--t-hop", type=float, help="per-hop latency (default 1)")
    parser.add_argument("--delta", type=float, help="bootstrap slack (default t-hop)")
    parser.add_argument("--c", type=float, help="join-wait multiplier (default 2)")
    parser.add_argument("--channel", choices=["ideal", "lossy", "contention"],
                        help="channel model (default ideal)")
    parser.add_argument("--jitter-max", type=float,
                        help="contention jitter bound (default t-hop/2)")
    parser.add_argument("--seed", type=int, help="root RNG seed (required)")
    parser.add_argument("--reps", type=int, help="replications (default 1)")
    parser.add_argument("--wrap-area", action="store_true", default=None,
                        help="toroidal area instead of a bounded square")
    parser.add_argument("--out", help="output file (default stdout)")
    parser.add_argument("--format", choices=["csv", "json"], help="output format (default csv)")


def _merge_config(args: argparse.Namespace, required: list[str], types: dict) -> None:
    """Fill unset options from the --config file, then from program defaults."""
    if args.config:
        for key, raw in _read_config_file(args.config).items():
            if getattr(args, key, None) is None:
                caster = types.get(key, str)
                try:
                    setattr(args, key, caster(raw))
                except (ValueError, argparse.ArgumentTypeError) as exc:
                    raise ConfigError(key, f"bad value {raw!r}: {exc}") from exc
    defaults = dict(_DEFAULTS)
    defaults.update(_SWEEP_DEFAULTS if args.command == "sweep" else _SCALAR_DEFAULTS)
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    for key in required:
        if getattr(args, key, None) is None:
            flag = "--" + key.replace("_", "-")
            raise ConfigError(flag, f"missing required option {flag}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="koca",
        description="Simulate and analyze randomized k-hop overlapping clustering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one parameter point for N replications")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run, _required=["n", "k", "p", "seed"])

    p_sweep = sub.add_parser("sweep", help="cartesian sweep over comma-separated lists")
    _add_common(p_sweep, sweep=True)
    p_sweep.add_argument("--with-analysis", action="store_true",
                         help="append closed-form prediction columns")
    p_sweep.set_defaults(func=cmd_sweep, _required=["n", "d", "k", "p", "seed"])

    p_verify = sub.add_parser("verify", help="simulate and check the clustering conditions")
    _add_common(p_verify)
    p_verify.add_argument("--first-wave-only", action="store_true", default=None,
                          help="check coverage before late-head conversion")
    p_verify.set_defaults(func=cmd_verify, _required=["n", "k", "p", "seed"])

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        types = _SWEEP_TYPES if args.command == "sweep" else _SCALAR_TYPES
        _merge_config(args, args._required, types)
        if args.command == "verify" and args.first_wave_only is None:
            args.first_wave_only = False
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
