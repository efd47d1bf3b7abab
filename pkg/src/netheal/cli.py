"""Command-line entry point: ``netheal run|refpoint|compare|gen``.

Exit codes: 0 success, 2 bad configuration or input, 3 file-system error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import random
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import yaml

from . import __version__
from .engine import ConfigError, ExperimentConfig, ReferencePointError, make_graph, run_rep
from .engine import find_reference_point
from .metrics import CSV_COLUMNS, SUMMARY_METRICS, MetricsRecord, rpd, summarize_series
from .presets import TOPOLOGIES, generator_for
from .topology import EdgeListParseError, GeneratorKind, GeneratorParams, Graph, TopologyError, build_graph, write_edge_list

log = logging.getLogger("netheal")

__all__ = ["main", "write_round_csv", "read_round_csv", "write_summary", "load_config", "CSV_FORMAT", "SUMMARY_FORMAT"]

CSV_FORMAT = "netheal-rounds/1"
SUMMARY_FORMAT = "netheal-summary/1"
OUTPUT_ENV_VAR = "NETHEAL_OUTPUT_DIR"
EXIT_CONFIG = 2
EXIT_IO = 3

CONFIG_KEYS = {
    "topology", "generator", "protocol", "p_f", "window", "reps", "seed",
    "k_agents", "k_trickle", "similarity_every", "output_dir", "emit",
}
EMIT_KEYS = ("per_round_csv", "summary_json", "final_topology")


class UsageError(Exception):
    """Bad configuration detected by the CLI itself."""


# -- serialisation -----------------------------------------------------------

def config_dict(config: ExperimentConfig) -> dict:
    d = asdict(config)
    d["protocol"] = config.protocol.value
    d["generator"]["kind"] = config.generator.kind.value
    d["window"] = list(config.window)
    return d


def _fmt(value) -> str:
    if isinstance(value, float):
        return "" if math.isnan(value) else f"{value:.4f}"
    return str(value)


def write_round_csv(series: Sequence[MetricsRecord], path, header: Sequence[str] = ()) -> None:
    """One row per round; similarity is left empty in rounds where it was not computed."""
    if not series:
        raise ValueError("refusing to write an empty series")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {CSV_FORMAT}\n")
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec in series:
            w.writerow([_fmt(v) for v in rec.row()])


def read_round_csv(path) -> list[MetricsRecord]:
    """Parse a file written by :func:`write_round_csv`, validating its schema."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != f"# {CSV_FORMAT}":
            raise ValueError(f"{path}: not a {CSV_FORMAT} file")
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {rows[0]}")
    out = []
    for row in rows[1:]:
        if len(row) != len(CSV_COLUMNS):
            raise ValueError(f"{path}: malformed row {row}")
        vals = dict(zip(CSV_COLUMNS, row))
        kw = {c: int(vals[c]) for c in CSV_COLUMNS if c != "similarity_pct"}
        kw["similarity_pct"] = float(vals["similarity_pct"]) if vals["similarity_pct"] else math.nan
        out.append(MetricsRecord(**kw))
    return out


def write_summary(summary: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_final_topology(graph: Graph, missing: Sequence[int], path, comments: Sequence[str] = ()) -> None:
    labels = [str(graph.labels[u]) for u in missing]
    write_edge_list(graph, path, list(comments) + [f"missing: {' '.join(labels)}"])


# -- configuration -----------------------------------------------------------

def _parse_window(text) -> tuple[int, int, int]:
    if isinstance(text, str):
        parts = [p for p in text.replace(" ", "").split(",") if p]
    else:
        parts = list(text)
    try:
        window = tuple(int(p) for p in parts)
    except (TypeError, ValueError):
        raise UsageError(f"window must be three integers start,stop,end; got {text!r}")
    if len(window) != 3:
        raise UsageError(f"window must be three integers start,stop,end; got {text!r}")
    return window


def _generator_from(topology: Optional[str], generator: Optional[dict]) -> GeneratorParams:
    if generator:
        return GeneratorParams(**generator)
    if not topology:
        raise UsageError("no topology given (use --topology or a config 'topology'/'generator' entry)")
    if topology in TOPOLOGIES:
        return generator_for(topology)
    if os.path.exists(topology):
        return GeneratorParams(GeneratorKind.EDGE_LIST, path=topology)
    raise UsageError(f"topology {topology!r} is neither a known name ({', '.join(TOPOLOGIES)}) nor an existing file")


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise UsageError(f"{path}: {exc}")
    if not isinstance(data, dict):
        raise UsageError(f"{path}: expected a mapping at top level")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"{path}: unknown keys {sorted(unknown)}")
    return data


def build_manifest(args) -> tuple[ExperimentConfig, Path, dict]:
    """Merge config-file values with command-line overrides."""
    data = load_config(args.config) if args.config else {}
    overrides = {
        "topology": args.topology,
        "protocol": args.protocol,
        "p_f": args.pf,
        "window": args.window,
        "reps": args.reps,
        "seed": args.seed,
        "k_agents": args.k_agents,
        "k_trickle": args.k_trickle,
        "similarity_every": args.similarity_every,
        "output_dir": args.out,
    }
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if args.topology is not None:
        data.pop("generator", None)
    emit = {key: True for key in EMIT_KEYS}
    emit.update(data.get("emit") or {})
    if set(emit) - set(EMIT_KEYS):
        raise UsageError(f"unknown emit flags {sorted(set(emit) - set(EMIT_KEYS))}")
    for flag in args.no_emit or ():
        emit[flag] = False
    kwargs = {k: data[k] for k in ("protocol", "p_f", "reps", "seed", "k_agents", "k_trickle", "similarity_every") if k in data}
    if "window" in data:
        kwargs["window"] = _parse_window(data["window"])
    try:
        config = ExperimentConfig(_generator_from(data.get("topology"), data.get("generator")), **kwargs)
    except TypeError as exc:
        raise UsageError(str(exc))
    out = Path(data.get("output_dir") or os.environ.get(OUTPUT_ENV_VAR) or "results")
    return config, out, emit


# -- subcommands ---------------------------------------------------------------

def cmd_run(args) -> int:
    config, out, emit = build_manifest(args)
    out.mkdir(parents=True, exist_ok=True)
    graph = make_graph(config)
    cfg_json = json.dumps(config_dict(config), sort_keys=True)
    results = []
    for rep in range(config.reps):
        res = run_rep(config, graph, rep)
        results.append(res)
        header = [f"netheal {__version__}", f"config: {cfg_json}", f"rep: {rep} seed: {res.seed}"]
        if emit["per_round_csv"]:
            write_round_csv(res.series, out / f"rep_{rep:03d}.csv", header)
        if emit["final_topology"]:
            write_final_topology(res.final_graph, res.missing_nodes, out / f"rep_{rep:03d}.topology.txt", header)
        log.info("rep %d: final similarity %.2f%%, %d missing", rep, res.series[-1].similarity_pct, len(res.missing_nodes))
    summary = summarize_series([r.series for r in results])
    summary.update({
        "format": SUMMARY_FORMAT,
        "version": __version__,
        "config": config_dict(config),
        "reps_detail": [
            {"rep": r.rep, "seed": r.seed, "final_similarity_pct": r.series[-1].similarity_pct,
             "recovered": r.recovered, "missing_nodes": r.missing_nodes}
            for r in results
        ],
    })
    if emit["summary_json"]:
        write_summary(summary, out / "summary.json")
    print(f"{config.reps} reps written to {out}: {summary['failed_reps']} of {config.reps} did not fully recover")
    return 0


def cmd_refpoint(args) -> int:
    generator = _generator_from(args.topology, None)
    rows = []
    for proto in args.protocol:
        config = ExperimentConfig(generator, p_f=0.0, protocol=proto, window=(0, 0, args.rounds),
                                  reps=args.reps, seed=args.seed, k_agents=args.k_agents, k_trickle=args.k_trickle)
        try:
            rows.append((proto, find_reference_point(config)))
        except ReferencePointError as exc:
            print(f"{proto}: {exc}", file=sys.stderr)
            return 1
    for proto, value in rows:
        print(f"{proto}\t{value}")
    return 0


def _load_summary(path: Path) -> dict:
    target = path / "summary.json" if path.is_dir() else path
    with open(target, encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("format") != SUMMARY_FORMAT:
        raise UsageError(f"{target}: not a {SUMMARY_FORMAT} file")
    return data


def cmd_compare(args) -> int:
    a, b = _load_summary(Path(args.a)), _load_summary(Path(args.b))
    metrics = args.metric or list(SUMMARY_METRICS) + ["total_memory_bytes"]
    print("metric\tstat\ta\tb\trpd_pct\tsmaller")
    for metric in metrics:
        if metric not in a["metrics"] or metric not in b["metrics"]:
            raise UsageError(f"metric {metric!r} missing from a summary")
        for stat in ("max", "median", "min"):
            va, vb = a["metrics"][metric][stat], b["metrics"][metric][stat]
            smaller = "a" if va < vb else "b" if vb < va else "="
            print(f"{metric}\t{stat}\t{va:.6g}\t{vb:.6g}\t{rpd(va, vb):.2f}\t{smaller}")
    return 0


def cmd_gen(args) -> int:
    try:
        params = GeneratorParams(args.kind, n=args.n, k=args.k, beta=args.beta, n_clusters=args.clusters,
                                 sn=args.sn, eta=args.eta, path=args.path)
    except ValueError as exc:
        raise UsageError(str(exc))
    graph = build_graph(params, random.Random(f"{args.seed}/generators"))
    comments = [f"netheal {__version__}", f"kind: {params.kind.value} seed: {args.seed}"]
    if args.out:
        write_edge_list(graph, args.out, comments)
    else:
        write_edge_list(graph, sys.stdout, comments)
    return 0


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netheal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"netheal {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write per-rep CSVs and a summary")
    run.add_argument("--config", help="YAML file; command-line flags override its values")
    run.add_argument("--topology", help=f"one of {', '.join(TOPOLOGIES)} or an edge-list path")
    run.add_argument("--protocol", choices=["all_info", "trickle", "mobile_agents"])
    run.add_argument("--pf", type=float)
    run.add_argument("--window", help="start,stop,end")
    run.add_argument("--reps", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--k-agents", type=int)
    run.add_argument("--k-trickle", type=int)
    run.add_argument("--similarity-every", type=int, help="compute similarity every N rounds (0: last round only)")
    run.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV_VAR} or ./results)")
    run.add_argument("--no-emit", action="append", choices=EMIT_KEYS, help="skip one kind of output")
    run.set_defaults(func=cmd_run)

    ref = sub.add_parser("refpoint", help="rounds until data collection settles at p_f=0")
    ref.add_argument("--topology", required=True)
    ref.add_argument("--protocol", nargs="+", default=["trickle", "mobile_agents"],
                     choices=["trickle", "mobile_agents"])
    ref.add_argument("--reps", type=int, default=30)
    ref.add_argument("--rounds", type=int, default=150, help="round budget")
    ref.add_argument("--seed", type=int, default=1)
    ref.add_argument("--k-agents", type=int, default=3)
    ref.add_argument("--k-trickle", type=int, default=3)
    ref.set_defaults(func=cmd_refpoint)

    cmp_ = sub.add_parser("compare", help="RPD of integrated metrics between two result directories")
    cmp_.add_argument("a")
    cmp_.add_argument("b")
    cmp_.add_argument("--metric", action="append", choices=list(SUMMARY_METRICS) + ["total_memory_bytes"])
    cmp_.set_defaults(func=cmd_compare)

    gen = sub.add_parser("gen", help="write a generated topology as an edge list")
    gen.add_argument("--kind", required=True, choices=[k.value for k in GeneratorKind])
    gen.add_argument("--n", type=int, default=100)
    gen.add_argument("--k", type=int, default=4)
    gen.add_argument("--beta", type=float, default=0.1)
    gen.add_argument("--clusters", type=int, default=4)
    gen.add_argument("--sn", type=int, default=9)
    gen.add_argument("--eta", type=int, default=1)
    gen.add_argument("--path", help="input file for --kind edge_list")
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--out")
    gen.set_defaults(func=cmd_gen)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, TopologyError, EdgeListParseError) as exc:
        print(f"netheal: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"netheal: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
