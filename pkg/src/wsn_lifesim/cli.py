"""Command-line driver: config loading, sweeps, trace and summary files."""

from __future__ import annotations

import argparse
import csv
import itertools
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .core import NetworkConfig, Position, Protocol, RoundMetrics, SinkMode
from .engine import EnsembleResult, run_ensemble

TRACE_HEADER = ("round", "alive", "total_energy_j", "deaths", "ch_count", "gateway_count", "dormant_count")
SUMMARY_HEADER = (
    "protocol", "nodes", "area", "sink_mode", "sink_speed", "seed_count",
    "median_fnd", "mean_fnd", "median_hnd", "mean_hnd", "median_lnd", "mean_lnd", "censored_lnd",
)
SWEEP_DIMENSIONS = ("nodes", "area", "sink_speed", "protocol")
OUT_ENV = "WSN_LIFESIM_OUT"
DEFAULT_OUT = "wsn_out"


class CliError(Exception):
    """Carries one diagnostic line per offending flag."""

    def __init__(self, lines):
        self.lines = list(lines)
        super().__init__("\n".join(self.lines))


@dataclass
class Options:
    config: NetworkConfig
    protocols: list[Protocol]
    seeds: list[int]
    out_dir: Path
    sweep: tuple[str, list] | None = None
    workers: int = 1
    write_traces: bool = True


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError("must be a positive integer")
    return value


def _area(text: str) -> tuple[float, float]:
    w, sep, h = text.lower().partition("x")
    if not sep:
        raise ValueError("expected WxH, e.g. 200x200")
    w, h = float(w), float(h)
    if not (w > 0 and h > 0):
        raise ValueError("field dimensions must be positive")
    return w, h


def _protocols(text: str) -> list[Protocol]:
    return [Protocol(t.strip().lower()) for t in text.split(",") if t.strip()]


def _seeds(text: str) -> list[int]:
    seeds = [int(t) for t in text.split(",") if t.strip()]
    if not seeds:
        raise ValueError("no seeds given")
    if any(not 0 <= s < 2**64 for s in seeds):
        raise ValueError("seeds must be unsigned 64-bit integers")
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    return seeds


def _speed(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise ValueError("must be >= 0")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise ValueError("must lie in (0, 1)")
    return value


def _point(text: str) -> Position:
    x, y = (float(t) for t in text.split(","))
    return Position(x, y)


def _sweep(text: str) -> tuple[str, list]:
    dim, sep, values = text.partition("=")
    dim = dim.strip().replace("-", "_")
    if not sep or dim not in SWEEP_DIMENSIONS:
        raise ValueError(f"expected DIM=V1,V2,... with DIM in {', '.join(SWEEP_DIMENSIONS)}")
    parse = {"nodes": _positive_int, "area": _area, "sink_speed": _speed, "protocol": lambda t: Protocol(t.lower())}[dim]
    parsed = [parse(v.strip()) for v in values.split(",") if v.strip()]
    if not parsed:
        raise ValueError("sweep needs at least one value")
    return dim, parsed


# flag name -> (converter, destination)
FLAGS = {
    "protocol": (_protocols, "protocols"),
    "nodes": (_positive_int, "node_count"),
    "area": (_area, "area"),
    "sink": (lambda t: SinkMode(t.lower()), "sink_mode"),
    "sink-speed": (_speed, "sink_speed"),
    "sink-pos": (_point, "sink_initial"),
    "rounds": (_positive_int, "rounds_max"),
    "seed": (lambda t: _seeds(t)[0], "seed"),
    "seeds": (_seeds, "seeds"),
    "p": (_fraction, "p"),
    "layer-fraction": (_fraction, "layer_fraction"),
    "initial-energy": (float, "initial_energy"),
    "out": (Path, "out"),
    "sweep": (_sweep, "sweep"),
    "workers": (_positive_int, "workers"),
    "config": (Path, "config"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsn-lifesim",
        description="Round-based WSN lifetime simulator (LEACH, E-LEACH, layered duty-cycled protocols).",
    )
    help_text = {
        "protocol": "leach|eleach|propose1|propose2, comma-separated for several",
        "nodes": "number of sensor nodes",
        "area": "field size WxH in meters",
        "sink": "static|mobile",
        "sink-speed": "mobile sink speed in meters per round",
        "sink-pos": "initial sink position X,Y",
        "rounds": "maximum number of rounds",
        "seed": "single RNG seed",
        "seeds": "comma-separated RNG seeds",
        "p": "baseline CH probability",
        "layer-fraction": "first-layer fraction of the layered span",
        "initial-energy": "initial node energy in joules",
        "out": f"output directory (fallback: ${OUT_ENV}, then ./{DEFAULT_OUT})",
        "sweep": "DIM=V1,V2,... with DIM in nodes|area|sink_speed|protocol",
        "workers": "parallel worker processes for seed ensembles",
        "config": "flat key = value file using the flag names as keys",
    }
    for name in FLAGS:
        parser.add_argument(f"--{name}", default=None, metavar=name.upper().replace("-", "_"), help=help_text[name])
    parser.add_argument("--no-traces", action="store_true", help="skip per-run trace CSVs")
    return parser


def read_config_file(path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError([f"error: cannot read config file {path}: {exc.strerror}"]) from exc
    values = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lstrip("-")
        if not sep:
            errors.append(f"error: {path}:{lineno}: expected key = value")
        elif key not in FLAGS or key == "config":
            errors.append(f"error: {path}:{lineno}: unknown key {key!r}")
        else:
            values[key] = value.strip()
    if errors:
        raise CliError(errors)
    return values


def parse_cli(argv=None) -> Options:
    """Resolve flags over config-file values over built-in defaults."""
    parser = build_parser()
    args, unknown = parser.parse_known_args(argv)
    errors = [
        f"error: unknown flag {u.split('=', 1)[0]}" if u.startswith("-") else f"error: unexpected argument {u!r}"
        for u in unknown
    ]

    raw: dict[str, str] = {}
    if args.config is not None:
        try:
            raw.update(read_config_file(Path(args.config)))
        except CliError as exc:
            errors.extend(exc.lines)
    for name in FLAGS:
        value = getattr(args, name.replace("-", "_"))
        if value is not None and name != "config":
            raw[name] = value

    parsed = {}
    for name, text in raw.items():
        convert, dest = FLAGS[name]
        try:
            parsed[dest] = convert(text)
        except ValueError as exc:
            errors.append(f"error: --{name} {text!r}: {exc} ({dest})")
    if errors:
        raise CliError(errors)

    config = NetworkConfig()
    updates = {k: parsed[k] for k in ("node_count", "sink_mode", "sink_speed", "sink_initial",
                                      "rounds_max", "p", "layer_fraction", "initial_energy") if k in parsed}
    if "area" in parsed:
        updates["field_width"], updates["field_height"] = parsed["area"]
    config = config.with_(**updates)
    if "seeds" in parsed:
        seeds = parsed["seeds"]
    elif "seed" in parsed:
        seeds = [parsed["seed"]]
    else:
        seeds = [0]
    protocols = parsed.get("protocols") or [Protocol.LEACH]
    config = config.with_(protocol=protocols[0], rng_seed=seeds[0])
    try:
        config.validate()
    except ValueError as exc:
        raise CliError([f"error: {exc}"]) from exc

    out = parsed.get("out") or Path(os.environ.get(OUT_ENV) or DEFAULT_OUT)
    return Options(
        config=config,
        protocols=protocols,
        seeds=seeds,
        out_dir=Path(out),
        sweep=parsed.get("sweep"),
        workers=parsed.get("workers", 1),
        write_traces=not args.no_traces,
    )


def emit_trace(metrics: list[RoundMetrics], path) -> Path:
    """Write one run's per-round metrics as CSV (energy with 9 decimals)."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_HEADER)
            for m in metrics:
                writer.writerow([
                    m.round, m.alive, f"{m.total_energy:.9f}", m.deaths_this_round,
                    m.ch_count, m.gateway_count, m.dormant_count,
                ])
    except OSError as exc:
        raise OSError(f"cannot write trace {path}: {exc.strerror}") from exc
    return path


def read_trace(path) -> list[RoundMetrics]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            RoundMetrics(
                round=int(row["round"]),
                alive=int(row["alive"]),
                total_energy=float(row["total_energy_j"]),
                deaths_this_round=int(row["deaths"]),
                ch_count=int(row["ch_count"]),
                gateway_count=int(row["gateway_count"]),
                dormant_count=int(row["dormant_count"]),
            )
            for row in reader
        ]


def summary_record(result: EnsembleResult) -> dict:
    cfg = result.config
    return {
        "protocol": cfg.protocol.value,
        "nodes": cfg.node_count,
        "area": f"{cfg.field_width:g}x{cfg.field_height:g}",
        "sink_mode": cfg.sink_mode.value,
        "sink_speed": f"{cfg.sink_speed:g}" if cfg.sink_mode is SinkMode.MOBILE else "0",
        "seed_count": len(result.per_seed),
        "median_fnd": result.median["first_node_death"],
        "mean_fnd": round(result.mean["first_node_death"], 3),
        "median_hnd": result.median["half_nodes_death"],
        "mean_hnd": round(result.mean["half_nodes_death"], 3),
        "median_lnd": result.median["last_node_death"],
        "mean_lnd": round(result.mean["last_node_death"], 3),
        "censored_lnd": result.censored["last_node_death"],
    }


def emit_summary(results: list[EnsembleResult], path) -> Path:
    """One CSV record per (protocol, config) cell."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=SUMMARY_HEADER, lineterminator="\n")
            writer.writeheader()
            for result in results:
                writer.writerow(summary_record(result))
    except OSError as exc:
        raise OSError(f"cannot write summary {path}: {exc.strerror}") from exc
    return path


def _apply(config: NetworkConfig, dim: str, value) -> NetworkConfig:
    if dim == "nodes":
        return config.with_(node_count=value)
    if dim == "area":
        return config.with_(field_width=value[0], field_height=value[1])
    if dim == "sink_speed":
        return config.with_(sink_speed=value)
    return config.with_(protocol=value)


def sweep_configs(base: NetworkConfig, dimension: str | None, values, protocols) -> list[NetworkConfig]:
    """Cross product of sweep values and protocols (protocol sweeps ignore ``protocols``)."""
    if dimension is None:
        return [base.with_(protocol=p) for p in protocols]
    if not values:
        raise ValueError("sweep values must be non-empty")
    if dimension == "protocol":
        return [base.with_(protocol=v) for v in values]
    return [_apply(base, dimension, v).with_(protocol=p) for v, p in itertools.product(values, protocols)]


def sweep(base: NetworkConfig, dimension, values, protocols, seeds, workers: int = 1,
          keep_traces: bool = False) -> list[EnsembleResult]:
    return [
        run_ensemble(cfg, seeds, workers=workers, keep_traces=keep_traces)
        for cfg in sweep_configs(base, dimension, values, protocols)
    ]


def _cell_name(cfg: NetworkConfig) -> str:
    name = f"{cfg.protocol.value}_n{cfg.node_count}_{cfg.field_width:g}x{cfg.field_height:g}_{cfg.sink_mode.value}"
    if cfg.sink_mode is SinkMode.MOBILE:
        name += f"_v{cfg.sink_speed:g}"
    return name


def main(argv=None) -> int:
    try:
        opts = parse_cli(argv)
    except CliError as exc:
        for line in exc.lines:
            print(line, file=sys.stderr)
        return 2

    dim, values = opts.sweep if opts.sweep else (None, None)
    try:
        opts.out_dir.mkdir(parents=True, exist_ok=True)
        results = []
        for cfg in sweep_configs(opts.config, dim, values, opts.protocols):
            result = run_ensemble(cfg, opts.seeds, workers=opts.workers, keep_traces=opts.write_traces)
            if opts.write_traces:
                for seed, trace in result.traces.items():
                    emit_trace(trace, opts.out_dir / f"trace_{_cell_name(cfg)}_s{seed}.csv")
            results.append(result)
            rec = summary_record(result)
            print(
                f"{rec['protocol']:9s} n={rec['nodes']:<4} area={rec['area']:<8} sink={rec['sink_mode']:<6} "
                f"v={rec['sink_speed']:<4} seeds={rec['seed_count']:<3} "
                f"FND={rec['median_fnd']:<7g} HND={rec['median_hnd']:<7g} LND={rec['median_lnd']:g}"
            )
        summary = emit_summary(results, opts.out_dir / "summary.csv")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"summary written to {summary}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
