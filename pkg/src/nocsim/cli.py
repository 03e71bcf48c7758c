"""Command-line front end: run one experiment or a rate sweep, emit CSV.

With ``--figures DIR`` the report path also renders latency/throughput
figures next to the delimited output.  Identical seed and config give a
byte-identical CSV; serial and parallel sweeps emit the same bytes.
"""

from __future__ import annotations

import argparse
import sys

from .config import parse_config
from .core import ConfigError, SimulationError
from .runner import ResultRow, parse_rate_sweep, run_experiment, run_sweep, _fmt

CSV_SCHEMA_COMMENT = "# nocsim results v1"


def emit_csv(rows: list[ResultRow], path: str):
    """Fixed column order, 6 significant digits, LF endings."""
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(CSV_SCHEMA_COMMENT + "\n")
        f.write(",".join(ResultRow.COLUMNS) + "\n")
        for row in rows:
            f.write(",".join(_fmt(getattr(row, c)) for c in ResultRow.COLUMNS) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nocsim",
        description="Cycle-accurate simulator for deflection-based "
                    "ring, hierarchical-ring and mesh on-chip networks.")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--topology", choices=("single_ring", "hird",
                                          "mesh_chipper", "mesh_minbd"))
    p.add_argument("--nodes", type=int)
    p.add_argument("--pattern")
    p.add_argument("--rate", type=float)
    p.add_argument("--rate-sweep", metavar="A:B:STEP",
                   help="sweep rates from A to B in STEP increments; "
                        "stops at saturation")
    p.add_argument("--cycles", type=int)
    p.add_argument("--warmup", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--guarantees",
                   choices=("on", "off", "injection-only", "transfer-only"))
    p.add_argument("--trace", help="trace file for --pattern trace")
    p.add_argument("--num-flits", type=int, dest="num_flits")
    p.add_argument("--out", default="results.csv", help="output CSV path")
    p.add_argument("--workers", type=int, default=1,
                   help="process pool size for sweeps")
    p.add_argument("--strict-chipper", action="store_true", default=None,
                   help="single ejector and injector in mesh_chipper mode")
    p.add_argument("--figures", metavar="DIR",
                   help="also render matplotlib figures into DIR")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "topology": args.topology,
        "nodes": args.nodes,
        "pattern": args.pattern,
        "rate": args.rate,
        "cycles": args.cycles,
        "warmup": args.warmup,
        "seed": args.seed,
        "trace": args.trace,
        "num_flits": args.num_flits,
        "strict_chipper": args.strict_chipper,
    }
    if args.guarantees is not None:
        overrides["injection_guarantee"] = args.guarantees in ("on", "injection-only")
        overrides["transfer_guarantee"] = args.guarantees in ("on", "transfer-only")
    try:
        config = parse_config(args.config, overrides)
        if args.rate_sweep:
            rates = parse_rate_sweep(args.rate_sweep)
            rows = run_sweep(config, rates, workers=args.workers)
        else:
            rows = [run_experiment(config)]
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SimulationError as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 1
    emit_csv(rows, args.out)
    print(f"wrote {len(rows)} row(s) to {args.out}")
    if args.figures:
        from .report import render_figures
        written = render_figures(rows, args.figures)
        for path in written:
            print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
