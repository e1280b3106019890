"""Command line driver: single runs, parameter grids, property suites, topologies.

Exit codes: 0 success (or convergence), 2 non-convergence or a failed
suite, 1 bad configuration or usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .netsim import ConfigError, Partition, SimConfig, generate_topology, run_simulation
from .netsim.config import BACKENDS, BEHAVIORS, ENGINES

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

CSV_COLUMNS = (
    "n", "degree", "byz_pct", "behavior", "seed",
    "convergence_round", "max_entry", "msgs_per_node", "bytes_per_node",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for non-convergence.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_partition(text: str, n: int) -> Partition:
    """``START-END[:FRACTION]``: guardians ``0..FRACTION*n`` cut off in those rounds."""
    try:
        rounds, _, frac = text.partition(":")
        start, end = (int(x) for x in rounds.split("-"))
        fraction = float(frac) if frac else 0.5
    except ValueError:
        raise ConfigError(f"bad partition {text!r}; expected START-END[:FRACTION]") from None
    if not (1 <= start <= end and 0.0 < fraction < 1.0):
        raise ConfigError(f"bad partition {text!r}")
    return Partition.halves(start, end, n, fraction)


# -- run -------------------------------------------------------------------

def _config_from_args(args) -> SimConfig:
    partitions = tuple(parse_partition(p, args.n) for p in args.partition or ())
    return SimConfig(
        n=args.n, degree=args.degree, byz_fraction=args.byz, behavior=args.behavior,
        iterations=args.iterations, seed=args.seed, backend=args.backend,
        partitions=partitions, engine=args.engine,
    )


def summarize(run) -> dict:
    msgs = run.honest_msgs()
    nbytes = run.honest_bytes()
    return {
        "n": run.config.n,
        "degree": run.config.degree,
        "byz_fraction": run.config.byz_fraction,
        "behavior": run.config.behavior,
        "seed": run.config.seed,
        "backend": run.config.backend,
        "iterations": run.config.rounds,
        "threshold": run.config.threshold,
        "converged": run.converged,
        "convergence_round": run.convergence_round,
        "max_entry": int(run.max_entry),
        "msgs_per_node_mean": float(msgs.mean()) if msgs.size else 0.0,
        "msgs_per_node_median": float(np.median(msgs)) if msgs.size else 0.0,
        "msgs_per_node_max": int(msgs.max()) if msgs.size else 0,
        "bytes_per_node_mean": float(nbytes.mean()) if nbytes.size else 0.0,
        "largest_message_bytes": int(run.max_message_bytes),
        "fingerprint": run.fingerprint(),
    }


def cmd_run(args) -> int:
    config = _config_from_args(args)
    run = run_simulation(config)
    s = summarize(run)
    print(
        f"n={s['n']} degree={s['degree']:g} byz={s['byz_fraction']:.0%} "
        f"behavior={s['behavior']} seed={s['seed']} backend={s['backend']} "
        f"iterations={s['iterations']} threshold={s['threshold']}"
    )
    if s["converged"]:
        print(f"converged: round {s['convergence_round']}")
    else:
        print("converged: no")
    print(f"max entry: {s['max_entry']}")
    print(
        f"messages per honest node: mean {s['msgs_per_node_mean']:.1f}, "
        f"median {s['msgs_per_node_median']:g}, max {s['msgs_per_node_max']}"
    )
    print(f"bytes per honest node: mean {s['bytes_per_node_mean']:.0f}")
    print(f"largest honest message: {s['largest_message_bytes']} bytes")
    if args.out:
        _write_text(args.out, json.dumps(s, indent=2) + "\n")
    return 0 if s["converged"] else 2


# -- grid ------------------------------------------------------------------

def load_grid(path: str) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        if path.endswith(".json"):
            return json.loads(raw.decode() or "{}")
        return tomllib.loads(raw.decode())
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse grid file {path}: {exc}") from None


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


def grid_cells(desc: dict) -> list[tuple]:
    """``(n, degree, byz_fraction, behavior)`` cells of a grid description.

    Top-level ``n``, ``degree``, ``byz`` and ``behavior`` lists are crossed;
    a ``cells`` table array adds explicit cells after them.
    """
    cells = []
    if "n" in desc:
        for n in _as_list(desc["n"]):
            for degree in _as_list(desc.get("degree", 20)):
                for byz in _as_list(desc.get("byz", 0.0)):
                    for behavior in _as_list(desc.get("behavior", "fake")):
                        cells.append((int(n), degree, float(byz), behavior))
    for cell in desc.get("cells", ()):
        cells.append((int(cell["n"]), cell.get("degree", 20), float(cell.get("byz", 0.0)),
                      cell.get("behavior", "fake")))
    return cells


def _grid_task(task):
    (n, degree, byz, behavior), seed, iterations, backend = task
    run = run_simulation(SimConfig(
        n=n, degree=degree, byz_fraction=byz, behavior=behavior,
        seed=seed, iterations=iterations, backend=backend,
    ))
    msgs = run.honest_msgs()
    nbytes = run.honest_bytes()
    return (
        run.convergence_round,
        int(run.max_entry),
        float(msgs.mean()) if msgs.size else 0.0,
        float(nbytes.mean()) if nbytes.size else 0.0,
    )


def _fmt_pct(byz: float) -> str:
    return f"{round(byz * 100, 6):g}"


def _median(values) -> str:
    inf = float("inf")
    m = statistics.median([inf if v is None else v for v in values])
    if m == inf:
        return ""
    return f"{m:g}" if isinstance(m, int) or float(m).is_integer() else f"{m:.2f}"


def run_grid(desc: dict, seeds: int, iterations: Optional[int], backend: str,
             workers: int = 1, label: str = "grid") -> str:
    """CSV text: one row per (cell, seed) and a median row per cell."""
    cells = grid_cells(desc)
    for n, degree, byz, behavior in cells:
        SimConfig(n=n, degree=degree, byz_fraction=byz, behavior=behavior,
                  iterations=iterations, backend=backend)
    base = int(desc.get("seed", 0))
    tasks = [(cell, base + k, iterations, backend) for cell in cells for k in range(seeds)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_grid_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_grid_task(t) for t in tasks]

    buf = io.StringIO()
    buf.write(f"# aggsig {__version__} grid={label} seeds={seeds} "
              f"iterations={iterations or 'auto'} backend={backend}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for c, cell in enumerate(cells):
        n, degree, byz, behavior = cell
        rows = results[c * seeds:(c + 1) * seeds]
        key = [n, f"{degree:g}", _fmt_pct(byz), behavior]
        for k, (rnd, mx, msgs, nbytes) in enumerate(rows):
            writer.writerow(key + [base + k, "" if rnd is None else rnd, mx, f"{msgs:.2f}", f"{nbytes:.2f}"])
        if rows:
            writer.writerow(key + ["median"] + [_median(col) for col in zip(*rows)])
    return buf.getvalue()


def cmd_grid(args) -> int:
    desc = load_grid(args.grid)
    seeds = args.seeds if args.seeds is not None else int(desc.get("seeds", 10))
    iterations = args.iterations if args.iterations is not None else desc.get("iterations")
    backend = args.backend or desc.get("backend", "oracle")
    text = run_grid(desc, seeds, iterations, backend, args.workers, os.path.basename(args.grid))
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


# -- suites / topology -----------------------------------------------------

def cmd_suites(args) -> int:
    from .suites import SUITES

    names = list(SUITES) if args.selector == "all" else [args.selector]
    failed = 0
    for name in names:
        kwargs = {"seeds": args.seeds} if name == "safety" and args.seeds else {}
        print(f"[{name}]")
        for result in SUITES[name](**kwargs):
            print(result.line())
            failed += not result.passed
    print(f"{failed} failed")
    return 2 if failed else 0


def cmd_topology(args) -> int:
    topo = generate_topology(args.n, args.degree, args.seed)
    text = topo.to_edge_list()
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


# -- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aggsig", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"aggsig {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one checkpoint instance")
    run.add_argument("--n", type=int, required=True)
    run.add_argument("--degree", type=float, default=20)
    run.add_argument("--byz", type=float, default=0.0, help="byzantine fraction in [0, 1/3]")
    run.add_argument("--behavior", choices=BEHAVIORS, default="silent")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--iterations", type=int)
    run.add_argument("--backend", choices=BACKENDS, default="oracle")
    run.add_argument("--engine", choices=ENGINES, default="auto")
    run.add_argument("--partition", action="append", metavar="START-END[:FRACTION]")
    run.add_argument("--out", help="write a JSON summary here")
    run.set_defaults(func=cmd_run)

    grid = sub.add_parser("grid", help="sweep a parameter grid to CSV")
    grid.add_argument("grid", help="TOML or JSON grid description")
    grid.add_argument("--out")
    grid.add_argument("--seeds", type=int)
    grid.add_argument("--iterations", type=int)
    grid.add_argument("--backend", choices=BACKENDS)
    grid.add_argument("--workers", type=int, default=1)
    grid.set_defaults(func=cmd_grid)

    suites = sub.add_parser("suites", help="run a property battery")
    suites.add_argument("selector", choices=("safety", "liveness", "oracle", "crypto", "all"))
    suites.add_argument("--seeds", type=int, help="equivocation scenarios for the safety battery")
    suites.set_defaults(func=cmd_suites)

    topo = sub.add_parser("topology", help="export a generated graph as an edge list")
    topo.add_argument("--n", type=int, required=True)
    topo.add_argument("--degree", type=float, default=20)
    topo.add_argument("--seed", type=int, default=0)
    topo.add_argument("--out")
    topo.set_defaults(func=cmd_topology)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError, OSError) as exc:
        print(f"aggsig: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
