"""Command line harness: solve single instances, benchmark directories,
per-transformation bound statistics, and instance generation.

Reports are CSV with a fixed column order (see README).  Flags may be
preloaded from a key=value config file via --config; explicit flags win.
The default worker count comes from the BINPACK_WORKERS environment
variable when set.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .bounds import DEFAULT_DFF_ORDER, DffKind, dff_bound_batch, lambda_range
from .instances import (
    Instance,
    ParseError,
    WeibullSpec,
    generate_weibull,
    parse_instance,
    reduce_weights,
    weibull_metadata,
    write_instance,
)
from .search import BoundMode, MinimizeResult, SearchConfig, SolveStatus, minimize, solve_decision

__all__ = ["main", "cmd_solve", "cmd_bench", "cmd_dffstats", "cmd_generate"]

REPORT_COLUMNS = [
    "row",
    "name",
    "n",
    "c",
    "bound",
    "solved",
    "bins",
    "nodes",
    "time_ms",
    "bound_calls",
    "avg_time_ms",
    "note",
]

WORKERS_ENV = "BINPACK_WORKERS"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIMEOUT = 2


def _parse_dff_order(text: str) -> tuple[DffKind, ...]:
    kinds = tuple(DffKind.from_name(part) for part in text.split(",") if part.strip())
    if not kinds:
        raise ValueError("empty DFF order")
    if len(set(kinds)) != len(kinds):
        raise ValueError(f"duplicate DFF in order {text!r}")
    return kinds


def _default_workers_flag() -> int | None:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return None
    try:
        value = int(raw)
        if value < 1:
            raise ValueError
    except ValueError:
        raise SystemExit(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return value


def load_config_file(path: str) -> dict[str, str]:
    """key=value lines; blank lines and # comments ignored."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise SystemExit(f"{path}:{lineno}: expected key=value, got {body!r}")
            key, value = body.split("=", 1)
            out[key.strip()] = value.strip()
    return out


_CONFIG_BOOL_KEYS = {"no-dominance", "no-sym-break"}
_CONFIG_KEYS = _CONFIG_BOOL_KEYS | {
    "bound",
    "time-limit",
    "workers",
    "dff-order",
    "jobs",
    "seed",
}


def _as_bool(value: str) -> bool:
    low = value.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise SystemExit(f"expected a boolean, got {value!r}")


def _apply_config(parser: argparse.ArgumentParser, config: dict[str, str]) -> None:
    defaults = {}
    for key, value in config.items():
        if key not in _CONFIG_KEYS:
            raise SystemExit(f"unknown config key {key!r}")
        dest = key.replace("-", "_")
        if key in _CONFIG_BOOL_KEYS:
            defaults[dest] = _as_bool(value)
        else:
            defaults[dest] = value
    parser.set_defaults(**defaults)


def _add_solver_flags(parser: argparse.ArgumentParser, time_limit: float) -> None:
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument(
        "--bound",
        default=BoundMode.DFFS_SEQ.value,
        choices=[m.value for m in BoundMode],
        help="feasibility-check lower bound engine",
    )
    parser.add_argument("--time-limit", type=float, default=time_limit,
                        help="seconds per instance (default %(default)s)")
    parser.add_argument("--workers", type=int, default=None,
                        help=f"bound-engine worker count (default: {WORKERS_ENV} or CPU count)")
    parser.add_argument("--dff-order", default=None,
                        help="comma list reordering the transformations, e.g. CCM1,BJ1,MT")
    parser.add_argument("--no-dominance", action="store_true",
                        help="disable both dominance rules")
    parser.add_argument("--no-sym-break", action="store_true",
                        help="disable both symmetry-breaking rules")


def _config_from_args(args: argparse.Namespace) -> SearchConfig:
    workers = args.workers
    if workers is None:
        workers = _default_workers_flag()
    order = DEFAULT_DFF_ORDER
    if args.dff_order:
        order = _parse_dff_order(args.dff_order)
    return SearchConfig(
        bound_mode=BoundMode.from_name(args.bound),
        dominance=not args.no_dominance,
        single_fit_dominance=not args.no_dominance,
        sym_break_same_size=not args.no_sym_break,
        sym_break_equivalent_bins=not args.no_sym_break,
        time_limit=float(args.time_limit),
        workers=workers,
        dff_order=order,
    )


def _read_instance_file(path: str) -> Instance:
    try:
        with open(path, encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise SystemExit(f"{path}: {exc.strerror or exc}")
    try:
        return parse_instance(text, name=Path(path).stem)
    except ParseError as exc:
        raise SystemExit(f"{path}: {exc}")


def _ms(seconds: float) -> int:
    return round(seconds * 1000)


def _instance_row(name: str, inst: Instance | None, bound: str, solved: bool,
                  bins: int | None, nodes: int, time_ms: int, bound_calls: int,
                  note: str = "") -> dict[str, str]:
    return {
        "row": "instance",
        "name": name,
        "n": str(inst.n) if inst else "",
        "c": str(inst.c) if inst else "",
        "bound": bound,
        "solved": "true" if solved else "false",
        "bins": "" if bins is None else str(bins),
        "nodes": str(nodes),
        "time_ms": str(time_ms),
        "bound_calls": str(bound_calls),
        "avg_time_ms": "",
        "note": note,
    }


def _aggregate_row(benchmark: str, bound: str, rows: list[dict[str, str]]) -> dict[str, str]:
    solved = [r for r in rows if r["solved"] == "true"]
    total_time = sum(int(r["time_ms"]) for r in solved)
    avg_time = round(total_time / len(solved)) if solved else 0
    return {
        "row": "aggregate",
        "name": benchmark,
        "n": str(len(rows)),
        "c": "",
        "bound": bound,
        "solved": str(len(solved)),
        "bins": "",
        "nodes": str(sum(int(r["nodes"]) for r in rows)),
        "time_ms": str(total_time),
        "bound_calls": str(sum(int(r["bound_calls"]) for r in rows)),
        "avg_time_ms": str(avg_time),
        "note": "",
    }


def _check_aggregate(rows: list[dict[str, str]], agg: dict[str, str]) -> None:
    recomputed = _aggregate_row(agg["name"], agg["bound"], rows)
    if recomputed != agg:
        raise AssertionError("aggregate row does not match its instance rows")


def _write_csv(stream, rows: list[dict[str, str]], header_comment: str | None = None) -> None:
    if header_comment is not None:
        stream.write(f"# {header_comment}\n")
    writer = csv.DictWriter(stream, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


# -- solve ------------------------------------------------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _read_instance_file(args.path)
    cfg = _config_from_args(args)
    if args.bins is not None:
        result = solve_decision(inst, args.bins, cfg)
        status = result.status
        stats = result.stats
        bins = args.bins if status is SolveStatus.SOLUTION else None
        note = status.value
    else:
        mres = minimize(inst, cfg)
        status = mres.status
        stats = mres.stats
        bins = mres.bins
        note = status.value
    row = _instance_row(
        inst.name, inst, args.bound, stats.solved, bins,
        stats.nodes, _ms(stats.solve_time), stats.bound_calls, note,
    )
    _write_csv(sys.stdout, [row])
    return EXIT_TIMEOUT if status is SolveStatus.TIMED_OUT else EXIT_OK


# -- bench ------------------------------------------------------------------


def _bench_one(path: Path, cfg: SearchConfig, bound: str) -> dict[str, str]:
    try:
        text = path.read_text(encoding="ascii")
        inst = parse_instance(text, name=path.stem)
    except (OSError, ParseError, UnicodeDecodeError) as exc:
        return _instance_row(path.stem, None, bound, False, None, 0, 0, 0,
                             note=f"skipped: {exc}")
    mres: MinimizeResult = minimize(inst, cfg)
    note = "" if mres.status is SolveStatus.SOLUTION else mres.status.value
    return _instance_row(
        inst.name, inst, bound, mres.stats.solved, mres.bins,
        mres.stats.nodes, _ms(mres.stats.solve_time), mres.stats.bound_calls, note,
    )


def _list_instances(directory: Path, out_path: Path | None) -> list[Path]:
    files = []
    for p in sorted(directory.iterdir()):
        if not p.is_file() or p.name.startswith("."):
            continue
        if p.stem == "optima" or (out_path and p.resolve() == out_path.resolve()):
            continue
        files.append(p)
    return files


def cmd_bench(args: argparse.Namespace) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise SystemExit(f"{args.dir}: not a directory")
    cfg = _config_from_args(args)
    out_path = Path(args.out)
    files = _list_instances(directory, out_path)
    if args.jobs > 1:
        print(f"warning: --jobs {args.jobs}: times are indicative only", file=sys.stderr)
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(lambda p: _bench_one(p, cfg, args.bound), files))
    else:
        rows = [_bench_one(p, cfg, args.bound) for p in files]
    agg = _aggregate_row(directory.name, args.bound, rows)
    _check_aggregate(rows, agg)
    meta = (
        f"bench dir={directory.name} bound={args.bound} time_limit={cfg.time_limit} "
        f"seed={args.seed} dominance={cfg.dominance} sym_break={cfg.sym_break_same_size}"
    )
    with open(out_path, "w", encoding="ascii", newline="") as fh:
        _write_csv(fh, rows + [agg], header_comment=meta)
    print(f"wrote {out_path} ({len(rows)} instances, {agg['solved']} solved)")
    return EXIT_OK


# -- dffstats ----------------------------------------------------------------


def _load_optima(path: Path) -> dict[str, int]:
    optima: dict[str, int] = {}
    for lineno, line in enumerate(path.read_text(encoding="ascii").splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = [p for p in body.replace(",", " ").split() if p]
        if len(parts) != 2:
            raise SystemExit(f"{path}:{lineno}: expected 'name optimum'")
        if parts[1].lower() == "optimum":
            continue  # header row
        optima[parts[0]] = int(parts[1])
    return optima


def _root_bounds(inst: Instance, kinds: tuple[DffKind, ...]) -> dict[DffKind, int]:
    red = reduce_weights(inst)
    out: dict[DffKind, int] = {}
    for kind in kinds:
        rng = lambda_range(kind, red.c, red)
        if rng.is_empty:
            out[kind] = 0
            continue
        values = dff_bound_batch(kind, red, rng.lo, rng.hi)
        out[kind] = int(values.max()) if len(values) else 0
    return out


DFFSTATS_COLUMNS = ["dff", "only_opt", "total_opt", "only_best", "total_best", "sum_bounds"]


def dffstats_table(instances: list[Instance], optima: dict[str, int],
                   kinds: tuple[DffKind, ...] = DEFAULT_DFF_ORDER) -> list[dict[str, int | str]]:
    counters = {k: {"only_opt": 0, "total_opt": 0, "only_best": 0, "total_best": 0,
                    "sum_bounds": 0} for k in kinds}
    for inst in instances:
        bounds = _root_bounds(inst, kinds)
        best = max(bounds.values())
        best_kinds = [k for k in kinds if bounds[k] == best]
        opt = optima.get(inst.name)
        opt_kinds = [k for k in kinds if opt is not None and bounds[k] == opt]
        for k in kinds:
            counters[k]["sum_bounds"] += bounds[k]
            if bounds[k] == best:
                counters[k]["total_best"] += 1
                if len(best_kinds) == 1:
                    counters[k]["only_best"] += 1
            if opt is not None and bounds[k] == opt:
                counters[k]["total_opt"] += 1
                if len(opt_kinds) == 1:
                    counters[k]["only_opt"] += 1
    return [{"dff": k.name, **counters[k]} for k in kinds]


def cmd_dffstats(args: argparse.Namespace) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise SystemExit(f"{args.dir}: not a directory")
    optima: dict[str, int] = {}
    optima_path = Path(args.optima) if args.optima else directory / "optima.csv"
    if optima_path.exists():
        optima = _load_optima(optima_path)
    instances = []
    for p in _list_instances(directory, None):
        try:
            instances.append(parse_instance(p.read_text(encoding="ascii"), name=p.stem))
        except (ParseError, UnicodeDecodeError) as exc:
            print(f"warning: {p}: {exc}", file=sys.stderr)
    table = dffstats_table(instances, optima)
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=DFFSTATS_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in table:
        writer.writerow(row)
    text = out.getvalue()
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- generate ----------------------------------------------------------------


def cmd_generate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for offset in range(args.count):
        spec = WeibullSpec(
            n=args.n, shape=args.shape, scale=args.scale,
            sigma=args.sigma, seed=args.seed + offset,
        )
        inst = generate_weibull(spec)
        path = out_dir / f"{inst.name}.bpp"
        write_instance(inst, path, metadata=weibull_metadata(spec))
        print(f"wrote {path} (n={inst.n} c={inst.c})")
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="binpack",
        description="Bin packing solver with propagation and parameterized lower bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance file")
    p_solve.add_argument("path")
    p_solve.add_argument("--bins", type=int, default=None,
                         help="decide feasibility for this bin count instead of minimizing")
    _add_solver_flags(p_solve, time_limit=600.0)

    p_bench = sub.add_parser("bench", help="solve every instance in a directory")
    p_bench.add_argument("dir")
    p_bench.add_argument("--out", default="results.csv", help="report file (default %(default)s)")
    p_bench.add_argument("--jobs", type=int, default=1,
                         help="independent solves in parallel (times become indicative)")
    p_bench.add_argument("--seed", type=int, default=0,
                         help="recorded in the report header for reproducibility")
    _add_solver_flags(p_bench, time_limit=600.0)

    p_stats = sub.add_parser("dffstats", help="root lower-bound statistics per transformation")
    p_stats.add_argument("dir")
    p_stats.add_argument("--optima", default=None,
                         help="sidecar file of known optima (default: <dir>/optima.csv)")
    p_stats.add_argument("--out", default=None, help="write CSV here instead of stdout")

    p_gen = sub.add_parser("generate", help="generate Weibull instances")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--shape", type=float, required=True)
    p_gen.add_argument("--scale", type=float, default=1000.0)
    p_gen.add_argument("--sigma", type=float, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--count", type=int, default=1)
    p_gen.add_argument("--out-dir", default=".")
    subparsers = {"solve": p_solve, "bench": p_bench, "dffstats": p_stats, "generate": p_gen}
    return parser, subparsers


_COMMANDS = {
    "solve": cmd_solve,
    "bench": cmd_bench,
    "dffstats": cmd_dffstats,
    "generate": cmd_generate,
}


def main(argv: list[str] | None = None) -> int:
    parser, subparsers = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        # Config values become defaults of the active subcommand, then a
        # re-parse lets explicit flags override them.
        config = load_config_file(args.config)
        _apply_config(subparsers[args.command], config)
        args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
