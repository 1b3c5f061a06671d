"""Command-line interface.

Subcommands::

    segment       batch segmentation of a data file
    hist          adaptive histogram (block edges + per-block density)
    stream        change detection over records arriving on stdin
    bench         timing + fitness-evaluation-count report
    oracle-check  verify the optimizer against the exhaustive scan

One report document goes to standard output (JSON by default, CSV with
``--format csv``); diagnostics go to standard error.  Exit codes:
0 success, 1 bad input, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Iterator, Optional, Sequence

import numpy as np

from . import baselines, bench, engine, fitness, synthetic
from .cells import (
    DataCells,
    cells_from_bins,
    cells_from_event_gaps,
    cells_from_events,
    cells_from_measures,
)
from .errors import InputError, InternalError


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors raise instead of exiting with code 2."""

    def error(self, message: str):  # noqa: D102 - argparse hook
        raise InputError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockdp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, with_input=True):
        if with_input:
            p.add_argument(
                "input", nargs="?", default="-",
                help="input file path, or '-' for stdin (default)",
            )
        p.add_argument(
            "--format", choices=("json", "csv"), default="json",
            help="report format on stdout (default json)",
        )

    seg = sub.add_parser("segment", help="optimal segmentation of a data file")
    add_io(seg)
    seg.add_argument(
        "--model", choices=("events", "bins", "measures"), default="events",
        help="data/fitness model (default events)",
    )
    seg.add_argument("--penalty", type=float, default=None,
                     help="per-block penalty (default: ln of the cell count)")
    seg.add_argument("--min-size", type=int, default=None,
                     help="require every block to span at least this many cells")
    seg.add_argument("--k", type=int, default=None,
                     help="require exactly k blocks (penalty is ignored)")
    seg.add_argument(
        "--cells", choices=("midpoint", "gap"), default="midpoint",
        help="event cell construction: symmetric midpoints (batch default) or "
             "causal gap-to-previous widths as used by `stream`",
    )
    seg.add_argument("--t0", type=float, default=None,
                     help="left anchor time for --cells gap")

    hist = sub.add_parser("hist", help="adaptive histogram with data-determined bins")
    add_io(hist)
    hist.add_argument("--model", choices=("events", "bins"), default="events",
                      help="input kind (default events)")
    hist.add_argument("--penalty", type=float, default=None,
                      help="per-block penalty (default: ln of the cell count)")

    stream = sub.add_parser("stream", help="incremental change detection on stdin")
    add_io(stream)
    stream.add_argument("--penalty", type=float, required=True,
                        help="fixed per-block penalty (required: the stream length "
                             "is unknown, so no data-size default exists)")
    stream.add_argument("--t0", type=float, default=None,
                        help="left anchor time of the first cell; default: the "
                             "first record anchors and contributes no cell")

    bn = sub.add_parser("bench", help="timing and evaluation-count report")
    add_io(bn, with_input=False)
    bn.add_argument("--sizes", default="500,1000,2000",
                    help="comma-separated cell counts (default 500,1000,2000)")
    bn.add_argument("--seed", type=int, default=20260822)

    oc = sub.add_parser("oracle-check",
                        help="compare optimize against the exhaustive scan")
    add_io(oc, with_input=False)
    oc.add_argument("--seed", type=int, default=20260822)
    oc.add_argument("--trials", type=int, default=25,
                    help="random instances per model (default 25)")
    oc.add_argument("--max-cells", type=int, default=14)

    return parser


# ---------------------------------------------------------------------------
# input parsing


def _rows(path: str) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, stripped text) skipping blanks and # comments."""
    if path == "-":
        handle = sys.stdin
        close = False
    else:
        try:
            handle = open(path, "r", encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot open {path}: {exc}") from exc
        close = True
    try:
        for lineno, raw in enumerate(handle, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            yield lineno, text
    finally:
        if close:
            handle.close()


def _split(path: str, lineno: int, text: str, n_fields: int) -> list[str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n_fields:
        raise InputError(
            f"{path}:{lineno}: expected {n_fields} comma-separated "
            f"value{'s' if n_fields != 1 else ''}, got {text!r}"
        )
    return parts


def _float(path: str, lineno: int, token: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise InputError(f"{path}:{lineno}: not a number: {token!r}") from None
    if not np.isfinite(value):
        raise InputError(f"{path}:{lineno}: non-finite value: {token!r}")
    return value


def _read_events(path: str) -> np.ndarray:
    times = [
        _float(path, lineno, _split(path, lineno, text, 1)[0])
        for lineno, text in _rows(path)
    ]
    if not times:
        raise InputError(f"{path}: no event records found")
    return np.asarray(times)


def _read_bins(path: str) -> tuple[np.ndarray, np.ndarray]:
    edges: list[float] = []
    counts: list[float] = []
    for lineno, text in _rows(path):
        lo_s, hi_s, count_s = _split(path, lineno, text, 3)
        lo = _float(path, lineno, lo_s)
        hi = _float(path, lineno, hi_s)
        count = _float(path, lineno, count_s)
        if count < 0 or not count.is_integer():
            raise InputError(
                f"{path}:{lineno}: count must be a non-negative integer, got {count_s!r}"
            )
        if edges and lo != edges[-1]:
            raise InputError(
                f"{path}:{lineno}: bin starts at {lo!r} but the previous one "
                f"ended at {edges[-1]!r}; bins must tile the interval"
            )
        if not edges:
            edges.append(lo)
        edges.append(hi)
        counts.append(count)
    if not counts:
        raise InputError(f"{path}: no bin records found")
    return np.asarray(edges), np.asarray(counts)


def _read_measures(path: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t: list[float] = []
    x: list[float] = []
    s: list[float] = []
    for lineno, text in _rows(path):
        t_s, x_s, s_s = _split(path, lineno, text, 3)
        t.append(_float(path, lineno, t_s))
        x.append(_float(path, lineno, x_s))
        s.append(_float(path, lineno, s_s))
    if not t:
        raise InputError(f"{path}: no measure records found")
    return np.asarray(t), np.asarray(x), np.asarray(s)


def _load(args) -> tuple[DataCells, fitness.FitnessModel]:
    if args.model == "events":
        times = _read_events(args.input)
        if getattr(args, "cells", "midpoint") == "gap":
            anchor = args.t0 if args.t0 is not None else float(times[0])
            cell_times = times if args.t0 is not None else times[1:]
            if cell_times.size == 0:
                raise InputError(
                    "gap cells need at least two records when --t0 is not given"
                )
            cells = cells_from_event_gaps(cell_times, anchor)
        else:
            if getattr(args, "t0", None) is not None:
                raise InputError("--t0 only applies to --cells gap or `stream`")
            cells = cells_from_events(times)
        return cells, fitness.poisson_events_model()
    if args.model == "bins":
        edges, counts = _read_bins(args.input)
        return cells_from_bins(edges, counts), fitness.poisson_bins_model()
    times, values, sigmas = _read_measures(args.input)
    return cells_from_measures(times, values, sigmas), fitness.gaussian_model()


# ---------------------------------------------------------------------------
# output helpers


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _emit_json(doc: dict) -> None:
    json.dump(_jsonable(doc), sys.stdout, indent=2)
    sys.stdout.write("\n")


def _emit_json_line(doc: dict) -> None:
    sys.stdout.write(json.dumps(_jsonable(doc)) + "\n")


def _emit_csv_blocks(meta: dict, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    for key, value in meta.items():
        sys.stdout.write(f"# {key}={_jsonable(value)}\n")
    sys.stdout.write(",".join(header) + "\n")
    for row in rows:
        sys.stdout.write(",".join(repr(_jsonable(v)) if isinstance(v, float) else str(_jsonable(v)) for v in row) + "\n")


def _block_rows(seg: engine.Segmentation) -> tuple[list[str], list[list]]:
    header = ["block", "start_cell", "end_cell", "t_lo", "t_hi",
              "n_events", "duration", "sum_w", "sum_wx", "estimate"]
    rows = []
    for idx, b in enumerate(seg.block_summaries, start=1):
        rows.append([
            idx, b.start_cell, b.end_cell, b.t_lo, b.t_hi,
            b.stats.n_events, b.stats.duration, b.stats.sum_w, b.stats.sum_wx,
            b.estimate if b.estimate is not None else "",
        ])
    return header, rows


def _segmentation_doc(args, seg: engine.Segmentation) -> dict:
    return {
        "command": args.command,
        "model": args.model,
        "n_cells": seg.n_cells,
        "n_blocks": seg.n_blocks,
        "changepoints": seg.changepoints,
        "block_edges": seg.block_edges,
        "penalty_per_block": seg.penalty_per_block,
        "total_fitness": seg.total_fitness,
        "n_fitness_evals": seg.n_fitness_evals,
        "blocks": [
            {
                "start_cell": b.start_cell,
                "end_cell": b.end_cell,
                "t_lo": b.t_lo,
                "t_hi": b.t_hi,
                "n_events": b.stats.n_events,
                "duration": b.stats.duration,
                "sum_w": b.stats.sum_w,
                "sum_wx": b.stats.sum_wx,
                "estimate": b.estimate,
            }
            for b in seg.block_summaries
        ],
    }


# ---------------------------------------------------------------------------
# commands


def _cmd_segment(args) -> int:
    if args.k is not None and args.min_size is not None:
        raise InputError("--k and --min-size are mutually exclusive")
    cells, model = _load(args)
    if args.k is not None:
        seg = engine.optimize_fixed_k(cells, model, args.k)
    elif args.min_size is not None:
        seg = engine.optimize_min_size(
            cells, model, _penalty_for(args, cells), args.min_size
        )
    else:
        seg = engine.optimize(cells, model, _penalty_for(args, cells))
    doc = _segmentation_doc(args, seg)
    if args.format == "json":
        _emit_json(doc)
    else:
        meta = {k: doc[k] for k in
                ("command", "model", "n_cells", "n_blocks", "changepoints",
                 "penalty_per_block", "total_fitness", "n_fitness_evals")}
        header, rows = _block_rows(seg)
        _emit_csv_blocks(meta, header, rows)
    return 0


def _penalty_for(args, cells: DataCells):
    if getattr(args, "penalty", None) is not None:
        return fitness.Penalty(per_block=float(args.penalty))
    return fitness.default_penalty(cells.n_cells)


def _cmd_hist(args) -> int:
    cells, model = _load(args)
    seg = engine.optimize(cells, model, _penalty_for(args, cells))
    total_events = int(round(cells.prefix_counts[-1]))
    rates = [b.estimate for b in seg.block_summaries]
    widths = [b.stats.duration for b in seg.block_summaries]
    recovered = float(sum(r * w for r, w in zip(rates, widths)))
    doc = {
        "command": "hist",
        "model": args.model,
        "n_cells": seg.n_cells,
        "n_bins": seg.n_blocks,
        "edges": seg.block_edges,
        "densities": rates,
        "bin_event_counts": [b.stats.n_events for b in seg.block_summaries],
        "penalty_per_block": seg.penalty_per_block,
        "total_fitness": seg.total_fitness,
        "normalization": {
            "total_events": total_events,
            "sum_density_times_width": recovered,
        },
    }
    if args.format == "json":
        _emit_json(doc)
    else:
        meta = {k: doc[k] for k in
                ("command", "model", "n_cells", "n_bins", "penalty_per_block",
                 "total_fitness")}
        meta["total_events"] = total_events
        meta["sum_density_times_width"] = recovered
        header = ["bin", "t_lo", "t_hi", "n_events", "density"]
        rows = [
            [i, b.t_lo, b.t_hi, b.stats.n_events, b.estimate]
            for i, b in enumerate(seg.block_summaries, start=1)
        ]
        _emit_csv_blocks(meta, header, rows)
    return 0


def _cmd_stream(args) -> int:
    model = fitness.poisson_events_model()
    penalty = fitness.Penalty(per_block=float(args.penalty))
    state = engine.fresh_state()
    anchor: Optional[float] = args.t0
    times: list[float] = []
    n_records = 0
    n_dropped = 0
    n_emissions = 0
    previous_latest = 0
    csv_mode = args.format == "csv"
    if csv_mode:
        sys.stdout.write("n_processed,latest_block_start,opt_value\n")
    for lineno, text in _rows(args.input):
        n_records += 1
        t = _float(args.input, lineno, _split(args.input, lineno, text, 1)[0])
        if anchor is None:
            anchor = t
            continue
        floor = times[-1] if times else anchor
        if t <= floor:
            n_dropped += 1
            sys.stderr.write(
                f"blockdp stream: dropped record at line {lineno}: "
                f"t={t!r} is not after {floor!r}\n"
            )
            continue
        times.append(t)
        cells = cells_from_event_gaps(np.asarray(times), anchor)
        state, latest = engine.push_cell(state, cells, model, penalty)
        if latest != previous_latest:
            n_emissions += 1
            opt_value = float(state.opt[state.n_processed])
            if csv_mode:
                sys.stdout.write(f"{state.n_processed},{latest},{opt_value!r}\n")
            else:
                _emit_json_line({
                    "n_processed": state.n_processed,
                    "latest_block_start": latest,
                    "opt_value": opt_value,
                })
            previous_latest = latest
        sys.stdout.flush()
    summary = {
        "summary": True,
        "n_records": n_records,
        "n_cells": state.n_processed,
        "n_dropped": n_dropped,
        "n_emissions": n_emissions,
        "penalty_per_block": penalty.per_block,
        "changepoints": engine.backtrack(state) if state.n_processed else [],
        "total_fitness": (
            float(state.opt[state.n_processed]) if state.n_processed else None
        ),
    }
    if csv_mode:
        for key, value in summary.items():
            sys.stdout.write(f"# {key}={_jsonable(value)}\n")
    else:
        _emit_json_line(summary)
    return 0


def _cmd_bench(args) -> int:
    try:
        sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
    except ValueError:
        raise InputError(f"--sizes must be comma-separated integers, got {args.sizes!r}") from None
    if not sizes or any(n < 1 for n in sizes):
        raise InputError(f"--sizes must be positive integers, got {args.sizes!r}")
    backends = ["numpy"]
    if bench._numba_impl is not None:
        backends.insert(0, "numba")
    points = bench.run_scaling(sizes, backends=backends, seed=args.seed)
    for p in points:
        expected = p.n_cells * (p.n_cells + 1) // 2
        if p.n_fitness_evals != expected:
            raise InternalError(
                f"{p.backend} backend made {p.n_fitness_evals} fitness evaluations "
                f"for {p.n_cells} cells; the exact count must be {expected}"
            )
    sys.stderr.write(bench.format_report(points) + "\n")
    doc = {
        "command": "bench",
        "seed": args.seed,
        "backends": backends,
        "points": [
            {
                "backend": p.backend,
                "n_cells": p.n_cells,
                "median_seconds": p.median_seconds,
                "n_fitness_evals": p.n_fitness_evals,
            }
            for p in points
        ],
        "doubling_ratios": [
            {"backend": b, "n": n, "n2": n2, "time_ratio": r}
            for b, n, n2, r in bench.scaling_ratios(points)
        ],
    }
    if args.format == "json":
        _emit_json(doc)
    else:
        header = ["backend", "n_cells", "median_seconds", "n_fitness_evals"]
        rows = [[p.backend, p.n_cells, p.median_seconds, p.n_fitness_evals]
                for p in points]
        _emit_csv_blocks({"command": "bench", "seed": args.seed}, header, rows)
    return 0


def _cmd_oracle_check(args) -> int:
    if not 1 <= args.max_cells <= 14:
        raise InputError("--max-cells must lie in 1..14")
    if args.trials < 1:
        raise InputError("--trials must be positive")
    rng = np.random.default_rng(args.seed)
    n_checked = 0
    for kind in ("events", "bins", "measures"):
        for _ in range(args.trials):
            n = int(rng.integers(1, args.max_cells + 1))
            raw = synthetic.random_cells_arrays(n, rng, kind=kind)
            if kind == "events":
                cells = cells_from_events(raw["times"], interval=raw["interval"])
                model = fitness.poisson_events_model()
            elif kind == "bins":
                cells = cells_from_bins(raw["edges"], raw["counts"])
                model = fitness.poisson_bins_model()
            else:
                cells = cells_from_measures(
                    raw["times"], raw["values"], raw["sigmas"],
                    interval=raw["interval"],
                )
                model = fitness.gaussian_model()
            for penalty in (0.0, float(np.log(cells.n_cells))):
                fast = engine.optimize(cells, model, penalty)
                slow = baselines.exhaustive(cells, model, penalty)
                n_checked += 1
                same_cps = np.array_equal(
                    fast.changepoints, slow.segmentation.changepoints
                )
                scale = max(abs(fast.total_fitness),
                            abs(slow.segmentation.total_fitness), 1.0)
                close = (
                    abs(fast.total_fitness - slow.segmentation.total_fitness)
                    <= 1e-9 * scale
                )
                if not (same_cps and close):
                    raise InternalError(
                        f"optimizer disagrees with exhaustive scan on a "
                        f"{kind} instance with {cells.n_cells} cells, "
                        f"penalty {penalty!r}: {fast.changepoints.tolist()} "
                        f"(value {fast.total_fitness!r}) vs "
                        f"{slow.segmentation.changepoints.tolist()} "
                        f"(value {slow.segmentation.total_fitness!r})"
                    )
    doc = {
        "command": "oracle-check",
        "seed": args.seed,
        "max_cells": args.max_cells,
        "n_instances_checked": n_checked,
        "all_match": True,
    }
    if args.format == "json":
        _emit_json(doc)
    else:
        _emit_csv_blocks(doc, [], [])
    return 0


_COMMANDS = {
    "segment": _cmd_segment,
    "hist": _cmd_hist,
    "stream": _cmd_stream,
    "bench": _cmd_bench,
    "oracle-check": _cmd_oracle_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except InputError as exc:
        sys.stderr.write(f"blockdp: error: {exc}\n")
        return 1
    except InternalError as exc:
        sys.stderr.write(f"blockdp: internal invariant violation: {exc}\n")
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    raise SystemExit(main())
