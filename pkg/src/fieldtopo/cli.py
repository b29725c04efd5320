"""Command-line interface.

    fieldtopo curve        descriptor curves of a field, CSV or JSON
    fieldtopo bench        gather throughput (MP/s or MV/s), optional worker sweep
    fieldtopo contrib-dump raw contribution histograms as JSON

Inputs are either files (--input, 8-bit BMP for 2D or headerless raw volumes
for 3D) or seeded synthetic fields (--generate WxH or WxHxD). Exit codes:
0 success, 1 usage or input error, 2 internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time

from .contrib2d import gather_2d_parallel
from .contrib3d import ClassificationError, gather_3d_parallel
from .descriptors import (builtin_weights, descriptor_curve, load_weight_table,
                          normalize_connectivity)
from .fields import random_field
from .sources import (MemorySource, open_bmp_lowmem, open_raw_lowmem, read_bmp,
                      read_raw_volume, read_sidecar, sidecar_path)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_dims(text):
    parts = text.lower().split("x")
    if len(parts) not in (2, 3):
        raise ValueError(f"dims must look like WxH or WxHxD, got {text!r}")
    dims = tuple(int(p) for p in parts)
    if min(dims) < 1:
        raise ValueError(f"dimensions must be >= 1, got {text!r}")
    return dims


def _add_input_args(p):
    p.add_argument("--input", help="input file (BMP or raw volume)")
    p.add_argument("--generate", metavar="WxH[xD]",
                   help="generate a seeded random field instead of reading one")
    p.add_argument("--dist", choices=("uniform", "normal"), default="uniform",
                   help="distribution for --generate (default uniform)")
    p.add_argument("--seed", type=int, default=0, help="seed for --generate")
    p.add_argument("--format", choices=("bmp", "raw"),
                   help="input format; default inferred from the file suffix")
    p.add_argument("--dims", metavar="WxHxD",
                   help="raw volume dimensions (or use a <file>.json sidecar)")
    p.add_argument("--element", choices=("u8", "u16"),
                   help="raw volume element type (default u8)")
    p.add_argument("--max-level", type=int, default=255,
                   help="max filtration level (default 255)")
    p.add_argument("--workers", type=int, default=1, help="gather threads (default 1)")
    p.add_argument("--low-memory", action="store_true",
                   help="stream samples from the file instead of loading the field")
    p.add_argument("--output", help="output path (default stdout)")


def _infer_format(args):
    if args.format:
        return args.format
    suffix = args.input.lower().rsplit(".", 1)[-1]
    if suffix == "bmp":
        return "bmp"
    if suffix in ("raw", "bin", "vol"):
        return "raw"
    raise ValueError(f"cannot infer format of {args.input!r}; pass --format bmp|raw")


def _raw_params(args):
    if args.dims:
        dims = _parse_dims(args.dims)
        if len(dims) != 3:
            raise ValueError("raw volumes need --dims WxHxD")
        return dims, args.element or "u8", args.max_level
    if sidecar_path(args.input).exists():
        return read_sidecar(args.input)
    raise ValueError(f"raw input needs --dims or a sidecar at {sidecar_path(args.input)}")


def _build_source(args):
    if args.generate and args.input:
        raise ValueError("pass either --input or --generate, not both")
    if args.generate:
        if args.low_memory:
            raise ValueError("--low-memory needs --input (generated fields are in memory)")
        dims = _parse_dims(args.generate)
        return MemorySource(random_field(dims, args.dist, args.seed, args.max_level))
    if not args.input:
        raise ValueError("pass --input FILE or --generate WxH[xD]")
    fmt = _infer_format(args)
    if fmt == "bmp":
        if args.low_memory:
            return open_bmp_lowmem(args.input)
        return MemorySource(read_bmp(args.input))
    dims, element, max_level = _raw_params(args)
    if args.low_memory:
        return open_raw_lowmem(args.input, dims, element, max_level)
    return MemorySource(read_raw_volume(args.input, dims, element, max_level))


def _gather(source, workers):
    if source.ndim == 2:
        return gather_2d_parallel(source, workers)
    return gather_3d_parallel(source, workers)


def _resolve_tables(args, ndim):
    conn = args.connectivity
    if conn is None:
        conn = "8" if ndim == 2 else "26"
    conn = normalize_connectivity(conn)
    if (ndim == 2) != (conn in ("4C", "8C")):
        raise ValueError(f"connectivity {conn} does not fit a {ndim}D field")
    names = args.descriptor or ["ec"]
    tables = []
    for name in names:
        if name.endswith(".json"):
            table = load_weight_table(name)
            if table.dimension != ndim:
                raise ValueError(f"{name}: {table.dimension}D table for a {ndim}D field")
            tables.append(table)
        else:
            tables.append(builtin_weights(name, conn))
    return tables


def _emit(text, output):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_curve(args):
    source = _build_source(args)
    try:
        cmap = _gather(source, args.workers)
    finally:
        source.close()
    tables = _resolve_tables(args, source.ndim)
    curves = [descriptor_curve(cmap, t) for t in tables]
    as_json = bool(args.output) and args.output.lower().endswith(".json")
    if as_json:
        doc = {
            "dims": cmap.to_dict()["dims"],
            "max_level": cmap.max_level,
            "levels": list(range(cmap.max_level + 1)),
            "curves": {t.descriptor: [n / 8 for n in c.numerators.tolist()]
                       for t, c in zip(tables, curves)},
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
        return
    lines = ["level," + ",".join(t.descriptor for t in tables)]
    decimals = [c.decimals() for c in curves]
    for level in range(cmap.max_level + 1):
        lines.append(f"{level}," + ",".join(d[level] for d in decimals))
    _emit("\n".join(lines) + "\n", args.output)


def cmd_contrib_dump(args):
    source = _build_source(args)
    try:
        cmap = _gather(source, args.workers)
    finally:
        source.close()
    _emit(json.dumps(cmap.to_dict()) + "\n", args.output)


def _bench_once(source, workers, tables, include_io, rebuild):
    t0 = time.perf_counter()
    if include_io:
        source = rebuild()
    cmap = _gather(source, workers)
    for table in tables:
        descriptor_curve(cmap, table)
    elapsed = time.perf_counter() - t0
    if include_io:
        source.close()
    return elapsed


def cmd_bench(args):
    source = _build_source(args)
    tables = _resolve_tables(args, source.ndim)
    cells = source.width * source.height * (source.depth if source.ndim == 3 else 1)
    unit = "MP/s" if source.ndim == 2 else "MV/s"
    if args.sweep_workers:
        worker_counts = sorted({int(w) for w in args.sweep_workers.split(",")})
        if worker_counts[0] != 1:
            worker_counts.insert(0, 1)
    else:
        worker_counts = [args.workers]
    shape = f"{source.width}x{source.height}"
    if source.ndim == 3:
        shape += f"x{source.depth}"
    out = [f"bench: {shape} cells={cells} repeats={args.repeats} "
           f"descriptors={','.join(t.descriptor for t in tables)}"
           + (" (io included)" if args.include_io else "")]
    _bench_once(source, worker_counts[0], tables, False, None)  # warm-up, untimed
    serial_mean = None
    for workers in worker_counts:
        times = [
            _bench_once(source, workers, tables, args.include_io,
                        lambda: _build_source(args))
            for _ in range(args.repeats)
        ]
        rates = [cells / t / 1e6 for t in times]
        t_mean = statistics.fmean(times)
        t_sd = statistics.stdev(times) if len(times) > 1 else 0.0
        r_mean = statistics.fmean(rates)
        r_sd = statistics.stdev(rates) if len(rates) > 1 else 0.0
        line = (f"workers={workers}: {t_mean:.6f} +- {t_sd:.6f} s | "
                f"{r_mean:.2f} +- {r_sd:.2f} {unit}")
        if workers == 1:
            serial_mean = t_mean
        if serial_mean is not None:
            line += f" | speedup {serial_mean / t_mean:.2f}"
        out.append(line)
    source.close()
    _emit("\n".join(out) + "\n", args.output)


def build_parser():
    parser = _Parser(prog="fieldtopo",
                     description="Topological descriptor curves of 2D/3D fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    curve = sub.add_parser("curve", help="compute descriptor curves")
    _add_input_args(curve)
    curve.add_argument("--descriptor", action="append",
                       help="ec, perimeter, area, surface-area, volume, or a "
                            "weight-table JSON path; repeatable (default ec)")
    curve.add_argument("--connectivity", choices=("4", "8", "26"),
                       help="default 8 for 2D, 26 for 3D")
    curve.set_defaults(func=cmd_curve)

    bench = sub.add_parser("bench", help="time the gather and curve assembly")
    _add_input_args(bench)
    bench.add_argument("--descriptor", action="append")
    bench.add_argument("--connectivity", choices=("4", "8", "26"))
    bench.add_argument("--repeats", type=int, default=5, help="timed repeats (default 5)")
    bench.add_argument("--sweep-workers", metavar="N,N,...",
                       help="bench each worker count and report speedup vs serial")
    bench.add_argument("--include-io", action="store_true",
                       help="time file reading as well (default: gather+curves only)")
    bench.set_defaults(func=cmd_bench)

    dump = sub.add_parser("contrib-dump", help="dump raw contribution histograms")
    _add_input_args(dump)
    dump.set_defaults(func=cmd_contrib_dump)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        args.func(args)
    except ClassificationError as exc:
        print(f"fieldtopo: internal consistency failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"fieldtopo: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
