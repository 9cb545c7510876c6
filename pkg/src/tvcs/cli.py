"""Command-line harness: sense images, recover them, and run benchmark grids.

::

    tvcs sense   --image x.pgm --subrate 0.3 --block-size 32 --seed 0 --out x.csm
    tvcs recover --measurements x.csm --variant nllm --reference x.pgm \\
                 --out x_rec.pgm --report x.csv
    tvcs bench   --spec grid.txt --out table.csv

Bench specs are flat ``key=value`` files (``#`` starts a comment)::

    images = barbara, leaves, monarch, boats
    subrates = 0.15, 0.2, 0.25, 0.3
    variants = tval3, nllm, tvnlr1
    block_size = 32
    seed = 0
    max_outer = 50

Image entries are PGM paths or bundled benchmark names. Command-line flags
override the spec file. Exit codes: 0 success, 2 usage or input error,
3 numerical divergence.
"""

import argparse
import csv
import dataclasses
import io
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import data
from .image import PgmError, center_crop, load_pgm, save_pgm
from .sensing import (
    MeasurementFileError,
    MeasurementOperator,
    build_block_gaussian,
    build_dense_gaussian,
    block_subsamples,
    read_measurements,
    write_measurements,
)
from .solver import SolverConfig, SolverDivergenceError, Variant, recover

log = logging.getLogger("tvcs")

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED = 0, 2, 3

COLUMNS = ("image", "subrate", "variant", "psnr_db", "outer_iters", "inner_iters",
           "nlm_calls", "residual", "wall_seconds", "status")

# flag name -> SolverConfig field, with the parser used for spec-file values
_OVERRIDES = {
    "mu": float, "beta": float, "theta": float, "alpha0": float, "h": float,
    "search_radius": int, "patch_radius": int, "tol_inner": float,
    "tol_outer": float, "max_inner": int, "max_outer": int,
    "backtrack_max": int, "center_weight": str,
}


class UsageError(Exception):
    """Bad arguments or unreadable inputs (exit code 2)."""


@dataclasses.dataclass
class BenchSpec:
    images: list
    subrates: list
    variants: list
    block_size: int = 32
    seed: int = 0
    crop: int = None
    overrides: dict = dataclasses.field(default_factory=dict)
    out: str = None
    jobs: int = 1

    def __post_init__(self):
        if not self.images or not self.subrates or not self.variants:
            raise UsageError("bench needs at least one image, subrate and variant")
        for s in self.subrates:
            if not 0 < s <= 1:
                raise UsageError(f"subrate {s} outside (0, 1]")
        self.variants = [_variant(v) for v in self.variants]

    def cells(self):
        return [(img, s, v) for img in self.images for s in self.subrates for v in self.variants]


def _variant(name):
    try:
        return Variant.parse(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _subrate(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid subrate {text!r}") from None
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"subrate {value} outside (0, 1]")
    return value


def _split(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_solver_flags(p):
    g = p.add_argument_group("solver overrides")
    g.add_argument("--mu", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--theta", type=float)
    g.add_argument("--alpha0", type=float)
    g.add_argument("--h", type=float, help="NLM smoothing parameter (default per variant)")
    g.add_argument("--search-radius", type=int)
    g.add_argument("--patch-radius", type=int)
    g.add_argument("--tol-inner", type=float)
    g.add_argument("--tol-outer", type=float)
    g.add_argument("--max-inner", type=int)
    g.add_argument("--max-outer", type=int)


def _flag_overrides(args):
    return {k: getattr(args, k) for k in _OVERRIDES if getattr(args, k, None) is not None}


def _config(overrides):
    try:
        return SolverConfig(**overrides)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid solver configuration: {exc}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="tvcs", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sense", parents=[common], help="measure a PGM image and write a CSM1 file")
    p.add_argument("--image", required=True)
    p.add_argument("--subrate", type=_subrate, default=0.3)
    p.add_argument("--block-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--operator", choices=("block", "dense", "identity"), default="block")
    p.add_argument("--crop", type=int, help="center-crop the image to this size first")
    p.add_argument("--out", required=True)

    p = sub.add_parser("recover", parents=[common], help="recover an image from a CSM1 file")
    p.add_argument("--measurements", required=True)
    p.add_argument("--variant", default="tval3")
    p.add_argument("--reference", help="ground-truth PGM for the PSNR column")
    p.add_argument("--out", required=True, help="recovered PGM")
    p.add_argument("--report", help="one-row CSV report (default: stdout)")
    _add_solver_flags(p)

    p = sub.add_parser("bench", parents=[common], help="run an image x subrate x variant grid")
    p.add_argument("--spec", help="key=value spec file")
    p.add_argument("--image", action="append", help="image path or bundled name (repeatable)")
    p.add_argument("--subrate", help="comma-separated subrates")
    p.add_argument("--variant", help="comma-separated variants")
    p.add_argument("--block-size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--crop", type=int)
    p.add_argument("--jobs", type=int, help="cells run concurrently")
    p.add_argument("--out", help="CSV path")
    _add_solver_flags(p)
    return parser


def parse_spec_file(path):
    """Parse a ``key=value`` bench spec into keyword arguments."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read spec {path}: {exc}") from None
    fields, overrides = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        try:
            if key in ("images", "variants"):
                fields[key] = _split(value)
            elif key == "subrates":
                fields[key] = [float(s) for s in _split(value)]
            elif key in ("block_size", "seed", "crop", "jobs"):
                fields[key] = int(value)
            elif key == "out":
                fields[key] = value
            elif key in _OVERRIDES:
                overrides[key] = _OVERRIDES[key](value)
            else:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    fields["overrides"] = overrides
    return fields


def bench_spec_from_args(args):
    fields = parse_spec_file(args.spec) if args.spec else {"overrides": {}}
    if args.image:
        fields["images"] = args.image
    if args.subrate:
        try:
            fields["subrates"] = [float(s) for s in _split(args.subrate)]
        except ValueError:
            raise UsageError(f"invalid subrates {args.subrate!r}") from None
    if args.variant:
        fields["variants"] = _split(args.variant)
    for key in ("block_size", "seed", "crop", "jobs", "out"):
        if getattr(args, key) is not None:
            fields[key] = getattr(args, key)
    fields["overrides"].update(_flag_overrides(args))
    for key in ("images", "subrates", "variants"):
        fields.setdefault(key, [])
    spec = BenchSpec(**fields)
    _config(spec.overrides)
    return spec


def resolve_image(name):
    """Path for an image entry: an existing file or a bundled benchmark name."""
    path = Path(name)
    if path.is_file():
        return path
    if name in data.BENCHMARK_ROLES:
        return data.role_path(name)
    try:
        return data.image_path(name)
    except FileNotFoundError:
        raise UsageError(f"image not found: {name}") from None


def _load(name, crop=None):
    img = load_pgm(resolve_image(name))
    return center_crop(img, crop) if crop else img


def format_row(row):
    out = dict(row)
    for key, fmt in (("psnr_db", "{:.4f}"), ("residual", "{:.3e}"), ("wall_seconds", "{:.3f}")):
        v = out.get(key)
        if isinstance(v, float):
            out[key] = "nan" if math.isnan(v) else fmt.format(v)
    out["subrate"] = f"{out['subrate']:g}" if isinstance(out["subrate"], float) else out["subrate"]
    return {c: str(out.get(c, "")) for c in COLUMNS}


def write_csv(rows, stream):
    writer = csv.DictWriter(stream, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(format_row(row))


def text_table(rows):
    cells = [format_row(r) for r in rows]
    widths = {c: max([len(c)] + [len(r[c]) for r in cells]) for c in COLUMNS}
    lines = ["  ".join(c.ljust(widths[c]) for c in COLUMNS)]
    lines.append("  ".join("-" * widths[c] for c in COLUMNS))
    lines += ["  ".join(r[c].rjust(widths[c]) for c in COLUMNS) for r in cells]
    return "\n".join(lines)


def _report_row(image, subrate, report, wall, status="ok"):
    return {
        "image": image, "subrate": subrate, "variant": report.variant,
        "psnr_db": report.psnr if report.psnr is not None else math.nan,
        "outer_iters": report.outer_iters, "inner_iters": report.total_inner_iters,
        "nlm_calls": report.nlm_calls, "residual": report.final_residual,
        "wall_seconds": wall, "status": status,
    }


def run_cell(image, subrate, variant, block_size, seed, overrides, crop=None):
    """One bench cell as a CSV row; failures become ``status=failed`` rows."""
    t0 = time.perf_counter()
    try:
        x = _load(image, crop)
        op = build_block_gaussian(block_size, subrate, *x.shape, seed)
        _, report = recover(op.forward(x), op, SolverConfig(**overrides), variant, reference=x)
    except Exception as exc:  # a failed cell must not stop the grid
        log.warning("cell %s/%g/%s failed: %s", image, subrate, variant.value, exc)
        return {"image": image, "subrate": subrate, "variant": variant.value,
                "psnr_db": math.nan, "residual": math.nan,
                "wall_seconds": time.perf_counter() - t0, "status": "failed"}
    return _report_row(image, subrate, report, report.wall_time)


def run_bench(spec):
    """Run every cell of ``spec``; rows come back in spec order."""
    jobs = [(img, s, v, spec.block_size, spec.seed, spec.overrides, spec.crop)
            for img, s, v in spec.cells()]
    if spec.jobs > 1:
        with ProcessPoolExecutor(spec.jobs) as pool:
            rows = list(pool.map(run_cell, *zip(*jobs)))
    else:
        rows = []
        for job in jobs:
            rows.append(run_cell(*job))
            log.info("%s", " ".join(format_row(rows[-1]).values()))
    return rows


def cmd_sense(args):
    try:
        x = _load(args.image, args.crop)
        h, w = x.shape
        if args.operator == "identity":
            op = MeasurementOperator.identity(x.shape)
        elif args.operator == "dense":
            m = max(1, round(args.subrate * h * w))
            op = build_dense_gaussian(m, h * w, args.seed, shape=x.shape)
        else:
            block_subsamples(args.block_size, args.subrate)
            op = build_block_gaussian(args.block_size, args.subrate, h, w, args.seed)
        write_measurements(args.out, op, op.forward(x))
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    log.info("wrote %d measurements of a %dx%d image to %s", op.n_measurements, h, w, args.out)
    return EXIT_OK


def cmd_recover(args):
    variant = _variant(args.variant)
    config = _config(_flag_overrides(args))
    try:
        op, b = read_measurements(args.measurements)
        reference = load_pgm(args.reference) if args.reference else None
    except (OSError, MeasurementFileError, PgmError) as exc:
        raise UsageError(str(exc)) from None
    if reference is not None and reference.shape != op.shape:
        raise UsageError(f"reference shape {reference.shape} differs from {op.shape}")
    try:
        u, report = recover(b, op, config, variant, reference=reference)
    except SolverDivergenceError as exc:
        print(f"tvcs: recovery diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    try:
        save_pgm(u, args.out)
        row = _report_row(Path(args.measurements).stem, _subrate_of(op), report, report.wall_time)
        if args.report:
            with open(args.report, "w", newline="") as fh:
                write_csv([row], fh)
        else:
            write_csv([row], sys.stdout)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    return EXIT_OK


def _subrate_of(op):
    return op.n_measurements / op.n_signal


def cmd_bench(args):
    spec = bench_spec_from_args(args)
    for image in spec.images:
        resolve_image(image)
    rows = run_bench(spec)
    buf = io.StringIO()
    write_csv(rows, buf)
    if spec.out:
        try:
            Path(spec.out).write_text(buf.getvalue())
        except OSError as exc:
            raise UsageError(str(exc)) from None
        print(text_table(rows))
    else:
        sys.stdout.write(buf.getvalue())
        print(text_table(rows), file=sys.stderr)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s")
    commands = {"sense": cmd_sense, "recover": cmd_recover, "bench": cmd_bench}
    try:
        return commands[args.command](args)
    except UsageError as exc:
        print(f"tvcs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
