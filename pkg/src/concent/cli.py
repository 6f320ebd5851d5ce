"""Command-line interface: ``concent recover | simulate | concentration``.

Exit status is 0 on success, 2 for bad input and 1 for numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .estimator import CovarianceOptions, sample_spectrum
from .linalg import RngState
from .metrics import spectrum_error
from .recovery import run
from .simulators import (
    DATA_DOMAIN,
    STUDY_DOMAIN,
    Constant,
    Linear,
    Power,
    SparseLinear,
    SpectrumShape,
    Step,
    concentration_study,
    generate_spectrum,
    mp_density,
    mp_quantile,
    parallel_map,
    synthesize_data,
)
from .spectrum import ConcentConfig, NumericalError, SpectrumError

EXIT_NUMERICAL = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Bad user input; reported with exit status 2."""


@dataclass
class RunManifest:
    subcommand: str
    config: dict[str, Any]
    seed: int
    input_sha256: str | None = None
    version: str = field(default=__version__)

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


def _num(x: float) -> str:
    # repr is the shortest string that round-trips exactly
    return repr(float(x))


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _write_csv(path: Path, manifest: RunManifest, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest.as_dict(), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def read_matrix_csv(path: Path, header: bool = False) -> tuple[np.ndarray, str]:
    """Parse a numeric CSV (rows = samples) and return it with its SHA-256."""
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    digest = hashlib.sha256(raw).hexdigest()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise InputError(f"{path} is not UTF-8 text") from exc

    rows: list[list[float]] = []
    width = None
    for lineno, row in enumerate(csv.reader(io.StringIO(text, newline="")), start=1):
        if header and lineno == 1:
            continue
        if not row or all(not cell.strip() for cell in row):
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError(f"row {lineno}: expected {width} columns, found {len(row)}")
        values = []
        for col, cell in enumerate(row, start=1):
            try:
                v = float(cell.strip())
            except ValueError:
                raise InputError(f"row {lineno}, column {col}: non-numeric value {cell!r}") from None
            if not math.isfinite(v):
                raise InputError(f"row {lineno}, column {col}: non-finite value {cell!r}")
            values.append(v)
        rows.append(values)
    if not rows or not width:
        raise InputError(f"{path}: no data rows (p = 0)")
    return np.array(rows, dtype=np.float64), digest


def parse_shape(text: str, p: int) -> SpectrumShape:
    """Parse ``kind:args`` into a spectrum shape for dimension ``p``.

    Kinds: ``constant:V``, ``linear:LO,HI``, ``power:A[,XHI]``,
    ``sparse:HI[,ZERO_FRACTION]`` and ``step:VxF,VxF,...`` where each F is
    the fraction of p taken by value V.
    """
    kind, _, args = text.partition(":")
    kind = kind.strip().lower()
    parts = [a.strip() for a in args.split(",") if a.strip()]
    try:
        if kind == "constant" and len(parts) == 1:
            return Constant(float(parts[0]))
        if kind == "linear" and len(parts) == 2:
            return Linear(float(parts[0]), float(parts[1]))
        if kind == "power" and len(parts) in (1, 2):
            return Power(*map(float, parts))
        if kind == "sparse" and len(parts) in (1, 2):
            return SparseLinear(*map(float, parts))
        if kind == "step" and parts:
            return Step(_step_blocks(parts, p))
    except (ValueError, SpectrumError) as exc:
        raise InputError(f"invalid shape {text!r}: {exc}") from None
    raise InputError(f"invalid shape {text!r}")


def _step_blocks(parts: list[str], p: int) -> tuple[tuple[float, int], ...]:
    pairs = []
    for part in parts:
        value, sep, frac = part.partition("x")
        if not sep:
            raise ValueError(f"step block {part!r} must look like VALUExFRACTION")
        pairs.append((float(value), float(frac)))
    total = sum(f for _, f in pairs)
    if any(f < 0 for _, f in pairs) or abs(total - 1.0) > 1e-9:
        raise ValueError("step fractions must be nonnegative and sum to 1")
    counts = [int(round(f * p)) for _, f in pairs[:-1]]
    last = p - sum(counts)
    if last < 0:
        raise ValueError("step fractions do not fit p")
    counts.append(last)
    return tuple((v, c) for (v, _), c in zip(pairs, counts))


def _config(args: argparse.Namespace, n: int, seed: int | None = None) -> ConcentConfig:
    return ConcentConfig(
        sample_count=n,
        loops=args.loops,
        avg_k=args.avg_k,
        seed=args.seed if seed is None else seed,
    )


def _output_dir(args: argparse.Namespace) -> Path:
    out = Path(args.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc.strerror}") from exc
    return out


def cmd_recover(args: argparse.Namespace) -> int:
    X, digest = read_matrix_csv(Path(args.input), header=args.header)
    n, p = X.shape
    opts = CovarianceOptions(centered=args.centered)
    try:
        sample = sample_spectrum(X, opts)
    except SpectrumError as exc:
        raise InputError(str(exc)) from exc
    config = _config(args, n)
    result = run(sample, config)

    manifest = RunManifest(
        subcommand="recover",
        config={**config.as_dict(), "centered": args.centered, "header": args.header, "n": n, "p": p},
        seed=config.seed,
        input_sha256=digest,
    )
    out = _output_dir(args)
    _write_json(
        out / "recovery.json",
        {
            "manifest": manifest.as_dict(),
            "sample_spectrum": sample.tolist(),
            "recovered": result.recovered.tolist(),
            "iterates": [it.tolist() for it in result.iterates],
        },
    )
    if args.csv:
        _write_csv(
            out / "recovery.csv",
            manifest,
            ("index", "sample", "recovered"),
            ((j, s, r) for j, (s, r) in enumerate(zip(sample.values, result.recovered.values))),
        )
    print(f"recovered spectrum of {p} eigenvalues from {n} samples -> {out / 'recovery.json'}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    truth = generate_spectrum(parse_shape(args.shape, args.p), args.p)
    seeds = [args.seed + s for s in range(args.seeds)]

    def one(seed: int):
        X = synthesize_data(truth, args.n, RngState(seed, 0, DATA_DOMAIN))
        sample = sample_spectrum(X)
        recovered = run(sample, _config(args, args.n, seed)).recovered
        return seed, sample, recovered

    results = parallel_map(one, seeds)
    manifest = RunManifest(
        subcommand="simulate",
        config={
            "shape": args.shape, "n": args.n, "p": args.p, "seeds": args.seeds,
            "loops": args.loops, "avg_k": args.avg_k,
        },
        seed=args.seed,
    )
    out = _output_dir(args)
    summary = []
    for seed, sample, recovered in results:
        err_s = spectrum_error(sample, truth).rel_l2
        err_c = spectrum_error(recovered, truth).rel_l2
        summary.append((seed, args.shape, args.n, args.p,
                        "" if err_s is None else err_s, "" if err_c is None else err_c))
        _write_csv(
            out / f"curves_seed{seed}.csv",
            manifest,
            ("index", "truth", "sample", "concent"),
            ((j, t, s, c) for j, (t, s, c) in enumerate(zip(truth.values, sample.values, recovered.values))),
        )
    _write_csv(
        out / "summary.csv",
        manifest,
        ("seed", "shape", "n", "p", "err_sample_rel_l2", "err_concent_rel_l2"),
        summary,
    )
    for row in summary:
        print(f"seed {row[0]}: sample rel_l2 {row[4]}  concent rel_l2 {row[5]}")
    return 0


def cmd_concentration(args: argparse.Namespace) -> int:
    shape = parse_shape(args.shape, args.p)
    truth = generate_spectrum(shape, args.p)
    report = concentration_study(truth, args.n, args.reps, RngState(args.seed, 0, STUDY_DOMAIN))
    manifest = RunManifest(
        subcommand="concentration",
        config={"shape": args.shape, "n": args.n, "p": args.p, "reps": args.reps},
        seed=args.seed,
    )
    out = _output_dir(args)

    header = ["index", "mean", "std"]
    columns = [range(args.p), report.per_index_mean, report.per_index_std]
    if isinstance(shape, Constant) and shape.value > 0:
        # MP law scaled to population variance ``value``
        c, scale = args.p / args.n, shape.value
        levels = (args.p - np.arange(args.p) - 0.5) / args.p
        header += ["mp_quantile", "mp_density"]
        columns.append([scale * mp_quantile(q, c) for q in levels])
        columns.append(np.asarray(mp_density(report.per_index_mean / scale, c)) / scale)
    _write_csv(out / "concentration_stats.csv", manifest, header, zip(*columns))
    _write_csv(
        out / "concentration_deviation.csv",
        manifest,
        ("rep", "linf_deviation_normalized"),
        enumerate(report.max_abs_deviation),
    )
    print(
        f"max per-index std {float(report.per_index_std.max())!r}; "
        f"median normalized linf deviation {float(np.median(report.max_abs_deviation))!r}"
    )
    return 0


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="concent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--output-dir", default="out")

    algo = argparse.ArgumentParser(add_help=False)
    algo.add_argument("--loops", type=_positive, default=10)
    algo.add_argument("--avg-k", type=_positive, default=10)

    rec = sub.add_parser("recover", parents=[common, algo], help="recover the spectrum of a CSV data matrix")
    rec.add_argument("input", help="CSV file, rows = samples, columns = features")
    rec.add_argument("--header", action="store_true", help="skip the first row")
    rec.add_argument("--centered", action="store_true", help="subtract column means")
    rec.add_argument("--csv", action="store_true", help="also write recovery.csv")
    rec.set_defaults(func=cmd_recover)

    sim = sub.add_parser("simulate", parents=[common, algo], help="recover synthetic spectra")
    sim.add_argument("--shape", required=True)
    sim.add_argument("--n", type=_positive, required=True)
    sim.add_argument("--p", type=_positive, required=True)
    sim.add_argument("--seeds", type=_positive, default=1, help="number of consecutive seeds")
    sim.set_defaults(func=cmd_simulate)

    conc = sub.add_parser("concentration", parents=[common], help="sample-spectrum concentration study")
    conc.add_argument("--shape", required=True)
    conc.add_argument("--n", type=_positive, required=True)
    conc.add_argument("--p", type=_positive, required=True)
    conc.add_argument("--reps", type=int, default=200)
    conc.set_defaults(func=cmd_concentration)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "reps", 2) < 2:
            raise InputError("--reps must be at least 2")
        return args.func(args)
    except (InputError, SpectrumError) as exc:
        print(f"concent: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"concent: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
