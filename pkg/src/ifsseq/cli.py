"""Command line surface: dist, attractor, analyze, collage-fit, predict.

Exit codes: 0 success, 2 parse or validation error, 3 resource cap exceeded,
4 precondition failure.  Commands that write files also write a manifest
recording inputs (with digests), flags, seeds, and versions, so any run can
be reproduced byte for byte.  IFSSEQ_SEED overrides the default seed when
--seed is not given.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .attractor import PointSet, attractor_points, default_resolution
from .collage import ExtrapolationModel, FitConfig, collage_bound, extrapolate, fit_ifs, fit_sequence
from .errors import InputError, PreconditionError, ResourceLimitError
from .formats import (
    foreground_mask,
    ifs_to_dict,
    read_ifs,
    read_points_csv,
    read_raster,
    read_sequence,
    render_raster,
    raster_to_points,
    write_ifs,
    write_pgm,
    write_points_csv,
)
from .sequences import align_chain, cauchy_index, limit_candidate, pairwise_distances
from .systems import cost_matrix, is_mo_set, optimal_matching

MODEL_NAMES = {"last": "hold-last", "linear": "linear", "geometric": "geometric"}
RATIONAL_DENOMINATOR_CAP = 10**6


def default_seed() -> int:
    env = os.environ.get("IFSSEQ_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise InputError(f"IFSSEQ_SEED must be an integer, got {env!r}") from exc


def format_value(x: float) -> str:
    """Decimal, plus the exact rational when one reconstructs the value."""
    frac = Fraction(x).limit_denominator(RATIONAL_DENOMINATOR_CAP)
    if abs(float(frac) - x) <= 1e-12 and frac.denominator <= RATIONAL_DENOMINATOR_CAP:
        if frac.denominator == 1:
            return f"{x:.10f} ({frac.numerator})"
        return f"{x:.10f} ({frac.numerator}/{frac.denominator})"
    return f"{x:.10f}"


def _sha256(path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def write_manifest(out_path, command: str, flags: dict, inputs: list, outputs: list):
    manifest = {
        "command": command,
        "flags": flags,
        "inputs": [{"path": str(p), "sha256": _sha256(p)} for p in inputs],
        "outputs": [str(p) for p in outputs],
        "versions": {
            "ifsseq": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    Path(out_path).write_text(json.dumps(manifest, indent=2) + "\n")


def _parse_domain(lo: str | None, hi: str | None):
    if lo is None and hi is None:
        return None
    if lo is None or hi is None:
        raise InputError("--domain-lo and --domain-hi must be given together")
    try:
        lo_vec = [float(v) for v in lo.split(",")]
        hi_vec = [float(v) for v in hi.split(",")]
    except ValueError as exc:
        raise InputError(f"bad domain bounds: {exc}") from exc
    from .maps import Box

    return Box(lo_vec, hi_vec)


def _load_frame(path, pitch: float | None, threshold: int | None) -> PointSet:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_points_csv(path, pitch or 1e-3)
    arr, maxval = read_raster(path)
    mask = foreground_mask(arr, maxval, threshold)
    width = arr.shape[1]
    return raster_to_points(mask, pitch if pitch else 1.0 / width)


def cmd_dist(args) -> int:
    S = read_ifs(args.file_a)
    T = read_ifs(args.file_b)
    C = cost_matrix(S, T)
    sigma, value = optimal_matching(C)
    print(f"D = {format_value(value)}, sigma = {sigma.describe()}")
    print("cost matrix:")
    for row in C:
        print("  " + "  ".join(repr(float(v)) for v in row))
    return 0


def cmd_attractor(args) -> int:
    system = read_ifs(args.file)
    resolution = args.delta or default_resolution(system.dim)
    render = attractor_points(system, args.depth, resolution=resolution)
    outputs = []
    if args.out:
        write_points_csv(args.out, render)
        outputs.append(args.out)
        print(f"wrote {len(render)} points to {args.out}")
    else:
        print(f"rendered {len(render)} points at depth {args.depth}, delta {resolution}")
    if args.image:
        mask = render_raster(render, system.domain, args.px)
        write_pgm(args.image, mask)
        outputs.append(args.image)
        print(f"wrote raster {mask.shape[1]}x{mask.shape[0]} to {args.image}")
    if outputs:
        manifest = str(outputs[0]) + ".manifest.json"
        write_manifest(
            manifest,
            "attractor",
            {"depth": args.depth, "delta": resolution, "px": args.px},
            [args.file],
            outputs,
        )
    return 0


def cmd_analyze(args) -> int:
    seq = read_sequence(args.seqfile)
    aligned = align_chain(seq)
    print(f"terms: {len(aligned)}, arity: {aligned.n}, dim: {aligned.domain.dim}")
    print("alignment:", " ".join(p.describe() for p in aligned.alignment))
    dist = pairwise_distances(aligned)
    consecutive = [dist[j, j + 1] for j in range(len(aligned) - 1)]
    if consecutive:
        print("consecutive D:", " ".join(f"{v:.6g}" for v in consecutive))
    if 2 <= len(aligned) <= 12 and not is_mo_set(aligned.terms):
        print("note: minimal ordering is not transitive over these terms")
    try:
        report = limit_candidate(aligned, args.eps)
    except PreconditionError as exc:
        print(f"limit extraction failed: {exc}")
        print(f"cauchy index at eps={args.eps}: {cauchy_index(aligned, args.eps)}")
        raise
    print(f"decreasing: {report.decreasing}")
    print(f"eventually decreasing at: {report.eventually_decreasing_at}")
    print(f"cauchy at eps={args.eps}: {report.cauchy_at}")
    print(f"residual: {format_value(report.residual)}")
    if args.limit_out and report.limit is not None:
        write_ifs(args.limit_out, report.limit)
        print(f"limit candidate written to {args.limit_out}")
    return 0


def cmd_collage_fit(args) -> int:
    target = _load_frame(args.image, args.delta, args.threshold)
    cfg = FitConfig(
        n=args.n,
        restarts=args.restarts,
        max_iters=args.iters,
        s_max=args.s_max,
        seed=args.seed if args.seed is not None else default_seed(),
    )
    result = fit_ifs(target, cfg, domain=_parse_domain(args.domain_lo, args.domain_hi))
    bound = collage_bound(result.distance, result.ifs.contractivity)
    write_ifs(args.out, result.ifs)
    print(f"collage distance = {format_value(result.distance)}")
    print(f"contractivity    = {result.ifs.contractivity:.10f}")
    print(f"collage bound    = {format_value(bound)}")
    if result.baseline_fallback:
        print("warning: search never beat the constant-map baseline")
    print(f"spec written to {args.out}")
    write_manifest(
        str(args.out) + ".manifest.json",
        "collage-fit",
        {
            "n": args.n,
            "restarts": args.restarts,
            "iters": args.iters,
            "s_max": args.s_max,
            "seed": cfg.seed,
            "delta": args.delta,
            "threshold": args.threshold,
        },
        [args.image],
        [args.out],
    )
    return 0


def _frame_paths(directory) -> list:
    exts = {".pgm", ".pbm", ".csv"}
    paths = sorted(
        p for p in Path(directory).iterdir() if p.suffix.lower() in exts
    )
    if not paths:
        raise InputError(f"{directory}: no frame files (.pgm/.pbm/.csv) found")
    return paths


def cmd_predict(args) -> int:
    source = Path(args.frames)
    if source.is_dir():
        paths = _frame_paths(source)
        frames = [_load_frame(p, args.delta, args.threshold) for p in paths]
        if len(frames) < 2:
            raise PreconditionError("prediction needs at least 2 frames")
        cfg = FitConfig(
            n=args.n,
            restarts=args.restarts,
            max_iters=args.iters,
            s_max=args.s_max,
            seed=args.seed if args.seed is not None else default_seed(),
        )
        fit = fit_sequence(frames, cfg, domain=_parse_domain(args.domain_lo, args.domain_hi))
        sequence = fit.sequence
        print("per-frame collage distances:", " ".join(f"{v:.6g}" for v in fit.distances))
        inputs = paths
        fit_flags = {
            "n": args.n,
            "restarts": args.restarts,
            "iters": args.iters,
            "s_max": args.s_max,
            "seed": cfg.seed,
        }
    else:
        sequence = align_chain(read_sequence(source))
        if len(sequence) < 2:
            raise PreconditionError("prediction needs at least 2 terms")
        inputs = [source]
        fit_flags = {}
    model = ExtrapolationModel(MODEL_NAMES[args.model], horizon=args.horizon, s_max=args.s_max)
    predicted = extrapolate(sequence, model)
    out_spec = Path(args.out_prefix + ".ifs.json")
    write_ifs(out_spec, predicted)
    resolution = args.render_delta or default_resolution(predicted.dim)
    render = attractor_points(predicted, args.depth, resolution=resolution)
    out_csv = Path(args.out_prefix + ".points.csv")
    write_points_csv(out_csv, render)
    outputs = [out_spec, out_csv]
    if args.image:
        mask = render_raster(render, predicted.domain, args.px)
        write_pgm(args.image, mask)
        outputs.append(Path(args.image))
    print(f"extrapolated spec written to {out_spec}")
    print(f"attractor ({len(render)} points) written to {out_csv}")
    write_manifest(
        args.out_prefix + ".manifest.json",
        "predict",
        {
            **fit_flags,
            "model": args.model,
            "horizon": args.horizon,
            "depth": args.depth,
            "render_delta": resolution,
            "delta": args.delta,
            "threshold": args.threshold,
            "px": args.px,
        },
        inputs,
        outputs,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ifsseq",
        description="Metric-space toolkit for n-map iterated function systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="assignment metric D between two systems")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("attractor", help="render the attractor of a system")
    p.add_argument("file")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--delta", type=float, default=None, help="snap resolution")
    p.add_argument("--out", default=None, help="points CSV path")
    p.add_argument("--image", default=None, help="optional PGM raster path")
    p.add_argument("--px", type=int, default=512, help="raster width in pixels")
    p.set_defaults(func=cmd_attractor)

    p = sub.add_parser("analyze", help="alignment, monotonicity, Cauchy and limit report")
    p.add_argument("seqfile")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--limit-out", default=None, help="write the limit candidate spec here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("collage-fit", help="fit a system to an image or CSV point set")
    p.add_argument("image")
    p.add_argument("--n", type=int, required=True, help="number of maps")
    p.add_argument("--out", required=True, help="output spec path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--s-max", type=float, default=0.95, dest="s_max")
    p.add_argument("--delta", type=float, default=None, help="point pitch override")
    p.add_argument("--threshold", type=int, default=None, help="graymap foreground threshold")
    p.add_argument("--domain-lo", default=None, dest="domain_lo", help="declared box floor, comma-separated")
    p.add_argument("--domain-hi", default=None, dest="domain_hi", help="declared box ceiling, comma-separated")
    p.set_defaults(func=cmd_collage_fit)

    p = sub.add_parser("predict", help="fit frames, extrapolate, render the predicted attractor")
    p.add_argument("frames", help="directory of frames or a sequence spec file")
    p.add_argument("--model", choices=sorted(MODEL_NAMES), required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--s-max", type=float, default=0.95, dest="s_max")
    p.add_argument("--delta", type=float, default=None, help="frame point pitch override")
    p.add_argument("--threshold", type=int, default=None)
    p.add_argument("--domain-lo", default=None, dest="domain_lo", help="declared box floor, comma-separated")
    p.add_argument("--domain-hi", default=None, dest="domain_hi", help="declared box ceiling, comma-separated")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--render-delta", type=float, default=None, dest="render_delta")
    p.add_argument("--out-prefix", default="predicted", dest="out_prefix")
    p.add_argument("--image", default=None, help="optional PGM of the predicted attractor")
    p.add_argument("--px", type=int, default=512)
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
