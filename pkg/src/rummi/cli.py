"""Command-line entry point.

Exit codes: 0 ok, 1 domain failure (an invalid set), 2 unreadable input or
bad flags, 3 detections and confidences do not match up.
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import io as rio
from .clustering import ClusterConfig, cluster_tiles
from .core import ConfidenceMatrix, N_COLORS, N_NUMBERS
from .corrector import correct_set
from .evaluation import (
    DEFAULT_CONCENTRATION,
    DEFAULT_GRID,
    GenParams,
    SweepConfig,
    UnsatisfiableParams,
    dominance_summary,
    sweep,
)
from .rules import is_valid_set

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_XREF = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_PARSE)


def _range(text: str) -> tuple:
    lo, sep, hi = text.partition("-")
    try:
        return (int(lo), int(hi if sep else lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO-HI, got {text!r}") from None


def _grid(text: str) -> tuple:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if not values or any(not 0 <= v <= 1 for v in values):
        raise argparse.ArgumentTypeError("grid values must lie in [0, 1]")
    return values


def _cluster_cfg(args) -> ClusterConfig:
    return ClusterConfig(gap_factor=args.gap_factor, angle_tol=math.radians(args.angle_tol))


def _add_cluster_flags(p):
    p.add_argument("--gap-factor", type=float, default=ClusterConfig().gap_factor,
                   help="max center distance between neighbours, in tile widths")
    p.add_argument("--angle-tol", type=float, default=math.degrees(ClusterConfig().angle_tol),
                   help="max misalignment between neighbours, degrees")


def _emit(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_validate(args) -> int:
    try:
        sets = rio.parse_sets(rio.load_json(args.ids_file))
    except rio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    status = EXIT_OK
    for s, tiles in enumerate(sets):
        kind = is_valid_set(tiles)
        print(f"set {s}: {kind if kind else 'invalid'}  [{' '.join(map(str, tiles))}]")
        if kind is None:
            status = EXIT_INVALID
    return status


def cmd_cluster(args) -> int:
    try:
        detections = rio.load_detections(args.detections)
    except rio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    cfg = _cluster_cfg(args)
    doc = {"schema_version": rio.SCHEMA_VERSION, "images": []}
    for img in detections.images:
        clusters = cluster_tiles(img.detection_boxes(), cfg)
        doc["images"].append({
            "image_id": img.image_id,
            "clusters": [
                {"members": list(c.members), "axis": list(c.axis), "spacing": c.spacing}
                for c in clusters
            ],
        })
    _emit(rio.dump_json(doc), args.out)
    return EXIT_OK


def cmd_correct(args) -> int:
    try:
        detections = rio.load_detections(args.detections)
        confidences = rio.load_confidences(args.confidences)
    except rio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        pairs = rio.cross_reference(detections, confidences)
    except rio.CrossReferenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_XREF

    cfg = _cluster_cfg(args)
    doc = {"schema_version": rio.SCHEMA_VERSION, "images": []}
    n_sets = n_changed = n_uncorrectable = 0
    for det, conf in pairs:
        entries = []
        for cluster in cluster_tiles(det.detection_boxes(), cfg):
            members = list(cluster.members)
            if not 3 <= len(members) <= N_NUMBERS:
                n_uncorrectable += 1
                entries.append({
                    "members": members,
                    "status": "uncorrectable",
                    "reason": f"cluster of {len(members)} tiles cannot form a set",
                })
                continue
            m = conf.matrix(members)
            start = time.perf_counter()
            result = correct_set(m)
            elapsed = time.perf_counter() - start
            n_sets += 1
            n_changed += result.identities != result.raw_argmax
            entries.append({
                "members": members,
                "status": "corrected",
                "kind": str(result.assignment.kind),
                "identities": [str(t) for t in result.identities],
                "score": result.assignment.score,
                "raw_argmax": [str(t) for t in result.raw_argmax],
                "raw_valid": result.raw_valid,
                "score_gap": result.score_gap,
                "wall_time_s": elapsed,
            })
        doc["images"].append({"image_id": det.image_id, "sets": entries})
    _emit(rio.dump_json(doc), args.out)
    print(f"{len(pairs)} image(s), {n_sets} set(s) corrected, {n_changed} changed by correction, "
          f"{n_uncorrectable} uncorrectable cluster(s)", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    gen = GenParams(n_sets=args.sets, set_size=args.sizes, joker_prob=args.joker_prob)
    try:
        gen.check()
    except UnsatisfiableParams as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.seeds < 2:
        print("error: --seeds must be at least 2", file=sys.stderr)
        return EXIT_PARSE
    cfg = SweepConfig(
        grid=args.grid,
        n_seeds=args.seeds,
        n_images=args.images,
        master_seed=args.master_seed,
        concentration=args.concentration,
        gen=gen,
        cluster=_cluster_cfg(args),
    )
    report = sweep(cfg)
    _emit(report.to_csv(), args.out)
    if args.jsonl:
        Path(args.jsonl).write_text(report.to_jsonl(), encoding="utf-8")
    summary = sys.stderr if args.out in (None, "-") else sys.stdout
    print("\n".join(dominance_summary(report)), file=summary)
    return EXIT_OK


def bench_latencies(n: int, tiles: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    times = []
    for _ in range(n):
        m = ConfidenceMatrix(rng.random((tiles, N_COLORS)), rng.random((tiles, N_NUMBERS)),
                             rng.random(tiles))
        start = time.perf_counter()
        correct_set(m)
        times.append(time.perf_counter() - start)
    return times


def cmd_bench(args) -> int:
    if not 3 <= args.tiles <= N_NUMBERS:
        print(f"error: --tiles must be in 3..{N_NUMBERS}", file=sys.stderr)
        return EXIT_PARSE
    times = bench_latencies(args.n, args.tiles, args.master_seed)
    median = statistics.median(times)
    p99 = float(np.percentile(times, 99))
    print(json.dumps({"tiles": args.tiles, "n": args.n, "median_s": median, "p99_s": p99}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rummi", description="Rummikub set clustering and confidence correction.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check that each listed set is a valid group or run")
    p.add_argument("ids_file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("cluster", help="group detection boxes into ordered sets")
    p.add_argument("detections")
    p.add_argument("--out", default="-")
    _add_cluster_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("correct", help="cluster detections and correct each set's labels")
    p.add_argument("detections")
    p.add_argument("confidences")
    p.add_argument("--out", default="-")
    _add_cluster_flags(p)
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("simulate", help="accuracy sweep over simulated classifier quality")
    p.add_argument("--grid", type=_grid, default=DEFAULT_GRID, help="comma-separated quality levels")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--images", type=int, default=20, help="images per seed")
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--concentration", type=float, default=DEFAULT_CONCENTRATION)
    p.add_argument("--sets", type=_range, default=GenParams().n_sets, help="sets per image, LO-HI")
    p.add_argument("--sizes", type=_range, default=GenParams().set_size, help="tiles per set, LO-HI")
    p.add_argument("--joker-prob", type=float, default=GenParams().joker_prob)
    p.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    p.add_argument("--jsonl", help="also write per-seed counts as JSON lines")
    _add_cluster_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="time correct_set on random sets")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--tiles", type=int, default=13)
    p.add_argument("--master-seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
