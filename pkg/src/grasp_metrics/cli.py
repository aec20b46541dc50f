"""Command-line front end.

Subcommands: gen-synthetic, describe, precompute, ffid, mmd, loss, bench.
All output is machine-readable (JSON or CSV). Exit codes: 0 success,
1 usage/configuration error, 2 data validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import metrics as M
from .descriptors import DESCRIPTOR_NAMES, descriptor_lookup, normalize_descriptor_id
from .errors import (
    DescriptorMismatch,
    EmptyPopulation,
    NumericalError,
    UsageError,
    ValidationError,
)
from .poses import PosePopulation, load_poses, save_poses, synthesize_population

BENCH_METRICS = ("identity-FID", "geometric-FID", "spectral-FID", "denset-FID", "MMD")
BENCH_CSV_HEADER = "metric,phase,size,seconds"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


@dataclass(frozen=True)
class BenchRow:
    metric: str
    phase: str  # "precompute" | "evaluate"
    size: int
    seconds: float

    def csv(self) -> str:
        return f"{self.metric},{self.phase},{self.size},{self.seconds:.6f}"


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1, not 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("GRASP_METRICS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"GRASP_METRICS_THREADS must be an integer, got {env!r}")
    return 1


def _open_out(path: str):
    if path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def cmd_gen_synthetic(args) -> int:
    pop = synthesize_population(
        count=args.count,
        seed=args.seed,
        jitter_sigma=args.jitter_sigma,
        translate_range=args.translate_range,
        rotate=args.rotate,
    )
    save_poses(pop, args.out)
    print(json.dumps({"written": len(pop), "path": args.out}))
    return EXIT_OK


def cmd_describe(args) -> int:
    describe = descriptor_lookup(args.descriptor)
    pop = load_poses(getattr(args, "in"))
    out = _open_out(args.out)
    try:
        for i, pose in enumerate(pop):
            vec = describe(pose)
            line = {
                "id": pose.id if pose.id is not None else str(i),
                "descriptor": vec.descriptor_id,
                "values": [float(x) for x in vec.values],
            }
            out.write(json.dumps(line))
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_precompute(args) -> int:
    key = normalize_descriptor_id(args.descriptor)
    pop = load_poses(getattr(args, "in"))
    threads = _resolve_threads(args.threads)
    t0 = time.perf_counter()
    stats = M.population_stats(pop, key, threads=threads)
    elapsed = time.perf_counter() - t0
    M.save_stats(stats, args.out)
    print(
        json.dumps(
            {
                "descriptor": key,
                "count": stats.count,
                "dim": stats.dim,
                "precompute_seconds": elapsed,
                "path": args.out,
            }
        )
    )
    return EXIT_OK


def cmd_ffid(args) -> int:
    key = normalize_descriptor_id(args.descriptor)
    threads = _resolve_threads(args.threads)
    t0 = time.perf_counter()
    if M.is_stats_file(args.ref):
        ref_stats = M.load_stats(args.ref)
        if ref_stats.descriptor_id != key:
            raise DescriptorMismatch(
                f"stats cache {args.ref} was built with "
                f"{ref_stats.descriptor_id!r}, not {key!r}"
            )
    else:
        ref_stats = M.population_stats(load_poses(args.ref), key, threads=threads)
    t1 = time.perf_counter()
    gen_stats = M.population_stats(load_poses(args.gen), key, threads=threads)
    scored = M.ffid(ref_stats, gen_stats)
    t2 = time.perf_counter()
    report = M.MetricReport(
        metric_name="ffid",
        descriptor_id=key,
        score=scored.score,
        n_ref=ref_stats.count,
        n_gen=gen_stats.count,
        wall_time_seconds=t2 - t0,
        precompute_seconds=t1 - t0,
        evaluate_seconds=t2 - t1,
    )
    print(report.to_json())
    return EXIT_OK


def cmd_mmd(args) -> int:
    pop1 = load_poses(args.in1)
    pop2 = load_poses(args.in2)
    report = M.mmd(
        pop1, pop2, descriptor_id=args.descriptor, threads=_resolve_threads(args.threads)
    )
    print(report.to_json())
    return EXIT_OK


def cmd_loss(args) -> int:
    key = normalize_descriptor_id(args.descriptor)
    if args.grad and key == "spectral":
        raise UsageError("--grad is not available for the spectral descriptor")
    gt_pop = load_poses(args.gt)
    pred_pop = load_poses(args.pred)
    if len(gt_pop) != len(pred_pop):
        raise ValidationError(
            f"pose files differ in length: {len(gt_pop)} vs {len(pred_pop)}"
        )
    if len(gt_pop) == 0:
        raise EmptyPopulation("loss needs at least one pose pair")
    losses = [M.pose_loss(g, p, key) for g, p in zip(gt_pop, pred_pop)]
    result = {
        "descriptor": key,
        "count": len(losses),
        "losses": losses,
        "mean_loss": float(np.mean(losses)),
    }
    if args.grad:
        result["gradients"] = [
            [float(x) for x in M.pose_loss_gradient(g, p, key)]
            for g, p in zip(gt_pop, pred_pop)
        ]
    print(json.dumps(result))
    return EXIT_OK


def _bench_populations(sizes: list[int], eval_size: int, seed: int):
    refs = {
        size: synthesize_population(
            size, seed + k, jitter_sigma=0.02, translate_range=0.05, rotate=True
        )
        for k, size in enumerate(sizes)
    }
    gen = synthesize_population(
        eval_size, seed + 1000, jitter_sigma=0.03, translate_range=0.05, rotate=True
    )
    return refs, gen


def _warmup(pop: PosePopulation) -> None:
    """Exercise every timed code path once so first-call costs stay out of rows."""
    for name in DESCRIPTOR_NAMES:
        M.population_stats(pop, name)
    vecs = M.descriptor_matrix(pop, "identity")
    M.pairwise_distance_mean(vecs, vecs)


def run_bench(
    sizes: list[int], eval_size: int, seed: int, threads: int = 1
) -> list[BenchRow]:
    """Time precompute and evaluation for every metric at every size.

    Reference populations are synthesized per size from deterministic
    seeds; the evaluation phase scores a fresh generated population
    against the largest precomputed reference.
    """
    if len(sizes) < 2:
        raise UsageError("bench needs at least two sizes to compare scaling")
    if any(s < 1 for s in sizes) or eval_size < 1:
        raise UsageError("bench sizes must be positive")
    sizes = sorted(sizes)
    refs, gen = _bench_populations(sizes, eval_size, seed)
    _warmup(synthesize_population(32, seed + 2000, jitter_sigma=0.02))

    rows: list[BenchRow] = []
    largest = sizes[-1]
    for metric in BENCH_METRICS:
        if metric.endswith("-FID"):
            descriptor = metric[: -len("-FID")].lower()
            ref_stats = None
            for size in sizes:
                t0 = time.perf_counter()
                stats = M.population_stats(refs[size], descriptor, threads=threads)
                rows.append(
                    BenchRow(metric, "precompute", size, time.perf_counter() - t0)
                )
                if size == largest:
                    ref_stats = stats
            t0 = time.perf_counter()
            gen_stats = M.population_stats(gen, descriptor, threads=threads)
            M.ffid(ref_stats, gen_stats)
            rows.append(BenchRow(metric, "evaluate", eval_size, time.perf_counter() - t0))
        else:  # MMD on raw coordinates
            ref_vecs = None
            within_ref = 0.0
            for size in sizes:
                t0 = time.perf_counter()
                vecs = M.descriptor_matrix(refs[size], "identity", threads=threads)
                within = M.pairwise_distance_mean(vecs, vecs)
                rows.append(
                    BenchRow(metric, "precompute", size, time.perf_counter() - t0)
                )
                if size == largest:
                    ref_vecs, within_ref = vecs, within
            t0 = time.perf_counter()
            gen_vecs = M.descriptor_matrix(gen, "identity", threads=threads)
            cross = M.pairwise_distance_mean(ref_vecs, gen_vecs)
            within_gen = M.pairwise_distance_mean(gen_vecs, gen_vecs)
            _ = 2.0 * cross - within_ref - within_gen
            rows.append(BenchRow(metric, "evaluate", eval_size, time.perf_counter() - t0))
    return rows


def cmd_bench(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--sizes must be a comma list of integers, got {args.sizes!r}")
    rows = run_bench(
        sizes, args.eval_size, args.seed, threads=_resolve_threads(args.threads)
    )
    out = _open_out(args.out)
    try:
        out.write(BENCH_CSV_HEADER + "\n")
        for row in rows:
            out.write(row.csv() + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _add_threads(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--threads",
        type=int,
        default=None,
        help="descriptor-mapping threads (default: $GRASP_METRICS_THREADS or 1)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grasp-metrics", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="write a seeded synthetic pose file")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter-sigma", type=float, default=0.0)
    p.add_argument("--translate-range", type=float, default=0.0)
    p.add_argument("--rotate", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen_synthetic)

    p = sub.add_parser("describe", help="map poses through a descriptor to JSONL")
    p.add_argument("--descriptor", required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_describe)

    p = sub.add_parser("precompute", help="fit and cache population statistics")
    p.add_argument("--descriptor", required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    _add_threads(p)
    p.set_defaults(handler=cmd_precompute)

    p = sub.add_parser("ffid", help="Frechet descriptor distance between populations")
    p.add_argument("--ref", required=True, help="pose file or stats cache")
    p.add_argument("--gen", required=True, help="pose file")
    p.add_argument("--descriptor", required=True)
    _add_threads(p)
    p.set_defaults(handler=cmd_ffid)

    p = sub.add_parser("mmd", help="energy-form MMD between two pose files")
    p.add_argument("--in1", required=True)
    p.add_argument("--in2", required=True)
    p.add_argument("--descriptor", default="identity")
    _add_threads(p)
    p.set_defaults(handler=cmd_mmd)

    p = sub.add_parser("loss", help="descriptor reconstruction loss per pose pair")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--descriptor", required=True)
    p.add_argument("--grad", action="store_true", help="also emit gradients")
    p.set_defaults(handler=cmd_loss)

    p = sub.add_parser("bench", help="timing harness, emits CSV")
    p.add_argument("--sizes", default="2000,20000", help="comma list of reference sizes")
    p.add_argument("--eval-size", type=int, default=360)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    _add_threads(p)
    p.set_defaults(handler=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
