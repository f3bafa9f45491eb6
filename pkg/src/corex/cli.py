"""Command-line front end: generate / identify / bench / diagnose.

Every subcommand writes a run.json echoing its resolved parameters before
any heavy computation starts, and all randomness flows from --seed
(default 0, never wall-clock), so reruns with identical flags are
byte-identical.

Exit codes: 0 success, 2 usage error, 3 data error, 4 convergence or
infeasibility error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .coreid import (identify_top_k, kmeans_split, select_rank_ecv,
                     threshold_config, threshold_er, write_partition_csv)
from .errors import (ConvergenceError, CorexError, DegenerateError, DomainError,
                     InfeasibleError, ParseError, RangeError, ValidationError)
from .evaluate import ALL_METHODS, eigengap_profile, roc, run_experiment
from .graph import (average_density, degrees, load_edge_list, sample_adjacency,
                    write_edge_list, write_truth_labels)
from .spectral import (config_scores, diagnostics, er_scores, truncated_eigs,
                       write_scores_csv)
from .synth import (PRESET_SIZES, GraphonSpec, SynthConfig, generate_instance,
                    graphon_by_number, graphon_core)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_SOLVER = 4

BENCH_PRESETS = {
    # name -> (graphon number, periphery type)
    "fig2-g1": (1, "er"),
    "fig2-g2": (2, "er"),
    "fig2-g3": (3, "er"),
    "fig3-g1": (1, "config"),
    "fig3-g2": (2, "config"),
    "fig3-g3": (3, "config"),
}
DEFAULT_RATIOS = (1.0, 2.0, 3.0)


def _write_json(path, payload) -> None:
    with open(path, "wt", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _write_run_record(out_dir, subcommand, params) -> None:
    _write_json(os.path.join(out_dir, "run.json"),
                {"subcommand": subcommand, "version": __version__,
                 "parameters": params})


def _ensure_out_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _parse_sizes(args) -> tuple[int, int]:
    if args.preset_sizes:
        return PRESET_SIZES[args.preset_sizes]
    if args.n_core is None or args.n_periphery is None:
        raise DomainError("give --preset-sizes or both --n-core and --n-periphery")
    return args.n_core, args.n_periphery


def cmd_generate(args) -> int:
    n_core, n_periphery = _parse_sizes(args)
    cfg = SynthConfig(n_core=n_core, n_periphery=n_periphery,
                      periphery=args.periphery, degree_ratio=args.ratio,
                      target_density=args.density, seed=args.seed)
    graphon = graphon_by_number(args.graphon)
    out_dir = _ensure_out_dir(args.out_dir)
    _write_run_record(out_dir, "generate", {
        "graphon": args.graphon, "n_core": n_core, "n_periphery": n_periphery,
        "periphery": args.periphery, "density": args.density,
        "ratio": args.ratio, "seed": args.seed, "threads": args.threads,
        "out_dir": args.out_dir,
    })
    instance = generate_instance(graphon, cfg)
    g = sample_adjacency(instance.p, instance.adjacency_seed)
    write_edge_list(g, os.path.join(out_dir, "edges.tsv"))
    write_truth_labels(os.path.join(out_dir, "truth.csv"), instance.truth)
    meta = dict(instance.meta)
    meta["sampled_edges"] = g.m
    meta["sampled_density"] = average_density(g) if g.n >= 2 else 0.0
    _write_json(os.path.join(out_dir, "meta.json"), meta)
    print(f"wrote edges.tsv ({g.m} edges), truth.csv, meta.json to {out_dir}")
    return EXIT_OK


def _parse_select(spec: str):
    if spec == "threshold" or spec == "kmeans":
        return spec, None
    if spec.startswith("topk:"):
        try:
            return "topk", int(spec.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"bad top-k count in {spec!r}") from None
    raise DomainError("--select must be topk:<N>, threshold, or kmeans")


def cmd_identify(args) -> int:
    if not os.path.exists(args.input):
        raise ValidationError(f"input file not found: {args.input}")
    select_method, topk = _parse_select(args.select)
    rank_auto = args.rank == "auto"
    if not rank_auto:
        try:
            rank_fixed = int(args.rank)
        except ValueError:
            raise DomainError("--rank must be an integer or 'auto'") from None
    out_dir = _ensure_out_dir(args.out_dir)
    _write_run_record(out_dir, "identify", {
        "input": args.input, "model": args.model, "rank": args.rank,
        "select": args.select, "eps": args.eps, "seed": args.seed,
        "threads": args.threads, "out_dir": args.out_dir,
    })
    g = load_edge_list(args.input)
    if g.n == 0 or g.m == 0:
        raise ValidationError("input graph has no edges; nothing to identify")
    info = {"model": args.model, "rank_requested": args.rank}
    if rank_auto:
        candidates = [r for r in range(1, 11) if r < g.n]
        selection = select_rank_ecv(g, candidates, seed=args.seed)
        rank_fixed = selection.chosen_r
        info["rank_selection"] = selection.to_json_dict()
    info["rank_used"] = rank_fixed
    dec = truncated_eigs(g, rank_fixed, seed=args.seed)
    if args.model == "er":
        scores = er_scores(dec)
    else:
        scores = config_scores(dec, degrees(g))
        if scores.excluded:
            print(f"warning: {len(scores.excluded)} zero-degree nodes "
                  f"pre-classified as periphery", file=sys.stderr)
        info["excluded_nodes"] = list(scores.excluded)
    p_hat = average_density(g)
    info["p_hat"] = p_hat
    if select_method == "topk":
        partition = identify_top_k(scores, topk)
    elif select_method == "threshold":
        if args.model == "er":
            partition = threshold_er(scores, p_hat, g.n, eps=args.eps)
        else:
            partition = threshold_config(scores, p_hat, g.n, eps=args.eps)
    else:
        partition = kmeans_split(scores)
    info["cutoff"] = partition.cutoff
    info["n_core"] = partition.n_core
    write_scores_csv(os.path.join(out_dir, "scores.csv"), scores)
    write_partition_csv(os.path.join(out_dir, "partition.csv"), partition, scores)
    _write_json(os.path.join(out_dir, "identify.json"), info)
    print(f"identified {partition.n_core} core nodes out of {g.n}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.preset:
        graphon_number, periphery = BENCH_PRESETS[args.preset]
    else:
        if args.graphon is None:
            raise DomainError("give --preset or --graphon")
        graphon_number, periphery = args.graphon, args.periphery
    n_core, n_periphery = _parse_sizes(args)
    ratios = tuple(float(x) for x in args.ratios.split(",")) if args.ratios \
        else DEFAULT_RATIOS
    methods = tuple(args.methods.split(",")) if args.methods else ALL_METHODS
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise DomainError(f"unknown methods: {sorted(unknown)}")
    out_dir = _ensure_out_dir(args.out_dir)
    _write_run_record(out_dir, "bench", {
        "preset": args.preset, "graphon": graphon_number, "periphery": periphery,
        "n_core": n_core, "n_periphery": n_periphery, "ratios": list(ratios),
        "methods": list(methods), "replicates": args.replicates,
        "rank": args.rank, "rank_mode": args.rank_mode, "density": args.density,
        "eps": args.eps, "seed": args.seed, "threads": args.threads,
        "out_dir": args.out_dir,
    })
    graphon = graphon_by_number(graphon_number)
    summary = {"settings": [], "methods": list(methods)}
    for ratio in ratios:
        cfg = SynthConfig(n_core=n_core, n_periphery=n_periphery,
                          periphery=periphery, degree_ratio=ratio,
                          target_density=args.density, seed=args.seed)
        result = run_experiment(graphon, cfg, methods=methods,
                                replicates=args.replicates,
                                rank_mode=args.rank_mode, rank=args.rank,
                                eps=args.eps, collect_scores=True)
        pooled_truth = np.concatenate(result.truth_vectors)
        ratio_tag = f"{ratio:g}".replace(".", "p")
        for method in methods:
            pooled = np.concatenate(result.score_vectors[method])
            curve = roc(pooled, pooled_truth)
            write_path = os.path.join(out_dir, f"roc_ratio{ratio_tag}_{method}.csv")
            with open(write_path, "wt", encoding="utf-8", newline="\n") as fh:
                fh.write("method,fpr,tpr\n")
                for fpr, tpr in curve.points:
                    fh.write(f"{method},{float(fpr)!r},{float(tpr)!r}\n")
        entry = result.summary_dict()
        entry["degree_ratio"] = ratio
        del entry["config"]
        summary["settings"].append({"config": result.config, **entry})
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    print(f"benchmarked {len(methods)} methods at {len(ratios)} ratios "
          f"({args.replicates} replicates each)")
    return EXIT_OK


def _rebuild_from_meta(meta_path):
    with open(meta_path, "rt", encoding="utf-8") as fh:
        meta = json.load(fh)
    required = {"graphon", "n_core", "n_periphery", "periphery",
                "target_density", "degree_ratio", "seed"}
    missing = required - set(meta)
    if missing:
        raise ValidationError(f"meta.json missing fields: {sorted(missing)}")
    cfg = SynthConfig(n_core=meta["n_core"], n_periphery=meta["n_periphery"],
                      periphery=meta["periphery"],
                      degree_ratio=meta["degree_ratio"],
                      target_density=meta["target_density"], seed=meta["seed"])
    graphon = GraphonSpec(kind=meta["graphon"])
    er_level = meta.get("er_level")
    instance = generate_instance(graphon, cfg, er_level=er_level)
    return instance, meta


def cmd_diagnose(args) -> int:
    if bool(args.truth_p) == bool(args.input):
        raise DomainError("give exactly one of --truth-p or --input")
    if args.input and args.sweep:
        raise DomainError("the eigengap sweep needs --truth-p (a known core model)")
    source = args.truth_p or args.input
    if not os.path.exists(source):
        raise ValidationError(f"input file not found: {source}")
    out_dir = _ensure_out_dir(args.out_dir)
    _write_run_record(out_dir, "diagnose", {
        "truth_p": args.truth_p, "input": args.input, "rank": args.rank,
        "sweep": args.sweep, "periphery_level": args.periphery_level,
        "seed": args.seed, "threads": args.threads, "out_dir": args.out_dir,
    })
    if args.truth_p:
        instance, meta = _rebuild_from_meta(args.truth_p)
        report = diagnostics(instance.p, args.rank, core_labels=instance.truth)
        _write_json(os.path.join(out_dir, "diagnostics.json"), report.to_json_dict())
        if args.sweep:
            sizes = [int(s) for s in args.sweep.split(",")]
            core = graphon_core(GraphonSpec(kind=meta["graphon"]),
                                meta["n_core"], meta["latents_seed"])
            records = eigengap_profile(core, sizes, args.periphery_level)
            sweep_path = os.path.join(out_dir, "eigengap_sweep.csv")
            with open(sweep_path, "wt", encoding="utf-8", newline="\n") as fh:
                fh.write("n_periphery,lambda_1,gap_3_4,normalized_gap\n")
                for rec in records:
                    fh.write(f"{rec['n_periphery']},{rec['lambda_1']!r},"
                             f"{rec['gap_3_4']!r},{rec['normalized_gap']!r}\n")
    else:
        g = load_edge_list(args.input)
        if g.n < 2:
            raise ValidationError("graph too small to diagnose")
        r = min(args.rank, g.n - 1)
        dec = truncated_eigs(g, r + 1 if r + 1 < g.n else r, seed=args.seed)
        eigenvalues = [float(v) for v in dec.eigenvalues]
        gap_r = (abs(eigenvalues[r - 1]) - abs(eigenvalues[r])
                 if len(eigenvalues) > r else None)
        _write_json(os.path.join(out_dir, "diagnostics.json"), {
            "p_star": None, "h_n": None, "h_prime_n": None,
            "p_hat": average_density(g),
            "eigenvalues": eigenvalues, "gap_r": gap_r,
        })
    print(f"wrote diagnostics.json to {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corex",
        description="Identify the informative core of a network whose "
                    "periphery follows an uninformative connection pattern.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0,
                       help="master random seed (default 0; never wall-clock)")
        p.add_argument("--out-dir", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker parallelism cap (results are identical "
                            "for any value)")

    p_gen = sub.add_parser("generate", help="emit a synthetic benchmark network")
    p_gen.add_argument("--graphon", type=int, choices=(1, 2, 3), required=True)
    p_gen.add_argument("--n-core", type=int)
    p_gen.add_argument("--n-periphery", type=int)
    p_gen.add_argument("--preset-sizes", choices=sorted(PRESET_SIZES))
    p_gen.add_argument("--periphery", choices=("er", "config"), default="er")
    p_gen.add_argument("--density", type=float, default=0.02)
    p_gen.add_argument("--ratio", type=float, default=3.0,
                       help="core/periphery mean expected-degree ratio")
    add_common(p_gen)
    p_gen.set_defaults(func=cmd_generate)

    p_id = sub.add_parser("identify", help="score a graph and extract its core")
    p_id.add_argument("--input", required=True, help="edge-list file")
    p_id.add_argument("--model", choices=("er", "config"), default="er")
    p_id.add_argument("--rank", default="auto",
                      help="approximating rank, or 'auto' for cross-validation")
    p_id.add_argument("--select", default="kmeans",
                      help="topk:<N> | threshold | kmeans")
    p_id.add_argument("--eps", type=float, default=0.01,
                      help="threshold exponent slack")
    add_common(p_id)
    p_id.set_defaults(func=cmd_identify)

    p_bench = sub.add_parser("bench", help="run the simulation benchmark")
    p_bench.add_argument("--preset", choices=sorted(BENCH_PRESETS))
    p_bench.add_argument("--graphon", type=int, choices=(1, 2, 3))
    p_bench.add_argument("--periphery", choices=("er", "config"), default="er")
    p_bench.add_argument("--n-core", type=int)
    p_bench.add_argument("--n-periphery", type=int)
    p_bench.add_argument("--preset-sizes", choices=sorted(PRESET_SIZES),
                         default="balanced")
    p_bench.add_argument("--ratios", help="comma list, default 1,2,3")
    p_bench.add_argument("--methods", help=f"comma list from {','.join(ALL_METHODS)}")
    p_bench.add_argument("--replicates", type=int, default=20)
    p_bench.add_argument("--rank", type=int, default=6)
    p_bench.add_argument("--rank-mode", choices=("fixed", "ecv"), default="fixed")
    p_bench.add_argument("--density", type=float, default=0.02)
    p_bench.add_argument("--eps", type=float, default=0.01,
                         help="threshold exponent slack")
    add_common(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_diag = sub.add_parser("diagnose", help="signal-strength diagnostics")
    p_diag.add_argument("--truth-p", help="meta.json of a generated instance")
    p_diag.add_argument("--input", help="edge-list file for empirical spectra")
    p_diag.add_argument("--rank", type=int, default=6)
    p_diag.add_argument("--sweep",
                        help="comma list of periphery sizes for the eigengap sweep")
    p_diag.add_argument("--periphery-level", type=float, default=0.02)
    add_common(p_diag)
    p_diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, RangeError, DomainError,
            DegenerateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, InfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except CorexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
