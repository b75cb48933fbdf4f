"""Command-line entry point.

Subcommands:
  simulate    sample a dataset from a distribution and write it as CSV
  search      rank all r-element factor subsets by cross-validated error
  clt-verify  Monte Carlo check of the limit law of the error estimate
  oracle      print exact quantities for a known distribution

Exit codes: 0 success, 1 usage/input error, 2 numerical or degeneracy
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .dataio import ingest_csv, write_dataset_csv
from .errors import MdrError, ValidationError
from .estimator import EpsilonSchedule
from .mcverify import text_histogram, verify_clt
from .model import (
    FactorSubset,
    JointDistribution,
    label_marginal,
    load_distribution,
    sample,
)
from .oracle import (
    asymptotic_covariance,
    asymptotic_variance,
    balanced_penalty,
    high_risk_set,
    is_significant,
    optimal_predictor,
    prediction_error,
)
from .scenarios import PRESETS, generate_scenario
from .search import rank_subsets


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; the contract here is 1.
    def error(self, message):
        raise _UsageError(message)


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated run parameters shared by the data-driven subcommands."""

    n_records: int
    n_folds: int
    schedule: EpsilonSchedule
    master_seed: int
    n_replications: int = 1
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n_records < 1:
            raise ValidationError("--N must be >= 1")
        if self.n_folds < 2:
            raise ValidationError("--K must be >= 2")
        if self.n_replications < 1:
            raise ValidationError("--M must be >= 1")
        if self.workers < 1:
            raise ValidationError("--workers must be >= 1")


def _add_source_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dist", help="distribution JSON file")
    p.add_argument("--preset", choices=PRESETS, help="named scenario generator")
    p.add_argument("--n", type=int, help="factor count (with --preset)")
    p.add_argument("--q", type=int, help="max factor level (with --preset)")
    p.add_argument("--p-pos", type=float, default=0.45, help="null preset P(Y=1)")
    p.add_argument("--p-low", type=float, default=0.2, help="low penetrance")
    p.add_argument("--p-high", type=float, default=0.8, help="high penetrance")
    p.add_argument("--effect", type=float, default=0.5,
                   help="independent preset per-factor effect")


def _add_schedule_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps-c0", type=float, default=1.0,
                   help="threshold inflation scale c0 (eps = c0 * N^-beta)")
    p.add_argument("--eps-beta", type=float, default=0.25,
                   help="threshold inflation exponent beta, in (0, 1/2)")


def _resolve_distribution(args) -> JointDistribution:
    if args.dist and args.preset:
        raise ValidationError("give either --dist or --preset, not both")
    if args.dist:
        return load_distribution(args.dist)
    if args.preset:
        if args.n is None or args.q is None:
            raise ValidationError("--preset requires --n and --q")
        return generate_scenario(
            args.preset, n=args.n, q=args.q,
            p_pos=args.p_pos, p_low=args.p_low, p_high=args.p_high,
            effect=args.effect,
        )
    raise ValidationError("provide a distribution via --dist FILE or --preset NAME")


def _parse_subsets(text: str) -> list[FactorSubset]:
    try:
        groups = [g for g in text.split(";") if g.strip()]
        return [
            FactorSubset(tuple(int(t) for t in g.split(","))) for g in groups
        ]
    except (ValueError, ValidationError) as exc:
        raise ValidationError(
            f"--subsets must look like '1,2' or '1,2;1,3': {exc}"
        ) from exc


def _write_json(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_simulate(args) -> int:
    dist = _resolve_distribution(args)
    dataset = sample(dist, args.N, args.seed)
    write_dataset_csv(dataset, args.out)
    print(f"wrote {len(dataset)} records to {args.out}")
    return 0


def _load_dataset(args):
    if args.data:
        return ingest_csv(args.data, q=args.q)
    dist = _resolve_distribution(args)
    if args.N is None:
        raise ValidationError("--N is required when sampling from a distribution")
    return sample(dist, args.N, args.seed)


def _cmd_search(args) -> int:
    schedule = EpsilonSchedule(args.eps_c0, args.eps_beta)
    dataset = _load_dataset(args)
    ScenarioConfig(len(dataset), args.K, schedule, args.seed)
    report = rank_subsets(dataset, args.r, args.K, schedule)
    print(f"ranked {len(report.entries)} subsets of size {report.r} "
          f"(N={len(dataset)}, K={args.K})")
    for subset, value in report.entries:
        marker = " <- selected" if subset == report.selected else ""
        print(f"  {{{','.join(map(str, subset.indices))}}}  "
              f"estimated error {value:.6f}{marker}")
    if args.out:
        _write_json(report.to_dict(), args.out)
        print(f"report written to {args.out}")
    return 0


def _cmd_clt_verify(args) -> int:
    schedule = EpsilonSchedule(args.eps_c0, args.eps_beta)
    config = ScenarioConfig(args.N, args.K, schedule, args.seed,
                            n_replications=args.M, workers=args.workers)
    dist = _resolve_distribution(args)
    subsets = _parse_subsets(args.subsets)
    for s in subsets:
        s.validate_for(dist.space)
    scenario = args.preset or args.dist or ""
    report, results = verify_clt(
        dist, subsets, config.n_records, config.n_folds,
        config.n_replications, config.master_seed,
        schedule=schedule, scenario=scenario, workers=config.workers,
    )
    for u in report.univariate:
        tag = "PASS" if u.passed else "FAIL"
        if u.degenerate:
            print(f"subset {u.subset}: degenerate (oracle variance 0) [{tag}]")
        else:
            print(
                f"subset {u.subset}: KS={u.ks_oracle:.4f} (limit {u.ks_limit:.4f}), "
                f"self-normalized KS={u.ks_self_norm:.4f} "
                f"(limit {u.self_norm_limit:.4f}), "
                f"var ratio={u.var_ratio:.3f} [{tag}]"
            )
    if report.multivariate is not None:
        mv = report.multivariate
        tag = "PASS" if mv.passed else "FAIL"
        if mv.whitening_skipped:
            whitened = "skipped (near-singular plug-in covariance)"
        else:
            whitened = ", ".join(f"{k:.4f}" for k in mv.whitened_ks)
        print(f"joint: max covariance discrepancy {mv.max_abs_discrepancy:.4f} "
              f"(limit {mv.entry_limit:.4f}), whitened KS {whitened} [{tag}]")
    if args.histogram:
        for i, u in enumerate(report.univariate):
            if u.degenerate or u.oracle_var <= 0:
                continue
            z = [res.z[i] / u.oracle_var**0.5 for res in results]
            print(f"standardized deviations, subset {u.subset}:")
            print(text_histogram(z))
    if args.out:
        _write_json(report.to_dict(), args.out)
        print(f"report written to {args.out}")
    return 0


def _cmd_oracle(args) -> int:
    dist = _resolve_distribution(args)
    psi = balanced_penalty(dist)
    full = FactorSubset(tuple(range(1, dist.space.n + 1)))
    subsets = _parse_subsets(args.subsets) if args.subsets else [full]
    for s in subsets:
        s.validate_for(dist.space)
    doc = {
        "n": dist.space.n,
        "q": dist.space.q,
        "label_marginal_pos": label_marginal(dist, 1),
        "penalty": {"neg": psi.psi_neg, "pos": psi.psi_pos},
        "threshold": psi.threshold,
        "high_risk_set": sorted(list(x) for x in high_risk_set(dist, psi)),
        "subsets": [],
    }
    for s in subsets:
        f = optimal_predictor(dist, psi, s)
        doc["subsets"].append({
            "indices": list(s.indices),
            "significant": is_significant(dist, s),
            "error": prediction_error(dist, psi, f),
            "asymptotic_variance": asymptotic_variance(dist, s),
        })
    if len(subsets) > 1:
        doc["asymptotic_covariance"] = asymptotic_covariance(dist, subsets).tolist()
    print(f"threshold: {doc['threshold']:.6f}   "
          f"P(Y=1): {doc['label_marginal_pos']:.6f}")
    for entry in doc["subsets"]:
        print(f"subset {entry['indices']}: error {entry['error']:.6f}, "
              f"variance {entry['asymptotic_variance']:.6f}, "
              f"significant={entry['significant']}")
    if args.out:
        _write_json(doc, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdrcv", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a dataset and write CSV")
    _add_source_flags(p)
    p.add_argument("--N", type=int, required=True, help="sample size")
    p.add_argument("--seed", type=int, required=True, help="sampler seed")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("search", help="rank factor subsets by estimated error")
    _add_source_flags(p)
    _add_schedule_flags(p)
    p.add_argument("--data", help="dataset CSV (alternative to sampling)")
    p.add_argument("--N", type=int, help="sample size when sampling")
    p.add_argument("--seed", type=int, default=0, help="sampler seed")
    p.add_argument("--r", type=int, required=True, help="subset size")
    p.add_argument("--K", type=int, default=5, help="fold count")
    p.add_argument("--out", help="write the report as JSON")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("clt-verify", help="Monte Carlo limit-law verification")
    _add_source_flags(p)
    _add_schedule_flags(p)
    p.add_argument("--subsets", required=True,
                   help="semicolon-separated subsets, e.g. '1,2;1,3'")
    p.add_argument("--N", type=int, required=True, help="sample size per replication")
    p.add_argument("--K", type=int, default=5, help="fold count")
    p.add_argument("--M", type=int, required=True, help="replication count")
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--workers", type=int, default=1, help="parallel workers")
    p.add_argument("--histogram", action="store_true",
                   help="print a text histogram of standardized deviations")
    p.add_argument("--out", help="write the report as JSON")
    p.set_defaults(func=_cmd_clt_verify)

    p = sub.add_parser("oracle", help="print exact quantities for a distribution")
    _add_source_flags(p)
    p.add_argument("--subsets", help="semicolon-separated subsets (default: all factors)")
    p.add_argument("--out", help="write the result as JSON")
    p.set_defaults(func=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except MdrError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
