"""Command-line interface.

Subcommands: parse, prove, filter-folio, sample-proofwriter, run,
report.  Data goes to stdout or the --out file; diagnostics go to
stderr.  Exit status: 0 success, 1 user error, 2 internal error.
Every file-producing subcommand writes a .manifest.json sidecar
recording the command, config, tool version, and input digests.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time

from . import __version__
from .datasets import (
    balanced_sample, load_folio, load_problems, load_proofwriter,
    save_problems, validate_folio,
)
from .generation import (
    GenConfig, HttpClient, MODES, ReplayClient, StubClient,
    max_tokens_for_source,
)
from .metrics import (
    evaluate, k_sweep, final_votes, mcnemar, run_from_predictions, similarity,
)
from .pipeline import load_predictions, run_dataset
from .prover import ProofLimits, decide
from .syntax import (
    FolSyntaxError, check_signature, close_universally, ensure_closed, parse,
)


class UserError(Exception):
    pass


# ---------------------------------------------------------------------------
# manifests

def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_path: str, command: str, config: dict,
                   input_paths) -> None:
    manifest = {
        "command": command,
        "config": config,
        "tool_version": __version__,
        "input_digests": {p: _sha256(p) for p in input_paths},
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _limits_from_args(args, default_seconds: float = 10.0) -> ProofLimits:
    return ProofLimits(
        max_seconds=getattr(args, "max_seconds", None) or default_seconds,
        max_clauses=getattr(args, "max_clauses", None) or 100_000,
        max_clause_weight=getattr(args, "max_clause_weight", None) or 64,
    )


# ---------------------------------------------------------------------------
# subcommands

def _cmd_parse(args) -> int:
    from .syntax import format_formula
    print(format_formula(parse(args.expression)))
    return 0


def _read_formula_lines(path: str) -> list[str]:
    try:
        with open(path, encoding="utf-8") as fh:
            return [l.strip() for l in fh if l.strip() and not l.lstrip().startswith("#")]
    except OSError as exc:
        raise UserError(f"cannot read {path}: {exc}") from exc


def _cmd_prove(args) -> int:
    premises = [parse(s) for s in _read_formula_lines(args.premises)]
    conclusion = parse(args.conclusion)
    if args.lenient:
        premises = [close_universally(f) for f in premises]
        conclusion = close_universally(conclusion)
    else:
        for f in premises + [conclusion]:
            ensure_closed(f)
    check_signature(premises + [conclusion])
    verdict = decide(premises, conclusion, _limits_from_args(args))
    if verdict.premises_inconsistent:
        print("note: premises are inconsistent", file=sys.stderr)
    if verdict.resource_limited:
        print("note: verdict limited by prover resources", file=sys.stderr)
    print(verdict.label)
    return 0


def _cmd_filter_folio(args) -> int:
    records = load_folio(args.in_path)
    limits = _limits_from_args(args, default_seconds=60.0)
    kept, report = validate_folio(records, limits)
    save_problems(kept, args.out)
    by_reason: dict = {}
    for reason in report.reasons.values():
        by_reason[reason] = by_reason.get(reason, 0) + 1
    report_doc = {
        "input_records": len(records),
        "kept": len(kept),
        "removed": len(report.removed_ids),
        "removed_ids": report.removed_ids,
        "reasons": report.reasons,
        "by_reason": dict(sorted(by_reason.items())),
    }
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(report_doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    config = {"max_seconds": limits.max_seconds}
    write_manifest(args.out, "filter-folio", config, [args.in_path])
    write_manifest(args.report, "filter-folio", config, [args.in_path])
    print(f"kept {len(kept)} of {len(records)} records", file=sys.stderr)
    return 0


def _cmd_sample_proofwriter(args) -> int:
    records = load_proofwriter(args.in_path)
    sample = balanced_sample(records, per_cell=args.per_cell, seed=args.seed)
    save_problems(sample, args.out)
    write_manifest(args.out, "sample-proofwriter",
                   {"per_cell": args.per_cell, "seed": args.seed},
                   [])
    print(f"sampled {len(sample)} of {len(records)} records", file=sys.stderr)
    return 0


def _make_client(args):
    if args.client == "http":
        return HttpClient(base_url=args.base_url, model=args.model)
    if args.client == "replay":
        if not args.fixture:
            raise UserError("--client replay requires --fixture FILE")
        return ReplayClient(args.fixture)
    if args.client == "stub":
        completions = args.stub_completion or ["Uncertain\n"]
        return StubClient(completions)
    raise UserError(f"unknown client {args.client!r}")


def _cmd_run(args) -> int:
    problems = load_problems(args.dataset)
    if not problems:
        raise UserError(f"{args.dataset} has no problems")
    max_tokens = args.max_tokens or max_tokens_for_source(problems[0].source)
    cfg = GenConfig(
        temperature=args.temperature,
        n_samples=args.k,
        max_tokens=max_tokens,
        k_shot=args.k_shot,
    )
    limits = _limits_from_args(args)
    client = _make_client(args)
    predictions = run_dataset(
        client, args.mode, cfg, limits, problems,
        out_path=args.out, parallelism=args.parallelism,
        lenient=args.lenient,
    )
    config = {
        "mode": args.mode,
        "k": args.k,
        "k_shot": args.k_shot,
        "seed": args.seed,
        "temperature": args.temperature,
        "max_tokens": max_tokens,
        "limits": dataclasses.asdict(limits),
        "client": args.client,
        "model": args.model,
        "lenient": args.lenient,
    }
    inputs = [args.dataset] + ([args.fixture] if args.fixture else [])
    write_manifest(args.out, "run", config, inputs)
    failed = len(problems) - len(predictions)
    msg = f"{len(predictions)} predictions written to {args.out}"
    if failed:
        msg += f" ({failed} problems failed; rerun to retry)"
    print(msg, file=sys.stderr)
    return 0


def _report_doc(args) -> dict:
    predictions = load_predictions(args.predictions)
    if not predictions:
        raise UserError(f"{args.predictions} has no predictions")
    run = run_from_predictions(predictions)
    report = evaluate(run, k=args.k, iterations=args.bootstrap, seed=args.seed)
    doc = {
        "mode": run.mode,
        "n_problems": len(run.gold),
        "k": args.k,
        "bootstrap_iterations": args.bootstrap,
        "seed": args.seed,
        "mean_accuracy": report.mean_accuracy,
        "std_accuracy": report.std_accuracy,
        "confusion": report.confusion,
        "tf_precision": report.tf_precision,
        "tf_recall": report.tf_recall,
        "per_depth": (
            {str(d): list(ms) for d, ms in report.per_depth.items()}
            if report.per_depth is not None else None),
    }
    if args.k_sweep or args.plot_dir:
        sweep = k_sweep(run, iterations=args.bootstrap, seed=args.seed)
        doc["k_sweep"] = {str(k): list(ms) for k, ms in sweep.items()}
    if args.compare:
        other = load_predictions(args.compare)
        by_id = {p.problem_id: p for p in other}
        missing = [p.problem_id for p in predictions if p.problem_id not in by_id]
        if missing:
            raise UserError(
                f"--compare file lacks {len(missing)} problems, e.g. {missing[0]!r}")
        other_aligned = [by_id[p.problem_id] for p in predictions]
        run_b = run_from_predictions(other_aligned)
        preds_a = final_votes(run)
        preds_b = final_votes(run_b)
        a_correct = [p == g for p, g in zip(preds_a, run.gold)]
        b_correct = [p == g for p, g in zip(preds_b, run.gold)]
        try:
            sim = similarity(preds_a, preds_b, run.gold)
        except ValueError:
            sim = None
        doc["compare"] = {
            "predictions": args.compare,
            "mode": run_b.mode,
            "similarity": sim,
            "mcnemar_p": mcnemar(a_correct, b_correct),
            "mcnemar_p_exact": mcnemar(a_correct, b_correct, exact=True),
        }
    return doc


def _write_plots(doc: dict, plot_dir: str) -> None:
    try:
        import matplotlib
    except ImportError as exc:
        raise UserError(
            "plotting needs matplotlib (pip install 'folinfer[plots]')") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from pathlib import Path

    outdir = Path(plot_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if doc.get("per_depth"):
        depths = sorted(doc["per_depth"], key=int)
        means = [doc["per_depth"][d][0] for d in depths]
        stds = [doc["per_depth"][d][1] for d in depths]
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.errorbar([int(d) for d in depths], means, yerr=stds, marker="o")
        ax.axhline(1 / 3, linestyle=":", linewidth=1)
        ax.set_xlabel("proof depth")
        ax.set_ylabel("accuracy")
        ax.set_ylim(0, 1.05)
        fig.tight_layout()
        fig.savefig(outdir / "depth_accuracy.svg", metadata={"Date": None})
        plt.close(fig)
    if doc.get("k_sweep"):
        ks = sorted(doc["k_sweep"], key=int)
        means = [doc["k_sweep"][k][0] for k in ks]
        stds = [doc["k_sweep"][k][1] for k in ks]
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.errorbar([int(k) for k in ks], means, yerr=stds, marker="o")
        ax.set_xlabel("K")
        ax.set_ylabel("accuracy")
        fig.tight_layout()
        fig.savefig(outdir / "k_sweep.svg", metadata={"Date": None})
        plt.close(fig)


def _cmd_report(args) -> int:
    doc = _report_doc(args)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    inputs = [args.predictions] + ([args.compare] if args.compare else [])
    write_manifest(args.out, "report",
                   {"k": args.k, "bootstrap": args.bootstrap, "seed": args.seed},
                   inputs)
    if args.plot_dir:
        _write_plots(doc, args.plot_dir)
    print(f"report written to {args.out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser and dispatch

def _add_limit_flags(sp, default_seconds: float) -> None:
    sp.add_argument("--max-seconds", type=float, default=default_seconds,
                    help=f"prover time budget per saturation (default {default_seconds})")
    sp.add_argument("--max-clauses", type=int, default=100_000,
                    help="prover clause budget (default 100000)")
    sp.add_argument("--max-clause-weight", type=int, default=64,
                    help="heaviest clause kept (default 64)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="folinfer",
        description="First-order logic entailment toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("parse", help="parse a formula and print its canonical form")
    sp.add_argument("expression")
    sp.set_defaults(func=_cmd_parse)

    sp = sub.add_parser("prove", help="decide entailment for a premise file and conclusion")
    sp.add_argument("--premises", required=True, help="file with one FOL formula per line")
    sp.add_argument("--conclusion", required=True, help="conclusion formula")
    sp.add_argument("--lenient", action="store_true",
                    help="universally close free variables instead of rejecting them")
    _add_limit_flags(sp, 10.0)
    sp.set_defaults(func=_cmd_prove)

    sp = sub.add_parser("filter-folio", help="drop records with unusable gold FOL")
    sp.add_argument("--in", dest="in_path", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--report", required=True)
    _add_limit_flags(sp, 60.0)
    sp.set_defaults(func=_cmd_filter_folio)

    sp = sub.add_parser("sample-proofwriter", help="draw the balanced depth/label sample")
    sp.add_argument("--in", dest="in_path", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--per-cell", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_sample_proofwriter)

    sp = sub.add_parser("run", help="evaluate a dataset end to end")
    sp.add_argument("--mode", choices=MODES, required=True)
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--client", choices=("http", "replay", "stub"), required=True)
    sp.add_argument("--k", type=int, default=10, help="samples per problem (default 10)")
    sp.add_argument("--k-shot", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--fixture", help="replay fixture JSONL (replay client)")
    sp.add_argument("--stub-completion", action="append",
                    help="scripted completion (stub client; repeatable)")
    sp.add_argument("--temperature", type=float, default=0.8)
    sp.add_argument("--max-tokens", type=int,
                    help="completion budget (default per dataset family)")
    sp.add_argument("--parallelism", type=int, default=1)
    sp.add_argument("--lenient", action="store_true",
                    help="universally close free variables in sampled FOL")
    sp.add_argument("--base-url", help="http client endpoint (or GENERATOR_BASE_URL)")
    sp.add_argument("--model", help="http client model name (or GENERATOR_MODEL)")
    _add_limit_flags(sp, 10.0)
    sp.set_defaults(func=_cmd_run)

    sp = sub.add_parser("report", help="score a prediction file")
    sp.add_argument("--predictions", required=True)
    sp.add_argument("--compare", help="second prediction file for sim/McNemar")
    sp.add_argument("--out", required=True)
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--bootstrap", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--k-sweep", action="store_true",
                    help="include bootstrap accuracy for K=1..10")
    sp.add_argument("--plot-dir", help="write SVG plots here")
    sp.set_defaults(func=_cmd_report)

    return parser


_DASH_VALUE_FLAGS = ("--conclusion", "--stub-completion")


def _fuse_dash_values(argv):
    # a negated formula like -P(A) is a valid value for these flags, but
    # argparse reads it as an option; join such values with '='
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok in _DASH_VALUE_FLAGS and i + 1 < len(argv)
                and argv[i + 1].startswith("-")):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_fuse_dash_values(list(argv)))
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FolSyntaxError as exc:
        for d in exc.diagnostics:
            print(f"error [{d.kind}]: {d.message}", file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
