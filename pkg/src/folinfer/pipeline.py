"""End-to-end orchestration: prompt, sample, label, vote, checkpoint.

A run over a dataset writes one JSON row per finished problem to an
append-only checkpoint, so an interrupted run resumes where it left
off.  Rows are written by the submitting thread in input order while
problems evaluate concurrently.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .generation import (
    DirectLabel, ExtractFailure, FolProgram, GenConfig, GenerationSample,
    build_prompt, default_bank, generate,
)
from .normalize import ClauseExplosionError
from .prover import ProofLimits, decide
from .syntax import (
    FolSyntaxError, check_signature, close_universally, ensure_closed, parse,
)
from .voting import VoteResult, majority_vote

log = logging.getLogger(__name__)


@dataclass
class Prediction:
    problem_id: str
    mode: str
    samples: list                 # GenerationSample, generation order
    per_sample_labels: list       # aligned with samples
    vote: VoteResult
    notes: list | None = None     # aligned failure notes, None when clean
    gold_label: str | None = None
    depth: int | None = None


def _label_fol_program(payload: FolProgram, limits: ProofLimits,
                       lenient: bool):
    try:
        formulas = [parse(s) for s in payload.premise_fols]
        conclusion = parse(payload.conclusion_fol)
    except FolSyntaxError as exc:
        return "Error", f"syntax: {exc}"
    if lenient:
        formulas = [close_universally(f) for f in formulas]
        conclusion = close_universally(conclusion)
    else:
        try:
            for f in formulas + [conclusion]:
                ensure_closed(f)
        except FolSyntaxError as exc:
            return "Error", f"free variables: {exc}"
    try:
        check_signature(formulas + [conclusion])
    except FolSyntaxError as exc:
        return "Error", f"signature: {exc}"
    try:
        verdict = decide(formulas, conclusion, limits)
    except ClauseExplosionError as exc:
        return "Error", f"prover: {exc}"
    return verdict.label, None


def label_sample(mode: str, payload, limits: ProofLimits | None = None,
                 lenient: bool = False) -> str:
    """Label one extracted payload.  Direct labels pass through; a FOL
    program is parsed, signature-checked, and decided; every failure
    along the way becomes Error.
    """
    label, _ = _label_sample_note(mode, payload, limits or ProofLimits(), lenient)
    return label


def _label_sample_note(mode: str, payload, limits: ProofLimits,
                       lenient: bool):
    if isinstance(payload, ExtractFailure):
        return "Error", f"extraction: {payload.reason}"
    if isinstance(payload, DirectLabel):
        return payload.label, None
    if isinstance(payload, FolProgram):
        return _label_fol_program(payload, limits, lenient)
    return "Error", f"unrecognized payload {type(payload).__name__}"


def run_problem(client, mode: str, cfg: GenConfig, limits: ProofLimits,
                problem, bank=None, lenient: bool = False) -> Prediction:
    """Evaluate one problem end to end: build the prompt, draw
    cfg.n_samples completions, label each, and vote.
    """
    prompt = build_prompt(mode, problem.premises_nl, problem.conclusion_nl,
                          bank=bank, k_shot=cfg.k_shot)
    samples = generate(client, prompt, cfg, mode=mode, problem_id=problem.id)
    labels = []
    notes = []
    for s in samples:
        label, note = _label_sample_note(mode, s.payload, limits, lenient)
        labels.append(label)
        notes.append(note)
    return Prediction(
        problem_id=problem.id,
        mode=mode,
        samples=samples,
        per_sample_labels=labels,
        vote=majority_vote(labels),
        notes=notes,
        gold_label=problem.gold_label,
        depth=problem.depth,
    )


# ---------------------------------------------------------------------------
# serialization

def prediction_to_row(p: Prediction) -> dict:
    row = {
        "problem_id": p.problem_id,
        "mode": p.mode,
        "samples": [
            {"index": s.index, "raw": s.raw, "label": lab, "note": note}
            for s, lab, note in zip(
                p.samples, p.per_sample_labels,
                p.notes or [None] * len(p.samples))
        ],
        "final": p.vote.final,
        "counts": dict(sorted(p.vote.counts.items())),
        "tie_broken": p.vote.tie_broken,
    }
    if p.gold_label is not None:
        row["gold_label"] = p.gold_label
    if p.depth is not None:
        row["depth"] = p.depth
    return row


def prediction_from_row(row: dict) -> Prediction:
    samples = [GenerationSample(index=s["index"], raw=s["raw"])
               for s in row["samples"]]
    labels = [s["label"] for s in row["samples"]]
    notes = [s.get("note") for s in row["samples"]]
    return Prediction(
        problem_id=row["problem_id"],
        mode=row["mode"],
        samples=samples,
        per_sample_labels=labels,
        vote=VoteResult(row["final"], dict(row["counts"]), row["tie_broken"]),
        notes=notes,
        gold_label=row.get("gold_label"),
        depth=row.get("depth"),
    )


def _load_checkpoint(path):
    done = {}
    if not path or not os.path.exists(path):
        return done
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            if "failure" in row:
                continue  # failed problems are retried on resume
            done[(row["problem_id"], row["mode"])] = prediction_from_row(row)
    return done


def run_dataset(client, mode: str, cfg: GenConfig, limits: ProofLimits,
                problems, out_path=None, parallelism: int = 1, bank=None,
                lenient: bool = False) -> list[Prediction]:
    """Evaluate problems in order with bounded concurrency.  When
    out_path is given, finished predictions append to it as JSONL and
    an interrupted run resumes from the rows already present.  A
    problem whose generation fails is recorded as a failure row and
    skipped; it does not abort the batch.
    """
    if bank is None:
        bank = default_bank()
    done = _load_checkpoint(out_path)
    todo = [p for p in problems if (p.id, mode) not in done]

    fresh: dict = {}
    if todo:
        out_fh = open(out_path, "a", encoding="utf-8") if out_path else None
        try:
            with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
                futures = [
                    pool.submit(run_problem, client, mode, cfg, limits, p,
                                bank, lenient)
                    for p in todo
                ]
                for p, fut in zip(todo, futures):
                    try:
                        pred = fut.result()
                    except Exception as exc:
                        log.warning("problem %s failed: %s", p.id, exc)
                        if out_fh:
                            out_fh.write(json.dumps(
                                {"problem_id": p.id, "mode": mode,
                                 "failure": f"{type(exc).__name__}: {exc}"},
                                sort_keys=True) + "\n")
                            out_fh.flush()
                        continue
                    fresh[(p.id, mode)] = pred
                    if out_fh:
                        out_fh.write(json.dumps(prediction_to_row(pred),
                                                sort_keys=True) + "\n")
                        out_fh.flush()
        finally:
            if out_fh:
                out_fh.close()

    results = []
    for p in problems:
        pred = done.get((p.id, mode)) or fresh.get((p.id, mode))
        if pred is not None:
            results.append(pred)
    return results


def load_predictions(path) -> list[Prediction]:
    """Read a prediction JSONL file, skipping failure rows."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            if "failure" in row:
                continue
            out.append(prediction_from_row(row))
    return out
