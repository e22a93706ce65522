"""Dataset loading, gold-FOL validity filtering, and balanced sampling.

Two input families: FOLIO JSONL (premises as newline-joined text or
lists, gold FOL annotations) and ProofWriter OWA meta files (theories
as triples+rules, questions with depth metadata).  Records normalize
to one schema that round-trips through JSONL.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .normalize import ClauseExplosionError
from .prover import ProofLimits, decide
from .syntax import FolSyntaxError, check_signature, close_universally, parse

GOLD_LABELS = ("True", "False", "Uncertain")


@dataclass(frozen=True)
class ProblemRecord:
    id: str
    premises_nl: tuple
    conclusion_nl: str
    gold_label: str
    source: str                      # FOLIO-train | FOLIO-val | ProofWriter-OWA
    premises_fol: tuple | None = None
    conclusion_fol: str | None = None
    depth: int | None = None         # present iff source is ProofWriter


@dataclass
class FilterReport:
    removed_ids: list = field(default_factory=list)
    reasons: dict = field(default_factory=dict)  # id -> reason string


# ---------------------------------------------------------------------------
# normalized JSONL

def record_to_row(r: ProblemRecord) -> dict:
    row = {
        "id": r.id,
        "premises_nl": list(r.premises_nl),
        "conclusion_nl": r.conclusion_nl,
        "gold_label": r.gold_label,
        "source": r.source,
    }
    if r.premises_fol is not None:
        row["premises_fol"] = list(r.premises_fol)
    if r.conclusion_fol is not None:
        row["conclusion_fol"] = r.conclusion_fol
    if r.depth is not None:
        row["depth"] = r.depth
    return row


def record_from_row(row: dict) -> ProblemRecord:
    return ProblemRecord(
        id=row["id"],
        premises_nl=tuple(row["premises_nl"]),
        conclusion_nl=row["conclusion_nl"],
        gold_label=row["gold_label"],
        source=row["source"],
        premises_fol=tuple(row["premises_fol"]) if "premises_fol" in row else None,
        conclusion_fol=row.get("conclusion_fol"),
        depth=row.get("depth"),
    )


def save_problems(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(record_to_row(r), sort_keys=True) + "\n")


def load_problems(path) -> list[ProblemRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(record_from_row(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}: malformed record on line {n}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# FOLIO

def _as_lines(value) -> tuple:
    if isinstance(value, str):
        return tuple(s.strip() for s in value.splitlines() if s.strip())
    return tuple(str(s).strip() for s in value)


def _first_key(row: dict, *names):
    for n in names:
        if n in row:
            return row[n]
    return None


def _norm_label(value) -> str:
    text = str(value).strip().capitalize()
    if text == "Unknown":
        text = "Uncertain"
    if text not in GOLD_LABELS:
        raise ValueError(f"unrecognized gold label {value!r}")
    return text


def load_folio(path, source: str = "FOLIO-val") -> list[ProblemRecord]:
    """Read a FOLIO JSONL file.  Premises given as one newline-joined
    string are split into lines; record ids are `source:row-index`.
    """
    out = []
    with open(path, encoding="utf-8") as fh:
        for idx, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                premises = _as_lines(_first_key(row, "premises", "premises_nl"))
                conclusion = str(_first_key(row, "conclusion", "conclusion_nl")).strip()
                label = _norm_label(row["label"])
                premises_fol = _first_key(
                    row, "premises-FOL", "premises_fol", "premises-fol")
                conclusion_fol = _first_key(
                    row, "conclusion-FOL", "conclusion_fol", "conclusion-fol")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: malformed line {idx + 1}: {exc}") from exc
            out.append(ProblemRecord(
                id=f"{source}:{len(out)}",
                premises_nl=premises,
                conclusion_nl=conclusion,
                gold_label=label,
                source=source,
                premises_fol=_as_lines(premises_fol) if premises_fol is not None else None,
                conclusion_fol=str(conclusion_fol).strip() if conclusion_fol is not None else None,
            ))
    return out


def _parens_balanced(text: str) -> bool:
    depth = 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def gold_fol_label(record: ProblemRecord, limits: ProofLimits) -> str:
    """Entailment label of a record's gold FOL program, with free
    variables closed universally; Error on arity or prover failure.
    """
    try:
        formulas = [close_universally(parse(s)) for s in record.premises_fol]
        conclusion = close_universally(parse(record.conclusion_fol))
        check_signature(formulas + [conclusion])
        return decide(formulas, conclusion, limits).label
    except (FolSyntaxError, ClauseExplosionError):
        return "Error"


def validate_folio(records, limits: ProofLimits | None = None):
    """Drop records whose gold FOL annotations are unusable: unbalanced
    parentheses (or other unparseable text, reported distinctly as
    parse-error), premise/FOL count mismatch, or a proved label that
    disagrees with the gold label.  Returns (kept, FilterReport).
    """
    limits = limits or ProofLimits(max_seconds=60.0)
    kept = []
    report = FilterReport()

    def remove(rec, reason):
        report.removed_ids.append(rec.id)
        report.reasons[rec.id] = reason

    for rec in records:
        if rec.premises_fol is None or rec.conclusion_fol is None:
            raise ValueError(f"record {rec.id} lacks gold FOL fields")
        fols = list(rec.premises_fol) + [rec.conclusion_fol]
        if any(not _parens_balanced(s) for s in fols):
            remove(rec, "unbalanced-parens")
            continue
        parse_failed = False
        for s in fols:
            try:
                parse(s)
            except FolSyntaxError:
                remove(rec, "parse-error")
                parse_failed = True
                break
        if parse_failed:
            continue
        if len(rec.premises_nl) != len(rec.premises_fol):
            remove(rec, "count-mismatch")
            continue
        if gold_fol_label(rec, limits) != rec.gold_label:
            remove(rec, "label-mismatch")
            continue
        kept.append(rec)
    return kept, report


# ---------------------------------------------------------------------------
# ProofWriter OWA

_ANSWER_MAP = {
    "true": "True", True: "True",
    "false": "False", False: "False",
    "unknown": "Uncertain",
}

_KEY_NUM = re.compile(r"(\D+)(\d+)$")


def _natural_key(name: str):
    m = _KEY_NUM.match(name)
    return (m.group(1), int(m.group(2))) if m else (name, 0)


def _theory_sentences(obj: dict) -> tuple:
    sentences = []
    for section in ("triples", "rules"):
        part = obj.get(section) or {}
        for key in sorted(part, key=_natural_key):
            sentences.append(str(part[key]["text"]).strip())
    return tuple(sentences)


def load_proofwriter(path) -> list[ProblemRecord]:
    """Read ProofWriter OWA meta files (one file or a directory tree of
    meta-*.jsonl).  One record per question; depth is the question's
    shortest-proof depth; answers map {true, false, unknown} onto
    {True, False, Uncertain}.
    """
    p = Path(path)
    if p.is_dir():
        files = sorted(p.rglob("meta-*.jsonl"))
        if not files:
            raise ValueError(f"{path}: no meta-*.jsonl files found")
    else:
        files = [p]

    out = []
    for fp in files:
        with open(fp, encoding="utf-8") as fh:
            for n, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    theory_id = obj["id"]
                    premises = _theory_sentences(obj)
                    questions = obj["questions"]
                    if isinstance(questions, dict):
                        items = [(k, questions[k]) for k in sorted(questions, key=_natural_key)]
                    else:
                        items = [(f"Q{i + 1}", q) for i, q in enumerate(questions)]
                    if not premises:
                        raise KeyError("no triples or rules")
                    for qkey, q in items:
                        answer = q["answer"]
                        key = answer.lower() if isinstance(answer, str) else answer
                        label = _ANSWER_MAP[key]
                        depth = q.get("QDep", q.get("depth"))
                        if depth is None:
                            raise KeyError(f"question {qkey} has no depth")
                        out.append(ProblemRecord(
                            id=f"{theory_id}::{qkey}",
                            premises_nl=premises,
                            conclusion_nl=str(q["question"]).strip(),
                            gold_label=label,
                            source="ProofWriter-OWA",
                            depth=int(depth),
                        ))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ValueError(
                        f"{fp}: malformed record on line {n}: {exc}") from exc
    return out


def balanced_sample(records, per_cell: int = 20, seed: int = 0) -> list[ProblemRecord]:
    """Draw per_cell records uniformly without replacement from every
    (depth, label) cell in {0..5} x {True,False,Uncertain}, with a
    seeded RNG.  Output is grouped by depth then label, input order
    within a cell.
    """
    if per_cell == 0:
        return []
    rng = np.random.default_rng(seed)
    out = []
    for depth in range(6):
        for label in GOLD_LABELS:
            pool = [r for r in records if r.depth == depth and r.gold_label == label]
            if len(pool) < per_cell:
                raise ValueError(
                    f"cell (depth={depth}, label={label}) has only "
                    f"{len(pool)} records, need {per_cell}")
            chosen = sorted(rng.choice(len(pool), size=per_cell, replace=False))
            out.extend(pool[i] for i in chosen)
    return out
