"""Evaluation statistics for labeled runs.

Accuracy is reported as a bootstrapped K-way majority vote: each
bootstrap iteration redraws K labels per problem (uniformly, with
replacement) from that problem's sampled labels, votes, and scores
against gold.  Confusion matrices and precision/recall use the
full-ballot vote with no resampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .voting import majority_vote

PRED_LABELS = ("True", "False", "Uncertain", "Error")
GOLD_LABELS = ("True", "False", "Uncertain")

_LABEL_INDEX = {lab: i for i, lab in enumerate(PRED_LABELS)}


class SimilarityUndefined(ValueError):
    """Neither method made a single error, so sim has no denominator."""


class MissingDepths(ValueError):
    """Per-depth statistics need depth annotations."""


@dataclass
class LabeledRun:
    sample_labels: list            # per problem, labels in generation order
    gold: list
    depths: list | None = None
    mode: str | None = None
    problem_ids: list | None = None

    def __post_init__(self):
        n = len(self.sample_labels)
        if len(self.gold) != n:
            raise ValueError("gold length does not match problems")
        if self.depths is not None and len(self.depths) != n:
            raise ValueError("depths length does not match problems")
        if any(len(labels) == 0 for labels in self.sample_labels):
            raise ValueError("every problem needs at least one sample label")


def run_from_predictions(predictions) -> LabeledRun:
    if not predictions:
        raise ValueError("no predictions")
    depths = [p.depth for p in predictions]
    return LabeledRun(
        sample_labels=[list(p.per_sample_labels) for p in predictions],
        gold=[p.gold_label for p in predictions],
        depths=depths if all(d is not None for d in depths) else None,
        mode=predictions[0].mode,
        problem_ids=[p.problem_id for p in predictions],
    )


# ---------------------------------------------------------------------------
# bootstrapped vote accuracy

def _vote_ints(draw) -> int:
    # integer-coded majority vote identical to voting.majority_vote:
    # Error (3) filtered, ties to the earliest-drawn leader
    counts = [0, 0, 0, 0]
    for lab in draw:
        counts[lab] += 1
    best = max(counts[0], counts[1], counts[2])
    if best == 0:
        return 3
    for lab in draw:
        if lab != 3 and counts[lab] == best:
            return lab
    raise AssertionError("unreachable")


def bootstrap_vote_accuracy(run: LabeledRun, k: int, iterations: int = 1000,
                            seed: int = 0) -> tuple[float, float]:
    """Mean and standard deviation of K-way vote accuracy over
    bootstrap iterations.  One RNG stream drives the whole computation:
    iterations outer, problems inner (input order), one k-sized draw
    per problem per iteration.
    """
    if not run.sample_labels:
        raise ValueError("empty run")
    if k < 1 or iterations < 1:
        raise ValueError("k and iterations must be positive")
    rng = np.random.default_rng(seed)
    coded = [np.array([_LABEL_INDEX[l] for l in labels], dtype=np.int8)
             for labels in run.sample_labels]
    gold = [_LABEL_INDEX[g] for g in run.gold]
    n = len(coded)
    accs = np.empty(iterations)
    for it in range(iterations):
        correct = 0
        for labels, g in zip(coded, gold):
            draw = labels[rng.integers(0, len(labels), size=k)]
            if _vote_ints(draw) == g:
                correct += 1
        accs[it] = correct / n
    return float(accs.mean()), float(accs.std())


def k_sweep(run: LabeledRun, ks=tuple(range(1, 11)), iterations: int = 1000,
            seed: int = 0) -> dict:
    return {k: bootstrap_vote_accuracy(run, k, iterations, seed) for k in ks}


def per_depth_accuracy(run: LabeledRun, k: int, iterations: int = 1000,
                       seed: int = 0) -> dict:
    """bootstrap_vote_accuracy restricted to each depth present."""
    if run.depths is None:
        raise MissingDepths("run has no depth annotations")
    out = {}
    for depth in sorted(set(run.depths)):
        idx = [i for i, d in enumerate(run.depths) if d == depth]
        sub = LabeledRun(
            sample_labels=[run.sample_labels[i] for i in idx],
            gold=[run.gold[i] for i in idx])
        out[depth] = bootstrap_vote_accuracy(sub, k, iterations, seed)
    return out


# ---------------------------------------------------------------------------
# full-ballot statistics

def final_votes(run: LabeledRun) -> list[str]:
    return [majority_vote(labels).final for labels in run.sample_labels]


@dataclass
class EvalReport:
    mean_accuracy: float
    std_accuracy: float
    confusion: dict                 # pred label -> {gold label -> count}
    tf_precision: float | None
    tf_recall: float | None
    per_depth: dict | None = None   # depth -> (mean, std)


def confusion_counts(preds, gold) -> dict:
    table = {p: {g: 0 for g in GOLD_LABELS} for p in PRED_LABELS}
    for p, g in zip(preds, gold):
        table[p][g] += 1
    return table


def tf_precision_recall(preds, gold):
    """precision: determinate predictions (True/False) that match gold;
    recall: determinate-gold problems answered correctly.  None where
    the denominator is zero.
    """
    hits = sum(1 for p, g in zip(preds, gold) if p in ("True", "False") and p == g)
    n_det_pred = sum(1 for p in preds if p in ("True", "False"))
    n_det_gold = sum(1 for g in gold if g in ("True", "False"))
    precision = hits / n_det_pred if n_det_pred else None
    recall = hits / n_det_gold if n_det_gold else None
    return precision, recall


def evaluate(run: LabeledRun, k: int, iterations: int = 1000,
             seed: int = 0) -> EvalReport:
    preds = final_votes(run)
    mean, std = bootstrap_vote_accuracy(run, k, iterations, seed)
    precision, recall = tf_precision_recall(preds, run.gold)
    per_depth = None
    if run.depths is not None:
        per_depth = per_depth_accuracy(run, k, iterations, seed)
    return EvalReport(
        mean_accuracy=mean,
        std_accuracy=std,
        confusion=confusion_counts(preds, run.gold),
        tf_precision=precision,
        tf_recall=recall,
        per_depth=per_depth,
    )


# ---------------------------------------------------------------------------
# method comparison

def similarity(preds_a, preds_b, gold) -> float:
    """Fraction of identically-wrong predictions among problems where
    at least one method is wrong.
    """
    if not (len(preds_a) == len(preds_b) == len(gold)):
        raise ValueError("prediction and gold lists must align")
    num = 0
    den = 0
    for a, b, r in zip(preds_a, preds_b, gold):
        if a != r or b != r:
            den += 1
            if a == b and a != r:
                num += 1
    if den == 0:
        raise SimilarityUndefined("neither method made any error")
    return num / den


def mcnemar(a_correct, b_correct, exact: bool = False) -> float:
    """McNemar's test p-value from paired correctness indicators.

    Default: continuity-corrected chi-square on the discordant counts,
    chi2 = (|b - c| - 1)^2 / (b + c) with the corrected difference
    clamped at zero, referred to the 1-dof upper tail.  exact=True uses
    the two-sided binomial instead.  Identical discordance (b + c = 0)
    gives p = 1.
    """
    if len(a_correct) != len(b_correct):
        raise ValueError("paired lists must have equal length")
    b = sum(1 for x, y in zip(a_correct, b_correct) if x and not y)
    c = sum(1 for x, y in zip(a_correct, b_correct) if not x and y)
    n = b + c
    if n == 0:
        return 1.0
    if exact:
        m = min(b, c)
        tail = sum(math.comb(n, i) for i in range(m + 1)) / 2.0 ** n
        return min(1.0, 2.0 * tail)
    stat = max(abs(b - c) - 1, 0) ** 2 / n
    return math.erfc(math.sqrt(stat / 2.0))
