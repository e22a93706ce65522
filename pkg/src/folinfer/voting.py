"""Error-filtered majority vote over sampled labels."""

from __future__ import annotations

from dataclasses import dataclass, field

LABELS = ("True", "False", "Uncertain", "Error")


@dataclass(frozen=True)
class VoteResult:
    final: str
    counts: dict = field(default_factory=dict)  # label -> count over all ballots
    tie_broken: bool = False


def majority_vote(labels) -> VoteResult:
    """Aggregate sampled labels.

    Error ballots are excluded before counting; if every ballot is
    Error the final answer is Error.  A tie between surviving labels
    goes to the one whose first ballot appeared earliest.  counts
    covers all ballots, Error included, so its values sum to the
    number of ballots.
    """
    labels = list(labels)
    if not labels:
        raise ValueError("majority_vote needs at least one label")
    for lab in labels:
        if lab not in LABELS:
            raise ValueError(f"unknown label {lab!r}")

    counts: dict[str, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1

    first_seen: dict[str, int] = {}
    for idx, lab in enumerate(labels):
        if lab != "Error" and lab not in first_seen:
            first_seen[lab] = idx

    if not first_seen:
        return VoteResult("Error", counts, False)

    best = max(counts[lab] for lab in first_seen)
    leaders = [lab for lab in first_seen if counts[lab] == best]
    final = min(leaders, key=lambda lab: first_seen[lab])
    return VoteResult(final, counts, len(leaders) > 1)
