"""Saturation-based resolution prover and three-valued entailment.

The prover runs a given-clause loop: pick the lightest unprocessed
clause, factor it, resolve it against every processed clause (itself
included, on a renamed copy), and keep any new clause that survives
tautology, duplicate, weight, and forward-subsumption filters.
Refutations carry a replayable proof.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

from .normalize import (
    Clause, Clausifier, Literal, is_tautology, make_clause,
)
from .syntax import Application, Constant, Formula, Not, Term, Variable, symbols_of


# ---------------------------------------------------------------------------
# substitutions

def _walk(t: Term, s: dict) -> Term:
    while isinstance(t, Variable) and t.name in s:
        t = s[t.name]
    return t


def apply_term(t: Term, s: dict) -> Term:
    t = _walk(t, s)
    if isinstance(t, Application):
        return Application(t.functor, tuple(apply_term(a, s) for a in t.args))
    return t


def apply_literal(lit: Literal, s: dict) -> Literal:
    return Literal(lit.positive, lit.predicate,
                   tuple(apply_term(a, s) for a in lit.args))


def _occurs(name: str, t: Term, s: dict) -> bool:
    t = _walk(t, s)
    if isinstance(t, Variable):
        return t.name == name
    if isinstance(t, Application):
        return any(_occurs(name, a, s) for a in t.args)
    return False


def _unify_terms(a: Term, b: Term, s: dict) -> dict | None:
    a = _walk(a, s)
    b = _walk(b, s)
    if isinstance(a, Variable):
        if isinstance(b, Variable) and b.name == a.name:
            return s
        if _occurs(a.name, b, s):
            return None
        s2 = dict(s)
        s2[a.name] = b
        return s2
    if isinstance(b, Variable):
        return _unify_terms(b, a, s)
    if isinstance(a, Constant) and isinstance(b, Constant):
        return s if a.name == b.name else None
    if isinstance(a, Application) and isinstance(b, Application):
        if a.functor != b.functor or len(a.args) != len(b.args):
            return None
        for x, y in zip(a.args, b.args):
            s = _unify_terms(x, y, s)
            if s is None:
                return None
        return s
    return None


def _unify_arg_tuples(args1, args2, s: dict | None = None) -> dict | None:
    s = {} if s is None else s
    for x, y in zip(args1, args2):
        s = _unify_terms(x, y, s)
        if s is None:
            return None
    return s


def _resolved(s: dict) -> dict:
    # flatten binding chains so applying the result once is enough
    return {k: apply_term(Variable(k), s) for k in s}


def unify(a, b) -> dict | None:
    """Most general unifier of two terms or two literals, as an
    idempotent mapping from variable name to term, or None on failure
    (symbol clash or occurs check).  Literals unify only when they
    agree on sign, predicate, and arity.
    """
    if isinstance(a, Literal) and isinstance(b, Literal):
        if (a.positive != b.positive or a.predicate != b.predicate
                or len(a.args) != len(b.args)):
            return None
        s = _unify_arg_tuples(a.args, b.args)
    else:
        s = _unify_terms(a, b, {})
    return None if s is None else _resolved(s)


# ---------------------------------------------------------------------------
# weights, renaming, subsumption

def term_size(t: Term) -> int:
    if isinstance(t, Application):
        return 1 + sum(term_size(a) for a in t.args)
    return 1


def clause_weight(c: Clause) -> int:
    return sum(1 + sum(term_size(a) for a in lit.args) for lit in c.literals)


def _collect_vars(lits, out: list) -> None:
    def term(t):
        if isinstance(t, Variable):
            if t.name not in out:
                out.append(t.name)
        elif isinstance(t, Application):
            for a in t.args:
                term(a)
    for lit in lits:
        for a in lit.args:
            term(a)


def _rename_apart(lits, prefix: str) -> tuple:
    names: list[str] = []
    _collect_vars(lits, names)
    mapping = {n: Variable(f"{prefix}{i}") for i, n in enumerate(names)}
    return tuple(apply_literal(l, mapping) for l in lits)


def _match_term(pat: Term, tgt: Term, s: dict) -> dict | None:
    # one-way matching: only pattern variables bind
    if isinstance(pat, Variable):
        bound = s.get(pat.name)
        if bound is None:
            s2 = dict(s)
            s2[pat.name] = tgt
            return s2
        return s if bound == tgt else None
    if isinstance(pat, Constant):
        return s if isinstance(tgt, Constant) and tgt.name == pat.name else None
    if isinstance(pat, Application):
        if (not isinstance(tgt, Application) or tgt.functor != pat.functor
                or len(tgt.args) != len(pat.args)):
            return None
        for p, t in zip(pat.args, tgt.args):
            s = _match_term(p, t, s)
            if s is None:
                return None
        return s
    return None


def _match_literal(pat: Literal, tgt: Literal, s: dict) -> dict | None:
    if (pat.positive != tgt.positive or pat.predicate != tgt.predicate
            or len(pat.args) != len(tgt.args)):
        return None
    for p, t in zip(pat.args, tgt.args):
        s = _match_term(p, t, s)
        if s is None:
            return None
    return s


def subsumes(c: Clause, d: Clause) -> bool:
    """True when some substitution maps every literal of c onto a
    literal of d, with the length guard |c| <= |d|.
    """
    if len(c.literals) > len(d.literals):
        return False

    def rec(i: int, s: dict) -> bool:
        if i == len(c.literals):
            return True
        for tgt in d.literals:
            s2 = _match_literal(c.literals[i], tgt, s)
            if s2 is not None and rec(i + 1, s2):
                return True
        return False

    return rec(0, {})


# ---------------------------------------------------------------------------
# saturation

@dataclass(frozen=True)
class ProofLimits:
    max_seconds: float = 10.0
    max_clauses: int = 100_000
    max_clause_weight: int = 64

    def __post_init__(self):
        if self.max_seconds <= 0 or self.max_clauses <= 0 or self.max_clause_weight <= 0:
            raise ValueError("proof limits must be positive")


@dataclass(frozen=True)
class ProofStep:
    clause_id: int
    literals: tuple
    rule: str                       # input | resolve | factor
    parents: tuple = ()             # clause ids, resolving clause first
    parent_literals: tuple = ()     # literal indices within the parents
    unifier: dict | None = None     # mgu as computed during search
    origin: str = "derived"


@dataclass
class SaturationOutcome:
    status: str                     # refuted | saturated | limit-hit
    derived_count: int
    proof: list | None = None


class _Saturation:
    def __init__(self, limits: ProofLimits):
        self.limits = limits
        self.deadline = time.monotonic() + limits.max_seconds
        self.records: dict[int, tuple] = {}      # id -> (literals, weight)
        self.steps: dict[int, ProofStep] = {}
        self.kept_ids: list[int] = []
        self.seen: set = set()
        self.passive: list = []
        self.active_ids: list[int] = []
        self.next_id = 0
        self.overweight = False
        self.derived = 0
        self.empty_id: int | None = None

    def out_of_time(self) -> bool:
        return time.monotonic() > self.deadline

    def admit(self, lits, rule, parents, parent_lits, unifier, origin) -> None:
        if is_tautology(lits):
            return
        cl = make_clause(lits, origin)
        if cl.literals in self.seen:
            return
        w = clause_weight(cl)
        if cl.literals and w > self.limits.max_clause_weight:
            self.overweight = True
            return
        for kid in self.kept_ids:
            kept_lits, _ = self.records[kid]
            if subsumes(Clause(kept_lits), cl):
                return
        cid = self.next_id
        self.next_id += 1
        self.records[cid] = (cl.literals, w)
        self.seen.add(cl.literals)
        self.kept_ids.append(cid)
        self.steps[cid] = ProofStep(cid, cl.literals, rule, tuple(parents),
                                    tuple(parent_lits), unifier, origin)
        if rule != "input":
            self.derived += 1
        if not cl.literals:
            self.empty_id = cid
            return
        heapq.heappush(self.passive, (w, cid))

    def factor(self, gid: int) -> None:
        lits, _ = self.records[gid]
        for i in range(len(lits)):
            for j in range(i + 1, len(lits)):
                a, b = lits[i], lits[j]
                if (a.positive != b.positive or a.predicate != b.predicate
                        or len(a.args) != len(b.args)):
                    continue
                s = _unify_arg_tuples(a.args, b.args)
                if s is None:
                    continue
                s = _resolved(s)
                merged = [apply_literal(l, s) for l in lits]
                self.admit(merged, "factor", (gid,), (i, j), s, "derived")
                if self.empty_id is not None:
                    return

    def resolve_pair(self, gid: int, aid: int) -> None:
        glits_raw, _ = self.records[gid]
        glits = _rename_apart(glits_raw, "u")
        alits, _ = self.records[aid]
        for i, gl in enumerate(glits):
            for j, al in enumerate(alits):
                if (gl.positive == al.positive or gl.predicate != al.predicate
                        or len(gl.args) != len(al.args)):
                    continue
                s = _unify_arg_tuples(gl.args, al.args)
                if s is None:
                    continue
                s = _resolved(s)
                rest = ([apply_literal(l, s) for k, l in enumerate(glits) if k != i]
                        + [apply_literal(l, s) for k, l in enumerate(alits) if k != j])
                self.admit(rest, "resolve", (gid, aid), (i, j), s, "derived")
                if self.empty_id is not None:
                    return

    def proof(self) -> list[ProofStep]:
        needed: set[int] = set()
        stack = [self.empty_id]
        while stack:
            cid = stack.pop()
            if cid in needed:
                continue
            needed.add(cid)
            stack.extend(self.steps[cid].parents)
        return [self.steps[cid] for cid in sorted(needed)]


def saturate(clauses, limits: ProofLimits | None = None) -> SaturationOutcome:
    """Saturate a clause set.  Status is `refuted` when the empty clause
    is derived (with a replayable proof attached), `saturated` when the
    passive queue empties with nothing discarded for weight, and
    `limit-hit` otherwise (time, clause count, or weight discards).
    """
    limits = limits or ProofLimits()
    st = _Saturation(limits)

    for c in clauses:
        st.admit(c.literals, "input", (), (), None, c.origin)
        if st.empty_id is not None:
            return SaturationOutcome("refuted", st.derived, st.proof())

    while st.passive:
        if st.out_of_time() or len(st.records) > limits.max_clauses:
            return SaturationOutcome("limit-hit", st.derived)
        _, gid = heapq.heappop(st.passive)
        st.active_ids.append(gid)
        st.factor(gid)
        if st.empty_id is not None:
            return SaturationOutcome("refuted", st.derived, st.proof())
        for aid in st.active_ids:
            st.resolve_pair(gid, aid)
            if st.empty_id is not None:
                return SaturationOutcome("refuted", st.derived, st.proof())
            if st.out_of_time():
                return SaturationOutcome("limit-hit", st.derived)

    status = "limit-hit" if st.overweight else "saturated"
    return SaturationOutcome(status, st.derived)


# ---------------------------------------------------------------------------
# proof replay

def verify_proof(steps) -> bool:
    """Replay a recorded proof: every non-input step must be re-derivable
    from its parents at the recorded literal positions, and the final
    step must be the empty clause.
    """
    by_id: dict[int, tuple] = {}
    saw_empty = False
    for step in steps:
        if step.rule == "input":
            if make_clause(step.literals).literals != step.literals:
                return False
            by_id[step.clause_id] = step.literals
        elif step.rule == "factor":
            if len(step.parents) != 1 or len(step.parent_literals) != 2:
                return False
            plits = by_id.get(step.parents[0])
            i, j = step.parent_literals
            if plits is None or not (0 <= i < j < len(plits)):
                return False
            a, b = plits[i], plits[j]
            if (a.positive != b.positive or a.predicate != b.predicate
                    or len(a.args) != len(b.args)):
                return False
            s = _unify_arg_tuples(a.args, b.args)
            if s is None:
                return False
            s = _resolved(s)
            got = make_clause([apply_literal(l, s) for l in plits]).literals
            if got != step.literals:
                return False
            by_id[step.clause_id] = step.literals
        elif step.rule == "resolve":
            if len(step.parents) != 2 or len(step.parent_literals) != 2:
                return False
            p0 = by_id.get(step.parents[0])
            p1 = by_id.get(step.parents[1])
            if p0 is None or p1 is None:
                return False
            i, j = step.parent_literals
            if not (0 <= i < len(p0) and 0 <= j < len(p1)):
                return False
            g = _rename_apart(p0, "u")
            gl, al = g[i], p1[j]
            if (gl.positive == al.positive or gl.predicate != al.predicate
                    or len(gl.args) != len(al.args)):
                return False
            s = _unify_arg_tuples(gl.args, al.args)
            if s is None:
                return False
            s = _resolved(s)
            rest = ([apply_literal(l, s) for k, l in enumerate(g) if k != i]
                    + [apply_literal(l, s) for k, l in enumerate(p1) if k != j])
            got = make_clause(rest).literals
            if got != step.literals:
                return False
            by_id[step.clause_id] = step.literals
        else:
            return False
        if step.literals == ():
            saw_empty = True
    return saw_empty


# ---------------------------------------------------------------------------
# three-valued entailment

@dataclass
class Verdict:
    label: str                      # True | False | Uncertain
    resource_limited: bool
    premises_inconsistent: bool
    forward: SaturationOutcome      # premises + negated conclusion
    backward: SaturationOutcome     # premises + conclusion


def decide(premises, conclusion: Formula,
           limits: ProofLimits | None = None) -> Verdict:
    """Three-valued entailment over closed, signature-valid formulas.

    True when premises plus the negated conclusion refute and the
    premises alone are consistent; False symmetrically with the
    un-negated conclusion; Uncertain otherwise.  Inconsistent premises
    always yield Uncertain with the premises_inconsistent flag set.
    """
    limits = limits or ProofLimits()
    session = Clausifier()
    for f in premises:
        session.reserve(symbols_of(f))
    session.reserve(symbols_of(conclusion))

    premise_clauses = []
    for i, p in enumerate(premises):
        premise_clauses.extend(session.clausify(p, origin=f"premise:{i}"))
    neg_clauses = session.clausify(Not(conclusion), origin="negated-conclusion")
    pos_clauses = session.clausify(conclusion, origin="conclusion")

    consistency = saturate(premise_clauses, limits)
    forward = saturate(premise_clauses + neg_clauses, limits)
    backward = saturate(premise_clauses + pos_clauses, limits)

    premises_inconsistent = (
        consistency.status == "refuted"
        or (forward.status == "refuted" and backward.status == "refuted"))
    resource_limited = (
        (forward.status == "limit-hit" and backward.status != "refuted")
        or (backward.status == "limit-hit" and forward.status != "refuted"))

    if premises_inconsistent:
        label = "Uncertain"
    elif forward.status == "refuted":
        label = "True"
    elif backward.status == "refuted":
        label = "False"
    else:
        label = "Uncertain"
    return Verdict(label, resource_limited, premises_inconsistent, forward, backward)
