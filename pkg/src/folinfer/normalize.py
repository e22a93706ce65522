"""Clausal normal form: NNF, Skolemization, CNF distribution.

A Clausifier owns the Skolem counter for one proving session so that
every formula clausified within it draws from one fresh-name supply
(sk0, sk1, ...), skipping any name already used in the input problem.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    And, Application, Atom, Constant, Exists, ForAll, Formula, Iff, Implies,
    Not, Or, Term, Variable, format_term, symbols_of,
)

DEFAULT_MAX_CLAUSES = 10_000


class ClauseExplosionError(RuntimeError):
    """CNF distribution for one formula exceeded the clause bound."""


@dataclass(frozen=True)
class Literal:
    positive: bool
    predicate: str
    args: tuple = ()

    def negated(self) -> "Literal":
        return Literal(not self.positive, self.predicate, self.args)

    def __str__(self) -> str:
        sign = "" if self.positive else "-"
        if not self.args:
            return sign + self.predicate
        return sign + self.predicate + "(" + ", ".join(format_term(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals.  Literals are deduplicated preserving
    first occurrence, and variables are standardized to v0, v1, ... in
    first-occurrence order, so structurally equal clauses compare equal.
    """

    literals: tuple
    origin: str = "derived"

    def __str__(self) -> str:
        if not self.literals:
            return "[]"
        return " | ".join(str(lit) for lit in self.literals)


def _term_vars(t: Term, out: list) -> None:
    if isinstance(t, Variable):
        if t.name not in out:
            out.append(t.name)
    elif isinstance(t, Application):
        for a in t.args:
            _term_vars(a, out)


def _rename_term(t: Term, mapping: dict) -> Term:
    if isinstance(t, Variable):
        return Variable(mapping[t.name])
    if isinstance(t, Application):
        return Application(t.functor, tuple(_rename_term(a, mapping) for a in t.args))
    return t


def make_clause(literals, origin: str = "derived") -> Clause:
    """Build a clause: drop duplicate literals (keeping first occurrence)
    and rename variables to v0, v1, ... in first-occurrence order.
    """
    deduped = []
    for lit in literals:
        if lit not in deduped:
            deduped.append(lit)
    names: list[str] = []
    for lit in deduped:
        for a in lit.args:
            _term_vars(a, names)
    mapping = {n: f"v{i}" for i, n in enumerate(names)}
    renamed = tuple(
        Literal(l.positive, l.predicate, tuple(_rename_term(a, mapping) for a in l.args))
        for l in deduped)
    return Clause(renamed, origin)


def is_tautology(literals) -> bool:
    seen = set()
    for lit in literals:
        if (not lit.positive, lit.predicate, lit.args) in seen:
            return True
        seen.add((lit.positive, lit.predicate, lit.args))
    return False


# ---------------------------------------------------------------------------
# negation normal form

def to_nnf(f: Formula) -> Formula:
    """Push negation to atoms, eliminating -> and <->.  An <-> becomes
    the conjunction of both implications before the push.
    """
    return _nnf(f, True)


def _nnf(f: Formula, positive: bool) -> Formula:
    if isinstance(f, Atom):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return _nnf(f.sub, not positive)
    if isinstance(f, And):
        if positive:
            return And(_nnf(f.left, True), _nnf(f.right, True))
        return Or(_nnf(f.left, False), _nnf(f.right, False))
    if isinstance(f, Or):
        if positive:
            return Or(_nnf(f.left, True), _nnf(f.right, True))
        return And(_nnf(f.left, False), _nnf(f.right, False))
    if isinstance(f, Implies):
        if positive:
            return Or(_nnf(f.left, False), _nnf(f.right, True))
        return And(_nnf(f.left, True), _nnf(f.right, False))
    if isinstance(f, Iff):
        if positive:
            return And(
                Or(_nnf(f.left, False), _nnf(f.right, True)),
                Or(_nnf(f.right, False), _nnf(f.left, True)))
        return Or(
            And(_nnf(f.left, True), _nnf(f.right, False)),
            And(_nnf(f.right, True), _nnf(f.left, False)))
    if isinstance(f, ForAll):
        if positive:
            return ForAll(f.var, _nnf(f.body, True))
        return Exists(f.var, _nnf(f.body, False))
    if isinstance(f, Exists):
        if positive:
            return Exists(f.var, _nnf(f.body, True))
        return ForAll(f.var, _nnf(f.body, False))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# skolemization (input must be in NNF and closed)

def _subst_term(t: Term, subst: dict) -> Term:
    if isinstance(t, Variable):
        return subst.get(t.name, t)
    if isinstance(t, Application):
        return Application(t.functor, tuple(_subst_term(a, subst) for a in t.args))
    return t


def _skolemize(f: Formula, universals: tuple, subst: dict, fresh) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.predicate, tuple(_subst_term(a, subst) for a in f.args))
    if isinstance(f, Not):
        return Not(_skolemize(f.sub, universals, subst, fresh))
    if isinstance(f, (And, Or)):
        cls = type(f)
        return cls(_skolemize(f.left, universals, subst, fresh),
                   _skolemize(f.right, universals, subst, fresh))
    if isinstance(f, ForAll):
        # an inner binder shadows any outer meaning of the same name
        inner_subst = {k: v for k, v in subst.items() if k != f.var}
        inner_univ = tuple(u for u in universals if u != f.var) + (f.var,)
        return ForAll(f.var, _skolemize(f.body, inner_univ, inner_subst, fresh))
    if isinstance(f, Exists):
        name = fresh()
        if universals:
            witness: Term = Application(name, tuple(Variable(u) for u in universals))
        else:
            witness = Constant(name)
        inner_subst = dict(subst)
        inner_subst[f.var] = witness
        return _skolemize(f.body, universals, inner_subst, fresh)
    raise TypeError(f"skolemize expects NNF, got {f!r}")


def skolemize(f: Formula, session: "Clausifier | None" = None) -> Formula:
    """Replace existentials in an NNF formula with Skolem terms over the
    enclosing universals.  Witness names are sk0, sk1, ... from the
    session counter, skipping symbols already used in f.
    """
    if session is None:
        session = Clausifier()
    session.reserve(symbols_of(f))
    return _skolemize(f, (), {}, session.fresh_skolem)


def _drop_universals(f: Formula) -> Formula:
    if isinstance(f, ForAll):
        return _drop_universals(f.body)
    if isinstance(f, (And, Or)):
        cls = type(f)
        return cls(_drop_universals(f.left), _drop_universals(f.right))
    if isinstance(f, Not):
        return Not(_drop_universals(f.sub))
    return f


def _distribute(f: Formula, limit: int) -> list[list[Literal]]:
    """CNF of a quantifier-free NNF formula as a list of literal lists."""
    if isinstance(f, Atom):
        return [[Literal(True, f.predicate, f.args)]]
    if isinstance(f, Not):
        assert isinstance(f.sub, Atom)
        return [[Literal(False, f.sub.predicate, f.sub.args)]]
    if isinstance(f, And):
        left = _distribute(f.left, limit)
        right = _distribute(f.right, limit)
        if len(left) + len(right) > limit:
            raise ClauseExplosionError(
                f"clause count exceeded {limit} while normalizing one formula")
        return left + right
    if isinstance(f, Or):
        left = _distribute(f.left, limit)
        right = _distribute(f.right, limit)
        if len(left) * len(right) > limit:
            raise ClauseExplosionError(
                f"clause count exceeded {limit} while normalizing one formula")
        return [cl + cr for cl in left for cr in right]
    raise TypeError(f"expected quantifier-free NNF, got {f!r}")


class Clausifier:
    """Session-scoped clausifier: one Skolem counter shared across every
    formula normalized in the session, skipping names reserved by the
    input problem.
    """

    def __init__(self, reserved=(), max_clauses: int = DEFAULT_MAX_CLAUSES):
        self._reserved = set(reserved)
        self._counter = 0
        self.max_clauses = max_clauses

    def reserve(self, names) -> None:
        self._reserved.update(names)

    def fresh_skolem(self) -> str:
        while True:
            name = f"sk{self._counter}"
            self._counter += 1
            if name not in self._reserved:
                self._reserved.add(name)
                return name

    def clausify(self, f: Formula, origin: str = "derived") -> list[Clause]:
        """Normalize one closed formula to clauses.  Tautologous clauses
        are dropped; duplicate literals merge; each clause's variables
        are standardized apart.
        """
        self.reserve(symbols_of(f))
        matrix = _drop_universals(
            _skolemize(to_nnf(f), (), {}, self.fresh_skolem))
        out = []
        for lits in _distribute(matrix, self.max_clauses):
            if is_tautology(lits):
                continue
            out.append(make_clause(lits, origin))
        return out


def clausify(f: Formula, origin: str = "derived",
             session: Clausifier | None = None) -> list[Clause]:
    """One-shot clausification; pass a Clausifier to share Skolem names
    across formulas.
    """
    if session is None:
        session = Clausifier()
    return session.clausify(f, origin)
