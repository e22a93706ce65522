"""Independent reference implementations used only by tests.

Nothing here calls into the package's normalize or prover code paths:
formulas are decided by test-local grounding plus propositional truth
tables, so agreement with the package is evidence, not tautology.

Truth tables are big-integer bitmasks.  With n atoms there are 2^n
assignments; bit m of a mask is the formula's value under assignment m,
where atom i is true iff (m >> i) & 1.  Connectives are then single
bitwise operations on Python ints.
"""

from __future__ import annotations

import random

from folinfer.syntax import (
    And, Application, Atom, Constant, Exists, ForAll, Iff, Implies, Not, Or,
    Variable,
)

_BINARY = (And, Or, Implies, Iff)


# ---------------------------------------------------------------------------
# ground truth tables

def term_key(t):
    if isinstance(t, Constant):
        return t.name
    if isinstance(t, Application):
        return (t.functor, tuple(term_key(a) for a in t.args))
    raise ValueError(f"term is not ground: {t!r}")


def atom_key(f: Atom):
    return (f.predicate, tuple(term_key(a) for a in f.args))


def collect_ground_atoms(f, index: dict) -> None:
    """Assign each distinct ground atom of f an index, in first-occurrence
    order."""
    if isinstance(f, Atom):
        key = atom_key(f)
        if key not in index:
            index[key] = len(index)
    elif isinstance(f, Not):
        collect_ground_atoms(f.sub, index)
    elif isinstance(f, _BINARY):
        collect_ground_atoms(f.left, index)
        collect_ground_atoms(f.right, index)
    else:
        raise ValueError(f"formula is not ground: {f!r}")


def atom_masks(n: int) -> tuple[list[int], int]:
    """Per-atom truth masks over all 2^n assignments, plus the all-ones
    mask."""
    size = 1 << n
    full = (1 << size) - 1
    masks = []
    for i in range(n):
        width = 1 << (i + 1)
        block = ((1 << (1 << i)) - 1) << (1 << i)   # 2^i zeros, then ones
        repeats = size // width
        masks.append(block * ((1 << (width * repeats)) - 1) // ((1 << width) - 1))
    return masks, full


def formula_mask(f, index: dict, masks: list[int], full: int) -> int:
    if isinstance(f, Atom):
        return masks[index[atom_key(f)]]
    if isinstance(f, Not):
        return full & ~formula_mask(f.sub, index, masks, full)
    left = formula_mask(f.left, index, masks, full)
    right = formula_mask(f.right, index, masks, full)
    if isinstance(f, And):
        return left & right
    if isinstance(f, Or):
        return left | right
    if isinstance(f, Implies):
        return (full & ~left) | right
    if isinstance(f, Iff):
        return full & ~(left ^ right)
    raise ValueError(f"formula is not ground: {f!r}")


def clauses_mask(clauses, index: dict, masks: list[int], full: int) -> int:
    """Conjunction-of-disjunctions mask for ground clauses from the
    package's normalize module (duck-typed: .literals with .positive,
    .predicate, .args)."""
    acc = full
    for clause in clauses:
        cm = 0
        for lit in clause.literals:
            am = masks[index[(lit.predicate, tuple(term_key(a) for a in lit.args))]]
            cm |= am if lit.positive else (full & ~am)
        acc &= cm
    return acc


# ---------------------------------------------------------------------------
# oracle entailment for the existential-above-universal fragment

def _nnf(f, positive: bool = True):
    if isinstance(f, Atom):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return _nnf(f.sub, not positive)
    if isinstance(f, And):
        cls = And if positive else Or
        return cls(_nnf(f.left, positive), _nnf(f.right, positive))
    if isinstance(f, Or):
        cls = Or if positive else And
        return cls(_nnf(f.left, positive), _nnf(f.right, positive))
    if isinstance(f, Implies):
        if positive:
            return Or(_nnf(f.left, False), _nnf(f.right, True))
        return And(_nnf(f.left, True), _nnf(f.right, False))
    if isinstance(f, Iff):
        if positive:
            return Or(And(_nnf(f.left, True), _nnf(f.right, True)),
                      And(_nnf(f.left, False), _nnf(f.right, False)))
        return Or(And(_nnf(f.left, True), _nnf(f.right, False)),
                  And(_nnf(f.left, False), _nnf(f.right, True)))
    if isinstance(f, ForAll):
        if positive:
            return ForAll(f.var, _nnf(f.body, True))
        return Exists(f.var, _nnf(f.body, False))
    if isinstance(f, Exists):
        if positive:
            return Exists(f.var, _nnf(f.body, True))
        return ForAll(f.var, _nnf(f.body, False))
    raise ValueError(f"not a formula: {f!r}")


def _subst(f, name: str, repl):
    def sub_term(t):
        if isinstance(t, Variable):
            return repl if t.name == name else t
        if isinstance(t, Application):
            return Application(t.functor, tuple(sub_term(a) for a in t.args))
        return t

    if isinstance(f, Atom):
        return Atom(f.predicate, tuple(sub_term(a) for a in f.args))
    if isinstance(f, Not):
        return Not(_subst(f.sub, name, repl))
    if isinstance(f, _BINARY):
        return type(f)(_subst(f.left, name, repl), _subst(f.right, name, repl))
    if isinstance(f, (ForAll, Exists)):
        if f.var == name:
            return f
        return type(f)(f.var, _subst(f.body, name, repl))
    raise ValueError(f"not a formula: {f!r}")


def _witness_existentials(f, fresh, under_forall: bool = False):
    """Replace each existential with a fresh witness constant.  Only
    valid when no existential sits under a universal, which the random
    problem generator guarantees."""
    if isinstance(f, (Atom, Not)):
        return f
    if isinstance(f, (And, Or)):
        return type(f)(_witness_existentials(f.left, fresh, under_forall),
                       _witness_existentials(f.right, fresh, under_forall))
    if isinstance(f, ForAll):
        return ForAll(f.var, _witness_existentials(f.body, fresh, True))
    if isinstance(f, Exists):
        if under_forall:
            raise ValueError("existential under universal: outside the oracle fragment")
        body = _subst(f.body, f.var, Constant(fresh()))
        return _witness_existentials(body, fresh, under_forall)
    raise ValueError(f"expected NNF: {f!r}")


def _expand_universals(f, domain: list[str]):
    if isinstance(f, (Atom, Not)):
        return f
    if isinstance(f, (And, Or)):
        return type(f)(_expand_universals(f.left, domain),
                       _expand_universals(f.right, domain))
    if isinstance(f, ForAll):
        parts = [_expand_universals(_subst(f.body, f.var, Constant(c)), domain)
                 for c in domain]
        acc = parts[0]
        for p in parts[1:]:
            acc = And(acc, p)
        return acc
    raise ValueError(f"unexpected node after witnessing: {f!r}")


def _constants_in(f, out: list) -> None:
    def walk_term(t):
        if isinstance(t, Constant):
            if t.name not in out:
                out.append(t.name)
        elif isinstance(t, Application):
            raise ValueError("oracle fragment is function-free")

    if isinstance(f, Atom):
        for a in f.args:
            walk_term(a)
    elif isinstance(f, Not):
        _constants_in(f.sub, out)
    elif isinstance(f, _BINARY):
        _constants_in(f.left, out)
        _constants_in(f.right, out)
    elif isinstance(f, (ForAll, Exists)):
        _constants_in(f.body, out)


def oracle_satisfiable(formulas) -> bool:
    """Propositional satisfiability of the ground expansion: witness the
    existentials, ground every universal over all constants in sight,
    and check the truth table."""
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"W{counter[0]}"

    witnessed = [_witness_existentials(_nnf(f), fresh) for f in formulas]
    domain: list[str] = []
    for f in witnessed:
        _constants_in(f, domain)
    if not domain:
        domain = ["D0"]
    grounded = [_expand_universals(f, domain) for f in witnessed]

    index: dict = {}
    for g in grounded:
        collect_ground_atoms(g, index)
    masks, full = atom_masks(len(index))
    acc = full
    for g in grounded:
        acc &= formula_mask(g, index, masks, full)
        if acc == 0:
            return False
    return True


def oracle_entailment(premises, conclusion) -> tuple[str, bool]:
    """Three-valued entailment label plus a premises-inconsistent flag,
    by three independent satisfiability checks."""
    if not oracle_satisfiable(list(premises)):
        return "Uncertain", True
    if not oracle_satisfiable(list(premises) + [Not(conclusion)]):
        return "True", False
    if not oracle_satisfiable(list(premises) + [conclusion]):
        return "False", False
    return "Uncertain", False


# ---------------------------------------------------------------------------
# seeded random problems within the oracle fragment

_MAX_GROUND_ATOMS = 14


def _random_atom(rng: random.Random, preds, pool):
    name, arity = rng.choice(preds)
    args = tuple(rng.choice(pool) for _ in range(arity))
    return Atom(name, args)


def _random_body(rng: random.Random, preds, pool, depth: int):
    if depth == 0 or rng.random() < 0.35:
        atom = _random_atom(rng, preds, pool)
        return Not(atom) if rng.random() < 0.3 else atom
    if rng.random() < 0.15:
        return Not(_random_body(rng, preds, pool, depth - 1))
    op = rng.choice((And, Or, Or, Implies, Implies, Iff))
    return op(_random_body(rng, preds, pool, depth - 1),
              _random_body(rng, preds, pool, depth - 1))


def _quantified(rng: random.Random, kind: str, preds, consts):
    if kind == "ground":
        return _random_body(rng, preds, [Constant(c) for c in consts],
                            rng.choice((0, 1, 1, 2)))
    if kind == "forall1":
        pool = [Variable("x")] + [Constant(c) for c in consts]
        return ForAll("x", _random_body(rng, preds, pool, rng.choice((0, 1, 1, 2))))
    if kind == "forall2":
        pool = [Variable("x"), Variable("y")] + [Constant(c) for c in consts]
        return ForAll("x", ForAll("y", _random_body(rng, preds, pool, rng.choice((1, 2)))))
    if kind == "exists1":
        pool = [Variable("x")] + [Constant(c) for c in consts]
        return Exists("x", _random_body(rng, preds, pool, rng.choice((0, 1, 1))))
    raise ValueError(kind)


def random_entailment_problem(rng: random.Random):
    """One random function-free problem: at most 3 constants, 3
    predicates of arity <= 2, 4 premises.  Redrawn until the worst-case
    grounding stays small enough for the truth-table oracle."""
    while True:
        consts = ["A", "B", "C"][: rng.randint(1, 3)]
        names = ["P", "Q", "R"][: rng.randint(1, 3)]
        preds = [(n, rng.choice((1, 1, 2))) for n in names]
        prem_kinds = [rng.choice(("ground", "forall1", "forall1", "forall2", "exists1"))
                      for _ in range(rng.randint(1, 4))]
        concl_kind = rng.choice(("ground", "ground", "forall1", "exists1"))
        worst_domain = len(consts) + sum(1 for k in prem_kinds if k == "exists1") + 1
        if sum(worst_domain ** a for _, a in preds) > _MAX_GROUND_ATOMS:
            continue
        premises = [_quantified(rng, k, preds, consts) for k in prem_kinds]
        conclusion = _quantified(rng, concl_kind, preds, consts)
        return premises, conclusion


# ---------------------------------------------------------------------------
# seeded random ground formulas for normalization checks

def random_ground_formula(rng: random.Random, max_atoms: int = 10):
    n = rng.randint(1, max_atoms)
    pool = []
    for i in range(n):
        r = rng.random()
        if r < 0.4:
            pool.append(Atom(f"G{i}"))
        elif r < 0.8:
            pool.append(Atom("P", (Constant(chr(65 + i)),)))
        else:
            pool.append(Atom("R", (Constant(chr(65 + i)),
                                   Constant(chr(65 + (i * 3) % 10)))))

    def tree(depth: int):
        if depth == 0 or rng.random() < 0.3:
            return rng.choice(pool)
        if rng.random() < 0.2:
            return Not(tree(depth - 1))
        op = rng.choice((And, Or, Implies, Iff))
        return op(tree(depth - 1), tree(depth - 1))

    return tree(rng.randint(1, 4))
