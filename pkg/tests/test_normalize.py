"""Negation normal form, skolemization, and clausification."""

import random

import pytest

from oracles import (
    atom_masks, clauses_mask, collect_ground_atoms, formula_mask,
    random_ground_formula,
)
from folinfer.normalize import (
    Clause, ClauseExplosionError, Clausifier, Literal, clausify, is_tautology,
    make_clause, skolemize, to_nnf,
)
from folinfer.syntax import (
    And, Application, Atom, Constant, Exists, ForAll, Iff, Implies, Not, Or,
    Variable, parse,
)


# ---------------------------------------------------------------------------
# negation normal form

def test_nnf_double_negation():
    assert to_nnf(parse("-(-P(A))")) == parse("P(A)")


def test_nnf_de_morgan():
    assert to_nnf(parse("-(P(A) & Q(A))")) == parse("-P(A) | -Q(A)")
    assert to_nnf(parse("-(P(A) | Q(A))")) == parse("-P(A) & -Q(A)")


def test_nnf_quantifier_duality():
    assert to_nnf(parse("-(all x. P(x))")) == parse("exists x. -P(x)")
    assert to_nnf(parse("-(exists x. P(x))")) == parse("all x. -P(x)")


def test_nnf_eliminates_implication():
    assert to_nnf(parse("P(A) -> Q(A)")) == parse("-P(A) | Q(A)")
    assert to_nnf(parse("-(P(A) -> Q(A))")) == parse("P(A) & -Q(A)")


def _nnf_shape_ok(f) -> bool:
    if isinstance(f, Atom):
        return True
    if isinstance(f, Not):
        return isinstance(f.sub, Atom)
    if isinstance(f, (And, Or)):
        return _nnf_shape_ok(f.left) and _nnf_shape_ok(f.right)
    if isinstance(f, (ForAll, Exists)):
        return _nnf_shape_ok(f.body)
    return False  # Implies / Iff must be gone


NNF_INPUTS = [
    "P(A) <-> Q(A)",
    "-(P(A) <-> Q(A))",
    "-(all x. (P(x) -> exists y. Q(y)))",
    "-(P(A) & (Q(B) | -R(C)))",
    "all x. -(P(x) <-> -Q(x))",
]


@pytest.mark.parametrize("text", NNF_INPUTS)
def test_nnf_shape_and_idempotence(text):
    f = to_nnf(parse(text))
    assert _nnf_shape_ok(f)
    assert to_nnf(f) == f


def test_nnf_iff_is_equivalent():
    rng = random.Random(3)
    for _ in range(200):
        f = random_ground_formula(rng, max_atoms=5)
        g = to_nnf(f)
        assert _nnf_shape_ok(g)
        index = {}
        collect_ground_atoms(f, index)
        collect_ground_atoms(g, index)
        masks, full = atom_masks(len(index))
        assert formula_mask(f, index, masks, full) == \
            formula_mask(g, index, masks, full)


# ---------------------------------------------------------------------------
# skolemization

def test_skolemize_top_level_existential():
    f = skolemize(to_nnf(parse("exists x. P(x)")))
    assert f == Atom("P", (Constant("sk0"),))


def test_skolemize_dependency_on_universal():
    f = skolemize(to_nnf(parse("all x. exists y. Loves(x, y)")))
    assert f == ForAll("x", Atom(
        "Loves", (Variable("x"), Application("sk0", (Variable("x"),)))))


def test_skolemize_identity_on_ground():
    f = parse("P(A)")
    assert skolemize(f) == f


def test_skolemize_two_existentials_get_distinct_names():
    f = skolemize(to_nnf(parse("(exists x. P(x)) & (exists y. Q(y))")))
    assert f == And(Atom("P", (Constant("sk0"),)),
                    Atom("Q", (Constant("sk1"),)))


def test_skolemize_shadowed_binder():
    # the inner x must not be replaced by the outer witness
    f = skolemize(to_nnf(parse("exists x. (Q(x) & all x. R(x))")))
    assert f == And(Atom("Q", (Constant("sk0"),)),
                    ForAll("x", Atom("R", (Variable("x"),))))


def test_skolem_names_skip_user_symbols():
    clauses = clausify(parse("sk0(A) & (exists x. P(x))"))
    consts = {a.name for c in clauses for l in c.literals
              for a in l.args if isinstance(a, Constant)}
    assert "sk1" in consts  # the witness dodged the user's sk0 predicate


def test_skolem_counter_shared_across_session():
    session = Clausifier()
    first = session.clausify(parse("exists x. P(x)"))
    second = session.clausify(parse("exists x. Q(x)"))
    assert first[0].literals[0].args == (Constant("sk0"),)
    assert second[0].literals[0].args == (Constant("sk1"),)


# ---------------------------------------------------------------------------
# clausification

def _clause_keys(clauses):
    return {frozenset((l.positive, l.predicate, l.args) for l in c.literals)
            for c in clauses}


def test_clausify_near_cnf():
    clauses = clausify(parse("(P(A) | Q(A)) & R(A)"))
    a = Constant("A")
    assert _clause_keys(clauses) == {
        frozenset({(True, "P", (a,)), (True, "Q", (a,))}),
        frozenset({(True, "R", (a,))}),
    }


def test_clausify_biconditional():
    clauses = clausify(parse("P(A) <-> Q(A)"))
    a = Constant("A")
    assert _clause_keys(clauses) == {
        frozenset({(False, "P", (a,)), (True, "Q", (a,))}),
        frozenset({(True, "P", (a,)), (False, "Q", (a,))}),
    }


def test_clausify_drops_tautologies():
    assert clausify(parse("P(A) | -P(A)")) == []


def test_clausify_merges_duplicate_literals():
    clauses = clausify(parse("P(A) | P(A)"))
    assert len(clauses) == 1 and len(clauses[0].literals) == 1


def test_clausify_standardizes_variables():
    clauses = clausify(parse("all x. (P(x) -> Q(x))"))
    assert clauses == [Clause(
        (Literal(False, "P", (Variable("v0"),)),
         Literal(True, "Q", (Variable("v0"),))),
        origin="derived")]


def test_clausify_origin_tag():
    clauses = clausify(parse("P(A) & Q(A)"), origin="premise:3")
    assert all(c.origin == "premise:3" for c in clauses)


def test_clausify_output_is_quantifier_free():
    clauses = clausify(parse("all x. ((exists y. P(x, y)) -> Q(x))"))
    for c in clauses:
        for lit in c.literals:
            assert isinstance(lit, Literal)


def test_clause_explosion_multiplicative():
    # OR over 15 two-literal conjunctions distributes to 2^15 clauses
    parts = [And(Atom(f"P{i}", (Constant("A"),)), Atom(f"Q{i}", (Constant("A"),)))
             for i in range(15)]
    f = parts[0]
    for p in parts[1:]:
        f = Or(f, p)
    with pytest.raises(ClauseExplosionError):
        clausify(f)


def test_clause_explosion_respects_configured_bound():
    f = And(And(Atom("P"), Atom("Q")), And(Atom("R"), Atom("S")))
    session = Clausifier(max_clauses=3)
    with pytest.raises(ClauseExplosionError):
        session.clausify(f)
    assert len(clausify(f)) == 4


def test_clausify_truth_table_equisatisfiable_small():
    rng = random.Random(11)
    for _ in range(500):
        f = random_ground_formula(rng, max_atoms=4)
        index = {}
        collect_ground_atoms(f, index)
        masks, full = atom_masks(len(index))
        assert formula_mask(f, index, masks, full) == \
            clauses_mask(clausify(f), index, masks, full)


# ---------------------------------------------------------------------------
# clause helpers

def test_make_clause_renames_and_dedups():
    lits = [Literal(True, "P", (Variable("a"), Variable("b"))),
            Literal(True, "P", (Variable("a"), Variable("b")))]
    c = make_clause(lits, origin="derived")
    assert c.literals == (Literal(True, "P", (Variable("v0"), Variable("v1"))),)


def test_is_tautology():
    p = Literal(True, "P", (Constant("A"),))
    assert is_tautology([p, p.negated()])
    assert not is_tautology([p, Literal(False, "P", (Constant("B"),))])


def test_empty_clause_renders_as_box():
    assert str(Clause((), origin="derived")) == "[]"
