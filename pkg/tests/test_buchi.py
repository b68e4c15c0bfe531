"""Tests for LTL normalization and the tableau translation to Büchi
automata, cross-checked against an independent lasso-semantics oracle."""

from __future__ import annotations

import random

import pytest

from oracles import all_letters, eval_lasso, random_ltl, sweep_mismatches
from tascheck.buchi import (
    TRUE_LABEL,
    accepts_lasso,
    formula_atoms,
    ltl_nnf,
    ltl_to_buchi,
)
from tascheck.model import (
    Always,
    Eventually,
    LtlAnd,
    LtlFalse,
    LtlNot,
    LtlOr,
    LtlTrue,
    Next,
    Release,
    ServiceProp,
    TasError,
    Until,
)

P = ServiceProp("p")
Q = ServiceProp("q")


def build(f):
    return ltl_to_buchi(ltl_nnf(f))


class TestNnf:
    def test_negations_pushed_to_atoms(self):
        assert ltl_nnf(LtlNot(Until(P, Q))) == Release(LtlNot(P), LtlNot(Q))
        assert ltl_nnf(LtlNot(Release(P, Q))) == Until(LtlNot(P), LtlNot(Q))
        assert ltl_nnf(LtlNot(Next(P))) == Next(LtlNot(P))
        assert ltl_nnf(LtlNot(LtlAnd(P, Q))) == LtlOr(LtlNot(P), LtlNot(Q))
        assert ltl_nnf(LtlNot(LtlTrue())) == LtlFalse()
        assert ltl_nnf(LtlNot(LtlNot(P))) == P

    def test_derived_operators_desugared(self):
        assert ltl_nnf(Always(P)) == Release(LtlFalse(), P)
        assert ltl_nnf(Eventually(P)) == Until(LtlTrue(), P)
        assert ltl_nnf(LtlNot(Always(P))) == Until(LtlTrue(), LtlNot(P))
        assert ltl_nnf(LtlNot(Eventually(P))) == Release(
            LtlFalse(), LtlNot(P)
        )

    def test_idempotent(self):
        rng = random.Random(3)
        for _ in range(200):
            f = ltl_nnf(random_ltl(rng, (P, Q), 7))
            assert ltl_nnf(f) == f

    def test_translator_requires_normal_form(self):
        with pytest.raises(TasError):
            ltl_to_buchi(LtlNot(LtlAnd(P, Q)))
        with pytest.raises(TasError):
            ltl_to_buchi(Always(P))

    def test_atom_collection(self):
        assert formula_atoms(Until(P, LtlAnd(Q, Next(P)))) == (P, Q)


class TestTrivialShapes:
    def test_true(self):
        a = build(LtlTrue())
        assert a.n_states == 1
        assert a.initial == ((TRUE_LABEL, 0),)
        assert a.transitions == (((TRUE_LABEL, 0),),)
        assert a.accepting == frozenset({0})

    def test_false(self):
        a = build(LtlFalse())
        assert a.n_states == 0
        assert a.initial == ()

    def test_always_not(self):
        a = build(Always(LtlNot(P)))
        label = frozenset({(P, False)})
        assert a.n_states == 1
        assert a.initial == ((label, 0),)
        assert a.transitions == (((label, 0),),)
        assert a.accepting == frozenset({0})

    def test_always(self):
        a = build(Always(P))
        label = frozenset({(P, True)})
        assert a.n_states == 1
        assert a.transitions == (((label, 0),),)

    def test_eventually(self):
        a = build(Eventually(P))
        hit = frozenset({(P, True)})
        assert a.n_states == 2
        assert a.initial == ((TRUE_LABEL, 0), (hit, 1))
        assert a.transitions == (
            ((TRUE_LABEL, 0), (hit, 1)),
            ((TRUE_LABEL, 1),),
        )
        assert a.accepting == frozenset({1})

    def test_until(self):
        a = build(Until(P, Q))
        hold = frozenset({(P, True)})
        hit = frozenset({(Q, True)})
        assert a.n_states == 2
        assert a.initial == ((hold, 0), (hit, 1))
        assert a.transitions == (((hold, 0), (hit, 1)), ((TRUE_LABEL, 1),))
        assert a.accepting == frozenset({1})

    def test_rebuild_is_identical(self):
        rng = random.Random(11)
        for _ in range(60):
            f = ltl_nnf(random_ltl(rng, (P, Q), 7))
            a, b = ltl_to_buchi(f), ltl_to_buchi(f)
            assert a == b


EMPTY: frozenset = frozenset()
JUST_P = frozenset({P})
JUST_Q = frozenset({Q})
BOTH = frozenset({P, Q})


class TestAcceptsLasso:
    def test_always_needs_every_cycle_letter(self):
        a = build(Always(P))
        assert accepts_lasso(a, [], [JUST_P])
        assert accepts_lasso(a, [JUST_P, BOTH], [JUST_P, JUST_P])
        assert not accepts_lasso(a, [JUST_P], [JUST_P, EMPTY])

    def test_eventually_in_prefix_suffices(self):
        a = build(Eventually(P))
        assert accepts_lasso(a, [JUST_P], [EMPTY])
        assert not accepts_lasso(a, [EMPTY], [EMPTY])

    def test_two_obligations_need_the_counter(self):
        a = build(LtlAnd(Eventually(P), Eventually(Q)))
        assert accepts_lasso(a, [], [JUST_P, JUST_Q])
        assert accepts_lasso(a, [JUST_Q], [JUST_P])
        assert not accepts_lasso(a, [], [JUST_P])

    def test_empty_cycle_rejected(self):
        a = build(LtlTrue())
        with pytest.raises(TasError):
            accepts_lasso(a, [JUST_P], [])


class TestAgainstLassoSemantics:
    """The automaton for a formula in negation normal form must accept
    exactly the ultimately periodic words satisfying the formula."""

    def test_random_formulas_sampled_words(self):
        rng = random.Random(5)
        letters = all_letters((P, Q))
        for _ in range(50):
            f = random_ltl(rng, (P, Q), 7)
            automaton = ltl_to_buchi(ltl_nnf(f))
            for _ in range(25):
                prefix = [
                    rng.choice(letters) for _ in range(rng.randint(0, 3))
                ]
                cycle = [
                    rng.choice(letters) for _ in range(rng.randint(1, 3))
                ]
                want = eval_lasso(f, prefix, cycle)
                got = accepts_lasso(automaton, prefix, cycle)
                assert want == got, (f, prefix, cycle)

    def test_random_formulas_exhaustive_short_words(self):
        rng = random.Random(29)
        letters = all_letters((P, Q))
        for _ in range(40):
            f = random_ltl(rng, (P, Q), 6)
            automaton = ltl_to_buchi(ltl_nnf(f))
            bad = sweep_mismatches(f, automaton, letters, 3, 3)
            assert not bad, (f, bad[:2])
