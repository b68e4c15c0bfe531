"""Tests for the surface language: lexer, parser, renderer, roundtrips."""

from __future__ import annotations

import random

import pytest

from oracles import random_condition
from tascheck.bench import BenchConfig, generate_spec, spec_properties
from tascheck.model import (
    Always,
    And,
    CondProp,
    ConstTerm,
    Equal,
    Exists,
    LtlNot,
    LtlOr,
    Not,
    NotEqual,
    NullTerm,
    Or,
    RelAtom,
    ServiceProp,
    Until,
    VAL,
    VarTerm,
    collect_constants,
    id_type,
)
from tascheck.speclang import (
    SpecSyntaxError,
    parse_condition,
    parse_spec,
    render_condition,
    render_ltl,
    render_spec,
)
from tascheck.symbolic import build_navigation_set


class TestParseFixture:
    def test_services_in_declaration_order(self, fulfillment):
        assert [s.name for s in fulfillment.spec.services] == [
            "EnterCustomer",
            "EnterItem",
            "CheckCredit",
            "Restock",
            "ShipItem",
        ]

    def test_variables(self, fulfillment):
        assert fulfillment.spec.variables == (
            ("cust_id", id_type("CUSTOMERS")),
            ("item_id", id_type("ITEMS")),
            ("status", VAL),
            ("instock", VAL),
        )

    def test_property_globals(self, fulfillment):
        prop = fulfillment.properties[0]
        assert prop.name == "ship_needs_stock"
        assert prop.globals_ == (("i", id_type("ITEMS")),)

    def test_post_conditions_keep_existentials(self, fulfillment):
        enter = fulfillment.spec.service("EnterCustomer")
        assert isinstance(enter.post, Exists)
        assert [n for n, _ in enter.post.bound] == ["n", "a", "r"]

    def test_faulty_variant_differs_only_in_ship_item(
        self, fulfillment, fulfillment_faulty
    ):
        correct = {s.name: s for s in fulfillment.spec.services}
        faulty = {s.name: s for s in fulfillment_faulty.spec.services}
        assert correct.keys() == faulty.keys()
        differing = [n for n in correct if correct[n] != faulty[n]]
        assert differing == ["ShipItem"]


class TestConditionGrammar:
    def test_or_binds_looser_than_and(self):
        cond = parse_condition("a == b && c == d || e == f")
        assert isinstance(cond, Or) and isinstance(cond.left, And)

    def test_implication_desugars(self):
        cond = parse_condition("a == b -> c == d")
        assert cond == Or(
            Not(Equal(VarTerm("a", ()), VarTerm("b", ()))),
            Equal(VarTerm("c", ()), VarTerm("d", ())),
        )

    def test_paths_and_null(self):
        cond = parse_condition("x.f.g != null")
        assert cond == NotEqual(VarTerm("x", ("f", "g")), NullTerm())

    def test_membership_atom(self):
        cond = parse_condition('R(x, "v", y.f)')
        assert cond == RelAtom(
            "R",
            (VarTerm("x", ()), ConstTerm("v"), VarTerm("y", ("f",))),
        )

    def test_exists_prefix(self):
        cond = parse_condition("exists n: VAL, r: Q . R(x, n, r)")
        assert isinstance(cond, Exists)
        assert cond.bound == (("n", VAL), ("r", id_type("Q")))


class TestLtlGrammar:
    def test_until_and_implication(self):
        parsed = parse_spec(
            """
        schema { relation A { id; } }
        variables { z: VAL; x: A; }
        init: true;
        service S { pre: true; propagate: ; post: true; }
        property p: G (service(S) -> ((z == "a") U (z == "b")));
        """
        )
        f = parsed.properties[0].formula
        assert isinstance(f, Always)
        assert isinstance(f.operand, LtlOr)
        assert f.operand.left == LtlNot(ServiceProp("S"))
        assert isinstance(f.operand.right, Until)

    def test_condition_atoms_must_be_parenthesized(self):
        with pytest.raises(SpecSyntaxError):
            parse_spec(
                """
            schema { relation A { id; } }
            variables { z: VAL; x: A; }
            init: true;
            service S { pre: true; propagate: ; post: true; }
            property p: G z == "a";
            """
            )


class TestErrors:
    def test_missing_propagate_clause(self):
        with pytest.raises(SpecSyntaxError):
            parse_spec(
                """
            schema { relation A { id; } }
            variables { x: A; }
            init: true;
            service S { pre: true; post: true; }
            """
            )

    def test_error_carries_position(self):
        try:
            parse_spec("schema {\n  relation A ( id; }\n}")
        except SpecSyntaxError as err:
            assert "at 2:" in str(err)  # line 2, offending column
        else:
            pytest.fail("expected a syntax error")

    def test_unterminated_string(self):
        with pytest.raises(SpecSyntaxError):
            parse_condition('z == "open')

    def test_stray_character(self):
        with pytest.raises(SpecSyntaxError):
            parse_condition("z == $")


class TestRoundtrip:
    def test_fixtures(self, fulfillment, fulfillment_faulty):
        for parsed in (fulfillment, fulfillment_faulty):
            again = parse_spec(render_spec(parsed.spec, parsed.properties))
            assert again.spec == parsed.spec
            assert again.properties == parsed.properties

    def test_generated_specs(self):
        config = BenchConfig(seed=5, max_expressions=12).validated()
        for index in range(4):
            spec = generate_spec(config, index)
            props = spec_properties(config, spec, index)
            again = parse_spec(render_spec(spec, tuple(props)))
            assert again.spec == spec
            assert again.properties == tuple(props)

    def test_random_conditions(self):
        spec = parse_spec(
            """
        schema {
          relation Q { id; C: VAL; }
          relation P { id; A: -> Q; B: VAL; }
        }
        variables { x: P; y: Q; z: VAL; }
        init: z == "k1";
        service S { pre: true; propagate: ; post: z == "k2"; }
        """
        ).spec
        navset = build_navigation_set(
            spec.schema, spec.variables, collect_constants(spec)
        )
        rng = random.Random(3)
        for _ in range(300):
            cond = random_condition(rng, navset)
            assert parse_condition(render_condition(cond)) == cond

    def test_ltl_renders_reparse(self, fulfillment):
        prop = fulfillment.properties[0]
        text = render_spec(fulfillment.spec, (prop,))
        assert render_ltl(parse_spec(text).properties[0].formula) == render_ltl(
            prop.formula
        )
