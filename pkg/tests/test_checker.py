"""Tests for the product search: verdicts, counterexample lassos, replay
validation, JSON rendering, resource limits, and agreement with the
independent partition oracle."""

from __future__ import annotations

import dataclasses

import pytest

from tascheck.checker import (
    CheckOptions,
    Holds,
    Lasso,
    LimitKind,
    OracleTooLarge,
    ResourceLimit,
    Violated,
    check,
    lasso_to_json,
    partition_oracle_check,
    replay,
)
from tascheck.speclang import parse_spec
from tascheck.symbolic import Mode, SymbolicState

FROZEN = {
    # (mode, correct spec): states visited, transitions, prefix, cycle
    (Mode.LDT, True): (15600, 93984, None, None),
    (Mode.NAIVE, True): (36384, 272592, None, None),
    (Mode.LDT, False): (1410, 5374, 69, 6),
    (Mode.NAIVE, False): (2830, 11258, 130, 6),
}


class TestFixtureVerdicts:
    @pytest.mark.parametrize("mode", [Mode.LDT, Mode.NAIVE])
    def test_correct_spec_holds(self, fulfillment, mode):
        verdict, stats = check(
            fulfillment.spec,
            fulfillment.properties[0],
            CheckOptions(mode=mode),
        )
        states, transitions, _, _ = FROZEN[(mode, True)]
        assert isinstance(verdict, Holds)
        assert stats.states_visited == states
        assert stats.transitions == transitions
        assert stats.buchi_states == 8
        assert stats.peak_frontier > 0

    @pytest.mark.parametrize("mode", [Mode.LDT, Mode.NAIVE])
    def test_faulty_spec_violated_with_valid_lasso(
        self, fulfillment_faulty, mode
    ):
        verdict, stats = check(
            fulfillment_faulty.spec,
            fulfillment_faulty.properties[0],
            CheckOptions(mode=mode),
        )
        states, transitions, prefix, cycle = FROZEN[(mode, False)]
        assert isinstance(verdict, Violated)
        assert stats.states_visited == states
        assert stats.transitions == transitions
        assert len(verdict.lasso.prefix) == prefix
        assert len(verdict.lasso.cycle) == cycle
        assert replay(verdict.lasso.spec, verdict.lasso, mode)

    def test_deterministic_across_runs(self, fulfillment_faulty):
        runs = [
            check(
                fulfillment_faulty.spec,
                fulfillment_faulty.properties[0],
                CheckOptions(mode=Mode.LDT),
            )
            for _ in range(2)
        ]
        (v1, s1), (v2, s2) = runs
        assert v1.lasso.prefix == v2.lasso.prefix
        assert v1.lasso.cycle == v2.lasso.cycle
        assert v1.lasso.const_values == v2.lasso.const_values
        assert lasso_to_json(v1.lasso) == lasso_to_json(v2.lasso)
        assert dataclasses.replace(s1, wall_seconds=0.0) == (
            dataclasses.replace(s2, wall_seconds=0.0)
        )


def faulty_lasso(parsed, mode=Mode.LDT):
    verdict, _ = check(parsed.spec, parsed.properties[0], CheckOptions(mode=mode))
    assert isinstance(verdict, Violated)
    return verdict.lasso


class TestReplay:
    def test_rejects_severed_propagation(self, fulfillment_faulty):
        """Changing a propagated value in the last prefix state must break
        the carry-over into the first cycle step (or an earlier check)."""
        lasso = faulty_lasso(fulfillment_faulty)
        state, service = lasso.prefix[-1]
        next_service = lasso.spec.service(lasso.cycle[0][1])
        ordinals = lasso.navset.rooted_ordinals(next_service.propagated)
        assert ordinals
        values = list(state.values)
        values[ordinals[0]] += 1
        broken = dataclasses.replace(
            lasso,
            prefix=(
                *lasso.prefix[:-1],
                (SymbolicState(tuple(values), state.last_service), service),
            ),
        )
        assert not replay(broken.spec, broken, Mode.LDT)

    def test_rejects_mislabeled_service(self, fulfillment_faulty):
        lasso = faulty_lasso(fulfillment_faulty)
        state, original = lasso.cycle[0]
        other = next(
            s.name for s in lasso.spec.services if s.name != original
        )
        broken = dataclasses.replace(
            lasso, cycle=((state, other), *lasso.cycle[1:])
        )
        assert not replay(broken.spec, broken, Mode.LDT)

    def test_rejects_empty_cycle(self, fulfillment_faulty):
        lasso = faulty_lasso(fulfillment_faulty)
        assert not replay(
            lasso.spec, dataclasses.replace(lasso, cycle=()), Mode.LDT
        )


class TestLassoJson:
    def test_document_shape(self, fulfillment_faulty):
        lasso = faulty_lasso(fulfillment_faulty)
        doc = lasso_to_json(lasso)
        assert set(doc) == {"prefix", "cycle"}
        assert len(doc["prefix"]) == len(lasso.prefix)
        assert len(doc["cycle"]) == len(lasso.cycle)
        first = doc["prefix"][0]
        assert first["service"] == "init"
        assert set(first["assignments"]) == {
            str(e) for e in lasso.navset.exprs[lasso.navset.n_constants :]
        }

    def test_initial_status_tagged_by_constant(self, fulfillment_faulty):
        doc = lasso_to_json(faulty_lasso(fulfillment_faulty))
        assert doc["prefix"][0]["assignments"]["status"] == "Init"

    def test_anonymous_values_get_stable_tags(self, fulfillment_faulty):
        doc = lasso_to_json(faulty_lasso(fulfillment_faulty))
        tags = {
            tag
            for step in doc["prefix"] + doc["cycle"]
            for tag in step["assignments"].values()
        }
        anonymous = {t for t in tags if "#" in t}
        named = tags - anonymous
        assert named
        for tag in anonymous:
            assert tag.startswith("t")


ALTERNATOR = """
schema { relation R { id; A: VAL; } }
variables { x: R; w: VAL; }
init: w == "start";
service Set { pre: w == "start"; propagate: x; post: w == "done"; }
service Reset { pre: w == "done"; propagate: x; post: w == "start"; }
property liveness: G ((w == "start") -> F ((w == "done")));
property stuck: G ((w == "start"));
"""


class TestOracleAgreement:
    @pytest.mark.parametrize("mode", [Mode.LDT, Mode.NAIVE])
    @pytest.mark.parametrize("asm", [True, False])
    def test_small_spec_all_combos(self, mode, asm):
        parsed = parse_spec(ALTERNATOR)
        liveness, stuck = parsed.properties
        oracle_live = partition_oracle_check(parsed.spec, liveness)
        oracle_stuck = partition_oracle_check(parsed.spec, stuck)
        assert isinstance(oracle_live, Holds)
        assert isinstance(oracle_stuck, Violated)
        options = CheckOptions(mode=mode, asm=asm)
        verdict_live, _ = check(parsed.spec, liveness, options)
        verdict_stuck, _ = check(parsed.spec, stuck, options)
        assert isinstance(verdict_live, Holds)
        assert isinstance(verdict_stuck, Violated)
        assert replay(
            verdict_stuck.lasso.spec, verdict_stuck.lasso, mode
        )

    def test_oracle_refuses_large_navigation_sets(self, fulfillment):
        with pytest.raises(OracleTooLarge):
            partition_oracle_check(
                fulfillment.spec, fulfillment.properties[0]
            )


class TestLimits:
    def test_state_budget(self, fulfillment):
        verdict, stats = check(
            fulfillment.spec,
            fulfillment.properties[0],
            CheckOptions(max_states=50),
        )
        assert isinstance(verdict, ResourceLimit)
        assert verdict.kind is LimitKind.STATES
        assert verdict.states_visited == stats.states_visited

    def test_time_budget(self, fulfillment):
        verdict, _ = check(
            fulfillment.spec,
            fulfillment.properties[0],
            CheckOptions(max_seconds=0.0),
        )
        assert isinstance(verdict, ResourceLimit)
        assert verdict.kind is LimitKind.TIME

    def test_unminimized_fixture_pools_exceed_any_budget(self, fulfillment):
        """Without pool minimization the fixture's candidate valuations are
        astronomical; the search must hit its state budget, not hang."""
        verdict, _ = check(
            fulfillment.spec,
            fulfillment.properties[0],
            CheckOptions(asm=False, max_states=2000, max_seconds=30.0),
        )
        assert isinstance(verdict, ResourceLimit)
