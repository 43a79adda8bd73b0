"""Summary-graph model: names, validation codes, canonical serialization."""

from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfcweave.errors import EmptyName, SchemaError
from rfcweave.graph import (
    GroundedSpan,
    State,
    SummaryGraph,
    Transition,
    canonicalize_state_name,
    deserialize,
    edge_id,
    expand_groups,
    from_json_obj,
    serialize,
    to_json_obj,
    validate,
)

_name = st.text(
    alphabet=st.sampled_from(list("ABCdef123 _-")), min_size=1, max_size=20
).filter(lambda s: any(ch.isalnum() for ch in s))


def span(quote: str = "quoted text", exact: bool = True) -> GroundedSpan:
    return GroundedSpan(
        span=(0, len(quote)),
        quote=quote,
        match_kind="exact" if exact else "fuzzy",
        similarity=1.0 if exact else 0.91,
    )


def grounded(source: str, target: str, event: str, **kwargs) -> Transition:
    kwargs.setdefault("provenance", (("seg-1", (span(),)),))
    return Transition(source=source, target=target, event=event, **kwargs)


def small_graph() -> SummaryGraph:
    return SummaryGraph(
        rfc_id="RFC1",
        states=(State("A"), State("B"), State("C")),
        transitions=(
            grounded("A", "B", "go"),
            grounded("B", "C", "stop", origin="inferred", reasoning="follows from close"),
        ),
    )


class TestCanonicalizeStateName:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("Syn Received", "SYN-RECEIVED"),
            ("wait_ctl_reply", "WAIT-CTL-REPLY"),
            ("LISTEN", "LISTEN"),
            ("  established  ", "ESTABLISHED"),
            ("Data   Sent", "DATA-SENT"),
            ("*closing*", "CLOSING"),
        ],
    )
    def test_examples(self, raw, expected):
        assert canonicalize_state_name(raw) == expected

    @pytest.mark.parametrize("raw", ["", "   ", "___", "--"])
    def test_empty_after_cleanup(self, raw):
        with pytest.raises(EmptyName):
            canonicalize_state_name(raw)

    @given(_name)
    def test_idempotent(self, raw):
        once = canonicalize_state_name(raw)
        assert canonicalize_state_name(once) == once


class TestEdgeId:
    def test_shape_and_stability(self):
        eid = edge_id("SYN-RECEIVED", "LISTEN", "rcv SYN")
        assert eid.startswith("e-") and len(eid) == 14
        assert eid == edge_id("SYN-RECEIVED", "LISTEN", "rcv SYN")

    def test_components_matter(self):
        base = edge_id("A", "B", "x")
        assert base != edge_id("B", "A", "x")
        assert base != edge_id("A", "B", "y")
        # separator prevents concatenation collisions
        assert edge_id("AB", "C", "x") != edge_id("A", "BC", "x")


class TestValidate:
    def test_clean_graph_no_violations(self):
        assert validate(small_graph()) == []

    def injected_cases(self):
        g = small_graph()
        yield "DUPLICATE_STATE", SummaryGraph(
            "R", states=(State("A"), State("A")), transitions=()
        )
        yield "BAD_STATE_KIND", SummaryGraph("R", states=(State("A", kind="weird"),))
        yield "GROUPED_WITHOUT_MEMBERS", SummaryGraph(
            "R", states=(State("G", kind="grouped"),)
        )
        yield "MEMBERS_ON_NON_GROUPED", SummaryGraph(
            "R", states=(State("A", members=("B",)),)
        )
        yield "UNKNOWN_SOURCE", SummaryGraph(
            "R", states=(State("B"),), transitions=(grounded("A", "B", "x"),)
        )
        yield "UNKNOWN_TARGET", SummaryGraph(
            "R", states=(State("A"),), transitions=(grounded("A", "B", "x"),)
        )
        yield "BAD_ORIGIN", SummaryGraph(
            "R",
            states=(State("A"), State("B")),
            transitions=(grounded("A", "B", "x", origin="hearsay"),),
        )
        yield "MISSING_REASONING", SummaryGraph(
            "R",
            states=(State("A"), State("B")),
            transitions=(grounded("A", "B", "x", origin="inferred"),),
        )
        yield "EMPTY_PROVENANCE", SummaryGraph(
            "R",
            states=(State("A"), State("B")),
            transitions=(Transition("A", "B", "x"),),
        )
        yield "DUPLICATE_TRANSITION", SummaryGraph(
            "R",
            states=(State("A"), State("B")),
            transitions=(grounded("A", "B", "x"), grounded("A", "B", "x")),
        )
        yield "EMPTY_EVENT", SummaryGraph(
            "R",
            states=(State("A"), State("B")),
            transitions=(grounded("A", "B", "  "),),
        )
        yield "BAD_MATCH_KIND", SummaryGraph(
            "R",
            states=(State("A"), State("B")),
            transitions=(
                grounded(
                    "A",
                    "B",
                    "x",
                    provenance=(
                        (
                            "seg-1",
                            (GroundedSpan((0, 1), "q", "close-enough", 0.9),),
                        ),
                    ),
                ),
            ),
        )
        yield "MATCH_KIND_SIMILARITY", SummaryGraph(
            "R",
            states=(State("A"), State("B")),
            transitions=(
                grounded(
                    "A",
                    "B",
                    "x",
                    provenance=(("seg-1", (GroundedSpan((0, 1), "q", "exact", 0.5),)),),
                ),
            ),
        )
        del g

    def test_each_injected_violation_yields_exactly_that_code(self):
        # validation completeness: one defect in, that code out
        for code, graph in self.injected_cases():
            codes = [v.code for v in validate(graph)]
            assert codes == [code], f"{code}: got {codes}"

    def test_never_raises_on_junk(self):
        graph = SummaryGraph(
            "R",
            states=(State("A", kind="nope", members=("Z",)),),
            transitions=(Transition("A", "GONE", "", origin="???"),),
        )
        violations = validate(graph)
        assert {v.code for v in violations} >= {"BAD_STATE_KIND", "UNKNOWN_TARGET"}


class TestSerialization:
    def test_round_trip(self):
        graph = small_graph()
        assert deserialize(serialize(graph)) == graph

    def test_permutation_invariant_bytes(self):
        graph = small_graph()
        rng = random.Random(4)
        states = list(graph.states)
        transitions = list(graph.transitions)
        rng.shuffle(states)
        rng.shuffle(transitions)
        shuffled = SummaryGraph(
            rfc_id=graph.rfc_id,
            states=tuple(states),
            transitions=tuple(transitions),
        )
        assert serialize(shuffled) == serialize(graph)

    def test_serialize_refuses_invalid(self):
        bad = SummaryGraph("R", states=(State("A"),), transitions=(grounded("A", "B", "x"),))
        with pytest.raises(SchemaError, match="UNKNOWN_TARGET"):
            serialize(bad)

    def test_missing_event_names_transition_index(self):
        obj = to_json_obj(small_graph())
        del obj["transitions"][1]["event"]
        with pytest.raises(SchemaError, match=r"transitions\[1\]"):
            from_json_obj(obj)

    def test_not_json_is_schema_error(self):
        with pytest.raises(SchemaError):
            deserialize("{not json")

    def test_meta_round_trips_as_object(self):
        graph = SummaryGraph("R", meta=(("model_id", "m"), ("run_id", "r")))
        data = json.loads(serialize(graph))
        assert data["meta"] == {"model_id": "m", "run_id": "r"}
        assert deserialize(serialize(graph)).meta == graph.meta

    @given(
        names=st.lists(_name.map(canonicalize_state_name), min_size=1, max_size=5, unique=True),
        seed=st.integers(0, 2**16),
    )
    @settings(max_examples=60, deadline=None)
    def test_round_trip_random_graphs(self, names, seed):
        rng = random.Random(seed)
        transitions = []
        seen = set()
        for _ in range(rng.randint(0, 6)):
            source, target = rng.choice(names), rng.choice(names)
            event = rng.choice(["open", "close", "rcv SYN", "timeout"])
            if (source, target, event) in seen:
                continue
            seen.add((source, target, event))
            transitions.append(
                grounded(
                    source,
                    target,
                    event,
                    conditions=tuple(rng.sample(["c1", "c2"], rng.randint(0, 2))),
                    actions=("ack",) if rng.random() < 0.5 else (),
                )
            )
        graph = SummaryGraph(
            "RFCX",
            states=tuple(State(n) for n in names),
            transitions=tuple(transitions),
        )
        assert deserialize(serialize(graph)) == deserialize(serialize(deserialize(serialize(graph))))
        assert serialize(deserialize(serialize(graph))) == serialize(graph)


class TestExpandGroups:
    def grouped_graph(self) -> SummaryGraph:
        return SummaryGraph(
            "RFC4341",
            states=(
                State("CLOSED"),
                State("UNCONNECTED", kind="grouped", members=("CLOSED", "LISTEN", "TIMEWAIT")),
                State("ANYWHERE", kind="any"),
            ),
            transitions=(
                grounded("UNCONNECTED", "CLOSED", "rcv DCCP-Reset"),
                grounded("ANYWHERE", "CLOSED", "giant asteroid"),
            ),
        )

    def test_members_become_states_and_edges(self):
        expanded = expand_groups(self.grouped_graph())
        names = {s.name for s in expanded.states}
        assert {"CLOSED", "LISTEN", "TIMEWAIT", "ANYWHERE"} <= names
        assert "UNCONNECTED" not in names
        triples = {(t.source, t.target, t.event) for t in expanded.transitions}
        assert {
            ("CLOSED", "CLOSED", "rcv DCCP-Reset"),
            ("LISTEN", "CLOSED", "rcv DCCP-Reset"),
            ("TIMEWAIT", "CLOSED", "rcv DCCP-Reset"),
        } <= triples

    def test_any_states_left_alone(self):
        expanded = expand_groups(self.grouped_graph())
        any_state = expanded.state("ANYWHERE")
        assert any_state is not None and any_state.kind == "any"
        assert ("ANYWHERE", "CLOSED", "giant asteroid") in {
            (t.source, t.target, t.event) for t in expanded.transitions
        }

    def test_no_groups_is_identity(self):
        graph = small_graph()
        assert expand_groups(graph) is graph

    def test_grouped_members_subset_respected(self):
        graph = SummaryGraph(
            "R",
            states=(
                State("G", kind="grouped", members=("A", "B", "C")),
                State("Z"),
            ),
            transitions=(
                grounded("G", "Z", "leave", grouped_members=("A", "B")),
            ),
        )
        expanded = expand_groups(graph)
        sources = {t.source for t in expanded.transitions}
        assert sources == {"A", "B"}
