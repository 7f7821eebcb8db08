import json

import pytest

from atlgts.cgm import (
    ALL_NATURALS,
    AllNaturals,
    ModelError,
    branching_degree,
    branching_report,
    fig2_lazy_model,
    fig3_model,
    lazy_model,
    line_model,
    load_model,
    model_to_dict,
    save_model,
    stable_bound,
)
from atlgts.formula import parse_formula
from atlgts.ordinal import OMEGA, Ordinal
from atlgts.semantics import GtsBounded, evaluate


def test_load_fig3_file():
    data = save_model(fig3_model())
    m = load_model(data)
    assert len(m.states) == 6
    assert m.props_of("q3") == frozenset({"p"})
    assert m.props_of("q0") == frozenset()
    assert m == fig3_model()


def test_save_load_roundtrip_bytes():
    m = fig3_model()
    data = save_model(m)
    assert load_model(data) == m
    assert save_model(load_model(data)) == data


def test_empty_action_set_rejected():
    raw = model_to_dict(fig3_model())
    raw["actions"]["q2"]["1"] = []
    with pytest.raises(ModelError) as info:
        load_model(json.dumps(raw))
    assert any("empty action set" in e for e in info.value.errors)


def test_missing_transition_named():
    raw = model_to_dict(fig3_model())
    del raw["transitions"]["q1"]["0"]
    with pytest.raises(ModelError) as info:
        load_model(json.dumps(raw))
    assert any("q1" in e and "0" in e and "missing transition" in e for e in info.value.errors)


def test_unknown_state_and_duplicate():
    raw = model_to_dict(fig3_model())
    raw["transitions"]["q0"]["0"] = "nowhere"
    with pytest.raises(ModelError) as info:
        load_model(json.dumps(raw))
    assert any("nowhere" in e for e in info.value.errors)

    raw = model_to_dict(fig3_model())
    raw["states"].append("q0")
    with pytest.raises(ModelError) as info:
        load_model(json.dumps(raw))
    assert any("duplicate" in e for e in info.value.errors)


def test_extra_keys_rejected():
    raw = model_to_dict(fig3_model())
    raw["comment"] = "hi"
    with pytest.raises(ModelError):
        load_model(json.dumps(raw))
    raw = model_to_dict(fig3_model())
    raw["props"]["q9"] = []
    with pytest.raises(ModelError):
        load_model(json.dumps(raw))


def test_parse_error():
    with pytest.raises(ModelError) as info:
        load_model(b"{not json")
    assert any("parse error" in e.lower() for e in info.value.errors)


def test_validation_collects_all_violations():
    raw = model_to_dict(fig3_model())
    raw["actions"]["q2"]["1"] = []
    raw["actions"]["q4"]["1"] = []
    with pytest.raises(ModelError) as info:
        load_model(json.dumps(raw))
    assert sum("empty action set" in e for e in info.value.errors) == 2


def test_branching_degree_line():
    m = fig3_model()
    assert branching_degree(m, "q0") == 1
    assert branching_degree(m, "q5") == 1  # self-loop


def test_branching_degree_enumerated():
    # 2 agents, actions {a,b} x {a,b}: three distinct targets.
    raw = {
        "agents": 2,
        "states": ["s0", "s1", "s2"],
        "props": {"s0": [], "s1": [], "s2": []},
        "actions": {
            "s0": {"1": ["a", "b"], "2": ["a", "b"]},
            "s1": {"1": ["a"], "2": ["a"]},
            "s2": {"1": ["a"], "2": ["a"]},
        },
        "transitions": {
            "s0": {"a|a": "s0", "a|b": "s1", "b|a": "s2", "b|b": "s1"},
            "s1": {"a|a": "s1"},
            "s2": {"a|a": "s2"},
        },
    }
    m = load_model(json.dumps(raw))
    # Oracle: enumerate the four profiles by hand -> {s0, s1, s2}.
    assert branching_degree(m, "s0") == 3


def test_stable_bound_value():
    assert stable_bound(fig3_model()) == Ordinal.nat(6)
    assert stable_bound(line_model(0)) == Ordinal.nat(1)


def test_stable_bound_is_stable():
    m = fig3_model()
    f = parse_formula("<<>> F p")
    at6 = evaluate(m, f, GtsBounded(Ordinal.nat(6))).labels_for(f)[0].as_dict()
    at7 = evaluate(m, f, GtsBounded(Ordinal.nat(7))).labels_for(f)[0].as_dict()
    assert at6 == at7


def test_line_model_shape():
    m = line_model(0)
    assert m.states == ("q0",)
    assert m.props_of("q0") == frozenset({"p"})
    f = parse_formula("<<>> F p")
    labels = evaluate(m, f, GtsBounded(Ordinal.nat(2))).labels_for(f)[0]
    assert labels.label("q0") == Ordinal.nat(0)

    m3 = line_model(3)
    labels3 = evaluate(m3, f, GtsBounded(Ordinal.nat(4))).labels_for(f)[0]
    assert [labels3.finite(q) for q in m3.states] == [3, 2, 1, 0]


def test_line_model_cutoff_at_small_bound():
    m = line_model(5)
    f = parse_formula("<<>> F p")
    labels = evaluate(m, f, GtsBounded(Ordinal.nat(3))).labels_for(f)[0]
    # Distance-to-goal labels with the bound cutting off anything >= 3.
    rendered = [labels.finite(q) for q in m.states]
    assert rendered == [None, None, None, 2, 1, 0]


def test_fig2_lazy_model():
    lazy = fig2_lazy_model()
    assert lazy.step("q0", ("2",)) == "2,0"
    assert lazy.step("2,0", ("0",)) == "2,1"
    assert lazy.props("3,3") == frozenset({"p"})
    assert lazy.props("3,4") == frozenset()
    assert isinstance(lazy.actions(1, "q0"), AllNaturals)
    assert lazy.actions(1, "5,1") == ("0",)
    assert lazy.props("q0") == frozenset()


def test_lazy_registry():
    assert lazy_model("fig2").name == "fig2"
    with pytest.raises(ValueError):
        lazy_model("nope")


def test_branching_report():
    report = branching_report(fig3_model())
    assert report.image_finite is True
    assert report.stable_bound == Ordinal.nat(6)
    assert report.degrees["q0"] == 1
    assert all(1 <= d <= 6 for d in report.degrees.values())


def test_transitions_total_and_functional():
    m = fig3_model()
    for qi in range(len(m.states)):
        count = 1
        for acts in m.actions[qi]:
            count *= len(acts)
        assert len(m.transitions[qi]) == count
