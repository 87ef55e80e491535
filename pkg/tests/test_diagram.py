import dataclasses

import numpy as np
import pytest

from helpers import bet_pass, random_diagram
from infdiag import (
    ChanceNode,
    DecisionNode,
    InfluenceDiagram,
    ValidationError,
    ValueNode,
    augment_no_forgetting,
    barren_prune,
    build_mrma_diagram,
    make_states,
    solve,
    stage_partition,
    validate,
)
from infdiag.associate import AssociateSpec, additive_value, build_associate_diagram


def simple_associate():
    return AssociateSpec(
        world_states=["w0", "w1"],
        world_prior=[0.5, 0.5],
        assoc_states=["w0", "w1"],
        assoc_channel=[[1, 0], [0, 1]],
        human_states=["w0", "w1"],
        human_channel=[[1, 0], [0, 1]],
        action_alternatives=["a0", "a1"],
        outcome_states=["bad", "good"],
        outcome_model=[[[0, 1], [1, 0]], [[1, 0], [0, 1]]],
        act_cost=[[0, 0], [0, 0]],
        cons_cost=[[0, 0], [0, 0]],
        value=additive_value([0, 1]),
    )


def test_two_value_nodes():
    d = bet_pass()
    d2 = InfluenceDiagram(list(d.nodes) + [ValueNode("U2", ("C",), [1, 2])], d.base_case)
    assert "MULTI_VALUE_NODE" in validate(d2).codes


def test_row_sum_below_one():
    nodes = [
        ChanceNode("C", (), make_states("ab"), [[0.5, 0.4]]),
        ValueNode("U", ("C",), [0, 1]),
    ]
    assert "BAD_ROW_SUM" in validate(InfluenceDiagram(nodes, {"C": 0})).codes


def test_mrma_reference_validates():
    report = validate(build_mrma_diagram())
    assert report.errors == []


@pytest.mark.parametrize(
    "mutate, code",
    [
        (lambda ns: ns[:1] + [ChanceNode("C2", ("C", "C3"), make_states("ab"), [[1, 0]] * 4),
                              ChanceNode("C3", ("C2",), make_states("ab"), [[1, 0]] * 2)] + ns[1:], "CYCLE"),
        (lambda ns: [ChanceNode("C", (), make_states("ab"), [[0.6, 0.4], [0.5, 0.5]])] + ns[1:], "MISSING_ROW"),
        (lambda ns: [ChanceNode("C", (), make_states("ab"), [[0.6, 0.3, 0.1]])] + ns[1:], "MISSING_ROW"),
        (lambda ns: ns + [ChanceNode("Z", ("U",), make_states("ab"), [[1, 0]] * 1)], "VALUE_HAS_CHILD"),
        (lambda ns: ns[:1] + [dataclasses.replace(ns[1], info=("C",))] + ns[2:], "NO_FORGETTING"),
        (lambda ns: [ChanceNode("C", (), make_states("ab"), [[1.2, -0.2]])] + ns[1:], "NEGATIVE_PROB"),
        (lambda ns: ns + [DecisionNode("E", make_states("xy"), 1, ())], "DUPLICATE_ORDER"),
    ],
)
def test_error_codes(mutate, code):
    # mutations receive [C, D2, D1, U]
    c =ChanceNode("C", (), make_states("ab"), [[0.5, 0.5]])
    d1 = DecisionNode("D1", make_states("xy"), 1, ())
    d2 = DecisionNode("D2", make_states("xy"), 2, ("D1",))
    u = ValueNode("U", ("C", "D2"), [0, 1, 2, 3])
    diagram = InfluenceDiagram(mutate([c, d2, d1, u]), {"C": 0, "C2": 0, "C3": 0, "Z": 0})
    assert code in validate(diagram).codes


def test_acausal_info():
    nodes = [
        DecisionNode("D", make_states("xy"), 1, ()),
        ChanceNode("C", ("D",), make_states("ab"), [[1, 0], [0, 1]]),
        DecisionNode("E", make_states("xy"), 2, ("D",)),
        ValueNode("U", ("E", "C"), [0, 1, 2, 3]),
    ]
    ok = InfluenceDiagram(nodes, {"C": 0})
    assert validate(ok).ok
    # C is caused by E's predecessor D, fine; make D observe C: acausal (and cyclic)
    bad = ok.replace(DecisionNode("D", make_states("xy"), 1, ("C",)))
    assert {"ACAUSAL_INFO", "CYCLE"} & validate(bad).codes
    # a decision observing a later decision
    later = ok.replace(DecisionNode("D", make_states("xy"), 1, ("E",)))
    assert "ACAUSAL_INFO" in validate(later).codes or "CYCLE" in validate(later).codes


def test_acausal_info_without_cycle():
    # D1 observes C, which is caused by D2; D2 does not observe D1 (no-forgetting broken too)
    nodes = [
        DecisionNode("D2", make_states("xy"), 2, ()),
        ChanceNode("C", ("D2",), make_states("ab"), [[1, 0], [0, 1]]),
        DecisionNode("D1", make_states("xy"), 1, ("C",)),
        ValueNode("U", ("D1", "C"), [0, 1, 2, 3]),
    ]
    codes = validate(InfluenceDiagram(nodes, {"C": 0})).codes
    assert "ACAUSAL_INFO" in codes and "CYCLE" not in codes


def test_missing_base_case():
    d = bet_pass().with_base_case({})
    assert "MISSING_BASE_CASE" in validate(d).codes
    with pytest.raises(ValidationError):
        solve(d)


def test_bad_states():
    nodes = [
        ChanceNode("C", (), make_states(["a", "a"]), [[0.5, 0.5]]),
        ValueNode("U", ("C",), [0, 1]),
    ]
    assert "BAD_STATES" in validate(InfluenceDiagram(nodes, {"C": 0})).codes


def test_validate_is_idempotent():
    d = bet_pass().with_base_case({})
    assert validate(d) == validate(d)
    d = build_mrma_diagram()
    assert validate(d) == validate(d)


def test_row_sum_tolerance_and_renormalization():
    eps = 5e-10
    nodes = [
        ChanceNode("C", (), make_states("ab"), [[0.6 + eps, 0.4]]),
        ValueNode("U", ("C",), [0, 1]),
    ]
    d = InfluenceDiagram(nodes, {"C": 0})
    assert validate(d).ok
    row = d["C"].cpt_array[0]
    assert row[0] == (0.6 + eps) / (1.0 + eps)
    nodes[0] = ChanceNode("C", (), make_states("ab"), [[0.6 + 2e-9, 0.4]])
    assert "BAD_ROW_SUM" in validate(InfluenceDiagram(nodes, {"C": 0})).codes


def test_stage_partition_single_decision():
    nodes = [
        ChanceNode("X", (), make_states("ab"), [[0.5, 0.5]]),
        ChanceNode("Y", (), make_states("ab"), [[0.5, 0.5]]),
        DecisionNode("D", make_states("xy"), 1, ("X",)),
        ValueNode("U", ("D", "Y"), [0, 1, 2, 3]),
    ]
    stages = stage_partition(InfluenceDiagram(nodes, {"X": 0, "Y": 0}))
    assert stages == [("X",), "D", ("Y",)]


def test_stage_partition_associate_template():
    stages = stage_partition(build_associate_diagram(simple_associate()))
    assert [set(s) if isinstance(s, tuple) else s for s in stages] == [
        {"AssocObs"}, "Consult", {"Report", "Situation"}, "Action",
        {"World", "HumanObs", "Outcome", "ActCost", "ConsCost"},
    ]


def test_stage_partition_mrma():
    stages = stage_partition(build_mrma_diagram())
    assert stages[0] == ("AssocVideo",) and stages[1] == "Consult"
    assert stages[2] == ("Report",) and stages[3] == "Deviation"
    assert "FieldRocks" in stages[4]


def test_stage_partition_covers_each_node_once():
    rng = np.random.default_rng(7)
    for _ in range(30):
        d = random_diagram(rng)
        stages = stage_partition(d)
        flat = [x for s in stages if isinstance(s, tuple) for x in s]
        expected = [n.id for n in d.nodes if n.kind in ("chance", "deterministic")]
        assert sorted(flat) == sorted(expected)
        assert [s for s in stages if isinstance(s, str)] == [x.id for x in d.decisions]


def test_barren_isolated_node_removed():
    d = bet_pass()
    d2 = InfluenceDiagram(list(d.nodes) + [ChanceNode("Z", (), make_states("ab"), [[0.3, 0.7]])], {**d.base_case, "Z": 0})
    pruned = barren_prune(d2)
    assert "Z" not in pruned and validate(pruned).ok


def test_barren_chain_removed():
    d = bet_pass()
    extra = [
        ChanceNode("X", (), make_states("ab"), [[0.3, 0.7]]),
        ChanceNode("Y", ("X",), make_states("ab"), [[0.5, 0.5], [0.1, 0.9]]),
    ]
    d2 = InfluenceDiagram(list(d.nodes) + extra, {**d.base_case, "X": 0, "Y": 0})
    pruned = barren_prune(d2)
    assert "X" not in pruned and "Y" not in pruned
    assert pruned.ids == d.ids


def test_barren_mrma_unchanged():
    d = build_mrma_diagram()
    assert barren_prune(d).ids == d.ids


def test_barren_prune_preserves_meu():
    rng = np.random.default_rng(11)
    for _ in range(25):
        d = random_diagram(rng)
        extra = ChanceNode("Z", (d.chance_nodes[0].id,), make_states("abc"),
                           [[0.2, 0.3, 0.5]] * d.card(d.chance_nodes[0].id))
        d2 = InfluenceDiagram(list(d.nodes) + [extra], {**d.base_case, "Z": 0})
        assert abs(solve(barren_prune(d2)).meu - solve(d2).meu) <= 1e-12


def test_augment_no_forgetting():
    c = ChanceNode("C", (), make_states("ab"), [[0.5, 0.5]])
    d1 = DecisionNode("D1", make_states("xy"), 1, ("C",))
    d2 = DecisionNode("D2", make_states("xy"), 2, ())
    u = ValueNode("U", ("C", "D2"), [0, 1, 2, 3])
    d = InfluenceDiagram([c, d1, d2, u], {"C": 0})
    assert "NO_FORGETTING" in validate(d).codes
    fixed = augment_no_forgetting(d)
    assert validate(fixed).ok
    assert set(fixed["D2"].info) == {"C", "D1"}
