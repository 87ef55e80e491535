import numpy as np
import pytest
from hypothesis import given, strategies as st

from infdiag import (
    ModelError,
    ScenarioConfig,
    build_mrma_diagram,
    compile_formula_node,
    evpi,
    force_decision,
    joint_size,
    make_states,
    reference_config,
    solve,
    validate,
)
from infdiag.associate import NO_REPORT
from infdiag.mrma import field_distance, no_consult_spread, plain_distance


def test_reference_structure():
    d = build_mrma_diagram()
    assert validate(d).errors == []
    kinds = [n.kind for n in d.nodes]
    assert kinds.count("chance") == 7
    assert kinds.count("deterministic") == 5
    assert kinds.count("decision") == 2 and kinds.count("value") == 1
    assert d["Consult"].info == ("AssocVideo",)
    assert d["Deviation"].info == ("AssocVideo", "Consult", "Report")
    assert d["Report"].states[-1].label == NO_REPORT


def test_reference_chance_joint():
    d = build_mrma_diagram()
    chance = np.prod([d.card(c.id) for c in d.chance_nodes])
    assert chance == 3 * 3 * 3 * 3 * 2 * 3 * 3
    assert joint_size(d) == chance * 2 * 4


def test_round_trip_band():
    cfg = reference_config()
    assert all(10 <= r <= 45 for r in cfg.round_trip_min)
    assert cfg.cons_delay_min == tuple(r + cfg.analysis_min for r in cfg.round_trip_min)


def test_field_distance_boundary():
    assert field_distance(150, 800, 300) == 0
    assert field_distance(149.999, 800, 300) == 800


def test_plain_distance_inside_field():
    assert plain_distance(0, 800, 300, 2000) == 2000 - 800


@given(
    d=st.floats(1, 5000), w=st.floats(0, 5000),
    v1=st.floats(0, 5000), v2=st.floats(0, 5000),
)
def test_geometry_monotone(d, w, v1, v2):
    lo, hi = sorted((v1, v2))
    assert field_distance(hi, d, w) <= field_distance(lo, d, w)
    assert plain_distance(hi, d, w, 2000) >= plain_distance(lo, d, w, 2000)


def test_compile_constant_formula():
    node = compile_formula_node("K", ("A",), ([1.0, 2.0, 3.0],), lambda a: 7.0)
    assert len(node.states) == 1 and node.states[0].level == 7.0
    assert list(node.table) == [0, 0, 0]


def test_compile_dedup_and_sort():
    node = compile_formula_node("S", ("A", "B"), ([0, 1], [0, 2]), lambda a, b: b - a)
    assert [s.level for s in node.states] == [-1, 0, 1, 2]
    assert list(node.table) == [1, 3, 0, 2]


def test_compile_nonfinite():
    with pytest.raises(ModelError) as info:
        compile_formula_node("S", ("A",), ([0.0, 1.0],), lambda a: 1.0 / a if a else float("inf"))
    assert info.value.code == "BAD_FORMULA_VALUE"


def test_bad_config():
    with pytest.raises(ModelError) as info:
        build_mrma_diagram(reference_config().replace(rock_prior=(0.5, 0.5, 0.5)))
    assert info.value.code == "BAD_CONFIG"
    with pytest.raises(ModelError):
        build_mrma_diagram(reference_config().replace(deviations_m=(50.0, 0.0)))
    with pytest.raises(ModelError):
        build_mrma_diagram(reference_config().replace(plain_rate_mps=0.0))


def test_config_dict_round_trip():
    cfg = reference_config().replace(observe_mars_loc=True)
    assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg


def test_single_deviation_never_consults():
    cfg = reference_config().replace(deviations_m=(0.0,))
    pol = solve(build_mrma_diagram(cfg))
    assert set(pol.rules["Consult"].values()) == {0}


def test_zero_width_takes_smallest_clearing_offset():
    cfg = reference_config().replace(width_levels_m=(0.0,), width_prior=(1.0,), deviations_m=(0.0, 50.0, 150.0))
    d = build_mrma_diagram(cfg)
    fd = d["FieldDist"]
    # rows are (Deviation, FieldDepth, FieldWidth); every deviation clears a zero-width field
    assert {fd.states[i].level for i in fd.table} == {0.0}
    pol = solve(d)
    assert set(pol.rules["Deviation"].values()) == {0}


def test_reference_policy_mixes():
    pol = solve(build_mrma_diagram())
    picks = {pol.rules["Consult"][s] for s in pol.reachable["Consult"]}
    assert picks == {0, 1}


def test_free_consultation_weakly_optimal():
    cfg = reference_config().replace(round_trip_min=(0.0, 0.0, 0.0), analysis_min=0.0)
    d = build_mrma_diagram(cfg)
    yes = solve(force_decision(d, "Consult", 1)).meu
    no = solve(force_decision(d, "Consult", 0)).meu
    assert yes >= no - 1e-9


def test_delay_dominance():
    cfg = reference_config()
    minutes = no_consult_spread(cfg) / 60.0 + 1.0
    slow = cfg.replace(round_trip_min=(minutes,) * 3, analysis_min=0.0)
    pol = solve(build_mrma_diagram(slow))
    assert set(pol.rules["Consult"].values()) == {0}


def test_evpi_width_positive():
    assert evpi(build_mrma_diagram(), "FieldWidth", "Deviation") > 0


def test_observed_mars_loc_variant():
    d = build_mrma_diagram(reference_config().replace(observe_mars_loc=True))
    assert d["Consult"].info == ("AssocVideo", "MarsLoc")
    assert validate(d).ok
    # knowing the delay can only help
    assert solve(d).meu >= solve(build_mrma_diagram()).meu - 1e-9


def test_make_states_levels_carried():
    s = make_states(["a", "b"], [1, 2])
    assert [x.level for x in s] == [1, 2]
