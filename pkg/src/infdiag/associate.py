"""Builder for the generic associate-system consultation diagram.

The associate observes the world imperfectly (``AssocObs``) and decides whether
to ``Consult`` the human user. The human's own observation (``HumanObs``) only
reaches the ``Action`` decision through the deterministic ``Report`` node, which
copies ``HumanObs`` when consulted and otherwise sits in the ``"no-report"``
sentinel state. ``Situation`` fuses the associate's observation with the report.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .diagram import (
    ChanceNode,
    DecisionNode,
    DeterministicNode,
    InfluenceDiagram,
    ValueNode,
    make_states,
    tabulated_node,
)
from .engine import solve, with_default_base_case
from .errors import ModelError

NO_REPORT = "no-report"
CONSULT_STATES = ("no", "yes")


def additive_value(outcome_utility: Sequence[float]) -> Callable[[int, float, float], float]:
    """Value = utility of the outcome minus action cost minus consultation cost."""
    table = [float(u) for u in outcome_utility]
    return lambda outcome, act_cost, cons_cost: table[outcome] - act_cost - cons_cost


@dataclass(frozen=True)
class AssociateSpec:
    """Numerical content of an associate consultation model.

    Tables are nested lists with rows in the order of the stated parents:
    ``assoc_channel``/``human_channel`` are indexed ``[world]``,
    ``outcome_model`` and ``act_cost`` ``[action][world]``, ``cons_cost``
    ``[consult][world]`` with ``consult`` ordered ``(no, yes)``. ``fusion`` maps
    each ``(AssocObs, Report)`` configuration to a ``Situation`` state index;
    when omitted and the two observation channels share labels, the situation
    is the human's report if one exists and the associate's reading otherwise.
    ``value(outcome_index, act_cost, cons_cost)`` gives the utility.
    """

    world_states: Sequence[str]
    world_prior: Sequence[float]
    assoc_states: Sequence[str]
    assoc_channel: Sequence[Sequence[float]]
    human_states: Sequence[str]
    human_channel: Sequence[Sequence[float]]
    action_alternatives: Sequence[str]
    outcome_states: Sequence[str]
    outcome_model: Sequence[Sequence[Sequence[float]]]
    act_cost: Sequence[Sequence[float]]
    cons_cost: Sequence[Sequence[float]]
    value: Callable[[int, float, float], float]
    situation_states: Sequence[str] | None = None
    fusion: Sequence[int] | None = None


def _default_fusion(spec):
    if list(spec.assoc_states) != list(spec.human_states):
        raise ModelError("MISSING_FUSION", "fusion table required when observation labels differ")
    labels = list(spec.assoc_states)
    table = []
    for a in range(len(labels)):
        for r in range(len(labels) + 1):
            table.append(a if r == len(labels) else r)
    return labels, table


def build_associate_diagram(spec: AssociateSpec) -> InfluenceDiagram:
    """Compile an :class:`AssociateSpec` into a validated influence diagram."""
    n_world = len(spec.world_states)
    n_act = len(spec.action_alternatives)
    cons = np.asarray(spec.cons_cost, dtype=float)
    if cons.shape != (2, n_world):
        raise ModelError("MISSING_ROW", f"cons_cost must be 2 x {n_world}", node="ConsCost")
    if np.any(cons[0] != 0.0):
        raise ModelError("BAD_CONS_COST", "consultation cost must be zero when not consulting", node="ConsCost")
    act = np.asarray(spec.act_cost, dtype=float)
    if act.shape != (n_act, n_world):
        raise ModelError("MISSING_ROW", f"act_cost must be {n_act} x {n_world}", node="ActCost")

    if spec.fusion is None:
        situation, fusion = _default_fusion(spec)
    else:
        situation, fusion = list(spec.situation_states), list(spec.fusion)

    n_human = len(spec.human_states)
    report_table = [n_human] * n_human + list(range(n_human))
    outcome_rows = [row for per_action in spec.outcome_model for row in per_action]

    nodes = [
        ChanceNode("World", (), make_states(spec.world_states), [spec.world_prior]),
        ChanceNode("AssocObs", ("World",), make_states(spec.assoc_states), spec.assoc_channel),
        ChanceNode("HumanObs", ("World",), make_states(spec.human_states), spec.human_channel),
        DecisionNode("Consult", make_states(CONSULT_STATES, (0, 1)), 1, ("AssocObs",)),
        DeterministicNode(
            "Report", ("Consult", "HumanObs"),
            make_states(list(spec.human_states) + [NO_REPORT]), report_table,
        ),
        DeterministicNode("Situation", ("AssocObs", "Report"), make_states(situation), fusion),
        DecisionNode(
            "Action", make_states(spec.action_alternatives), 2,
            ("AssocObs", "Consult", "Report", "Situation"),
        ),
        ChanceNode("Outcome", ("Action", "World"), make_states(spec.outcome_states), outcome_rows),
        tabulated_node("ActCost", ("Action", "World"), act.ravel()),
        tabulated_node("ConsCost", ("Consult", "World"), cons.ravel()),
    ]
    act_node, cons_node = nodes[-2], nodes[-1]
    utilities = []
    for o in range(len(spec.outcome_states)):
        for a in act_node.states:
            for c in cons_node.states:
                utilities.append(spec.value(o, a.level, c.level))
    nodes.append(ValueNode("Value", ("Outcome", "ActCost", "ConsCost"), utilities))
    diagram = with_default_base_case(InfluenceDiagram(nodes))
    diagram.require_valid()
    return diagram


def consultation_delta(spec: AssociateSpec) -> dict[str, float | None]:
    """Gain from consulting, per associate observation.

    For each ``AssocObs`` state: conditional expected utility of consulting
    minus that of not consulting, each followed by the optimal action policy.
    Observations with zero probability map to ``None``.
    """
    diagram = build_associate_diagram(spec)
    policy = solve(diagram)
    values = policy.values["Consult"]
    out: dict[str, float | None] = {}
    for i, label in enumerate(spec.assoc_states):
        v = values.get((i,))
        out[label] = None if v is None else v[1] - v[0]
    return out
