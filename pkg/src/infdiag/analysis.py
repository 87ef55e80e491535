"""Deterministic sensitivity (tornado), threshold-based model reduction and EVPI."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .diagram import InfluenceDiagram, fix_chance, validate
from .engine import solve
from .errors import ModelError


def _require_total(diagram, assignment, kind):
    ids = [n.id for n in diagram.nodes if n.kind == kind]
    missing = [i for i in ids if i not in assignment]
    if missing:
        raise ModelError("PARTIAL_ASSIGNMENT", f"no {kind} state for {missing}")
    for i in ids:
        if not 0 <= assignment[i] < diagram.card(i):
            raise ModelError("BAD_ASSIGNMENT", f"state {assignment[i]} out of range for {i!r}", node=i)


def deterministic_utility(
    diagram: InfluenceDiagram,
    decision_assignment: Mapping[str, int],
    chance_assignment: Mapping[str, int],
) -> float:
    """Value-node utility with every chance node and decision pinned; no probabilities."""
    _require_total(diagram, decision_assignment, "decision")
    _require_total(diagram, chance_assignment, "chance")
    states = {**chance_assignment, **decision_assignment}
    for nid in diagram.topological_order:
        node = diagram[nid]
        if node.kind in ("deterministic", "value"):
            cards = [diagram.card(p) for p in node.parents]
            row = int(np.ravel_multi_index([states[p] for p in node.parents], cards)) if cards else 0
            if node.kind == "value":
                return node.utilities[row]
            states[nid] = node.table[row]
    raise ModelError("NO_VALUE_NODE")


@dataclass(frozen=True)
class TornadoEntry:
    variable: str
    per_state_utilities: tuple[float, ...]
    low: float
    high: float
    swing: float
    share: float
    cumulative_share: float


@dataclass(frozen=True)
class TornadoReport:
    decision_assignment: Mapping[str, int]
    base_utility: float
    entries: tuple[TornadoEntry, ...]

    def ranking(self) -> list[str]:
        return [e.variable for e in self.entries]

    def entry(self, variable: str) -> TornadoEntry:
        for e in self.entries:
            if e.variable == variable:
                return e
        raise KeyError(variable)


def tornado(diagram: InfluenceDiagram, decision_assignment: Mapping[str, int]) -> TornadoReport:
    """One-at-a-time sweep of every chance node around the base case.

    Each variable is swept over all of its states with all other chance nodes
    at their base-case states. A variable's share of total variance is its
    squared swing over the sum of squared swings.
    """
    diagram.require_valid()
    decision_assignment = dict(decision_assignment)
    base = dict(diagram.base_case)
    base_u = deterministic_utility(diagram, decision_assignment, base)

    raw = []
    for node in diagram.chance_nodes:
        utils = []
        for s in range(len(node.states)):
            utils.append(deterministic_utility(diagram, decision_assignment, {**base, node.id: s}))
        lo, hi = min(utils), max(utils)
        raw.append((node.id, tuple(utils), lo, hi, hi - lo))
    raw.sort(key=lambda r: (-r[4], r[0]))

    squares = np.array([r[4] ** 2 for r in raw])
    cum = np.cumsum(squares)
    total = cum[-1] if len(cum) else 0.0
    entries = []
    for r, sq, c in zip(raw, squares, cum):
        share = float(sq / total) if total > 0 else 0.0
        cshare = float(c / total) if total > 0 else 0.0
        entries.append(TornadoEntry(r[0], r[1], r[2], r[3], r[4], share, cshare))
    return TornadoReport(decision_assignment, base_u, tuple(entries))


class Reduction(NamedTuple):
    diagram: InfluenceDiagram
    fixed: tuple[str, ...]
    report: TornadoReport


def fix_below_threshold(
    diagram: InfluenceDiagram, threshold: float, decision_assignment: Mapping[str, int]
) -> Reduction:
    """Pin the low-variance chance nodes at their base-case states.

    Keeps the shortest prefix of the tornado ranking whose cumulative share
    reaches ``threshold``; every other chance node becomes a deterministic
    constant, so downstream tables keep their parent signatures.
    """
    if not 0.0 < threshold <= 1.0:
        raise ModelError("BAD_THRESHOLD", f"threshold must lie in (0, 1], got {threshold!r}")
    report = tornado(diagram, decision_assignment)
    keep = set()
    for e in report.entries:
        if e.swing <= 0:
            break
        keep.add(e.variable)
        if e.cumulative_share >= threshold:
            break
    fixed = tuple(e.variable for e in report.entries if e.variable not in keep)
    reduced = diagram
    for var in fixed:
        reduced = fix_chance(reduced, var, diagram.base_case[var])
    reduced.require_valid()
    return Reduction(reduced, fixed, report)


def add_information(diagram: InfluenceDiagram, variable: str, decision: str) -> InfluenceDiagram:
    """Make ``variable`` observed at ``decision`` and every later decision."""
    if variable not in diagram:
        raise ModelError("UNKNOWN_NODE", f"{variable!r} is not in the diagram", node=variable)
    target = diagram[decision]
    if target.kind != "decision":
        raise ModelError("NOT_A_DECISION", f"{decision!r} is a {target.kind} node", node=decision)
    new = [
        dataclasses.replace(d, info=d.info + (variable,))
        for d in diagram.decisions
        if d.order >= target.order and variable not in d.info
    ]
    return diagram.replace(*new)


def evpi(diagram: InfluenceDiagram, variable: str, decision: str) -> float:
    """Expected value of perfect information about ``variable`` before ``decision``.

    The MEU gain from adding an information arc from the variable to the
    decision (and to all later decisions, which keeps no-forgetting intact).
    """
    diagram.require_valid()
    augmented = add_information(diagram, variable, decision)
    if all(augmented[d.id].info == d.info for d in diagram.decisions):
        return 0.0
    report = validate(augmented)
    if not report.ok:
        raise ModelError(
            "ACAUSAL_INFO",
            f"observing {variable!r} at {decision!r} is not admissible: " + "; ".join(
                e.message for e in report.errors
            ),
            node=variable,
        )
    return solve(augmented).meu - solve(diagram).meu


__all__ = [
    "TornadoEntry",
    "TornadoReport",
    "Reduction",
    "deterministic_utility",
    "tornado",
    "fix_below_threshold",
    "add_information",
    "evpi",
]
