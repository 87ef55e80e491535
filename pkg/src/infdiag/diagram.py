"""Influence diagram data model, structural validation and graph reductions.

A diagram is an immutable collection of four node kinds:

* :class:`ChanceNode` -- a discrete random variable with a CPT given its parents,
* :class:`DeterministicNode` -- a state that is a function of its parents,
* :class:`DecisionNode` -- chosen by the decision maker after observing ``info``,
* :class:`ValueNode` -- the single utility table, to be maximized.

Tables are indexed row-major over the parent configurations in declared parent
order, with the last parent varying fastest.
"""

from __future__ import annotations

import dataclasses
import graphlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

from .errors import ModelError, ValidationError

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class State:
    label: str
    level: float | None = None


def make_states(labels: Iterable, levels: Iterable | None = None) -> tuple[State, ...]:
    """Build a state tuple from labels and optional numeric levels."""
    labels = [str(x) for x in labels]
    if levels is None:
        return tuple(State(lab) for lab in labels)
    levels = [float(v) for v in levels]
    if len(levels) != len(labels):
        raise ValueError("labels and levels differ in length")
    return tuple(State(lab, lev) for lab, lev in zip(labels, levels))


def _tuple_states(states) -> tuple[State, ...]:
    out = []
    for s in states:
        out.append(s if isinstance(s, State) else State(str(s)))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class ChanceNode:
    id: str
    parents: tuple[str, ...]
    states: tuple[State, ...]
    cpt: tuple[tuple[float, ...], ...]

    kind = "chance"

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "states", _tuple_states(self.states))
        object.__setattr__(self, "cpt", tuple(tuple(float(p) for p in row) for row in self.cpt))

    @property
    def inputs(self):
        return self.parents

    @cached_property
    def cpt_array(self) -> np.ndarray:
        """CPT as a float array with every row renormalized to sum to one."""
        arr = np.array(self.cpt, dtype=float).reshape(len(self.cpt), len(self.states))
        return arr / arr.sum(axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class DeterministicNode:
    id: str
    parents: tuple[str, ...]
    states: tuple[State, ...]
    table: tuple[int, ...]

    kind = "deterministic"

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "states", _tuple_states(self.states))
        object.__setattr__(self, "table", tuple(int(i) for i in self.table))

    @property
    def inputs(self):
        return self.parents

    @cached_property
    def table_array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class DecisionNode:
    id: str
    alternatives: tuple[State, ...]
    order: int
    info: tuple[str, ...] = ()

    kind = "decision"

    def __post_init__(self):
        object.__setattr__(self, "alternatives", _tuple_states(self.alternatives))
        object.__setattr__(self, "info", tuple(self.info))
        object.__setattr__(self, "order", int(self.order))

    @property
    def states(self):
        return self.alternatives

    @property
    def inputs(self):
        return self.info


@dataclass(frozen=True, eq=False)
class ValueNode:
    id: str
    parents: tuple[str, ...]
    utilities: tuple[float, ...]

    kind = "value"

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "utilities", tuple(float(u) for u in self.utilities))

    @property
    def inputs(self):
        return self.parents

    @cached_property
    def utility_array(self) -> np.ndarray:
        return np.array(self.utilities, dtype=float)


Node = Union[ChanceNode, DeterministicNode, DecisionNode, ValueNode]


def constant_node(node_id: str, states, index: int) -> DeterministicNode:
    """A parentless deterministic node pinned to ``states[index]``."""
    return DeterministicNode(node_id, (), states, (index,))


class Issue(NamedTuple):
    code: str
    node: str | None
    message: str


@dataclass
class ValidationReport:
    errors: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def codes(self) -> set[str]:
        return {e.code for e in self.errors}

    def error(self, code, node, message):
        self.errors.append(Issue(code, node, message))

    def warn(self, code, node, message):
        self.warnings.append(Issue(code, node, message))

    def __str__(self):
        if not self.errors and not self.warnings:
            return "valid: no errors, no warnings"
        lines = []
        for tag, issues in (("error", self.errors), ("warning", self.warnings)):
            for code, node, msg in issues:
                where = f" [{node}]" if node else ""
                lines.append(f"{tag} {code}{where}: {msg}")
        return "\n".join(lines)


@dataclass(frozen=True, eq=False)
class InfluenceDiagram:
    """Immutable influence diagram.

    Parameters
    ----------
    nodes:
        All nodes in declaration order. Declaration order is preserved by
        serialization and used to break ties in topological sorting.
    base_case:
        Map from chance-node id to the index of its base-case state.
    """

    nodes: tuple[Node, ...]
    base_case: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(
            self, "base_case", MappingProxyType({k: int(v) for k, v in self.base_case.items()})
        )

    # -- lookup -------------------------------------------------------------
    @cached_property
    def by_id(self) -> Mapping[str, Node]:
        return MappingProxyType({n.id: n for n in self.nodes})

    def __getitem__(self, node_id: str) -> Node:
        return self.by_id[node_id]

    def __contains__(self, node_id) -> bool:
        return node_id in self.by_id

    @property
    def ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def of_kind(self, kind: str) -> list[Node]:
        return [n for n in self.nodes if n.kind == kind]

    @property
    def chance_nodes(self) -> list[ChanceNode]:
        return self.of_kind("chance")

    @property
    def deterministic_nodes(self) -> list[DeterministicNode]:
        return self.of_kind("deterministic")

    @property
    def decisions(self) -> list[DecisionNode]:
        """Decision nodes sorted by their order rank."""
        return sorted(self.of_kind("decision"), key=lambda d: d.order)

    @property
    def value_node(self) -> ValueNode:
        values = self.of_kind("value")
        if len(values) != 1:
            raise ModelError("MULTI_VALUE_NODE" if values else "NO_VALUE_NODE")
        return values[0]

    def card(self, node_id: str) -> int:
        return len(self.by_id[node_id].states)

    def state_index(self, node_id: str, label: str) -> int:
        for i, s in enumerate(self.by_id[node_id].states):
            if s.label == label:
                return i
        raise ModelError("UNKNOWN_STATE", f"{node_id} has no state {label!r}", node=node_id)

    @cached_property
    def children(self) -> Mapping[str, tuple[str, ...]]:
        """Targets of parent arcs and information arcs, per node."""
        out: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            for p in n.inputs:
                if p in out:
                    out[p].append(n.id)
        return MappingProxyType({k: tuple(v) for k, v in out.items()})

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        """All node ids ordered so every arc points forward."""
        ts = graphlib.TopologicalSorter()
        for n in self.nodes:
            ts.add(n.id, *[p for p in n.inputs if p in self.by_id])
        return tuple(ts.static_order())

    def descendants(self, node_id: str) -> set[str]:
        seen: set[str] = set()
        stack = list(self.children.get(node_id, ()))
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(self.children.get(n, ()))
        return seen

    def ancestors(self, node_ids: Iterable[str]) -> set[str]:
        """``node_ids`` together with all their ancestors (parent and info arcs)."""
        seen: set[str] = set()
        stack = list(node_ids)
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(self.by_id[n].inputs)
        return seen

    # -- derived diagrams ---------------------------------------------------
    def replace(self, *new_nodes: Node, drop: Iterable[str] = (), base_case=None) -> InfluenceDiagram:
        """Copy with nodes swapped in by id (declaration position kept) and ``drop`` removed."""
        swap = {n.id: n for n in new_nodes}
        drop = set(drop)
        nodes = [swap.pop(n.id, n) for n in self.nodes if n.id not in drop]
        nodes.extend(swap.values())
        kept = {n.id for n in nodes if n.kind == "chance"}
        bc = dict(self.base_case if base_case is None else base_case)
        return InfluenceDiagram(nodes, {k: v for k, v in bc.items() if k in kept})

    def with_base_case(self, base_case: Mapping[str, int]) -> InfluenceDiagram:
        return InfluenceDiagram(self.nodes, base_case)

    @cached_property
    def _report(self) -> ValidationReport:
        return validate(self)

    def require_valid(self, allow: Iterable[str] = ()) -> None:
        """Raise :class:`ValidationError` unless the diagram validates."""
        report = self._report
        allow = set(allow)
        if any(e.code not in allow for e in report.errors):
            kept = ValidationReport([e for e in report.errors if e.code not in allow], report.warnings)
            raise ValidationError(kept)


def parent_cards(diagram: InfluenceDiagram, parents: Sequence[str]) -> tuple[int, ...]:
    return tuple(diagram.card(p) for p in parents)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _check_states(report, node):
    states = node.states
    if not states:
        report.error("BAD_STATES", node.id, "node has no states")
        return False
    labels = [s.label for s in states]
    ok = True
    if any(not lab for lab in labels):
        report.error("BAD_STATES", node.id, "empty state label")
        ok = False
    if len(set(labels)) != len(labels):
        report.error("BAD_STATES", node.id, "duplicate state labels")
        ok = False
    has_level = [s.level is not None for s in states]
    if any(has_level) and not all(has_level):
        report.error("BAD_STATES", node.id, "some but not all states carry a level")
        ok = False
    if all(has_level) and not all(math.isfinite(s.level) for s in states):
        report.error("BAD_STATES", node.id, "non-finite state level")
        ok = False
    return ok


def validate(diagram: InfluenceDiagram) -> ValidationReport:
    """Check every structural and probabilistic invariant of ``diagram``.

    The returned report lists all violations found; the diagram is accepted by
    the evaluation functions exactly when ``report.errors`` is empty.
    """
    report = ValidationReport()
    seen: dict[str, Node] = {}
    for n in diagram.nodes:
        if n.id in seen:
            report.error("DUPLICATE_ID", n.id, "node id declared twice")
        elif not n.id:
            report.error("BAD_ID", None, "empty node id")
        seen[n.id] = n

    states_ok = {n.id: _check_states(report, n) for n in diagram.nodes if n.kind != "value"}

    known = True
    for n in diagram.nodes:
        for p in n.inputs:
            if p not in seen:
                report.error("UNKNOWN_NODE", n.id, f"arc from undeclared node {p!r}")
                known = False
        if len(set(n.inputs)) != len(n.inputs):
            report.error("DUPLICATE_ARC", n.id, "repeated parent or info entry")

    values = [n for n in diagram.nodes if n.kind == "value"]
    if len(values) > 1:
        for v in values[1:]:
            report.error("MULTI_VALUE_NODE", v.id, "more than one value node")
    elif not values:
        report.error("NO_VALUE_NODE", None, "diagram has no value node")
    value_ids = {v.id for v in values}
    for n in diagram.nodes:
        for p in n.inputs:
            if p in value_ids:
                report.error("VALUE_HAS_CHILD", p, f"value node feeds {n.id!r}")

    # tables
    for n in diagram.nodes:
        if n.kind == "decision":
            continue
        if any(p not in seen or p in value_ids or not states_ok.get(p, False) for p in n.parents):
            continue
        rows = math.prod(len(seen[p].states) for p in n.parents)
        if n.kind == "chance":
            if not states_ok[n.id]:
                continue
            if len(n.cpt) != rows:
                report.error("MISSING_ROW", n.id, f"CPT has {len(n.cpt)} rows, expected {rows}")
            for r, row in enumerate(n.cpt):
                if len(row) != len(n.states):
                    report.error("MISSING_ROW", n.id, f"CPT row {r} has {len(row)} entries, expected {len(n.states)}")
                    continue
                if any(not math.isfinite(p) or p < 0 for p in row):
                    report.error("NEGATIVE_PROB", n.id, f"CPT row {r} has a negative or non-finite entry")
                    continue
                if abs(math.fsum(row) - 1.0) > ROW_SUM_TOL:
                    report.error("BAD_ROW_SUM", n.id, f"CPT row {r} sums to {math.fsum(row)!r}")
        elif n.kind == "deterministic":
            if not states_ok[n.id]:
                continue
            if len(n.table) != rows:
                report.error("MISSING_ROW", n.id, f"table has {len(n.table)} entries, expected {rows}")
            if any(not 0 <= i < len(n.states) for i in n.table):
                report.error("BAD_TABLE_INDEX", n.id, "table entry outside the state range")
        else:
            if len(n.utilities) != rows:
                report.error("MISSING_ROW", n.id, f"utility table has {len(n.utilities)} entries, expected {rows}")
            if any(not math.isfinite(u) for u in n.utilities):
                report.error("NONFINITE_UTILITY", n.id, "utility table holds a non-finite value")

    # decisions
    decisions = sorted((n for n in diagram.nodes if n.kind == "decision"), key=lambda d: d.order)
    orders = [d.order for d in decisions]
    if len(set(orders)) != len(orders):
        report.error("DUPLICATE_ORDER", None, f"decision order ranks are not unique: {orders}")

    acyclic = True
    if known:
        ts = graphlib.TopologicalSorter()
        for n in diagram.nodes:
            ts.add(n.id, *n.inputs)
        try:
            ts.prepare()
        except graphlib.CycleError as exc:
            acyclic = False
            cycle = exc.args[1]
            report.error("CYCLE", cycle[0], "cycle through " + " -> ".join(map(str, cycle)))

    for prev, cur in zip(decisions, decisions[1:]):
        missing = (set(prev.info) | {prev.id}) - set(cur.info)
        if missing:
            report.error(
                "NO_FORGETTING", cur.id,
                f"info lacks {sorted(missing)} known at earlier decision {prev.id!r}",
            )

    if known and acyclic:
        for k, d in enumerate(decisions):
            later = decisions[k + 1:]
            forbidden = diagram.descendants(d.id)
            for dj in later:
                forbidden |= {dj.id} | diagram.descendants(dj.id)
            bad = [x for x in d.info if x in forbidden]
            if bad:
                report.error("ACAUSAL_INFO", d.id, f"observes {bad}, which depend on this or a later decision")

    for n in diagram.nodes:
        if n.kind == "chance" and n.id not in diagram.base_case:
            report.error("MISSING_BASE_CASE", n.id, "no base-case state")
    for k, v in diagram.base_case.items():
        node = seen.get(k)
        if node is None or node.kind != "chance":
            report.error("BAD_BASE_CASE", k, "base case given for a non-chance node")
        elif not 0 <= v < len(node.states):
            report.error("BAD_BASE_CASE", k, f"base-case index {v} out of range")

    if known:
        for n in diagram.nodes:
            if n.kind != "value" and not diagram.children.get(n.id):
                report.warn("BARREN_NODE", n.id, "node has no outgoing arcs")
    return report


# ---------------------------------------------------------------------------
# stages and reductions
# ---------------------------------------------------------------------------

def stage_partition(diagram: InfluenceDiagram) -> list:
    """Split nodes into ``[I1, D1, I2, D2, ..., Dn, T]``.

    Information stages are tuples of node ids in declaration order; decision
    stages are the decision id. ``Ik`` holds what becomes known just before
    ``Dk``; ``T`` holds every chance or deterministic node never observed.
    """
    diagram.require_valid()
    stages: list = []
    known: set[str] = set()
    order = {nid: i for i, nid in enumerate(diagram.ids)}
    for d in diagram.decisions:
        new = sorted(set(d.info) - known, key=order.__getitem__)
        stages.append(tuple(new))
        stages.append(d.id)
        known |= set(d.info) | {d.id}
    rest = [n.id for n in diagram.nodes if n.kind in ("chance", "deterministic") and n.id not in known]
    stages.append(tuple(rest))
    return stages


def barren_prune(diagram: InfluenceDiagram) -> InfluenceDiagram:
    """Repeatedly remove non-value nodes that have no outgoing arcs."""
    diagram.require_valid()
    current = diagram
    while True:
        barren = [n.id for n in current.nodes if n.kind != "value" and not current.children[n.id]]
        if not barren:
            return current
        current = current.replace(drop=barren)


def augment_no_forgetting(diagram: InfluenceDiagram) -> InfluenceDiagram:
    """Add the information arcs that no-forgetting requires; nothing else changes."""
    known: list[str] = []
    new = []
    for d in diagram.decisions:
        info = list(d.info) + [x for x in known if x not in d.info]
        new.append(dataclasses.replace(d, info=tuple(info)))
        known = info + [d.id]
    return diagram.replace(*new)


def force_decision(diagram: InfluenceDiagram, decision: str, alternative: int) -> InfluenceDiagram:
    """Replace a decision with a constant deterministic node at ``alternative``."""
    d = diagram[decision]
    if d.kind != "decision":
        raise ModelError("NOT_A_DECISION", f"{decision!r} is a {d.kind} node", node=decision)
    return diagram.replace(constant_node(d.id, d.alternatives, alternative))


def fix_chance(diagram: InfluenceDiagram, node_id: str, index: int) -> InfluenceDiagram:
    """Replace a chance node with a deterministic constant at state ``index``."""
    n = diagram[node_id]
    if n.kind != "chance":
        raise ModelError("NOT_A_CHANCE_NODE", f"{node_id!r} is a {n.kind} node", node=node_id)
    return diagram.replace(constant_node(n.id, n.states, index))


def tabulated_node(node_id: str, parents: Sequence[str], values: Sequence[float], atol: float = 1e-9) -> DeterministicNode:
    """Deterministic node whose states are the distinct real ``values``.

    ``values`` holds one real per parent configuration (row-major, last parent
    fastest). Values within ``atol`` of each other share a state; states are
    sorted ascending and carry their value as level.
    """
    values = [float(v) for v in values]
    if any(not math.isfinite(v) for v in values):
        raise ModelError("BAD_FORMULA_VALUE", f"non-finite value for {node_id!r}", node=node_id)
    levels: list[float] = []
    for v in sorted(values):
        if not levels or v - levels[-1] > atol:
            levels.append(v)
    arr = np.array(levels)
    table = [int(np.argmin(np.abs(arr - v))) for v in values]
    labels = [format(v, ".10g") for v in levels]
    if len(set(labels)) != len(labels):
        labels = [format(v, ".17g") for v in levels]
    return DeterministicNode(node_id, tuple(parents), make_states(labels, levels), table)
