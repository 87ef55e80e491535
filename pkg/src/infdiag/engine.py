"""Exact evaluation of influence diagrams by joint enumeration.

Every routine here enumerates the joint configuration space of the free
variables (chance nodes and decisions), resolves deterministic nodes from their
tables, and works on flat numpy columns. Summation order is fixed by the
enumeration order, so results are bitwise reproducible.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

import numpy as np

from .diagram import InfluenceDiagram
from .errors import ModelError, ResourceError

DEFAULT_MAX_JOINT = 10**8
MAX_JOINT_ENV = "INFDIAG_MAX_JOINT"
# relative slack under which two alternatives count as tied
TIE_RTOL = 1e-12


def max_joint() -> int:
    """Joint-size cap, overridable through the ``INFDIAG_MAX_JOINT`` variable."""
    raw = os.environ.get(MAX_JOINT_ENV)
    return int(float(raw)) if raw else DEFAULT_MAX_JOINT


def joint_size(diagram: InfluenceDiagram) -> int:
    """Number of rows enumerated by :func:`solve`: chance times decision configurations."""
    return math.prod(len(n.states) for n in diagram.nodes if n.kind in ("chance", "decision"))


# ---------------------------------------------------------------------------
# column helpers
# ---------------------------------------------------------------------------

def _row_index(diagram, parents, cols, n):
    if not parents:
        return np.zeros(n, dtype=np.int64)
    cards = [diagram.card(p) for p in parents]
    return np.ravel_multi_index([cols[p] for p in parents], cards)


def _grid(diagram, ids, cap=None):
    cards = [diagram.card(i) for i in ids]
    n = math.prod(cards)
    cap = max_joint() if cap is None else cap
    if n > cap:
        raise ResourceError("JOINT_TOO_LARGE", f"joint has {n} entries, cap is {cap}")
    if not ids:
        return {}, 1
    grid = np.indices(cards, dtype=np.int64).reshape(len(ids), -1)
    return {i: grid[k] for k, i in enumerate(ids)}, n


def _forward(diagram, cols, n, decide=None, within=None):
    """Fill deterministic (and, via ``decide``, decision) columns in topological order."""
    for nid in diagram.topological_order:
        if within is not None and nid not in within:
            continue
        node = diagram[nid]
        if node.kind == "deterministic":
            cols[nid] = node.table_array[_row_index(diagram, node.parents, cols, n)]
        elif node.kind == "decision" and nid not in cols:
            cols[nid] = decide(node, cols)


def _probability(diagram, cols, n, within=None):
    prob = np.ones(n)
    for node in diagram.chance_nodes:
        if within is not None and node.id not in within:
            continue
        rows = _row_index(diagram, node.parents, cols, n)
        prob *= node.cpt_array[rows, cols[node.id]]
    return prob


def _utility(diagram, cols, n):
    v = diagram.value_node
    return v.utility_array[_row_index(diagram, v.parents, cols, n)]


def _argmax_ties(values):
    best = values.max(axis=1, keepdims=True)
    slack = TIE_RTOL * (1.0 + np.abs(best))
    return np.argmax(values >= best - slack, axis=1)


# ---------------------------------------------------------------------------
# probabilities
# ---------------------------------------------------------------------------

def _check_assignment(diagram, assignment, kinds):
    missing = [n.id for n in diagram.nodes if n.kind in kinds and n.id not in assignment]
    if missing:
        raise ModelError("PARTIAL_ASSIGNMENT", f"no state given for {missing}")
    for nid, idx in assignment.items():
        if nid not in diagram:
            raise ModelError("UNKNOWN_NODE", f"{nid!r} is not in the diagram", node=nid)
        if not 0 <= idx < diagram.card(nid):
            raise ModelError("BAD_ASSIGNMENT", f"state {idx} out of range for {nid!r}", node=nid)


def joint_probability(diagram: InfluenceDiagram, assignment: Mapping[str, int]) -> float:
    """Product of chance-node CPT entries under a total assignment.

    Returns 0 when a deterministic node is assigned a state its table does not
    produce for the assigned parents.
    """
    diagram.require_valid()
    _check_assignment(diagram, assignment, ("chance", "deterministic", "decision"))
    p = 1.0
    for node in diagram.nodes:
        if node.kind not in ("chance", "deterministic"):
            continue
        cards = [diagram.card(q) for q in node.parents]
        row = int(np.ravel_multi_index([assignment[q] for q in node.parents], cards)) if cards else 0
        if node.kind == "deterministic":
            if node.table[row] != assignment[node.id]:
                return 0.0
        else:
            p *= float(node.cpt_array[row, assignment[node.id]])
    return p


@dataclass(frozen=True, eq=False)
class Posterior:
    """Distribution over the joint states of ``variables``.

    ``table`` has one axis per variable. When the evidence has zero prior mass,
    ``zero_evidence`` is set and the table is all zeros.
    """

    variables: tuple[str, ...]
    table: np.ndarray
    zero_evidence: bool = False
    evidence_mass: float = 1.0

    def __getitem__(self, states):
        return float(self.table[states])


def _probabilistic_closure(diagram, ids):
    seen: set[str] = set()
    stack = list(ids)
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        node = diagram[nid]
        if node.kind != "decision":
            stack.extend(node.parents)
    return seen


def conditional(
    diagram: InfluenceDiagram,
    decided: Mapping[str, int],
    observed: Mapping[str, int],
    query: Sequence[str],
    *,
    _checked: bool = True,
) -> Posterior:
    """P(query | observed, decided) over the ancestral closure of observed and query.

    Nodes outside the closure sum out to one, so decisions that do not influence
    the query need no value. Every decision inside the closure must appear in
    ``decided``; otherwise ``ACAUSAL_QUERY`` is raised.
    """
    if _checked:
        diagram.require_valid()
    if isinstance(query, (set, frozenset)):
        order = {nid: i for i, nid in enumerate(diagram.ids)}
        query = sorted(query, key=order.__getitem__)
    query = tuple(query)
    closure = _probabilistic_closure(diagram, list(observed) + list(query))
    undecided = [nid for nid in closure if diagram[nid].kind == "decision" and nid not in decided]
    if undecided:
        raise ModelError("ACAUSAL_QUERY", f"query depends on unmade decisions {sorted(undecided)}")
    if any(diagram[nid].kind == "value" for nid in closure):
        raise ModelError("ACAUSAL_QUERY", "the value node cannot be queried or observed")

    free = [n.id for n in diagram.chance_nodes if n.id in closure]
    cols, n = _grid(diagram, free)
    for d, idx in decided.items():
        if d in closure:
            cols[d] = np.full(n, int(idx), dtype=np.int64)
    _forward(diagram, cols, n, within=closure)
    prob = _probability(diagram, cols, n, within=closure)
    for nid, idx in observed.items():
        prob = np.where(cols[nid] == idx, prob, 0.0)

    shape = tuple(diagram.card(q) for q in query)
    key = _row_index(diagram, query, cols, n)
    table = np.bincount(key, weights=prob, minlength=math.prod(shape)).reshape(shape)
    mass = float(table.sum())
    if mass == 0.0:
        return Posterior(query, np.zeros(shape), True, 0.0)
    return Posterior(query, table / mass, False, mass)


def default_base_case(diagram: InfluenceDiagram) -> dict[str, int]:
    """Mode of each chance node's marginal prior, lowest index on ties.

    Decisions that influence a chance node are held at alternative 0.
    """
    decided = {d.id: 0 for d in diagram.decisions}
    out = {}
    for node in diagram.chance_nodes:
        post = conditional(diagram, decided, {}, [node.id], _checked=False)
        out[node.id] = int(_argmax_ties(post.table[None, :])[0])
    return out


def with_default_base_case(diagram: InfluenceDiagram) -> InfluenceDiagram:
    """Fill base-case entries missing from ``diagram`` with :func:`default_base_case`."""
    diagram.require_valid(allow={"MISSING_BASE_CASE"})
    bc = default_base_case(diagram)
    bc.update(diagram.base_case)
    return diagram.with_base_case(bc)


# ---------------------------------------------------------------------------
# policies
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Policy:
    """Tabular strategy: for each decision, information state -> alternative index.

    Information states are tuples of state indices ordered like ``info[decision]``.
    ``values`` holds, for every reachable information state, the conditional
    expected utility of each alternative when later decisions follow this policy.
    """

    rules: Mapping[str, Mapping[tuple, int]]
    info: Mapping[str, tuple[str, ...]]
    meu: float = math.nan
    reachable: Mapping[str, frozenset] = field(default_factory=dict)
    values: Mapping[str, Mapping[tuple, tuple[float, ...]]] = field(default_factory=dict)

    def choice(self, decision: str, info_state) -> int:
        return self.rules[decision][tuple(info_state)]

    def decisions(self):
        return list(self.rules)

    def is_constant(self, decision: str, only_reachable: bool = True) -> bool:
        states = self.reachable.get(decision) if only_reachable else None
        picks = {a for s, a in self.rules[decision].items() if states is None or s in states}
        return len(picks) <= 1

    @classmethod
    def from_rules(
        cls, diagram: InfluenceDiagram, rules: Mapping[str, int | Callable[[tuple], int]]
    ) -> Policy:
        """Build a total policy; each entry is a constant alternative or a function of the info state."""
        table, info = {}, {}
        for d in diagram.decisions:
            rule = rules[d.id]
            cards = [diagram.card(x) for x in d.info]
            states = [tuple(int(i) for i in s) for s in np.ndindex(*cards)] if cards else [()]
            table[d.id] = {s: (rule if isinstance(rule, int) else int(rule(s))) for s in states}
            info[d.id] = d.info
        return cls(table, info)


def _freeze(mapping):
    return MappingProxyType(dict(mapping))


def solve(diagram: InfluenceDiagram, cap: int | None = None) -> Policy:
    """Maximum-expected-utility policy by backward induction over decisions.

    The joint over chance nodes and decisions is enumerated once. Decisions are
    then processed last to first: for each information state the utility mass
    of every alternative is summed over the rows still consistent with the
    already-fixed later decisions, the best alternative is recorded (ties go to
    the lowest index) and rows choosing anything else are discarded.
    """
    diagram.require_valid()
    free = [n.id for n in diagram.nodes if n.kind in ("chance", "decision")]
    cols, n = _grid(diagram, free, cap)
    _forward(diagram, cols, n)
    prob = _probability(diagram, cols, n)
    weighted = prob * _utility(diagram, cols, n)

    alive = np.ones(n, dtype=bool)
    rules, reach, values, info = {}, {}, {}, {}
    for d in reversed(diagram.decisions):
        cards = [diagram.card(x) for x in d.info]
        n_keys = math.prod(cards)
        k = len(d.alternatives)
        key = _row_index(diagram, d.info, cols, n)
        cell = (key * k + cols[d.id])[alive]
        q = np.bincount(cell, weights=weighted[alive], minlength=n_keys * k).reshape(n_keys, k)
        m = np.bincount(cell, weights=prob[alive], minlength=n_keys * k).reshape(n_keys, k)
        reachable = m.max(axis=1) > 0
        cond = np.divide(q, m, out=np.zeros_like(q), where=m > 0)
        choice = np.where(reachable, _argmax_ties(cond), 0)
        alive &= cols[d.id] == choice[key]

        states = [tuple(int(i) for i in s) for s in np.ndindex(*cards)] if cards else [()]
        rules[d.id] = _freeze({s: int(choice[j]) for j, s in enumerate(states)})
        reach[d.id] = frozenset(s for j, s in enumerate(states) if reachable[j])
        values[d.id] = _freeze(
            {s: tuple(float(v) for v in cond[j]) for j, s in enumerate(states) if reachable[j]}
        )
        info[d.id] = d.info

    meu = float(np.sum(weighted[alive]))
    order = [d.id for d in diagram.decisions]
    return Policy(
        _freeze({d: rules[d] for d in order}),
        _freeze({d: info[d] for d in order}),
        meu,
        _freeze(reach),
        _freeze(values),
    )


def _policy_columns(diagram, policy, cols, n):
    """Resolve all nodes under ``policy``; returns the rows where a rule was missing."""
    missing = np.zeros(n, dtype=bool)
    lookup = {}
    for d in diagram.decisions:
        if d.id not in policy.rules:
            raise ModelError("INCOMPLETE_POLICY", f"no rules for decision {d.id!r}", node=d.id)
        order = tuple(policy.info.get(d.id, d.info))
        if set(order) != set(d.info) or len(order) != len(d.info):
            raise ModelError("POLICY_MISMATCH", f"policy info for {d.id!r} differs from the diagram", node=d.id)
        cards = [diagram.card(x) for x in order]
        table = np.full(math.prod(cards), -1, dtype=np.int64)
        for state, alt in policy.rules[d.id].items():
            if len(state) != len(order) or not all(0 <= s < c for s, c in zip(state, cards)):
                raise ModelError("POLICY_MISMATCH", f"bad information state {state} for {d.id!r}", node=d.id)
            if not 0 <= alt < len(d.alternatives):
                raise ModelError("POLICY_MISMATCH", f"alternative {alt} out of range for {d.id!r}", node=d.id)
            table[int(np.ravel_multi_index(state, cards)) if cards else 0] = alt
        lookup[d.id] = (order, table)

    def decide(node, cols):
        nonlocal missing
        order, table = lookup[node.id]
        pick = table[_row_index(diagram, order, cols, n)]
        missing |= pick < 0
        return np.where(pick < 0, 0, pick)

    _forward(diagram, cols, n, decide=decide)
    return missing


def expected_utility(diagram: InfluenceDiagram, policy: Policy) -> float:
    """Expected utility of following ``policy``, by enumeration of all chance states."""
    diagram.require_valid()
    free = [nd.id for nd in diagram.chance_nodes]
    cols, n = _grid(diagram, free)
    missing = _policy_columns(diagram, policy, cols, n)
    prob = _probability(diagram, cols, n)
    if np.any(missing & (prob > 0)):
        raise ModelError("INCOMPLETE_POLICY", "policy lacks a rule for a reachable information state")
    return float(np.sum(prob * _utility(diagram, cols, n)))


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SimReport:
    runs: int
    mean_utility: float
    std_error: float
    seed: int
    traces: Mapping[str, np.ndarray] | None = None


def simulate(
    diagram: InfluenceDiagram,
    policy: Policy,
    runs: int,
    seed: int,
    keep_traces: bool = False,
) -> SimReport:
    """Monte Carlo estimate of the policy's expected utility.

    Chance nodes are sampled forward in topological order with a PCG64 stream
    seeded by ``seed``; identical inputs give identical traces.
    """
    diagram.require_valid()
    runs = int(runs)
    if runs <= 0:
        raise ModelError("EMPTY_RUN", f"runs must be positive, got {runs}")
    rng = np.random.default_rng(seed)
    cols: dict[str, np.ndarray] = {}
    missing = np.zeros(runs, dtype=bool)
    lookup = {}
    for d in diagram.decisions:
        order = tuple(policy.info.get(d.id, d.info))
        cards = [diagram.card(x) for x in order]
        table = np.full(math.prod(cards), -1, dtype=np.int64)
        for state, alt in policy.rules[d.id].items():
            table[int(np.ravel_multi_index(state, cards)) if cards else 0] = alt
        lookup[d.id] = (order, table)

    for nid in diagram.topological_order:
        node = diagram[nid]
        if node.kind == "chance":
            rows = _row_index(diagram, node.parents, cols, runs)
            cum = np.cumsum(node.cpt_array[rows], axis=1)
            cum /= cum[:, -1:]
            u = rng.random(runs)
            cols[nid] = np.count_nonzero(cum <= u[:, None], axis=1).astype(np.int64)
        elif node.kind == "deterministic":
            cols[nid] = node.table_array[_row_index(diagram, node.parents, cols, runs)]
        elif node.kind == "decision":
            order, table = lookup[nid]
            pick = table[_row_index(diagram, order, cols, runs)]
            missing |= pick < 0
            cols[nid] = np.where(pick < 0, 0, pick)
    if missing.any():
        raise ModelError("INCOMPLETE_POLICY", "policy lacks a rule for a sampled information state")

    util = _utility(diagram, cols, runs)
    # shifting by the first sample keeps a constant sample's mean exact
    shifted = util - util[0]
    mean = float(util[0] + shifted.mean())
    std = float(shifted.std(ddof=1)) if runs > 1 else 0.0
    traces = None
    if keep_traces:
        traces = _freeze({**{k: v.copy() for k, v in cols.items()}, "__utility__": util})
    return SimReport(runs, mean, std / math.sqrt(runs), int(seed), traces)
