"""Small fixture models and an independent brute-force policy oracle.

The oracle reads node tables directly and enumerates every deterministic
policy; it shares no code with the engine's rollback.
"""

import itertools
import math

import numpy as np

from infdiag import (
    ChanceNode,
    DecisionNode,
    DeterministicNode,
    InfluenceDiagram,
    ValueNode,
    make_states,
    with_default_base_case,
)


def bet_pass():
    """C ~ (0.6, 0.4); bet pays 100 when C=0 and 0 otherwise, pass pays 50."""
    nodes = [
        ChanceNode("C", (), make_states(["win", "lose"]), [[0.6, 0.4]]),
        DecisionNode("D", make_states(["bet", "pass"]), 1, ()),
        ValueNode("U", ("D", "C"), [100, 0, 50, 50]),
    ]
    return InfluenceDiagram(nodes, {"C": 0})


def xy_linear():
    """Utility = level(X) + 2 level(Y); X, Y levels {0, 1}; base case 0."""
    nodes = [
        ChanceNode("X", (), make_states(["x0", "x1"], [0, 1]), [[0.5, 0.5]]),
        ChanceNode("Y", (), make_states(["y0", "y1"], [0, 1]), [[0.5, 0.5]]),
        DecisionNode("D", make_states(["only"]), 1, ()),
        ValueNode("U", ("X", "Y"), [0, 2, 1, 3]),
    ]
    return InfluenceDiagram(nodes, {"X": 0, "Y": 0})


def guessing_game():
    """Fair coin; matching the guess pays 1, otherwise 0."""
    nodes = [
        ChanceNode("S", (), make_states(["h", "t"]), [[0.5, 0.5]]),
        DecisionNode("G", make_states(["h", "t"]), 1, ()),
        ValueNode("U", ("G", "S"), [1, 0, 0, 1]),
    ]
    return InfluenceDiagram(nodes, {"S": 0})


def noisy_reading():
    """X ~ (0.6, 0.4); Y | X rows (0.8, 0.2) / (0.3, 0.7)."""
    nodes = [
        ChanceNode("X", (), make_states(["a", "b"]), [[0.6, 0.4]]),
        ChanceNode("Y", ("X",), make_states(["r0", "r1"]), [[0.8, 0.2], [0.3, 0.7]]),
        DecisionNode("D", make_states(["a", "b"]), 1, ("Y",)),
        ValueNode("U", ("D", "X"), [1, 0, 0, 1]),
    ]
    return InfluenceDiagram(nodes, {"X": 0, "Y": 0})


def _dirichlet_rows(rng, n_rows, k, sparse):
    rows = rng.dirichlet(np.ones(k), size=n_rows)
    if sparse and k > 1:
        for r in rows:
            if rng.random() < 0.3:
                r[rng.integers(k)] = 0.0
        rows = rows / rows.sum(axis=1, keepdims=True)
    return [list(map(float, r)) for r in rows]


def policy_count(diagram):
    total = 1
    for d in diagram.decisions:
        n_info = math.prod(diagram.card(x) for x in d.info)
        total *= len(d.alternatives) ** n_info
    return total


def random_diagram(rng, max_chance=3, max_decisions=2, max_states=4, max_policies=20_000, sparse=True):
    """A random valid diagram small enough for exhaustive policy enumeration."""
    while True:
        n_c = int(rng.integers(1, max_chance + 1))
        n_d = int(rng.integers(1, max_decisions + 1))
        kinds = ["c"] * n_c + ["d"] * n_d
        rng.shuffle(kinds)
        nodes, cards = [], {}
        prev_info: list[str] = []
        n_seen_d = 0
        for i, kind in enumerate(kinds):
            earlier = [n.id for n in nodes]
            if kind == "c":
                nid = f"C{i}"
                k = int(rng.integers(2, max_states + 1))
                parents = [p for p in earlier if rng.random() < 0.5][:2]
                rows = math.prod(cards[p] for p in parents)
                nodes.append(ChanceNode(nid, parents, make_states(range(k)), _dirichlet_rows(rng, rows, k, sparse)))
            else:
                n_seen_d += 1
                nid = f"D{i}"
                k = int(rng.integers(2, min(3, max_states) + 1))
                fresh = [p for p in earlier if p.startswith("C") and p not in prev_info and rng.random() < 0.5]
                info = prev_info + fresh
                nodes.append(DecisionNode(nid, make_states(range(k)), n_seen_d, info))
                prev_info = info + [nid]
            cards[nid] = k
        ids = [n.id for n in nodes]
        vparents = [p for p in ids if rng.random() < 0.6] or [ids[int(rng.integers(len(ids)))]]
        size = math.prod(cards[p] for p in vparents)
        nodes.append(ValueNode("U", vparents, rng.uniform(-10, 10, size=size).round(6)))
        diagram = with_default_base_case(InfluenceDiagram(nodes))
        if policy_count(diagram) <= max_policies:
            return diagram


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def _row(diagram, parents, states):
    row = 0
    for p in parents:
        row = row * diagram.card(p) + states[p]
    return row


def _weight(diagram, states):
    """p(chance | decisions) * utility for a total assignment, straight from the tables."""
    p = 1.0
    for n in diagram.nodes:
        if n.kind == "chance":
            r = n.cpt[_row(diagram, n.parents, states)]
            p *= r[states[n.id]] / math.fsum(r)
        elif n.kind == "deterministic":
            states[n.id] = n.table[_row(diagram, n.parents, states)]
    v = diagram.value_node
    return p * v.utilities[_row(diagram, v.parents, states)]


def brute_force_meu(diagram):
    """Max expected utility over every deterministic policy (chance + decision nodes only).

    Returns ``(meu, eu_array)`` where ``eu_array`` lists the EU of every policy.
    """
    chance = [n.id for n in diagram.chance_nodes]
    decs = diagram.decisions
    assert 1 <= len(decs) <= 2 and not diagram.deterministic_nodes
    c_space = list(itertools.product(*[range(diagram.card(c)) for c in chance]))
    d_space = list(itertools.product(*[range(len(d.alternatives)) for d in decs]))
    W = np.zeros((len(c_space),) + tuple(len(d.alternatives) for d in decs))
    for ci, cv in enumerate(c_space):
        for dv in d_space:
            states = dict(zip(chance, cv))
            states.update({d.id: a for d, a in zip(decs, dv)})
            W[(ci,) + dv] = _weight(diagram, states)

    def key(d, states):
        k = 0
        for x in d.info:
            k = k * diagram.card(x) + states[x]
        return k

    spaces = []
    for d in decs:
        n_info = math.prod(diagram.card(x) for x in d.info)
        spaces.append(np.array(list(itertools.product(range(len(d.alternatives)), repeat=n_info))))
    ci = np.arange(len(c_space))
    base_states = [dict(zip(chance, cv)) for cv in c_space]
    key1 = np.array([key(decs[0], s) for s in base_states])
    if len(decs) == 1:
        eu = W[ci[None, :], spaces[0][:, key1]].sum(axis=1)
        return float(eu.max()), eu
    out = []
    for pol1 in spaces[0]:
        d1 = pol1[key1]
        key2 = np.array([key(decs[1], {**s, decs[0].id: int(a)}) for s, a in zip(base_states, d1)])
        d2 = spaces[1][:, key2]
        out.append(W[ci[None, :], d1[None, :], d2].sum(axis=1))
    eu = np.concatenate(out)
    return float(eu.max()), eu


def relabel(diagram, node_id, perm):
    """Permute the states of a chance node: new state j is old state perm[j].

    The CPT columns, children's table rows and base case are remapped so the
    model is semantically unchanged.
    """
    inv = {old: new for new, old in enumerate(perm)}
    old = diagram[node_id]
    new_nodes = []
    for n in diagram.nodes:
        if n.id == node_id:
            states = [n.states[o] for o in perm]
            cpt = [[row[o] for o in perm] for row in n.cpt]
            new_nodes.append(ChanceNode(n.id, n.parents, states, cpt))
            continue
        if node_id not in n.inputs or n.kind == "decision":
            new_nodes.append(n)
            continue
        cards = [diagram.card(p) for p in n.parents]
        pos = n.parents.index(node_id)
        rows = list(itertools.product(*[range(c) for c in cards]))

        def old_row(new_cfg):
            cfg = list(new_cfg)
            cfg[pos] = perm[cfg[pos]]
            return rows.index(tuple(cfg))

        if n.kind == "chance":
            new_nodes.append(ChanceNode(n.id, n.parents, n.states, [n.cpt[old_row(r)] for r in rows]))
        elif n.kind == "deterministic":
            new_nodes.append(DeterministicNode(n.id, n.parents, n.states, [n.table[old_row(r)] for r in rows]))
        else:
            new_nodes.append(ValueNode(n.id, n.parents, [n.utilities[old_row(r)] for r in rows]))
    assert len(old.states) == len(perm)
    base = dict(diagram.base_case)
    base[node_id] = inv[base[node_id]]
    return InfluenceDiagram(new_nodes, base)
