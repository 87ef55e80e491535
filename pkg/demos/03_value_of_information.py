"""
Value of perfect information
============================

A hidden state X is read through a noisy sensor Y before guessing X.
Observing Y already earns 0.76; seeing X itself would earn 1.0, so the
information arc X -> D is worth 0.24. Information that is already available
is worth exactly nothing.
"""

from infdiag import ChanceNode, DecisionNode, InfluenceDiagram, ValueNode, make_states
from infdiag import conditional, evpi, solve

nodes = [
    ChanceNode("X", (), make_states(["a", "b"]), [[0.6, 0.4]]),
    ChanceNode("Y", ("X",), make_states(["r0", "r1"]), [[0.8, 0.2], [0.3, 0.7]]),
    DecisionNode("D", make_states(["a", "b"]), 1, ("Y",)),
    ValueNode("U", ("D", "X"), [1, 0, 0, 1]),
]
diagram = InfluenceDiagram(nodes, {"X": 0, "Y": 0})

post = conditional(diagram, {}, {"Y": 0}, ["X"])
print("P(X | Y=r0) =", post.table)
print("MEU with the sensor:", solve(diagram).meu)
print("EVPI(X -> D):", evpi(diagram, "X", "D"))
print("EVPI(Y -> D):", evpi(diagram, "Y", "D"))
