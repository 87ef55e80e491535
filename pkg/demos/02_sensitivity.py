"""
Tornado sensitivity and model reduction
=======================================

Utility is level(X) + 2 level(Y). Sweeping each variable with the other held
at its base case gives swings 1 and 2, so Y carries 80% of the variance.
Fixing everything outside the top 75% pins X.
"""

from infdiag import ChanceNode, DecisionNode, InfluenceDiagram, ValueNode, make_states
from infdiag import fix_below_threshold, joint_size, solve, tornado
from infdiag.io import render_tornado_ascii, render_tornado_data

nodes = [
    ChanceNode("X", (), make_states(["x0", "x1"], [0, 1]), [[0.5, 0.5]]),
    ChanceNode("Y", (), make_states(["y0", "y1"], [0, 1]), [[0.5, 0.5]]),
    DecisionNode("D", make_states(["only"]), 1, ()),
    ValueNode("U", ("X", "Y"), [0, 2, 1, 3]),
]
diagram = InfluenceDiagram(nodes, {"X": 0, "Y": 0})

report = tornado(diagram, {"D": 0})
print(render_tornado_data(report))
print()
print(render_tornado_ascii(report, width=30))

reduced = fix_below_threshold(diagram, 0.75, {"D": 0})
print("\nfixed:", reduced.fixed)
print("joint entries:", joint_size(diagram), "->", joint_size(reduced.diagram))
print("MEU full", solve(diagram).meu, "reduced", solve(reduced.diagram).meu)
