"""
Solving a one-shot bet
======================

A coin-like event C wins with probability 0.6. Betting pays 100 on a win and
nothing otherwise; passing pays 50 for sure. The solver picks the bet with
expected utility 60, and a seeded simulation agrees.
"""

import numpy as np

from infdiag import ChanceNode, DecisionNode, InfluenceDiagram, ValueNode, make_states
from infdiag import simulate, solve, validate
from infdiag.io import render_policy

nodes = [
    ChanceNode("C", (), make_states(["win", "lose"]), [[0.6, 0.4]]),
    DecisionNode("D", make_states(["bet", "pass"]), 1, ()),
    # utilities in row-major order over (D, C)
    ValueNode("U", ("D", "C"), [100, 0, 50, 50]),
]
diagram = InfluenceDiagram(nodes, {"C": 0})
print(validate(diagram))

policy = solve(diagram)
print(render_policy(diagram, policy))

# Monte Carlo check: 200k runs with a pinned seed
rep = simulate(diagram, policy, 200_000, seed=20240611)
print(f"simulated mean {rep.mean_utility:.3f} +- {rep.std_error:.3f}")
print("within 4 standard errors:", abs(rep.mean_utility - policy.meu) <= 4 * rep.std_error)

# the exact spread of the payoff, for comparison with the standard error
print("payoff std:", np.sqrt(0.6 * 0.4) * 100)
