"""
When should an associate ask its user?
======================================

The associate sees the world through a poor channel, the human through a
good one, and asking costs 4 units. The consult-minus-act delta per associate
reading shows where asking pays. Changing the human's channel has no effect
on any strategy that never consults.
"""

import dataclasses

import numpy as np

from infdiag import AssociateSpec, additive_value, build_associate_diagram, consultation_delta
from infdiag import force_decision, solve

spec = AssociateSpec(
    world_states=["calm", "rough", "severe"],
    world_prior=[0.5, 0.3, 0.2],
    assoc_states=["calm", "rough", "severe"],
    assoc_channel=[[0.6, 0.3, 0.1], [0.3, 0.4, 0.3], [0.1, 0.3, 0.6]],
    human_states=["calm", "rough", "severe"],
    human_channel=[[0.95, 0.05, 0.0], [0.05, 0.9, 0.05], [0.0, 0.05, 0.95]],
    action_alternatives=["proceed", "slow", "abort"],
    outcome_states=["fail", "ok"],
    outcome_model=[
        [[0.02, 0.98], [0.4, 0.6], [0.9, 0.1]],
        [[0.01, 0.99], [0.1, 0.9], [0.5, 0.5]],
        [[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]],
    ],
    act_cost=[[0, 0, 0], [5, 5, 5], [30, 30, 30]],
    cons_cost=[[0, 0, 0], [4, 4, 4]],
    value=additive_value([-100, 0]),
)

for reading, delta in consultation_delta(spec).items():
    print(f"{reading:<8} consult gain {delta:+.3f}")

# the consult-never optimum ignores the human channel entirely
rng = np.random.default_rng(0)
noisy_human = rng.dirichlet(np.ones(3), size=3).tolist()
a = solve(force_decision(build_associate_diagram(spec), "Consult", 0)).meu
scrambled = dataclasses.replace(spec, human_channel=noisy_human)
b = solve(force_decision(build_associate_diagram(scrambled), "Consult", 0)).meu
print(f"consult-never MEU, original vs scrambled human channel: {a:.12g} {b:.12g}")
