"""
Rover path deviation
====================

A rover crossing a site may skirt a rock field sideways or drive through it.
The associate can ask the remote operator for a second look at the field
video, at the price of a light-time delay. The full pipeline below compiles
the scenario, solves it, and runs the sensitivity, information and reduction
analyses before checking the policy by simulation.
"""

from infdiag import build_mrma_diagram, reference_config, solve
from infdiag.cli import mrma_demo_report
from infdiag.mrma import no_consult_spread

text, mixed = mrma_demo_report(reference_config(), runs=200_000, seed=20240611)
print(text)

# Free consultation: asking is never worse
cfg = reference_config().replace(round_trip_min=(0.0, 0.0, 0.0), analysis_min=0.0)
pol = solve(build_mrma_diagram(cfg))
print("\nfree consultation deltas:",
      [round(v[1] - v[0], 1) for s, v in sorted(pol.values["Consult"].items())])

# A delay longer than the whole no-consult utility spread: never ask
minutes = no_consult_spread(reference_config()) / 60 + 1
slow = reference_config().replace(round_trip_min=(minutes,) * 3, analysis_min=0.0)
pol = solve(build_mrma_diagram(slow))
print("huge delay consult choices:", set(pol.rules["Consult"].values()))
