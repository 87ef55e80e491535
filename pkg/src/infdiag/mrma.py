"""Mars rover path-deviation scenario compiled into an influence diagram.

A rover reaching an obstacle field of uncertain depth (along the path) and
width (across it) chooses a lateral deviation. The field is modelled as a
rectangle centred on the nominal path. A deviation ``v`` clears a field of
width ``w`` when ``v >= w / 2``; otherwise the rover crosses the full depth at
the field rate. The detour adds ``2 v`` of plain travel (out and back).

Before choosing, the associate may pay a consultation delay to have mission
control interpret the far-field image, whose reading only reaches the
deviation decision through the gated ``Report`` node.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .associate import CONSULT_STATES, NO_REPORT
from .diagram import (
    ChanceNode,
    DecisionNode,
    DeterministicNode,
    InfluenceDiagram,
    ValueNode,
    make_states,
    tabulated_node,
)
from .engine import with_default_base_case
from .errors import ModelError


def compile_formula_node(
    node_id: str,
    parents: Sequence[str],
    levels: Sequence[Sequence[float]],
    formula: Callable[..., float],
) -> DeterministicNode:
    """Tabulate ``formula`` over every combination of the parents' levels.

    ``levels[i]`` lists the numeric levels of ``parents[i]``. The resulting
    node has one state per distinct value (merged within 1e-9), sorted, with
    each state's level equal to its value.
    """
    if len(parents) != len(levels):
        raise ModelError("BAD_FORMULA", "one level list per parent is required", node=node_id)
    values = []
    for combo in itertools.product(*levels):
        v = float(formula(*combo))
        if not math.isfinite(v):
            raise ModelError("BAD_FORMULA_VALUE", f"{node_id}{combo} = {v}", node=node_id)
        values.append(v)
    return tabulated_node(node_id, parents, values)


def field_distance(deviation: float, depth: float, width: float) -> float:
    """Distance driven inside the field."""
    return 0.0 if deviation >= width / 2.0 else depth


def plain_distance(deviation: float, depth: float, width: float, site_range: float) -> float:
    """Distance driven on the plain, including the out-and-back detour."""
    return site_range - field_distance(deviation, depth, width) + 2.0 * deviation


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical parameters of the path-deviation scenario.

    Video CPTs are indexed ``[rocks][reading]`` with readings labelled like
    the rock states. ``field_rate_mps`` is indexed ``[rocks][traction]``.
    Consultation delay per Mars location is the round trip plus a fixed
    human analysis allowance, in minutes.

    A width level of 0 stands for a field that does not actually reach across
    the nominal path, which the satellite maps cannot rule out.
    """

    site_range_m: float = 2000.0
    plain_rate_mps: float = 0.10
    depth_levels_m: tuple[float, ...] = (400.0, 800.0, 1600.0)
    depth_prior: tuple[float, ...] = (0.3, 0.5, 0.2)
    width_levels_m: tuple[float, ...] = (0.0, 300.0, 600.0)
    width_prior: tuple[float, ...] = (0.25, 0.5, 0.25)
    rock_states: tuple[str, ...] = ("small", "medium", "large")
    rock_prior: tuple[float, ...] = (0.4, 0.4, 0.2)
    traction_states: tuple[str, ...] = ("good", "poor")
    traction_prior: tuple[float, ...] = (0.7, 0.3)
    field_rate_mps: tuple[tuple[float, ...], ...] = ((0.09, 0.07), (0.05, 0.03), (0.01, 0.005))
    assoc_video_cpt: tuple[tuple[float, ...], ...] = (
        (0.7, 0.25, 0.05), (0.2, 0.6, 0.2), (0.05, 0.25, 0.7),
    )
    user_video_cpt: tuple[tuple[float, ...], ...] = (
        (0.9, 0.09, 0.01), (0.05, 0.9, 0.05), (0.01, 0.09, 0.9),
    )
    mars_loc_states: tuple[str, ...] = ("near", "mid", "far")
    mars_loc_prior: tuple[float, ...] = (0.25, 0.5, 0.25)
    round_trip_min: tuple[float, ...] = (10.0, 25.0, 45.0)
    analysis_min: float = 10.0
    deviations_m: tuple[float, ...] = (0.0, 50.0, 150.0, 400.0)
    observe_mars_loc: bool = False

    @property
    def cons_delay_min(self) -> tuple[float, ...]:
        return tuple(r + self.analysis_min for r in self.round_trip_min)

    def replace(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)

    def check(self) -> None:
        """Raise ``BAD_CONFIG`` on the first violated invariant."""
        def bad(msg):
            raise ModelError("BAD_CONFIG", msg)

        def dist(name, probs, n):
            if len(probs) != n:
                bad(f"{name} has {len(probs)} entries, expected {n}")
            if any(p < 0 for p in probs) or abs(math.fsum(probs) - 1.0) > 1e-9:
                bad(f"{name} is not a probability distribution")

        dist("depth_prior", self.depth_prior, len(self.depth_levels_m))
        dist("width_prior", self.width_prior, len(self.width_levels_m))
        dist("rock_prior", self.rock_prior, len(self.rock_states))
        dist("traction_prior", self.traction_prior, len(self.traction_states))
        dist("mars_loc_prior", self.mars_loc_prior, len(self.mars_loc_states))
        for name in ("assoc_video_cpt", "user_video_cpt"):
            rows = getattr(self, name)
            if len(rows) != len(self.rock_states):
                bad(f"{name} needs one row per rock state")
            for row in rows:
                dist(name, row, len(self.rock_states))
        if self.site_range_m <= 0:
            bad("site range must be positive")
        if self.plain_rate_mps <= 0:
            bad("plain rate must be positive")
        if len(self.field_rate_mps) != len(self.rock_states) or any(
            len(r) != len(self.traction_states) for r in self.field_rate_mps
        ):
            bad("field_rate_mps must be rocks x traction")
        if any(v <= 0 for r in self.field_rate_mps for v in r):
            bad("field rates must be positive")
        if len(self.round_trip_min) != len(self.mars_loc_states):
            bad("one round-trip delay per Mars location is required")
        if any(d < 0 for d in self.cons_delay_min) or self.analysis_min < 0:
            bad("delays must be non-negative")
        if any(d < 0 for d in self.depth_levels_m) or any(w < 0 for w in self.width_levels_m):
            bad("field dimensions must be non-negative")
        devs = self.deviations_m
        if not devs or devs[0] != 0 or any(b <= a for a, b in zip(devs, devs[1:])):
            bad("deviations must start at 0 and strictly increase")

    def to_dict(self) -> dict:
        return {f.name: _plain(getattr(self, f.name)) for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> ScenarioConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ModelError("BAD_CONFIG", f"unknown config keys {sorted(unknown)}")
        return cls(**{k: _frozen(v) for k, v in data.items()})


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v


def _frozen(v):
    if isinstance(v, list):
        return tuple(_frozen(x) for x in v)
    return v


def reference_config() -> ScenarioConfig:
    """Pinned default assessments for the scenario."""
    return ScenarioConfig()


def build_mrma_diagram(config: ScenarioConfig | None = None) -> InfluenceDiagram:
    """Compile ``config`` into the path-deviation influence diagram."""
    config = reference_config() if config is None else config
    config.check()
    rocks = make_states(config.rock_states)
    readings = make_states(config.rock_states)
    widths = config.width_levels_m
    depths = config.depth_levels_m
    devs = config.deviations_m
    R = config.site_range_m

    consult_info = ("AssocVideo",) + (("MarsLoc",) if config.observe_mars_loc else ())
    nodes = [
        ChanceNode(
            "FieldDepth", (), make_states([f"{d:g}m" for d in depths], depths), [config.depth_prior]
        ),
        ChanceNode(
            "FieldWidth", (), make_states([f"{w:g}m" for w in widths], widths), [config.width_prior]
        ),
        ChanceNode("FieldRocks", (), rocks, [config.rock_prior]),
        ChanceNode("AssocVideo", ("FieldRocks",), readings, config.assoc_video_cpt),
        ChanceNode("Traction", (), make_states(config.traction_states), [config.traction_prior]),
        ChanceNode("MarsLoc", (), make_states(config.mars_loc_states), [config.mars_loc_prior]),
        ChanceNode("UserVideo", ("FieldRocks",), readings, config.user_video_cpt),
        DecisionNode("Consult", make_states(CONSULT_STATES, (0, 1)), 1, consult_info),
        DeterministicNode(
            "Report", ("Consult", "UserVideo"),
            make_states(list(config.rock_states) + [NO_REPORT]),
            [len(rocks)] * len(rocks) + list(range(len(rocks))),
        ),
        DecisionNode(
            "Deviation", make_states([f"{v:g}m" for v in devs], devs), 2,
            consult_info + ("Consult", "Report"),
        ),
        compile_formula_node(
            "PlainDist", ("Deviation", "FieldDepth", "FieldWidth"), (devs, depths, widths),
            lambda v, d, w: plain_distance(v, d, w, R),
        ),
        compile_formula_node(
            "FieldDist", ("Deviation", "FieldDepth", "FieldWidth"), (devs, depths, widths),
            field_distance,
        ),
        tabulated_node(
            "FieldRate", ("FieldRocks", "Traction"),
            [r for row in config.field_rate_mps for r in row],
        ),
        tabulated_node("ConsDelay", ("MarsLoc",), config.cons_delay_min),
    ]
    by_id = {n.id: n for n in nodes}
    value_parents = ("Consult", "PlainDist", "FieldDist", "FieldRate", "ConsDelay")
    level_lists = [[s.level for s in by_id[p].states] for p in value_parents]
    utilities = [
        total_time_utility(c, plain, fdist, rate, delay, config.plain_rate_mps)
        for c, plain, fdist, rate, delay in itertools.product(*level_lists)
    ]
    nodes.append(ValueNode("TotalTime", value_parents, utilities))
    diagram = with_default_base_case(InfluenceDiagram(nodes))
    diagram.require_valid()
    return diagram


def total_time_utility(consult, plain, fdist, rate, delay_min, plain_rate) -> float:
    """Negated travel time in seconds, plus the consultation delay when consulting."""
    return -(plain / plain_rate + fdist / rate + (60.0 * delay_min if consult else 0.0))


def no_consult_spread(config: ScenarioConfig) -> float:
    """Range of the utility over all configurations with Consult = no."""
    diagram = build_mrma_diagram(config)
    value = diagram.value_node
    cards = [diagram.card(p) for p in value.parents]
    table = np.asarray(value.utilities).reshape(cards)
    no = table[0]
    return float(no.max() - no.min())
