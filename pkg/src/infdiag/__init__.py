"""Exact decision engine for discrete influence diagrams with an associate-system
consultation model and the Mars rover path-deviation scenario."""

from .analysis import (
    TornadoEntry,
    TornadoReport,
    add_information,
    deterministic_utility,
    evpi,
    fix_below_threshold,
    tornado,
)
from .associate import AssociateSpec, additive_value, build_associate_diagram, consultation_delta
from .diagram import (
    ChanceNode,
    DecisionNode,
    DeterministicNode,
    InfluenceDiagram,
    State,
    ValidationReport,
    ValueNode,
    augment_no_forgetting,
    barren_prune,
    fix_chance,
    force_decision,
    make_states,
    stage_partition,
    validate,
)
from .engine import (
    Policy,
    Posterior,
    SimReport,
    conditional,
    expected_utility,
    joint_probability,
    joint_size,
    simulate,
    solve,
    with_default_base_case,
)
from .errors import ModelError, ResourceError, ValidationError
from .io import load_model, save_model
from .mrma import ScenarioConfig, build_mrma_diagram, compile_formula_node, reference_config

__version__ = "0.1.0"
