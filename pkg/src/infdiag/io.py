"""Canonical text formats for models, policies and scenario configs, plus report rendering.

All documents are JSON written by a canonical emitter: object keys sorted,
list order preserved, reals printed with 17 significant digits so that every
double survives a round trip. Loading and re-saving a document produced here
reproduces it byte for byte.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .diagram import (
    ChanceNode,
    DecisionNode,
    DeterministicNode,
    InfluenceDiagram,
    ValueNode,
    augment_no_forgetting,
    make_states,
)
from .engine import Policy
from .errors import ModelError

FORMAT_VERSION = 1


class ParseError(ModelError):
    """A document could not be read or does not follow the schema."""

    def __init__(self, message):
        super().__init__("PARSE_ERROR", message)


# ---------------------------------------------------------------------------
# canonical emitter
# ---------------------------------------------------------------------------

def _scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise ModelError("NONFINITE_VALUE", f"cannot serialize {v!r}")
        return format(v, ".17g")
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _is_scalar(v):
    return not isinstance(v, (dict, list, tuple))


def _emit(obj, depth: int, out: list[str]) -> None:
    pad = "  " * (depth + 1)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            out.append(pad + json.dumps(str(k)) + ": ")
            _emit(obj[k], depth + 1, out)
            out.append(",\n" if i < len(keys) - 1 else "\n")
        out.append("  " * depth + "}")
    elif isinstance(obj, (list, tuple)):
        if all(_is_scalar(x) for x in obj):
            out.append("[" + ", ".join(_scalar(x) for x in obj) + "]")
            return
        out.append("[\n")
        for i, x in enumerate(obj):
            out.append(pad)
            _emit(x, depth + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append("  " * depth + "]")
    else:
        out.append(_scalar(obj))


def dumps_canonical(obj) -> str:
    out: list[str] = []
    _emit(obj, 0, out)
    out.append("\n")
    return "".join(out)


def _read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _write(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot write {path}: {exc.strerror}") from exc


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------

def _states_fields(states, key="states"):
    out = {key: [s.label for s in states]}
    if states and all(s.level is not None for s in states):
        out["levels"] = [float(s.level) for s in states]
    return out


def model_to_dict(diagram: InfluenceDiagram) -> dict:
    nodes = []
    for n in diagram.nodes:
        doc = {"id": n.id, "kind": n.kind}
        if n.kind == "chance":
            doc.update(_states_fields(n.states), parents=list(n.parents), cpt=[list(r) for r in n.cpt])
        elif n.kind == "deterministic":
            doc.update(_states_fields(n.states), parents=list(n.parents), table=list(n.table))
        elif n.kind == "decision":
            doc.update(_states_fields(n.alternatives, "alternatives"), order=n.order, info=list(n.info))
        else:
            doc.update(parents=list(n.parents), utilities=list(n.utilities))
        nodes.append(doc)
    base = {}
    for k, v in diagram.base_case.items():
        node = diagram.by_id.get(k)
        base[k] = node.states[v].label if node is not None and 0 <= v < len(node.states) else v
    return {"format_version": FORMAT_VERSION, "nodes": nodes, "base_case": base}


def _need(doc, key, where):
    if key not in doc:
        raise ParseError(f"{where}: missing field {key!r}")
    return doc[key]


def _states_from(doc, key, where):
    labels = _need(doc, key, where)
    if not isinstance(labels, list):
        raise ParseError(f"{where}: {key!r} must be a list")
    return make_states(labels, doc.get("levels"))


def model_from_dict(doc: dict) -> InfluenceDiagram:
    """Build a diagram from a parsed document. Schema problems raise :class:`ParseError`."""
    if not isinstance(doc, dict):
        raise ParseError("model document must be an object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {doc.get('format_version')!r}")
    nodes = []
    try:
        for i, nd in enumerate(_need(doc, "nodes", "model")):
            where = f"node {i}"
            nid = str(_need(nd, "id", where))
            kind = _need(nd, "kind", where)
            if kind == "chance":
                nodes.append(ChanceNode(nid, _need(nd, "parents", nid), _states_from(nd, "states", nid), _need(nd, "cpt", nid)))
            elif kind == "deterministic":
                nodes.append(DeterministicNode(nid, _need(nd, "parents", nid), _states_from(nd, "states", nid), _need(nd, "table", nid)))
            elif kind == "decision":
                nodes.append(DecisionNode(nid, _states_from(nd, "alternatives", nid), _need(nd, "order", nid), _need(nd, "info", nid)))
            elif kind == "value":
                nodes.append(ValueNode(nid, _need(nd, "parents", nid), _need(nd, "utilities", nid)))
            else:
                raise ParseError(f"{where}: unknown kind {kind!r}")
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed node table: {exc}") from exc

    labels = {n.id: [s.label for s in n.states] for n in nodes if n.kind != "value"}
    base = {}
    for k, label in doc.get("base_case", {}).items():
        if k in labels and label in labels[k]:
            base[k] = labels[k].index(label)
        elif isinstance(label, int):
            base[k] = label
        else:
            raise ParseError(f"base case {k}={label!r} does not name a state")
    return InfluenceDiagram(nodes, base)


def dumps_model(diagram: InfluenceDiagram) -> str:
    return dumps_canonical(model_to_dict(diagram))


def loads_model(text: str, augment: bool = False, check: bool = True) -> InfluenceDiagram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from exc
    diagram = model_from_dict(doc)
    if augment:
        diagram = augment_no_forgetting(diagram)
    if check:
        diagram.require_valid()
    return diagram


def save_model(diagram: InfluenceDiagram, path) -> None:
    _write(path, dumps_model(diagram))


def load_model(path, augment: bool = False, check: bool = True) -> InfluenceDiagram:
    """Read a model file and re-validate it.

    ``augment`` adds information arcs required by no-forgetting before
    validation; it is off by default so that modelling slips are reported.
    """
    diagram = model_from_dict(_read_json(path))
    if augment:
        diagram = augment_no_forgetting(diagram)
    if check:
        diagram.require_valid()
    return diagram


# ---------------------------------------------------------------------------
# policies
# ---------------------------------------------------------------------------

def policy_to_dict(diagram: InfluenceDiagram, policy: Policy) -> dict:
    decisions = []
    for d in diagram.decisions:
        info = list(policy.info[d.id])
        rules = []
        for state, alt in policy.rules[d.id].items():
            rules.append({
                "state": {x: diagram[x].states[s].label for x, s in zip(info, state)},
                "choice": d.alternatives[alt].label,
                "reachable": state in policy.reachable.get(d.id, ()),
            })
        decisions.append({"id": d.id, "info": info, "rules": rules})
    return {"format_version": FORMAT_VERSION, "meu": policy.meu, "decisions": decisions}


def policy_from_dict(diagram: InfluenceDiagram, doc: dict) -> Policy:
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise ParseError("not a policy document of a supported version")
    rules, info, reach = {}, {}, {}
    for entry in _need(doc, "decisions", "policy"):
        did = _need(entry, "id", "policy")
        if did not in diagram or diagram[did].kind != "decision":
            raise ModelError("POLICY_MISMATCH", f"{did!r} is not a decision of the model")
        order = tuple(_need(entry, "info", did))
        table, reachable = {}, set()
        for rule in _need(entry, "rules", did):
            state = tuple(diagram.state_index(x, rule["state"][x]) for x in order)
            table[state] = diagram.state_index(did, rule["choice"])
            if rule.get("reachable", True):
                reachable.add(state)
        rules[did], info[did], reach[did] = table, order, frozenset(reachable)
    meu = doc.get("meu")
    return Policy(rules, info, math.nan if meu is None else float(meu), reach)


def save_policy(diagram, policy, path) -> None:
    _write(path, dumps_canonical(policy_to_dict(diagram, policy)))


def load_policy(diagram, path) -> Policy:
    return policy_from_dict(diagram, _read_json(path))


# ---------------------------------------------------------------------------
# scenario configs
# ---------------------------------------------------------------------------

def save_config(config, path) -> None:
    _write(path, dumps_canonical({"format_version": FORMAT_VERSION, **config.to_dict()}))


def load_config(path):
    from .mrma import ScenarioConfig

    doc = _read_json(path)
    if not isinstance(doc, dict) or doc.pop("format_version", None) != FORMAT_VERSION:
        raise ParseError("not a scenario config document of a supported version")
    return ScenarioConfig.from_dict(doc)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def render_policy(diagram: InfluenceDiagram, policy: Policy, reachable_only: bool = True) -> str:
    lines = [f"MEU: {policy.meu:.10g}"]
    for d in diagram.decisions:
        info = policy.info[d.id]
        lines.append(f"\n{d.id}  (observes: {', '.join(info) if info else 'nothing'})")
        for state, alt in policy.rules[d.id].items():
            reachable = state in policy.reachable.get(d.id, ())
            if reachable_only and not reachable:
                continue
            cond = ", ".join(f"{x}={diagram[x].states[s].label}" for x, s in zip(info, state)) or "always"
            lines.append(f"  {cond:<50} -> {d.alternatives[alt].label}")
    return "\n".join(lines)


def render_tornado_data(report) -> str:
    rows = ["variable\tlow\thigh\tswing\tshare\tcumulative"]
    for e in report.entries:
        rows.append(
            f"{e.variable}\t{e.low:.10g}\t{e.high:.10g}\t{e.swing:.10g}\t{e.share:.6f}\t{e.cumulative_share:.6f}"
        )
    return "\n".join(rows)


def render_tornado_ascii(report, width: int = 40) -> str:
    """Horizontal bars around the base-case utility, scaled to the largest swing."""
    entries = report.entries
    if not entries:
        return "(no chance variables)"
    base = report.base_utility
    top = max(e.swing for e in entries)
    scale = width / top if top > 0 else 0.0
    lefts = [round((base - e.low) * scale) for e in entries]
    rights = [round((e.high - base) * scale) for e in entries]
    axis = max(lefts)
    name_w = max(len(e.variable) for e in entries)
    lines = [f"{'':<{name_w}}  base utility {base:.6g}; full bar = swing {top:.6g}"]
    for e, lft, rgt in zip(entries, lefts, rights):
        bar = " " * (axis - lft) + "#" * lft + "|" + "#" * rgt
        lines.append(f"{e.variable:<{name_w}}  {bar:<{axis + width + 1}}  {e.low:.6g} .. {e.high:.6g}  share {e.share:.4f}")
    return "\n".join(lines)
