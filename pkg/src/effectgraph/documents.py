"""Canonical text documents for graphs, rules, matches, traces, and audits.

Every value encodes to exactly one byte sequence: UTF-8 JSON with two-space
indentation, sorted object keys, element lists sorted by id, and a trailing
newline.  ``encode`` after ``decode`` is the identity on canonical text, and
``decode`` after ``encode`` is the identity on values, so documents double
as golden files.

Rules use a single integrated element list: each node and edge carries an
action tag — ``preserve``, ``delete``, ``create`` for the mandatory base
rule, ``delete_potential`` and ``create_potential`` for the extra actions
of the maximal rule.  Negative application conditions are blocks of extra
elements glued onto the base left-hand side.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .core import (
    Diagnostic,
    Edge,
    EdgeType,
    EffectGraphError,
    ElementSet,
    Morphism,
    TypeGraph,
    TypedGraph,
    check_morphism,
    validate_graph,
)
from .effect import (
    EffectOrientedRule,
    InducedSelection,
    InvalidSelection,
    build_induced_rule,
    validate_effect_rule,
)
from .matching import InvalidPreMatch, PreMatch, validate_prematch
from .rules import Nac, Rule, apply_rule, shift_nacs
from .semantics import (
    STRATEGIES,
    AuditEntry,
    AuditReport,
    EffectTransformation,
)

ACTIONS = ("preserve", "delete", "delete_potential", "create", "create_potential")


class ParseError(EffectGraphError):
    """The text is not a well-formed document."""

    def __init__(self, message: str, element: str | None = None) -> None:
        if element is not None:
            message = f"{message} (at {element!r})"
        super().__init__(message)
        self.element = element


class ValidationError(EffectGraphError):
    """The document is well formed but its content is inconsistent."""

    def __init__(self, diagnostics: Iterable[Diagnostic | str]) -> None:
        items = tuple(
            d if isinstance(d, Diagnostic) else Diagnostic("invalid", None, d)
            for d in diagnostics
        )
        super().__init__("; ".join(str(d) for d in items))
        self.diagnostics = items


def canonical_text(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _load(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("the top level must be an object")
    return doc


def _expect_kind(doc: Mapping[str, Any], kind: str) -> None:
    if doc.get("kind") != kind:
        raise ParseError(f"expected a {kind!r} document, found {doc.get('kind')!r}")


def _str_field(obj: Mapping[str, Any], key: str, where: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise ParseError(f"{where}: {key!r} must be a non-empty string")
    return value


def _str_map(doc: Mapping[str, Any], key: str, where: str) -> dict[str, str]:
    value = doc.get(key)
    if not isinstance(value, dict):
        raise ParseError(f"{where}: {key!r} must be an object")
    for k, v in value.items():
        if not isinstance(v, str):
            raise ParseError(f"{where}: {key}[{k!r}] must be a string")
    return dict(value)


# ---------------------------------------------------------------------------
# type graphs


def encode_type_graph(tg: TypeGraph) -> str:
    return canonical_text(
        {
            "kind": "type_graph",
            "name": tg.name,
            "node_types": sorted(tg.node_types),
            "edge_types": {
                name: {"source": et.source, "target": et.target}
                for name, et in tg.edge_types.items()
            },
        }
    )


def decode_type_graph(text: str) -> TypeGraph:
    doc = _load(text)
    _expect_kind(doc, "type_graph")
    name = _str_field(doc, "name", "type graph")
    node_types = doc.get("node_types")
    if not isinstance(node_types, list) or not all(
        isinstance(t, str) for t in node_types
    ):
        raise ParseError("node_types must be a list of strings")
    raw = doc.get("edge_types")
    if not isinstance(raw, dict):
        raise ParseError("edge_types must be an object")
    edge_types = {}
    for et_name, entry in raw.items():
        if not isinstance(entry, dict):
            raise ParseError("an edge type must be an object", et_name)
        edge_types[et_name] = EdgeType(
            _str_field(entry, "source", f"edge type {et_name}"),
            _str_field(entry, "target", f"edge type {et_name}"),
        )
    try:
        return TypeGraph(name, frozenset(node_types), edge_types)
    except ValueError as exc:
        raise ValidationError([str(exc)]) from None


def _resolve_type_graph(
    doc: Mapping[str, Any], types: Mapping[str, TypeGraph]
) -> TypeGraph:
    name = _str_field(doc, "type_graph", "document")
    try:
        return types[name]
    except KeyError:
        known = ", ".join(sorted(types)) or "none"
        raise ParseError(
            f"unknown type graph {name!r}; known: {known}"
        ) from None


# ---------------------------------------------------------------------------
# graphs


def encode_graph(g: TypedGraph) -> str:
    return canonical_text(
        {
            "kind": "graph",
            "type_graph": g.type_graph.name,
            "nodes": [{"id": nid, "type": g.nodes[nid]} for nid in g.sorted_nodes],
            "edges": [
                {
                    "id": eid,
                    "type": g.edges[eid].type,
                    "src": g.edges[eid].src,
                    "tgt": g.edges[eid].tgt,
                }
                for eid in g.sorted_edges
            ],
        }
    )


def _element_lists(
    doc: Mapping[str, Any]
) -> tuple[dict[str, str], dict[str, Edge]]:
    nodes: dict[str, str] = {}
    edges: dict[str, Edge] = {}
    raw_nodes = doc.get("nodes")
    raw_edges = doc.get("edges")
    if not isinstance(raw_nodes, list) or not isinstance(raw_edges, list):
        raise ParseError("nodes and edges must be lists")
    for entry in raw_nodes:
        if not isinstance(entry, dict):
            raise ParseError("a node entry must be an object")
        nid = _str_field(entry, "id", "node")
        if nid in nodes:
            raise ParseError("duplicate id", nid)
        nodes[nid] = _str_field(entry, "type", f"node {nid}")
    for entry in raw_edges:
        if not isinstance(entry, dict):
            raise ParseError("an edge entry must be an object")
        eid = _str_field(entry, "id", "edge")
        if eid in nodes or eid in edges:
            raise ParseError("duplicate id", eid)
        edges[eid] = Edge(
            _str_field(entry, "type", f"edge {eid}"),
            _str_field(entry, "src", f"edge {eid}"),
            _str_field(entry, "tgt", f"edge {eid}"),
        )
    return nodes, edges


def decode_graph(text: str, types: Mapping[str, TypeGraph]) -> TypedGraph:
    doc = _load(text)
    _expect_kind(doc, "graph")
    tg = _resolve_type_graph(doc, types)
    nodes, edges = _element_lists(doc)
    for eid, e in edges.items():
        if e.src not in nodes or e.tgt not in nodes:
            raise ParseError("edge endpoint is not a declared node", eid)
    g = TypedGraph(tg, nodes, edges)
    problems = validate_graph(g, tg)
    if problems:
        raise ValidationError(problems)
    return g


# ---------------------------------------------------------------------------
# rules


def _actions_of(eor: EffectOrientedRule) -> dict[str, str]:
    base, maximal = eor.base, eor.maximal
    interface = eor.interface
    tags: dict[str, str] = {}
    for xid in list(maximal.lhs.nodes) + list(maximal.lhs.edges):
        in_interface = xid in interface.nodes or xid in interface.edges
        in_base = xid in base.lhs.nodes or xid in base.lhs.edges
        if in_interface:
            tags[xid] = "preserve"
        elif in_base:
            tags[xid] = "delete"
        else:
            tags[xid] = "delete_potential"
    for xid in list(maximal.rhs.nodes) + list(maximal.rhs.edges):
        if xid in tags:
            continue
        in_base = xid in base.rhs.nodes or xid in base.rhs.edges
        tags[xid] = "create" if in_base else "create_potential"
    return tags


def _element_entry(
    xid: str, lhs: TypedGraph, rhs: TypedGraph, action: str
) -> dict[str, str]:
    side = lhs if (xid in lhs.nodes or xid in lhs.edges) else rhs
    if xid in side.nodes:
        return {"action": action, "id": xid, "type": side.nodes[xid]}
    e = side.edges[xid]
    return {
        "action": action,
        "id": xid,
        "type": e.type,
        "src": e.src,
        "tgt": e.tgt,
    }


def encode_rule(name: str, eor: EffectOrientedRule) -> str:
    tags = _actions_of(eor)
    lhs, rhs = eor.maximal.lhs, eor.maximal.rhs
    elements = [
        _element_entry(xid, lhs, rhs, action) for xid, action in tags.items()
    ]
    elements.sort(key=lambda entry: entry["id"])
    nac_blocks = []
    base_lhs = eor.base.lhs
    for nac in eor.base.nacs:
        extra = []
        for nid in sorted(nac.forbidden.nodes.keys() - base_lhs.nodes.keys()):
            extra.append({"id": nid, "type": nac.forbidden.nodes[nid]})
        for eid in sorted(nac.forbidden.edges.keys() - base_lhs.edges.keys()):
            e = nac.forbidden.edges[eid]
            extra.append(
                {"id": eid, "type": e.type, "src": e.src, "tgt": e.tgt}
            )
        extra.sort(key=lambda entry: entry["id"])
        nac_blocks.append({"elements": extra})
    nac_blocks.sort(key=canonical_text)
    return canonical_text(
        {
            "kind": "rule",
            "name": name,
            "type_graph": eor.maximal.lhs.type_graph.name,
            "elements": elements,
            "nacs": nac_blocks,
        }
    )


_EDGE_ENDPOINT_ACTIONS = {
    "preserve": {"preserve"},
    "delete": {"preserve", "delete"},
    "create": {"preserve", "create"},
    # Potential edges may not touch mandatory-action nodes: the edge could
    # then never (creation) or not safely (deletion) be left unselected.
    "delete_potential": {"preserve", "delete_potential"},
    "create_potential": {"preserve", "create_potential"},
}


def decode_rule(
    text: str, types: Mapping[str, TypeGraph]
) -> tuple[str, EffectOrientedRule]:
    """The rule name and the effect-oriented rule encoded in ``text``."""
    doc = _load(text)
    _expect_kind(doc, "rule")
    name = _str_field(doc, "name", "rule")
    tg = _resolve_type_graph(doc, types)
    raw = doc.get("elements")
    if not isinstance(raw, list):
        raise ParseError("elements must be a list")

    node_types: dict[str, str] = {}
    edge_data: dict[str, Edge] = {}
    action_of: dict[str, str] = {}
    for entry in raw:
        if not isinstance(entry, dict):
            raise ParseError("an element entry must be an object")
        xid = _str_field(entry, "id", "element")
        if xid in action_of:
            raise ParseError("duplicate id", xid)
        action = _str_field(entry, "action", f"element {xid}")
        if action not in ACTIONS:
            raise ParseError(f"unknown action tag {action!r}", xid)
        action_of[xid] = action
        if "src" in entry or "tgt" in entry:
            edge_data[xid] = Edge(
                _str_field(entry, "type", f"edge {xid}"),
                _str_field(entry, "src", f"edge {xid}"),
                _str_field(entry, "tgt", f"edge {xid}"),
            )
        else:
            node_types[xid] = _str_field(entry, "type", f"node {xid}")

    problems: list[Diagnostic] = []
    for eid, e in edge_data.items():
        for endpoint in (e.src, e.tgt):
            if endpoint not in node_types:
                raise ParseError("edge endpoint is not a declared node", eid)
            allowed = _EDGE_ENDPOINT_ACTIONS[action_of[eid]]
            if action_of[endpoint] not in allowed:
                problems.append(
                    Diagnostic(
                        "inconsistent-tags",
                        eid,
                        f"{action_of[eid]} edge may not use "
                        f"{action_of[endpoint]} node {endpoint!r}",
                    )
                )
    if problems:
        raise ValidationError(problems)

    def side(actions: set[str]) -> TypedGraph:
        nodes = {x: t for x, t in node_types.items() if action_of[x] in actions}
        edges = {x: e for x, e in edge_data.items() if action_of[x] in actions}
        return TypedGraph(tg, nodes, edges)

    interface = side({"preserve"})
    base_lhs = side({"preserve", "delete"})
    base_rhs = side({"preserve", "create"})
    maximal_lhs = side({"preserve", "delete", "delete_potential"})
    maximal_rhs = side({"preserve", "create", "create_potential"})

    raw_nacs = doc.get("nacs", [])
    if not isinstance(raw_nacs, list):
        raise ParseError("nacs must be a list")
    nacs = []
    for block in raw_nacs:
        if not isinstance(block, dict) or not isinstance(block.get("elements"), list):
            raise ParseError("a nac must be an object with an element list")
        extra_nodes: dict[str, str] = {}
        extra_edges: dict[str, Edge] = {}
        for entry in block["elements"]:
            if not isinstance(entry, dict):
                raise ParseError("a nac element entry must be an object")
            xid = _str_field(entry, "id", "nac element")
            if (
                xid in action_of
                or xid in extra_nodes
                or xid in extra_edges
            ):
                raise ParseError("duplicate id", xid)
            if "src" in entry or "tgt" in entry:
                extra_edges[xid] = Edge(
                    _str_field(entry, "type", f"nac edge {xid}"),
                    _str_field(entry, "src", f"nac edge {xid}"),
                    _str_field(entry, "tgt", f"nac edge {xid}"),
                )
            else:
                extra_nodes[xid] = _str_field(entry, "type", f"nac node {xid}")
        forbidden = TypedGraph(
            tg,
            {**base_lhs.nodes, **extra_nodes},
            {**base_lhs.edges, **extra_edges},
        )
        bad = validate_graph(forbidden, tg)
        if bad:
            raise ValidationError(bad)
        nacs.append(Nac(forbidden))

    for g in (maximal_lhs, maximal_rhs):
        bad = validate_graph(g, tg)
        if bad:
            raise ValidationError(bad)

    base = Rule(base_lhs, interface, base_rhs, nacs=tuple(nacs))
    maximal = Rule(
        maximal_lhs,
        interface,
        maximal_rhs,
        nacs=shift_nacs(Morphism.inclusion(base_lhs, maximal_lhs), tuple(nacs)),
    )
    eor = EffectOrientedRule.from_rules(base, maximal)
    bad = validate_effect_rule(eor)
    if bad:
        raise ValidationError(bad)
    return name, eor


# ---------------------------------------------------------------------------
# matches


def encode_match(node_map: Mapping[str, str], edge_map: Mapping[str, str]) -> str:
    return canonical_text(
        {"kind": "match", "nodes": dict(node_map), "edges": dict(edge_map)}
    )


def decode_match(text: str) -> tuple[dict[str, str], dict[str, str]]:
    doc = _load(text)
    _expect_kind(doc, "match")
    return _str_map(doc, "nodes", "match"), _str_map(doc, "edges", "match")


def prematch_from_maps(
    eor: EffectOrientedRule,
    host: TypedGraph,
    node_map: Mapping[str, str],
    edge_map: Mapping[str, str],
) -> PreMatch:
    """A validated base pre-match from raw id maps.

    Edge images omitted from ``edge_map`` are inferred when the host has a
    unique candidate; ambiguity is reported as a validation error."""
    edge_map = dict(edge_map)
    for eid in eor.base.lhs.sorted_edges:
        if eid in edge_map:
            continue
        e = eor.base.lhs.edges[eid]
        src, tgt = node_map.get(e.src), node_map.get(e.tgt)
        candidates = [
            h
            for h in host.edge_classes.get((e.type, src, tgt), ())
            if h not in edge_map.values()
        ]
        if len(candidates) != 1:
            raise ValidationError(
                [f"edge {eid!r} has no unique host image; map it explicitly"]
            )
        edge_map[eid] = candidates[0]
    morphism = Morphism(eor.base.lhs, host, node_map, edge_map)
    try:
        pm = PreMatch.create(eor, morphism)
        validate_prematch(eor, host, pm)
    except (InvalidPreMatch, ValueError) as exc:
        raise ValidationError([str(exc)]) from None
    return pm


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class TraceData:
    """The raw content of a trace document."""

    rule: str
    strategy: str
    selection_delete: tuple[str, ...]
    selection_preserve: tuple[str, ...]
    base_match: tuple[dict[str, str], dict[str, str]]
    match: tuple[dict[str, str], dict[str, str]]
    comatch: tuple[dict[str, str], dict[str, str]]


def _maps_doc(m: Morphism) -> dict[str, dict[str, str]]:
    return {"nodes": dict(m.node_map), "edges": dict(m.edge_map)}


def encode_trace(t: EffectTransformation, rule_name: str) -> str:
    sel = t.selection
    return canonical_text(
        {
            "kind": "trace",
            "rule": rule_name,
            "strategy": t.strategy,
            "selection": {
                "delete": sorted(sel.del_extra.nodes | sel.del_extra.edges),
                "preserve": sorted(
                    sel.preserve_extra.nodes | sel.preserve_extra.edges
                ),
            },
            "base_match": _maps_doc(t.base_prematch.morphism),
            "match": _maps_doc(t.result.match),
            "comatch": _maps_doc(t.result.comatch),
        }
    )


def decode_trace(text: str) -> TraceData:
    doc = _load(text)
    _expect_kind(doc, "trace")
    strategy = _str_field(doc, "strategy", "trace")
    if strategy not in STRATEGIES:
        raise ParseError(f"unknown strategy {strategy!r}")
    sel = doc.get("selection")
    if not isinstance(sel, dict):
        raise ParseError("selection must be an object")
    for key in ("delete", "preserve"):
        if not isinstance(sel.get(key), list) or not all(
            isinstance(x, str) for x in sel[key]
        ):
            raise ParseError(f"selection.{key} must be a list of ids")

    def maps(key: str) -> tuple[dict[str, str], dict[str, str]]:
        value = doc.get(key)
        if not isinstance(value, dict):
            raise ParseError(f"{key} must be an object")
        return _str_map(value, "nodes", key), _str_map(value, "edges", key)

    return TraceData(
        rule=_str_field(doc, "rule", "trace"),
        strategy=strategy,
        selection_delete=tuple(sel["delete"]),
        selection_preserve=tuple(sel["preserve"]),
        base_match=maps("base_match"),
        match=maps("match"),
        comatch=maps("comatch"),
    )


def _split_ids(
    ids: Iterable[str], graph: TypedGraph, what: str
) -> ElementSet:
    nodes, edges = set(), set()
    for xid in ids:
        if xid in graph.nodes:
            nodes.add(xid)
        elif xid in graph.edges:
            edges.add(xid)
        else:
            raise ValidationError([f"{what} id {xid!r} is not a rule element"])
    return ElementSet(frozenset(nodes), frozenset(edges))


def rebuild_transformation(
    eor: EffectOrientedRule,
    host: TypedGraph,
    trace: TraceData,
    output: TypedGraph | None = None,
) -> EffectTransformation:
    """Replay a trace against its rule and input graph.

    The recorded comatch — and, when given, the recorded output graph —
    must agree with the replayed application."""
    sel = InducedSelection(
        _split_ids(trace.selection_delete, eor.maximal.lhs, "deleted"),
        _split_ids(trace.selection_preserve, eor.maximal.rhs, "preserved"),
    )
    try:
        induced = build_induced_rule(eor, sel)
    except InvalidSelection as exc:
        raise ValidationError([str(exc)]) from None
    match = Morphism(induced.rule.lhs, host, trace.match[0], trace.match[1])
    problems = check_morphism(match, require_injective=True)
    if problems:
        raise ValidationError(problems)
    pm = prematch_from_maps(eor, host, trace.base_match[0], trace.base_match[1])
    try:
        record = apply_rule(induced.rule, host, match)
    except (EffectGraphError, ValueError) as exc:
        raise ValidationError([f"trace is not applicable: {exc}"]) from None
    if (
        dict(record.comatch.node_map) != trace.comatch[0]
        or dict(record.comatch.edge_map) != trace.comatch[1]
    ):
        raise ValidationError(["recorded comatch does not match the replay"])
    if output is not None and (
        dict(output.nodes) != dict(record.output.nodes)
        or dict(output.edges) != dict(record.output.edges)
    ):
        raise ValidationError(["recorded output graph does not match the replay"])
    return EffectTransformation(
        eor=eor,
        strategy=trace.strategy,
        result=record,
        selection=sel,
        base_prematch=pm,
    )


# ---------------------------------------------------------------------------
# audit reports


def encode_audit_report(report: AuditReport) -> str:
    return canonical_text(
        {
            "kind": "audit_report",
            "entries": [
                {
                    "kind": entry.kind,
                    "element": entry.element,
                    "clause": entry.clause,
                    "witness": None
                    if entry.witness is None
                    else [[k, v] for k, v in entry.witness],
                }
                for entry in report.entries
            ],
        }
    )


def decode_audit_report(text: str) -> AuditReport:
    doc = _load(text)
    _expect_kind(doc, "audit_report")
    raw = doc.get("entries")
    if not isinstance(raw, list):
        raise ParseError("entries must be a list")
    entries = []
    for entry in raw:
        if not isinstance(entry, dict):
            raise ParseError("an audit entry must be an object")
        witness = entry.get("witness")
        if witness is not None:
            if not isinstance(witness, list) or not all(
                isinstance(p, list) and len(p) == 2 for p in witness
            ):
                raise ParseError("witness must be a list of pairs")
            witness = tuple((p[0], p[1]) for p in witness)
        entries.append(
            AuditEntry(
                kind=_str_field(entry, "kind", "audit entry"),
                element=_str_field(entry, "element", "audit entry"),
                clause=_str_field(entry, "clause", "audit entry"),
                witness=witness,
            )
        )
    return AuditReport(tuple(entries))
