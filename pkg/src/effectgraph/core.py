"""Typed graphs, typed graph morphisms, and the categorical constructions
the rewriting engine is built from.

Graphs are immutable and typed over a :class:`TypeGraph`.  Element identity
is a plain string id, and subgraph relationships are realised by id sharing:
``K`` is a subgraph of ``L`` exactly when every element of ``K`` occurs in
``L`` with the same type and, for edges, the same endpoints.  Inclusion
morphisms are therefore identity maps on ids.  Parallel edges of the same
type between the same nodes are permitted throughout.

The module provides validation (:func:`validate_graph`,
:func:`check_morphism`), deterministic injective-morphism search
(:func:`find_injective_extensions`), pushouts along injective morphisms
(:func:`pushout`), pushout complements with the dangling-edge check
(:func:`pushout_complement`), and a pullback test for commuting squares of
injective morphisms (:func:`is_pullback_square`).
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping


class EffectGraphError(Exception):
    """Base class for errors raised by the engine."""


class DanglingViolation(EffectGraphError):
    """Deleting a matched node would leave an incident host edge behind."""

    def __init__(self, node_id: str) -> None:
        super().__init__(
            f"deleting host node {node_id!r} would leave a dangling edge"
        )
        self.node_id = node_id


class NonCommuting(EffectGraphError):
    """A square of morphisms that must commute does not."""


@dataclass(frozen=True)
class Diagnostic:
    """A single validation finding, tied to the offending element."""

    code: str
    element: str | None
    message: str

    def __str__(self) -> str:
        where = f" [{self.element}]" if self.element is not None else ""
        return f"{self.code}{where}: {self.message}"


@dataclass(frozen=True)
class EdgeType:
    source: str
    target: str


@dataclass(frozen=True)
class TypeGraph:
    """Declares the node types and the typed edges allowed between them."""

    name: str
    node_types: frozenset[str]
    edge_types: Mapping[str, EdgeType]

    def __post_init__(self) -> None:
        object.__setattr__(self, "node_types", frozenset(self.node_types))
        object.__setattr__(
            self, "edge_types", MappingProxyType(dict(self.edge_types))
        )
        for name, et in self.edge_types.items():
            if et.source not in self.node_types:
                raise ValueError(
                    f"edge type {name!r} has unknown source type {et.source!r}"
                )
            if et.target not in self.node_types:
                raise ValueError(
                    f"edge type {name!r} has unknown target type {et.target!r}"
                )

    def __repr__(self) -> str:
        return (
            f"TypeGraph({self.name!r}, {len(self.node_types)} node types, "
            f"{len(self.edge_types)} edge types)"
        )


@dataclass(frozen=True)
class Edge:
    type: str
    src: str
    tgt: str


@dataclass(frozen=True)
class TypedGraph:
    """An immutable graph typed over a :class:`TypeGraph`.

    ``nodes`` maps node id to node type name; ``edges`` maps edge id to an
    :class:`Edge`.  Node and edge ids share one namespace.
    """

    type_graph: TypeGraph
    nodes: Mapping[str, str]
    edges: Mapping[str, Edge]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", MappingProxyType(dict(self.nodes)))
        object.__setattr__(self, "edges", MappingProxyType(dict(self.edges)))

    @classmethod
    def empty(cls, type_graph: TypeGraph) -> TypedGraph:
        return cls(type_graph, {}, {})

    @cached_property
    def sorted_nodes(self) -> tuple[str, ...]:
        return tuple(sorted(self.nodes))

    @cached_property
    def sorted_edges(self) -> tuple[str, ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def nodes_by_type(self) -> Mapping[str, tuple[str, ...]]:
        buckets: dict[str, list[str]] = {}
        for nid in self.sorted_nodes:
            buckets.setdefault(self.nodes[nid], []).append(nid)
        return {t: tuple(ids) for t, ids in buckets.items()}

    @cached_property
    def edge_classes(self) -> Mapping[tuple[str, str, str], tuple[str, ...]]:
        """Edge ids grouped by (type, src, tgt); parallel edges share a class."""
        buckets: dict[tuple[str, str, str], list[str]] = {}
        for eid in self.sorted_edges:
            e = self.edges[eid]
            buckets.setdefault((e.type, e.src, e.tgt), []).append(eid)
        return {k: tuple(v) for k, v in buckets.items()}

    @cached_property
    def incidence(self) -> Mapping[str, tuple[str, ...]]:
        """Node id to the sorted ids of its incident edges."""
        buckets: dict[str, list[str]] = {nid: [] for nid in self.nodes}
        for eid in self.sorted_edges:
            e = self.edges[eid]
            if e.src in buckets:
                buckets[e.src].append(eid)
            if e.tgt in buckets and e.tgt != e.src:
                buckets[e.tgt].append(eid)
        return {k: tuple(v) for k, v in buckets.items()}

    def with_elements(
        self,
        nodes: Mapping[str, str] | None = None,
        edges: Mapping[str, Edge] | None = None,
    ) -> TypedGraph:
        """A new graph with extra elements; added ids must be fresh."""
        new_nodes = dict(self.nodes)
        new_edges = dict(self.edges)
        for nid, ntype in (nodes or {}).items():
            if nid in new_nodes or nid in new_edges:
                raise ValueError(f"id {nid!r} already present")
            new_nodes[nid] = ntype
        for eid, edge in (edges or {}).items():
            if eid in new_nodes or eid in new_edges:
                raise ValueError(f"id {eid!r} already present")
            if edge.src not in new_nodes or edge.tgt not in new_nodes:
                raise ValueError(f"edge {eid!r} has missing endpoints")
            new_edges[eid] = edge
        return TypedGraph(self.type_graph, new_nodes, new_edges)

    def induced(self, node_ids: Iterable[str], edge_ids: Iterable[str]) -> TypedGraph:
        """The subgraph on the given ids; endpoints of kept edges must be kept."""
        node_ids = set(node_ids)
        edge_ids = set(edge_ids)
        nodes = {}
        for nid in node_ids:
            if nid not in self.nodes:
                raise ValueError(f"unknown node id {nid!r}")
            nodes[nid] = self.nodes[nid]
        edges = {}
        for eid in edge_ids:
            if eid not in self.edges:
                raise ValueError(f"unknown edge id {eid!r}")
            e = self.edges[eid]
            if e.src not in node_ids or e.tgt not in node_ids:
                raise ValueError(f"edge {eid!r} would dangle in the subgraph")
            edges[eid] = e
        return TypedGraph(self.type_graph, nodes, edges)

    def __repr__(self) -> str:
        return (
            f"TypedGraph({len(self.nodes)} nodes, {len(self.edges)} edges "
            f"over {self.type_graph.name!r})"
        )


@dataclass(frozen=True)
class ElementSet:
    """A set of graph elements, split into nodes and edges."""

    nodes: frozenset[str] = frozenset()
    edges: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", frozenset(self.edges))

    @classmethod
    def empty(cls) -> ElementSet:
        return cls(frozenset(), frozenset())

    def __len__(self) -> int:
        return len(self.nodes) + len(self.edges)

    def __bool__(self) -> bool:
        return bool(self.nodes) or bool(self.edges)

    def __or__(self, other: ElementSet) -> ElementSet:
        return ElementSet(self.nodes | other.nodes, self.edges | other.edges)

    def __sub__(self, other: ElementSet) -> ElementSet:
        return ElementSet(self.nodes - other.nodes, self.edges - other.edges)

    def issubset(self, other: ElementSet) -> bool:
        return self.nodes <= other.nodes and self.edges <= other.edges

    def sort_key(self) -> tuple[tuple[str, ...], tuple[str, ...]]:
        return (tuple(sorted(self.nodes)), tuple(sorted(self.edges)))


def graph_elements(g: TypedGraph) -> ElementSet:
    return ElementSet(frozenset(g.nodes), frozenset(g.edges))


def element_difference(a: TypedGraph, b: TypedGraph) -> ElementSet:
    """Elements of ``a`` that are not elements of ``b``, by id."""
    return ElementSet(
        frozenset(a.nodes.keys() - b.nodes.keys()),
        frozenset(a.edges.keys() - b.edges.keys()),
    )


@dataclass(frozen=True)
class Morphism:
    """A typed graph morphism given by explicit node and edge id maps."""

    src_graph: TypedGraph
    dst_graph: TypedGraph
    node_map: Mapping[str, str]
    edge_map: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "node_map", MappingProxyType(dict(self.node_map)))
        object.__setattr__(self, "edge_map", MappingProxyType(dict(self.edge_map)))

    @classmethod
    def identity(cls, g: TypedGraph) -> Morphism:
        return cls(g, g, {n: n for n in g.nodes}, {e: e for e in g.edges})

    @classmethod
    def inclusion(cls, sub: TypedGraph, sup: TypedGraph) -> Morphism:
        """The identity-on-ids inclusion of an id-subgraph."""
        if not is_id_subgraph(sub, sup):
            raise ValueError("not an id-subgraph; no inclusion exists")
        return cls(sub, sup, {n: n for n in sub.nodes}, {e: e for e in sub.edges})

    def node(self, nid: str) -> str:
        return self.node_map[nid]

    def edge(self, eid: str) -> str:
        return self.edge_map[eid]

    @cached_property
    def node_images(self) -> frozenset[str]:
        return frozenset(self.node_map.values())

    @cached_property
    def edge_images(self) -> frozenset[str]:
        return frozenset(self.edge_map.values())

    def restricted(self, sub: TypedGraph) -> Morphism:
        """The restriction to an id-subgraph of the source."""
        return Morphism(
            sub,
            self.dst_graph,
            {n: self.node_map[n] for n in sub.nodes},
            {e: self.edge_map[e] for e in sub.edges},
        )

    def sort_key(self) -> tuple:
        return (
            tuple(sorted(self.node_map.items())),
            tuple(sorted(self.edge_map.items())),
        )

    def __repr__(self) -> str:
        return f"Morphism({dict(self.node_map)!r}, {dict(self.edge_map)!r})"


def compose(first: Morphism, second: Morphism) -> Morphism:
    """The composite that applies ``first`` and then ``second``."""
    return Morphism(
        first.src_graph,
        second.dst_graph,
        {n: second.node_map[v] for n, v in first.node_map.items()},
        {e: second.edge_map[v] for e, v in first.edge_map.items()},
    )


def same_maps(a: Morphism, b: Morphism) -> bool:
    return dict(a.node_map) == dict(b.node_map) and dict(a.edge_map) == dict(b.edge_map)


def is_id_subgraph(sub: TypedGraph, sup: TypedGraph) -> bool:
    """Whether every element of ``sub`` occurs identically in ``sup``."""
    for nid, ntype in sub.nodes.items():
        if sup.nodes.get(nid) != ntype:
            return False
    for eid, edge in sub.edges.items():
        if sup.edges.get(eid) != edge:
            return False
    return True


def graph_union(a: TypedGraph, b: TypedGraph) -> TypedGraph:
    """The id-level union of two graphs over the same type graph."""
    if a.type_graph != b.type_graph:
        raise ValueError("graphs are typed over different type graphs")
    nodes = dict(a.nodes)
    for nid, ntype in b.nodes.items():
        if nodes.get(nid, ntype) != ntype:
            raise ValueError(f"node {nid!r} has conflicting types in the union")
        nodes[nid] = ntype
    edges = dict(a.edges)
    for eid, edge in b.edges.items():
        if edges.get(eid, edge) != edge:
            raise ValueError(f"edge {eid!r} has conflicting content in the union")
        edges[eid] = edge
    return TypedGraph(a.type_graph, nodes, edges)


def fresh_id(base: str, taken: set[str], sep: str = "~") -> str:
    """``base`` if unused, otherwise the first free ``base~k`` with k >= 1."""
    if base not in taken:
        return base
    k = 1
    while f"{base}{sep}{k}" in taken:
        k += 1
    return f"{base}{sep}{k}"


def validate_graph(g: TypedGraph, tg: TypeGraph) -> list[Diagnostic]:
    """All well-formedness violations of ``g`` against ``tg``."""
    out: list[Diagnostic] = []
    if g.type_graph.name != tg.name:
        out.append(
            Diagnostic(
                "type-graph-mismatch",
                None,
                f"graph is typed over {g.type_graph.name!r}, expected {tg.name!r}",
            )
        )
    shared = g.nodes.keys() & g.edges.keys()
    for eid in sorted(shared):
        out.append(
            Diagnostic("duplicate-id", eid, "id used for both a node and an edge")
        )
    for nid in g.sorted_nodes:
        ntype = g.nodes[nid]
        if ntype not in tg.node_types:
            out.append(
                Diagnostic("unknown-node-type", nid, f"node type {ntype!r} not declared")
            )
    for eid in g.sorted_edges:
        e = g.edges[eid]
        et = tg.edge_types.get(e.type)
        if et is None:
            out.append(
                Diagnostic("unknown-edge-type", eid, f"edge type {e.type!r} not declared")
            )
            continue
        for endpoint, role, want in ((e.src, "src", et.source), (e.tgt, "tgt", et.target)):
            if endpoint not in g.nodes:
                out.append(
                    Diagnostic(
                        "dangling-endpoint",
                        eid,
                        f"{role} node {endpoint!r} does not exist",
                    )
                )
            elif g.nodes[endpoint] != want:
                out.append(
                    Diagnostic(
                        "endpoint-type-mismatch",
                        eid,
                        f"{role} node {endpoint!r} has type "
                        f"{g.nodes[endpoint]!r}, edge type {e.type!r} requires {want!r}",
                    )
                )
    return out


def check_morphism(f: Morphism, require_injective: bool = False) -> list[Diagnostic]:
    """All violations of totality, commutation, typing, and (optionally)
    injectivity for ``f``."""
    out: list[Diagnostic] = []
    src, dst = f.src_graph, f.dst_graph
    for nid in src.sorted_nodes:
        img = f.node_map.get(nid)
        if img is None:
            out.append(Diagnostic("not-total", nid, "node has no image"))
        elif img not in dst.nodes:
            out.append(Diagnostic("unknown-image", nid, f"image node {img!r} missing"))
        elif dst.nodes[img] != src.nodes[nid]:
            out.append(
                Diagnostic(
                    "type-not-preserved",
                    nid,
                    f"node of type {src.nodes[nid]!r} mapped to {dst.nodes[img]!r}",
                )
            )
    for nid in sorted(f.node_map.keys() - src.nodes.keys()):
        out.append(Diagnostic("spurious-mapping", nid, "mapped node not in source"))
    for eid in src.sorted_edges:
        img = f.edge_map.get(eid)
        if img is None:
            out.append(Diagnostic("not-total", eid, "edge has no image"))
            continue
        if img not in dst.edges:
            out.append(Diagnostic("unknown-image", eid, f"image edge {img!r} missing"))
            continue
        se, de = src.edges[eid], dst.edges[img]
        if se.type != de.type:
            out.append(
                Diagnostic(
                    "type-not-preserved",
                    eid,
                    f"edge of type {se.type!r} mapped to {de.type!r}",
                )
            )
        if f.node_map.get(se.src) != de.src or f.node_map.get(se.tgt) != de.tgt:
            out.append(
                Diagnostic(
                    "non-commuting",
                    eid,
                    "edge image endpoints disagree with node images",
                )
            )
    for eid in sorted(f.edge_map.keys() - src.edges.keys()):
        out.append(Diagnostic("spurious-mapping", eid, "mapped edge not in source"))
    if require_injective:
        for kind, mapping in (("node", f.node_map), ("edge", f.edge_map)):
            hits = Counter(mapping.values())
            for img, count in sorted(hits.items()):
                if count > 1:
                    culprits = sorted(k for k, v in mapping.items() if v == img)
                    out.append(
                        Diagnostic(
                            "not-injective",
                            culprits[1],
                            f"{kind}s {culprits} share image {img!r}",
                        )
                    )
    return out


def _normalise_partial(
    pattern: TypedGraph,
    host: TypedGraph,
    partial: Morphism | tuple[Mapping[str, str], Mapping[str, str]] | None,
) -> tuple[dict[str, str], dict[str, str]]:
    if partial is None:
        return {}, {}
    if isinstance(partial, Morphism):
        node_map, edge_map = dict(partial.node_map), dict(partial.edge_map)
    else:
        node_map, edge_map = dict(partial[0]), dict(partial[1])
    for nid, img in node_map.items():
        if nid not in pattern.nodes:
            raise ValueError(f"partial map mentions unknown pattern node {nid!r}")
        if img not in host.nodes or host.nodes[img] != pattern.nodes[nid]:
            raise ValueError(f"partial map sends node {nid!r} to incompatible {img!r}")
    if len(set(node_map.values())) != len(node_map):
        raise ValueError("partial node map is not injective")
    for eid, img in edge_map.items():
        if eid not in pattern.edges:
            raise ValueError(f"partial map mentions unknown pattern edge {eid!r}")
        if img not in host.edges:
            raise ValueError(f"partial map sends edge {eid!r} to missing {img!r}")
        pe, he = pattern.edges[eid], host.edges[img]
        if pe.type != he.type:
            raise ValueError(f"partial map sends edge {eid!r} to a different type")
        # Pre-assigned edges pin down their endpoints' node images.
        for p_end, h_end in ((pe.src, he.src), (pe.tgt, he.tgt)):
            if node_map.get(p_end, h_end) != h_end:
                raise ValueError(
                    f"partial map on edge {eid!r} conflicts with node {p_end!r}"
                )
            node_map[p_end] = h_end
    if len(set(node_map.values())) != len(node_map):
        raise ValueError("partial map is not injective after endpoint closure")
    if len(set(edge_map.values())) != len(edge_map):
        raise ValueError("partial edge map is not injective")
    return node_map, edge_map


def find_injective_extensions(
    pattern: TypedGraph,
    host: TypedGraph,
    partial: Morphism | tuple[Mapping[str, str], Mapping[str, str]] | None = None,
) -> Iterator[Morphism]:
    """All injective morphisms ``pattern -> host`` extending ``partial``.

    The stream is deterministic: free pattern nodes are processed in
    ascending id order, host candidates are tried in ascending id order, and
    parallel-edge assignments follow ascending edge ids.
    """
    node_map, edge_map = _normalise_partial(pattern, host, partial)
    free_nodes = [n for n in pattern.sorted_nodes if n not in node_map]
    used = set(node_map.values())

    pattern_classes: dict[tuple[str, str, str], list[str]] = {}
    for eid in pattern.sorted_edges:
        e = pattern.edges[eid]
        pattern_classes.setdefault((e.type, e.src, e.tgt), []).append(eid)
    preassigned_per_class: Counter = Counter()
    claimed_per_host_class: Counter = Counter()
    for eid, img in edge_map.items():
        e = pattern.edges[eid]
        preassigned_per_class[(e.type, e.src, e.tgt)] += 1
        he = host.edges[img]
        claimed_per_host_class[(he.type, he.src, he.tgt)] += 1

    host_class_sizes = {k: len(v) for k, v in host.edge_classes.items()}

    def class_feasible(cls: tuple[str, str, str]) -> bool:
        etype, ps, pt = cls
        hs, ht = node_map.get(ps), node_map.get(pt)
        if hs is None or ht is None:
            return True
        need = len(pattern_classes[cls]) - preassigned_per_class[cls]
        have = host_class_sizes.get((etype, hs, ht), 0) - claimed_per_host_class[
            (etype, hs, ht)
        ]
        return have >= need

    touching: dict[str, list[tuple[str, str, str]]] = {n: [] for n in pattern.nodes}
    for cls in pattern_classes:
        _, ps, pt = cls
        touching[ps].append(cls)
        if pt != ps:
            touching[pt].append(cls)

    def assign_edges() -> Iterator[dict[str, str]]:
        classes = sorted(pattern_classes)
        claimed = set(edge_map.values())

        def per_class(idx: int, acc: dict[str, str]) -> Iterator[dict[str, str]]:
            if idx == len(classes):
                yield dict(acc)
                return
            cls = classes[idx]
            etype, ps, pt = cls
            remaining = [e for e in pattern_classes[cls] if e not in edge_map]
            if not remaining:
                yield from per_class(idx + 1, acc)
                return
            candidates = [
                h
                for h in host.edge_classes.get(
                    (etype, node_map[ps], node_map[pt]), ()
                )
                if h not in claimed
            ]
            if len(candidates) < len(remaining):
                return
            for combo in itertools.permutations(candidates, len(remaining)):
                for e, h in zip(remaining, combo):
                    acc[e] = h
                    claimed.add(h)
                yield from per_class(idx + 1, acc)
                for e, h in zip(remaining, combo):
                    del acc[e]
                    claimed.discard(h)

        yield from per_class(0, dict(edge_map))

    def assign_nodes(pos: int) -> Iterator[Morphism]:
        if pos == len(free_nodes):
            for emap in assign_edges():
                yield Morphism(pattern, host, dict(node_map), emap)
            return
        v = free_nodes[pos]
        for x in host.nodes_by_type.get(pattern.nodes[v], ()):
            if x in used:
                continue
            node_map[v] = x
            used.add(x)
            if all(class_feasible(cls) for cls in touching[v]):
                yield from assign_nodes(pos + 1)
            del node_map[v]
            used.discard(x)

    return assign_nodes(0)


def is_isomorphic(a: TypedGraph, b: TypedGraph) -> bool:
    """Exhaustive isomorphism check, intended for small graphs."""
    if len(a.nodes) != len(b.nodes) or len(a.edges) != len(b.edges):
        return False
    if Counter(a.nodes.values()) != Counter(b.nodes.values()):
        return False
    if Counter(e.type for e in a.edges.values()) != Counter(
        e.type for e in b.edges.values()
    ):
        return False
    return next(iter(find_injective_extensions(a, b)), None) is not None


def pushout(f: Morphism, g: Morphism) -> tuple[TypedGraph, Morphism, Morphism]:
    """The pushout of injective ``f: A -> B`` and ``g: A -> C``.

    The result reuses the ids of ``B``; elements of ``C`` outside the image
    of ``g`` keep their ids unless they clash, in which case a ``~k`` suffix
    is appended deterministically.
    """
    if f.src_graph != g.src_graph:
        raise ValueError("pushout legs must share their source graph")
    for leg, name in ((f, "first"), (g, "second")):
        problems = check_morphism(leg, require_injective=True)
        if problems:
            raise ValueError(f"{name} pushout leg is not a valid injection: {problems[0]}")
    b, c = f.dst_graph, g.dst_graph
    if b.type_graph != c.type_graph:
        raise ValueError("pushout legs land in different type graphs")

    g_node_inv = {v: k for k, v in g.node_map.items()}
    g_edge_inv = {v: k for k, v in g.edge_map.items()}

    nodes = dict(b.nodes)
    edges = dict(b.edges)
    taken = set(nodes) | set(edges)
    in_c_nodes: dict[str, str] = {}
    for cid in c.sorted_nodes:
        if cid in g_node_inv:
            in_c_nodes[cid] = f.node_map[g_node_inv[cid]]
        else:
            new = fresh_id(cid, taken)
            taken.add(new)
            nodes[new] = c.nodes[cid]
            in_c_nodes[cid] = new
    in_c_edges: dict[str, str] = {}
    for cid in c.sorted_edges:
        if cid in g_edge_inv:
            in_c_edges[cid] = f.edge_map[g_edge_inv[cid]]
        else:
            new = fresh_id(cid, taken)
            taken.add(new)
            e = c.edges[cid]
            edges[new] = Edge(e.type, in_c_nodes[e.src], in_c_nodes[e.tgt])
            in_c_edges[cid] = new

    d = TypedGraph(b.type_graph, nodes, edges)
    in_b = Morphism(b, d, {n: n for n in b.nodes}, {e: e for e in b.edges})
    in_c = Morphism(c, d, in_c_nodes, in_c_edges)
    return d, in_b, in_c


def pushout_complement(
    l: Morphism, m: Morphism
) -> tuple[TypedGraph, Morphism, Morphism]:
    """The pushout complement of ``l: K -> L`` and injective ``m: L -> G``.

    Deletes ``m(L \\ l(K))`` from the host.  Raises
    :class:`DanglingViolation` if a deleted node keeps an incident host edge
    that is not itself deleted.
    """
    for leg, name in ((l, "interface inclusion"), (m, "match")):
        problems = check_morphism(leg, require_injective=True)
        if problems:
            raise ValueError(f"{name} is not a valid injection: {problems[0]}")
    if l.dst_graph != m.src_graph:
        raise ValueError("interface inclusion and match do not compose")

    host = m.dst_graph
    kept_nodes = {l.node_map[k] for k in l.src_graph.nodes}
    kept_edges = {l.edge_map[k] for k in l.src_graph.edges}
    deleted_nodes = {m.node_map[v] for v in m.src_graph.nodes if v not in kept_nodes}
    deleted_edges = {m.edge_map[e] for e in m.src_graph.edges if e not in kept_edges}

    for y in sorted(deleted_nodes):
        for eid in host.incidence[y]:
            if eid not in deleted_edges:
                raise DanglingViolation(y)

    nodes = {n: t for n, t in host.nodes.items() if n not in deleted_nodes}
    edges = {e: v for e, v in host.edges.items() if e not in deleted_edges}
    context = TypedGraph(host.type_graph, nodes, edges)
    k_to_context = Morphism(
        l.src_graph,
        context,
        {k: m.node_map[l.node_map[k]] for k in l.src_graph.nodes},
        {k: m.edge_map[l.edge_map[k]] for k in l.src_graph.edges},
    )
    context_to_host = Morphism.inclusion(context, host)
    return context, k_to_context, context_to_host


def is_pullback_square(
    top: Morphism, left: Morphism, right: Morphism, bottom: Morphism
) -> bool:
    """Whether a commuting square of injective morphisms is a pullback.

    ``top: A -> B``, ``left: A -> C``, ``right: B -> D``, ``bottom: C -> D``.
    Raises :class:`NonCommuting` when the square does not commute.  For
    injective legs the square is a pullback exactly when ``A`` covers the
    whole intersection of the images of ``right`` and ``bottom``.
    """
    for leg, name in (
        (top, "top"),
        (left, "left"),
        (right, "right"),
        (bottom, "bottom"),
    ):
        problems = check_morphism(leg, require_injective=True)
        if problems:
            raise ValueError(f"{name} leg is not a valid injection: {problems[0]}")
    if top.dst_graph != right.src_graph or left.dst_graph != bottom.src_graph:
        raise ValueError("square legs do not compose")
    if right.dst_graph != bottom.dst_graph:
        raise ValueError("square legs do not land in a common graph")
    if not same_maps(compose(top, right), compose(left, bottom)):
        raise NonCommuting("the square does not commute")

    for b_map, c_map, a_top, a_left in (
        (right.node_map, bottom.node_map, top.node_map, left.node_map),
        (right.edge_map, bottom.edge_map, top.edge_map, left.edge_map),
    ):
        c_inv = {v: k for k, v in c_map.items()}
        covered = {(a_top[a], a_left[a]) for a in a_top}
        for bid, d_img in b_map.items():
            cid = c_inv.get(d_img)
            if cid is not None and (bid, cid) not in covered:
                return False
    return True


def enumerate_typed_graphs(
    tg: TypeGraph, max_nodes: int, max_parallel: int = 1
) -> Iterator[TypedGraph]:
    """All graphs over ``tg`` with at most ``max_nodes`` nodes, up to
    isomorphic relabelling of nodes, with at most ``max_parallel`` parallel
    edges per (type, src, tgt) class.

    Used for bounded semantic checks of application conditions.
    """
    type_names = sorted(tg.node_types)
    for n in range(max_nodes + 1):
        for combo in itertools.combinations_with_replacement(type_names, n):
            nodes = {f"h{i}": t for i, t in enumerate(combo)}
            slots = []
            for et_name in sorted(tg.edge_types):
                et = tg.edge_types[et_name]
                for u in sorted(nodes):
                    if nodes[u] != et.source:
                        continue
                    for v in sorted(nodes):
                        if nodes[v] == et.target:
                            slots.append((et_name, u, v))
            for counts in itertools.product(range(max_parallel + 1), repeat=len(slots)):
                edges = {}
                i = 0
                for (et_name, u, v), k in zip(slots, counts):
                    for _ in range(k):
                        edges[f"e{i}"] = Edge(et_name, u, v)
                        i += 1
                yield TypedGraph(tg, nodes, edges)
