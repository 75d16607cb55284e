"""Rewrite rules over typed graphs.

A :class:`Rule` is a span ``L >= K <= R`` of id-subgraphs together with
negative application conditions (NACs) rooted at ``L``.  Applying a rule at
an injective, NAC-satisfying match deletes the image of ``L \\ K``, keeps
the image of ``K``, and glues in fresh copies of ``R \\ K``.

NACs can be shifted along an injective morphism of their root
(:func:`shift_nacs`); the result forbids the same host situations for the
extended pattern.  Subrule embeddings relate a smaller rule to a larger one
componentwise and are checked structurally (commuting pullback squares) and
semantically (application-condition equivalence on bounded hosts).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .core import (
    Diagnostic,
    Edge,
    EffectGraphError,
    Morphism,
    TypedGraph,
    check_morphism,
    compose,
    enumerate_typed_graphs,
    find_injective_extensions,
    fresh_id,
    graph_union,
    is_id_subgraph,
    is_pullback_square,
    pushout_complement,
    same_maps,
    validate_graph,
)


class NotInjective(EffectGraphError):
    """A rule was applied at a non-injective candidate match."""


class NacViolated(EffectGraphError):
    """A rule was applied at a match that violates one of its NACs."""


@dataclass(frozen=True)
class Nac:
    """A negative application condition.

    ``forbidden`` contains the rule's left-hand side as an id-subgraph plus
    the elements whose joint presence around a match forbids it.
    """

    forbidden: TypedGraph


@dataclass(frozen=True)
class Rule:
    """A span ``lhs >= interface <= rhs`` with NACs rooted at ``lhs``."""

    lhs: TypedGraph
    interface: TypedGraph
    rhs: TypedGraph
    nacs: tuple[Nac, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "nacs", tuple(self.nacs))

    @property
    def left_inclusion(self) -> Morphism:
        return Morphism.inclusion(self.interface, self.lhs)

    @property
    def right_inclusion(self) -> Morphism:
        return Morphism.inclusion(self.interface, self.rhs)


@dataclass(frozen=True)
class SubruleEmbedding:
    """Componentwise injections embedding ``sub`` into ``sup``."""

    sub: Rule
    sup: Rule
    iota_lhs: Morphism
    iota_interface: Morphism
    iota_rhs: Morphism

    @classmethod
    def by_inclusion(cls, sub: Rule, sup: Rule) -> SubruleEmbedding:
        return cls(
            sub,
            sup,
            Morphism.inclusion(sub.lhs, sup.lhs),
            Morphism.inclusion(sub.interface, sup.interface),
            Morphism.inclusion(sub.rhs, sup.rhs),
        )


@dataclass(frozen=True)
class TransformationRecord:
    """Everything produced by one rule application.

    The context is the host minus the deleted image; it embeds into both the
    input and the output, and the interface embeds into the context.
    """

    rule: Rule
    input: TypedGraph
    output: TypedGraph
    match: Morphism
    comatch: Morphism
    context: TypedGraph
    interface_to_context: Morphism
    context_to_input: Morphism
    context_to_output: Morphism


def validate_rule(r: Rule) -> list[Diagnostic]:
    """All violations of the span shape, typing, and NAC rooting."""
    out: list[Diagnostic] = []
    tg = r.lhs.type_graph
    for g, label in ((r.interface, "interface"), (r.rhs, "rhs")):
        if g.type_graph != tg:
            out.append(
                Diagnostic("type-graph-mismatch", None, f"{label} uses another type graph")
            )
    for g, label in ((r.lhs, "lhs"), (r.interface, "interface"), (r.rhs, "rhs")):
        for d in validate_graph(g, tg):
            out.append(Diagnostic(d.code, d.element, f"{label}: {d.message}"))
    for sup, label in ((r.lhs, "lhs"), (r.rhs, "rhs")):
        for nid in sorted(r.interface.nodes):
            if sup.nodes.get(nid) != r.interface.nodes[nid]:
                out.append(
                    Diagnostic(
                        "interface-not-included",
                        nid,
                        f"interface node missing from or retyped in {label}",
                    )
                )
        for eid in sorted(r.interface.edges):
            if sup.edges.get(eid) != r.interface.edges[eid]:
                out.append(
                    Diagnostic(
                        "interface-not-included",
                        eid,
                        f"interface edge missing from or changed in {label}",
                    )
                )
    # Ids occurring on both sides but not in the interface would make the
    # deleted and created elements indistinguishable.
    overlap = (r.lhs.nodes.keys() & r.rhs.nodes.keys()) - r.interface.nodes.keys()
    overlap |= (r.lhs.edges.keys() & r.rhs.edges.keys()) - r.interface.edges.keys()
    for xid in sorted(overlap):
        out.append(
            Diagnostic(
                "lhs-rhs-overlap",
                xid,
                "id shared by lhs and rhs outside the interface",
            )
        )
    for i, nac in enumerate(r.nacs):
        if not is_id_subgraph(r.lhs, nac.forbidden):
            out.append(
                Diagnostic("nac-not-rooted", None, f"NAC {i} does not contain the lhs")
            )
        for d in validate_graph(nac.forbidden, tg):
            out.append(Diagnostic(d.code, d.element, f"NAC {i}: {d.message}"))
    return out


def satisfies_nacs(m: Morphism, nacs: Iterable[Nac]) -> bool:
    """Whether no NAC extends the injective match ``m`` into its host."""
    for nac in nacs:
        hit = next(
            iter(
                find_injective_extensions(
                    nac.forbidden, m.dst_graph, (m.node_map, m.edge_map)
                )
            ),
            None,
        )
        if hit is not None:
            return False
    return True


def _overlap_candidates(
    extra_nodes: Sequence[str],
    extra_edges: Sequence[str],
    nac_graph: TypedGraph,
    target: TypedGraph,
    image_nodes: frozenset[str],
    image_edges: frozenset[str],
    b_nodes: dict[str, str],
) -> Iterator[tuple[dict[str, str], dict[str, str]]]:
    """All injective partial identifications of NAC-only elements with
    target elements outside the image of the root morphism."""
    free_nodes = [n for n in target.sorted_nodes if n not in image_nodes]
    free_edges = [e for e in target.sorted_edges if e not in image_edges]

    def node_choices(idx: int, phi: dict[str, str]) -> Iterator[dict[str, str]]:
        if idx == len(extra_nodes):
            yield dict(phi)
            return
        n = extra_nodes[idx]
        yield from node_choices(idx + 1, phi)
        for x in free_nodes:
            if x in phi.values() or target.nodes[x] != nac_graph.nodes[n]:
                continue
            phi[n] = x
            yield from node_choices(idx + 1, phi)
            del phi[n]

    def edge_choices(
        phi: dict[str, str], idx: int, psi: dict[str, str]
    ) -> Iterator[tuple[dict[str, str], dict[str, str]]]:
        if idx == len(extra_edges):
            yield dict(phi), dict(psi)
            return
        eid = extra_edges[idx]
        yield from edge_choices(phi, idx + 1, psi)
        e = nac_graph.edges[eid]
        src_img = b_nodes.get(e.src, phi.get(e.src))
        tgt_img = b_nodes.get(e.tgt, phi.get(e.tgt))
        if src_img is None or tgt_img is None:
            return
        for x in free_edges:
            if x in psi.values():
                continue
            te = target.edges[x]
            if te.type != e.type or te.src != src_img or te.tgt != tgt_img:
                continue
            psi[eid] = x
            yield from edge_choices(phi, idx + 1, psi)
            del psi[eid]

    for phi in node_choices(0, {}):
        yield from edge_choices(phi, 0, {})


def _same_rooted_nac(root: TypedGraph, a: Nac, b: Nac) -> bool:
    """Isomorphism of two NACs fixing the shared root pointwise."""
    fa, fb = a.forbidden, b.forbidden
    if len(fa.nodes) != len(fb.nodes) or len(fa.edges) != len(fb.edges):
        return False
    partial = ({n: n for n in root.nodes}, {e: e for e in root.edges})
    return next(iter(find_injective_extensions(fa, fb, partial)), None) is not None


def shift_nacs(b: Morphism, nacs: Iterable[Nac]) -> tuple[Nac, ...]:
    """Shift NACs along the injective morphism ``b`` of their root.

    For every injective ``m'`` out of the codomain of ``b``, the returned
    set is satisfied by ``m'`` exactly when the input set is satisfied by
    ``m' . b``.  Each result arises from one way of overlapping the NAC-only
    elements with codomain elements outside the image of ``b``; results that
    agree up to a root-fixing isomorphism are deduplicated.
    """
    target = b.dst_graph
    b_nodes = dict(b.node_map)
    shifted: list[Nac] = []
    for nac in nacs:
        n_graph = nac.forbidden
        root = b.src_graph
        extra_nodes = [n for n in n_graph.sorted_nodes if n not in root.nodes]
        extra_edges = [e for e in n_graph.sorted_edges if e not in root.edges]
        for phi, psi in _overlap_candidates(
            extra_nodes,
            extra_edges,
            n_graph,
            target,
            b.node_images,
            b.edge_images,
            b_nodes,
        ):
            taken = set(target.nodes) | set(target.edges)
            nodes = dict(target.nodes)
            node_names: dict[str, str] = {}
            for n in extra_nodes:
                if n in phi:
                    node_names[n] = phi[n]
                    continue
                new = fresh_id(n, taken)
                taken.add(new)
                nodes[new] = n_graph.nodes[n]
                node_names[n] = new
            edges = dict(target.edges)
            ok = True
            for eid in extra_edges:
                if eid in psi:
                    continue
                e = n_graph.edges[eid]
                src = b_nodes.get(e.src, node_names.get(e.src))
                tgt = b_nodes.get(e.tgt, node_names.get(e.tgt))
                if src is None or tgt is None:
                    ok = False
                    break
                new = fresh_id(eid, taken)
                taken.add(new)
                edges[new] = Edge(e.type, src, tgt)
            if not ok:
                continue
            candidate = Nac(TypedGraph(target.type_graph, nodes, edges))
            if not any(_same_rooted_nac(target, candidate, kept) for kept in shifted):
                shifted.append(candidate)
    shifted.sort(
        key=lambda nac: (
            len(nac.forbidden.nodes),
            len(nac.forbidden.edges),
            tuple(sorted(nac.forbidden.nodes.items())),
            tuple(sorted((k, v.type, v.src, v.tgt) for k, v in nac.forbidden.edges.items())),
        )
    )
    return tuple(shifted)


def _max_parallel(graphs: Iterable[TypedGraph]) -> int:
    worst = 1
    for g in graphs:
        for ids in g.edge_classes.values():
            worst = max(worst, len(ids))
    return worst


def nac_sets_equivalent(
    lhs: TypedGraph,
    first: Sequence[Nac],
    second: Sequence[Nac],
    max_nodes: int = 5,
    max_parallel: int | None = None,
) -> bool:
    """Semantic equivalence of two NAC sets over the same root.

    Decided exhaustively: every host up to ``max_nodes`` nodes (one
    representative per node relabelling) and every injective match of the
    root is checked against both sets.  Parallel-edge multiplicity in the
    generated hosts is bounded by the worst multiplicity occurring in the
    inputs unless overridden.
    """
    if list(first) == list(second):
        return True
    involved = [lhs, *(n.forbidden for n in first), *(n.forbidden for n in second)]
    if max_parallel is None:
        max_parallel = _max_parallel(involved)
    for host in enumerate_typed_graphs(lhs.type_graph, max_nodes, max_parallel):
        for m in find_injective_extensions(lhs, host):
            if satisfies_nacs(m, first) != satisfies_nacs(m, second):
                return False
    return True


def check_subrule_embedding(
    e: SubruleEmbedding, max_equiv_nodes: int = 5
) -> bool:
    """Whether ``e`` embeds its small rule into its large rule.

    Structurally both mediating squares must commute and be pullbacks;
    semantically the large rule's NACs must be equivalent to the small
    rule's NACs shifted along the left leg.
    """
    for leg, src, dst, name in (
        (e.iota_lhs, e.sub.lhs, e.sup.lhs, "lhs"),
        (e.iota_interface, e.sub.interface, e.sup.interface, "interface"),
        (e.iota_rhs, e.sub.rhs, e.sup.rhs, "rhs"),
    ):
        if leg.src_graph != src or leg.dst_graph != dst:
            raise ValueError(f"{name} leg does not connect the two rules")
        problems = check_morphism(leg, require_injective=True)
        if problems:
            raise ValueError(f"{name} leg is not a valid injection: {problems[0]}")

    left_ok = same_maps(
        compose(e.sub.left_inclusion, e.iota_lhs),
        compose(e.iota_interface, e.sup.left_inclusion),
    )
    right_ok = same_maps(
        compose(e.sub.right_inclusion, e.iota_rhs),
        compose(e.iota_interface, e.sup.right_inclusion),
    )
    if not (left_ok and right_ok):
        return False
    if not is_pullback_square(
        e.sub.left_inclusion, e.iota_interface, e.iota_lhs, e.sup.left_inclusion
    ):
        return False
    if not is_pullback_square(
        e.sub.right_inclusion, e.iota_interface, e.iota_rhs, e.sup.right_inclusion
    ):
        return False
    return nac_sets_equivalent(
        e.sup.lhs,
        list(e.sup.nacs),
        list(shift_nacs(e.iota_lhs, e.sub.nacs)),
        max_nodes=max_equiv_nodes,
    )


def apply_rule(r: Rule, g: TypedGraph, m: Morphism) -> TransformationRecord:
    """Apply ``r`` to host ``g`` at match ``m``.

    The match must be a total injective morphism from the rule's lhs that
    satisfies all NACs; deletion must not leave dangling edges.  Created
    elements receive ids of the form ``ruleElementId#k`` with the smallest
    ``k >= 1`` that is unused, so outputs are reproducible.
    """
    if m.src_graph != r.lhs or m.dst_graph != g:
        raise ValueError("match must map the rule's lhs into the host")
    problems = check_morphism(m)
    if problems:
        raise ValueError(f"match is not a valid morphism: {problems[0]}")
    if check_morphism(m, require_injective=True):
        raise NotInjective("match identifies distinct lhs elements")
    if not satisfies_nacs(m, r.nacs):
        raise NacViolated("a negative application condition matches the host")

    context, k_to_context, context_to_input = pushout_complement(r.left_inclusion, m)

    taken = set(context.nodes) | set(context.edges)
    created_nodes: dict[str, str] = {}
    comatch_nodes = dict(k_to_context.node_map)
    for rid in sorted(r.rhs.nodes.keys() - r.interface.nodes.keys()):
        k = 1
        new = f"{rid}#{k}"
        while new in taken:
            k += 1
            new = f"{rid}#{k}"
        taken.add(new)
        created_nodes[new] = r.rhs.nodes[rid]
        comatch_nodes[rid] = new
    created_edges: dict[str, Edge] = {}
    comatch_edges = dict(k_to_context.edge_map)
    for rid in sorted(r.rhs.edges.keys() - r.interface.edges.keys()):
        k = 1
        new = f"{rid}#{k}"
        while new in taken:
            k += 1
            new = f"{rid}#{k}"
        taken.add(new)
        e = r.rhs.edges[rid]
        created_edges[new] = Edge(e.type, comatch_nodes[e.src], comatch_nodes[e.tgt])
        comatch_edges[rid] = new

    output = TypedGraph(
        g.type_graph,
        {**context.nodes, **created_nodes},
        {**context.edges, **created_edges},
    )
    comatch = Morphism(r.rhs, output, comatch_nodes, comatch_edges)
    context_to_output = Morphism.inclusion(context, output)
    return TransformationRecord(
        rule=r,
        input=g,
        output=output,
        match=m,
        comatch=comatch,
        context=context,
        interface_to_context=k_to_context,
        context_to_input=context_to_input,
        context_to_output=context_to_output,
    )
