"""Verification of place-refinement morphisms between marked nets.

A refinement map sends every node of a detailed net onto a node of an
abstract net, collapsing designated acyclic fragments onto single places.
The checker certifies nine conditions; the certificate records a pass/fail
verdict plus a witness per condition, and verdicts never rest on timeouts
(an exhausted search raises BudgetExceeded instead of failing a condition).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    InvalidPartition,
    MapShapeError,
    NetStructureError,
    NotEnabled,
    NotSmdSafe,
    ParseError,
    PreservationViolation,
    SoundnessContradiction,
    UncheckedMorphism,
    UnknownNode,
)
from .nets import Marking, MarkedNet, PetriNet, fire
from .reachability import DEFAULT_STATE_CAP, explore
from .smd import DEFAULT_SEARCH_BUDGET, find_sequential_component, smd_cover

CONDITIONS = (
    "place-image",
    "initial-marking",
    "transition-neighborhood",
    "collapsed-transition",
    "subnet-acyclic",
    "subnet-input",
    "subnet-output",
    "subnet-internal",
    "subnet-cover",
)


@dataclass(frozen=True)
class ConditionResult:
    condition: str
    passed: bool
    witness: str | None = None


@dataclass(frozen=True)
class AlphaMorphism:
    """A total surjective node map plus its verification certificate."""

    source: MarkedNet
    target: MarkedNet
    mapping: dict[str, str]
    certificate: tuple[ConditionResult, ...]

    @property
    def certified(self) -> bool:
        return all(r.passed for r in self.certificate)

    def apply(self, x: str) -> str:
        return self.mapping[x]

    def preimage(self, x2: str) -> frozenset[str]:
        return frozenset(x for x, y in self.mapping.items() if y == x2)

    def image_marking(self, m: Marking) -> Marking:
        return m.map(lambda p: self.mapping[p])

    def result(self, condition: str) -> ConditionResult:
        for r in self.certificate:
            if r.condition == condition:
                return r
        raise KeyError(condition)

    def failures(self) -> tuple[ConditionResult, ...]:
        return tuple(r for r in self.certificate if not r.passed)

    def render_certificate(self) -> str:
        lines = [f"certified: {'yes' if self.certified else 'no'}"]
        for r in self.certificate:
            line = f"condition {r.condition}: {'pass' if r.passed else 'fail'}"
            if r.witness is not None:
                line += f" witness={r.witness}"
            lines.append(line)
        return "\n".join(lines) + "\n"


def _require_smd_safe(marked: MarkedNet, role: str, state_cap: int, budget: int) -> None:
    cover = smd_cover(marked.net, marked.m0, budget=budget)
    if not cover.covered:
        raise NotSmdSafe(
            f"{role} net is not state-machine decomposable: "
            f"place '{cover.uncoverable}' lies in no one-token sequential component"
        )
    graph = explore(marked.net, marked.m0, cap=state_cap)
    if not graph.safe:
        raise NotSmdSafe(f"{role} net is unsafe at {graph.unsafe_witness}")
    if graph.truncated:
        raise NotSmdSafe(f"{role} net exploration exceeded {state_cap} states")


def _acyclic(arcs: Iterable[tuple[str, str]], nodes: frozenset[str]) -> str | None:
    """Return a node on a cycle, or None when the fragment is acyclic."""
    succ: dict[str, list[str]] = {x: [] for x in nodes}
    for a, b in arcs:
        succ[a].append(b)
    state: dict[str, int] = {}

    def visit(x: str) -> str | None:
        state[x] = 1
        for y in sorted(succ[x]):
            s = state.get(y, 0)
            if s == 1:
                return y
            if s == 0:
                hit = visit(y)
                if hit is not None:
                    return hit
        state[x] = 2
        return None

    for x in sorted(nodes):
        if state.get(x, 0) == 0:
            hit = visit(x)
            if hit is not None:
                return hit
    return None


def check_alpha(
    source: MarkedNet,
    target: MarkedNet,
    mapping: Mapping[str, str],
    *,
    component_budget: int = DEFAULT_SEARCH_BUDGET,
    state_cap: int = DEFAULT_STATE_CAP,
) -> AlphaMorphism:
    """Certify `mapping` as a refinement morphism from `source` onto `target`.

    The map must be total and surjective (MapShapeError otherwise) and both
    nets must be safe and coverable by sequential components (NotSmdSafe).
    The returned certificate carries one verdict per condition.
    """
    n1, n2 = source.net, target.net
    x1 = n1.nodes
    x2 = n2.nodes

    extra = set(mapping) - x1
    missing = x1 - set(mapping)
    if extra:
        raise MapShapeError(f"map names unknown source nodes: {sorted(extra)}")
    if missing:
        raise MapShapeError(f"map is not total; unmapped nodes: {sorted(missing)}")
    bad_images = {y for y in mapping.values() if y not in x2}
    if bad_images:
        raise MapShapeError(f"map targets unknown nodes: {sorted(bad_images)}")
    unhit = x2 - set(mapping.values())
    if unhit:
        raise MapShapeError(f"map is not surjective; unhit targets: {sorted(unhit)}")

    _require_smd_safe(source, "source", state_cap, component_budget)
    _require_smd_safe(target, "target", state_cap, component_budget)

    phi = dict(mapping)

    def img(xs: Iterable[str]) -> frozenset[str]:
        return frozenset(phi[x] for x in xs)

    results: list[ConditionResult] = []

    # places must land on places and cover all of them
    witness = None
    for p in sorted(n1.places):
        if not n2.is_place(phi[p]):
            witness = f"{p}->{phi[p]}"
            break
    if witness is None:
        uncovered = frozenset(n2.places) - img(n1.places)
        if uncovered:
            witness = f"no place maps onto {sorted(uncovered)[0]}"
    results.append(ConditionResult("place-image", witness is None, witness))

    # initial marking image
    m0_img = source.m0.map(lambda p: phi[p])
    ok = m0_img == target.m0
    results.append(
        ConditionResult(
            "initial-marking", ok, None if ok else f"{m0_img} != {target.m0}"
        )
    )

    # transitions mapped on transitions preserve neighborhoods
    witness = None
    for t in sorted(n1.transitions):
        if n2.is_transition(phi[t]):
            if img(n1.pre(t)) != n2.pre(phi[t]) or img(n1.post(t)) != n2.post(phi[t]):
                witness = t
                break
    results.append(ConditionResult("transition-neighborhood", witness is None, witness))

    # transitions mapped on places collapse their whole neighborhood
    witness = None
    for t in sorted(n1.transitions):
        if n2.is_place(phi[t]):
            if img(n1.neighborhood(t)) != frozenset([phi[t]]):
                witness = t
                break
    results.append(ConditionResult("collapsed-transition", witness is None, witness))

    preimages: dict[str, frozenset[str]] = {}
    for x, y in phi.items():
        preimages.setdefault(y, frozenset())
        preimages[y] |= {x}

    acyclic_w = input_w = output_w = internal_w = cover_w = None
    for p2 in sorted(n2.places):
        region = preimages.get(p2, frozenset())
        frag = n1.subnet(region)

        if acyclic_w is None:
            hit = _acyclic(frag.arcs, frag.nodes)
            if hit is not None:
                acyclic_w = f"{p2}: cycle through {hit}"

        if input_w is None:
            for p in sorted(frag.inputs & frag.places):
                if not img(n1.pre(p)) <= n2.pre(p2):
                    input_w = f"{p2}: input place {p}"
                    break
                if n2.pre(p2) and not n1.pre(p):
                    input_w = f"{p2}: input place {p} has an empty preset"
                    break

        if output_w is None:
            for p in sorted(frag.outputs & frag.places):
                if img(n1.post(p)) != n2.post(p2):
                    output_w = f"{p2}: output place {p}"
                    break

        if internal_w is None:
            for p in sorted(frag.places):
                if p not in frag.inputs and img(n1.pre(p)) != frozenset([p2]):
                    internal_w = f"{p2}: place {p}"
                    break
                if p not in frag.outputs and img(n1.post(p)) != frozenset([p2]):
                    internal_w = f"{p2}: place {p}"
                    break

        if cover_w is None:
            required = frozenset(
                x
                for t2 in n2.neighborhood(p2)
                for x in preimages.get(t2, frozenset())
                if n1.is_transition(x)
            )
            for p in sorted(frag.places):
                comp = find_sequential_component(
                    n1, source.m0, p, required=required, budget=component_budget
                )
                if comp is None:
                    cover_w = f"{p2}: place {p}"
                    break

    results.append(ConditionResult("subnet-acyclic", acyclic_w is None, acyclic_w))
    results.append(ConditionResult("subnet-input", input_w is None, input_w))
    results.append(ConditionResult("subnet-output", output_w is None, output_w))
    results.append(ConditionResult("subnet-internal", internal_w is None, internal_w))
    results.append(ConditionResult("subnet-cover", cover_w is None, cover_w))

    return AlphaMorphism(source, target, phi, tuple(results))


@dataclass(frozen=True)
class LocalNetPair:
    """Boundary-closed fragments around one abstract place and its refinement."""

    s1: MarkedNet
    s2: MarkedNet
    restricted: AlphaMorphism
    artificial: frozenset[str]


TOP1, BOT1 = "s1.top", "s1.bot"
TOP2, BOT2 = "s2.top", "s2.bot"


def build_local_nets(phi: AlphaMorphism, p2: str) -> LocalNetPair:
    """Cut out the refinement region of `p2` with artificial boundary places.

    The abstract side keeps p2 and its neighborhood transitions; the detailed
    side keeps the refining fragment plus the preimages of those transitions.
    An artificial input (output) place is added on both sides exactly when p2
    has input (output) transitions.
    """
    if not phi.certified:
        raise UncheckedMorphism("the refinement map must be certified first")
    n1, n2 = phi.source.net, phi.target.net
    if not (n2.has_node(p2) and n2.is_place(p2)):
        raise UnknownNode(f"'{p2}' is not a place of the abstract net")

    t_in = sorted(n2.pre(p2))
    t_out = sorted(n2.post(p2))
    add_top = bool(t_in)
    add_bot = bool(t_out)

    # abstract local net
    places2 = ([TOP2] if add_top else []) + [p2] + ([BOT2] if add_bot else [])
    arcs2 = [(t, p2) for t in t_in] + [(p2, t) for t in t_out]
    arcs2 += [(TOP2, t) for t in t_in] + [(t, BOT2) for t in t_out]
    s2net = PetriNet(places2, sorted(set(t_in) | set(t_out)), arcs2,
                     {t: n2.labels[t] for t in set(t_in) | set(t_out) if t in n2.labels})
    s2m0 = Marking([TOP2] if add_top else [p2])

    # detailed local net
    region = phi.preimage(p2)
    bound_in = sorted(
        x for t2 in t_in for x in phi.preimage(t2) if n1.is_transition(x)
    )
    bound_out = sorted(
        x for t2 in t_out for x in phi.preimage(t2) if n1.is_transition(x)
    )
    nodes1 = set(region) | set(bound_in) | set(bound_out)
    places1 = sorted(p for p in nodes1 if n1.is_place(p))
    trans1 = sorted(t for t in nodes1 if n1.is_transition(t))
    arcs1 = [(a, b) for a, b in n1.arcs if a in nodes1 and b in nodes1]
    arcs1 += [(TOP1, t) for t in bound_in] + [(t, BOT1) for t in bound_out]
    all_places1 = ([TOP1] if add_top else []) + places1 + ([BOT1] if add_bot else [])
    s1net = PetriNet(all_places1, trans1, arcs1,
                     {t: n1.labels[t] for t in trans1 if t in n1.labels})
    if add_top:
        s1m0 = Marking([TOP1])
    else:
        frag = n1.subnet(region)
        s1m0 = Marking(sorted(frag.inputs & frag.places))

    restriction = {x: phi.apply(x) for x in nodes1}
    if add_top:
        restriction[TOP1] = TOP2
    if add_bot:
        restriction[BOT1] = BOT2
    restricted = check_alpha(MarkedNet(s1net, s1m0), MarkedNet(s2net, s2m0), restriction)

    artificial = set()
    if add_top:
        artificial |= {TOP1, TOP2}
    if add_bot:
        artificial |= {BOT1, BOT2}
    return LocalNetPair(MarkedNet(s1net, s1m0), MarkedNet(s2net, s2m0), restricted, frozenset(artificial))


def lemma1_check(phi: AlphaMorphism, p2: str, event_cap: int = 10_000) -> bool:
    """Unfold the detailed local net and re-certify the composed fold map.

    Requires a certified map whose source is a sound workflow net; an unsound
    local fragment is surfaced as SoundnessContradiction rather than silently
    producing a failed certificate.
    """
    from .gwf import check_soundness, recognize_gwf
    from .unfolding import unfold

    if not phi.certified:
        raise UncheckedMorphism("the refinement map must be certified first")
    src_gwf = recognize_gwf(phi.source.net)
    report = check_soundness(src_gwf)
    if not report.sound:
        raise SoundnessContradiction(
            f"source net is not sound ({report.violated}); the local-net check requires soundness"
        )
    pair = build_local_nets(phi, p2)

    local_gwf = recognize_gwf(pair.s1.net)
    local_report = check_soundness(local_gwf)
    if not local_report.sound:
        raise SoundnessContradiction(
            f"local net of '{p2}' is not sound ({local_report.violated})"
        )

    bp = unfold(pair.s1.net, pair.s1.m0, event_cap=event_cap)
    if bp.truncated:
        raise ValueError("unfolding hit the event cap; the fragment should be acyclic")
    occ_net = PetriNet(bp.occ.conditions, bp.occ.events, bp.occ.arcs)
    minimal = Marking(sorted(bp.occ.minimal() & set(bp.occ.conditions)))
    composed = {x: pair.restricted.apply(bp.fold[x]) for x in bp.fold}
    verdict = check_alpha(MarkedNet(occ_net, minimal), pair.s2, composed)
    return verdict.certified


def quotient_candidate(
    marked: MarkedNet,
    blocks: Mapping[str, Iterable[str]],
    place_blocks: Iterable[str] = (),
) -> tuple[MarkedNet, dict[str, str]]:
    """Build the quotient net induced by a node partition.

    Each block becomes one node: blocks containing a place (or listed in
    `place_blocks`) become places, pure-transition blocks become transitions.
    No certification is implied; run check_alpha on the returned map.
    """
    net = marked.net
    forced_places = frozenset(place_blocks)
    assignment: dict[str, str] = {}
    for bid, members in blocks.items():
        members = list(members)
        if not members:
            raise InvalidPartition(f"block '{bid}' is empty")
        for x in members:
            if not net.has_node(x):
                raise InvalidPartition(f"block '{bid}' names unknown node '{x}'")
            if x in assignment:
                raise InvalidPartition(f"node '{x}' occurs in two blocks")
            assignment[x] = bid
    unassigned = net.nodes - set(assignment)
    if unassigned:
        raise InvalidPartition(f"nodes not covered by any block: {sorted(unassigned)}")

    kinds: dict[str, str] = {}
    for bid, members in blocks.items():
        if bid in forced_places or any(net.is_place(x) for x in members):
            kinds[bid] = "place"
        else:
            kinds[bid] = "transition"

    arcs: set[tuple[str, str]] = set()
    for a, b in net.arcs:
        ba, bb = assignment[a], assignment[b]
        if ba == bb:
            continue
        if kinds[ba] == kinds[bb]:
            raise InvalidPartition(
                f"blocks '{ba}' and '{bb}' are both {kinds[ba]}s but an arc connects them"
            )
        arcs.add((ba, bb))

    labels: dict[str, str] = {}
    for bid, members in blocks.items():
        if kinds[bid] != "transition":
            continue
        member_labels = {net.labels[t] for t in members if t in net.labels}
        if len(member_labels) == 1:
            labels[bid] = next(iter(member_labels))

    places = sorted(b for b, k in kinds.items() if k == "place")
    transitions = sorted(b for b, k in kinds.items() if k == "transition")
    try:
        qnet = PetriNet(places, transitions, arcs, labels)
    except NetStructureError as exc:
        raise InvalidPartition(f"quotient is not a well-formed net: {exc}") from exc
    qm0 = marked.m0.map(lambda p: assignment[p])
    return MarkedNet(qnet, qm0), assignment


def simulate_preservation(phi: AlphaMorphism, trace: Iterable[str]) -> tuple[str, ...]:
    """Replay a source firing sequence and project it through the map.

    Steps mapped on transitions must fire in the abstract net between the
    image markings; steps mapped on places must leave the image unchanged.
    Returns the projected abstract firing sequence.
    """
    n1, n2 = phi.source.net, phi.target.net
    m1 = phi.source.m0
    m2 = phi.image_marking(m1)
    if m2 != phi.target.m0:
        raise PreservationViolation(
            f"initial marking image {m2} differs from the abstract initial marking"
        )
    emitted: list[str] = []
    for t in trace:
        if not n1.has_node(t) or not n1.is_transition(t):
            raise UnknownNode(f"unknown transition '{t}' in trace")
        m1_next = fire(n1, m1, t)  # raises NotEnabled for bad traces
        image = phi.apply(t)
        m1_img, m1_next_img = phi.image_marking(m1), phi.image_marking(m1_next)
        if n2.is_transition(image):
            try:
                m2_next = fire(n2, m1_img, image)
            except NotEnabled as exc:
                raise PreservationViolation(
                    f"image transition '{image}' not enabled at {m1_img}"
                ) from exc
            if m2_next != m1_next_img:
                raise PreservationViolation(
                    f"firing '{image}' at {m1_img} gave {m2_next}, expected {m1_next_img}"
                )
            emitted.append(image)
        else:
            if m1_img != m1_next_img:
                raise PreservationViolation(
                    f"internal step '{t}' changed the image marking: {m1_img} -> {m1_next_img}"
                )
        m1 = m1_next
    return tuple(emitted)


@dataclass(frozen=True)
class AmapDocument:
    """Parsed .amap file: net file references plus the node map."""

    source_ref: str
    target_ref: str
    mapping: dict[str, str]


def parse_amap(text: str, source: str | None = None) -> AmapDocument:
    source_ref: str | None = None
    target_ref: str | None = None
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "alpha":
            if len(words) != 3:
                raise ParseError("'alpha' needs source and target net paths", lineno, source)
            if source_ref is not None:
                raise ParseError("duplicate 'alpha' header", lineno, source)
            source_ref, target_ref = words[1], words[2]
        elif words[0] == "map":
            if len(words) != 3:
                raise ParseError("'map' needs a source and a target node", lineno, source)
            if words[1] in mapping:
                raise ParseError(f"node '{words[1]}' mapped twice", lineno, source)
            mapping[words[1]] = words[2]
        else:
            raise ParseError(f"unknown directive '{words[0]}'", lineno, source)
    if source_ref is None or target_ref is None:
        raise ParseError("missing 'alpha <source> <target>' header", None, source)
    return AmapDocument(source_ref, target_ref, mapping)


def format_amap(doc: AmapDocument) -> str:
    lines = [f"alpha {doc.source_ref} {doc.target_ref}"]
    for src in sorted(doc.mapping):
        lines.append(f"map {src} {doc.mapping[src]}")
    return "\n".join(lines) + "\n"
