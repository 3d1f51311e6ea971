"""Asynchronous composition of two workflow nets over message channels.

Channels are buffer places filled by transitions of one component and
drained by transitions of the other.  Composition renames nodes with the
prefixes "a1.", "a2." and "ch." so the disjointness assumptions always hold
constructively; the provenance map, not name parsing, is the authority on
where a node came from.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ComponentMismatch, InvalidChannelSpec, InvalidMarking, ParseError
from .gwf import GwfNet, recognize_gwf
from .morphisms import AlphaMorphism, check_alpha
from .netfile import NetDocument
from .nets import Marking, PetriNet

A1, A2, CH = "agent1", "agent2", "channel"


@dataclass(frozen=True)
class ChannelSpec:
    """Channel places plus send/receive arc declarations."""

    channels: tuple[str, ...]
    sends: frozenset[tuple[str, str]]  # (transition, channel)
    receives: frozenset[tuple[str, str]]  # (channel, transition)


@dataclass(frozen=True)
class ComposedNet:
    """A certified composition with full node provenance.

    `sends` and `receives` carry the component tag explicitly, so later
    refinements never depend on transition ids being globally unique.
    """

    gwf: GwfNet
    provenance: dict[str, tuple[str, str]]  # node -> (origin, original id)
    agent1: GwfNet
    agent2: GwfNet
    channels: tuple[str, ...]
    sends: frozenset[tuple[str, str, str]]  # (origin, transition, channel)
    receives: frozenset[tuple[str, str, str]]  # (channel, origin, transition)

    @property
    def spec(self) -> ChannelSpec:
        return ChannelSpec(
            self.channels,
            frozenset((t, c) for _, t, c in self.sends),
            frozenset((c, t) for c, _, t in self.receives),
        )

    def nodes_of(self, origin: str) -> frozenset[str]:
        return frozenset(n for n, (o, _) in self.provenance.items() if o == origin)

    def canonical_net(self) -> tuple[PetriNet, Marking, Marking]:
        """The composition with original node ids; fails on id collisions."""
        names = [orig for _, orig in self.provenance.values()]
        if len(set(names)) != len(names):
            raise InvalidMarking("original node ids collide; no canonical form")
        strip = {n: orig for n, (_, orig) in self.provenance.items()}
        net = self.gwf.net.rename(lambda x: strip[x])
        return net, self.gwf.m0.map(lambda p: strip[p]), self.gwf.mf.map(lambda p: strip[p])


def _build(
    n1: GwfNet,
    n2: GwfNet,
    channels: tuple[str, ...],
    sends: frozenset[tuple[str, str, str]],
    receives: frozenset[tuple[str, str, str]],
) -> ComposedNet:
    """Assemble and certify the composition from side-tagged channel arcs."""
    if len(set(channels)) != len(channels):
        raise InvalidChannelSpec("-", "duplicate channel id")
    nets = {A1: n1, A2: n2}
    declared = set(channels)
    for origin, t, c in sorted(sends) + [(o, t, c) for c, o, t in sorted(receives)]:
        if c not in declared:
            raise InvalidChannelSpec(c, f"undeclared channel '{c}'")
        net = nets[origin].net
        if not (net.has_node(t) and net.is_transition(t)):
            raise InvalidChannelSpec(c, f"'{t}' is not a transition of {origin}")
    for c in channels:
        send_sides = {o for o, _, cc in sends if cc == c}
        recv_sides = {o for cc, o, _ in receives if cc == c}
        if not send_sides or not recv_sides:
            raise InvalidChannelSpec(
                c, f"channel '{c}' needs at least one sender and one receiver"
            )
        if len(send_sides) > 1 or len(recv_sides) > 1:
            raise InvalidChannelSpec(c, f"channel '{c}' is fed or drained by both components")
        if send_sides == recv_sides:
            raise InvalidChannelSpec(
                c,
                f"channel '{c}' has its sender and receiver in the same component; "
                "messages must cross to the other agent",
            )

    a1net = n1.net.rename(lambda x: f"a1.{x}")
    a2net = n2.net.rename(lambda x: f"a2.{x}")
    pfx = {A1: "a1.", A2: "a2."}
    arcs = set(a1net.arcs) | set(a2net.arcs)
    for origin, t, c in sends:
        arcs.add((f"{pfx[origin]}{t}", f"ch.{c}"))
    for c, origin, t in receives:
        arcs.add((f"ch.{c}", f"{pfx[origin]}{t}"))

    labels = dict(a1net.labels)
    labels.update(a2net.labels)
    net = PetriNet(
        list(a1net.places) + list(a2net.places) + [f"ch.{c}" for c in channels],
        list(a1net.transitions) + list(a2net.transitions),
        arcs,
        labels,
    )
    m0 = Marking(list(n1.m0.map(lambda p: f"a1.{p}").elements())
                 + list(n2.m0.map(lambda p: f"a2.{p}").elements()))
    mf = Marking(list(n1.mf.map(lambda p: f"a1.{p}").elements())
                 + list(n2.mf.map(lambda p: f"a2.{p}").elements()))
    gwf = recognize_gwf(net, m0, mf)  # guaranteed by construction; a failure is a bug

    provenance: dict[str, tuple[str, str]] = {}
    for x in n1.net.nodes:
        provenance[f"a1.{x}"] = (A1, x)
    for x in n2.net.nodes:
        provenance[f"a2.{x}"] = (A2, x)
    for c in channels:
        provenance[f"ch.{c}"] = (CH, c)
    return ComposedNet(gwf, provenance, n1, n2, channels, sends, receives)


def _resolve_side(t: str, n1: GwfNet, n2: GwfNet, channel: str) -> str:
    in1 = n1.net.has_node(t) and n1.net.is_transition(t)
    in2 = n2.net.has_node(t) and n2.net.is_transition(t)
    if in1 and in2:
        raise InvalidChannelSpec(
            channel, f"transition '{t}' exists in both components; cannot bind channel '{channel}'"
        )
    if not in1 and not in2:
        raise InvalidChannelSpec(channel, f"transition '{t}' exists in neither component")
    return A1 if in1 else A2


def channel_compose(n1: GwfNet, n2: GwfNet, spec: ChannelSpec) -> ComposedNet:
    """Union of the two nets plus channel places and their arcs.

    Each channel must be fed from exactly one component and drained by the
    other, with at least one sender and one receiver.  The result is
    re-certified as a workflow net; failure there indicates a bug, not bad
    input.
    """
    sends = frozenset((_resolve_side(t, n1, n2, c), t, c) for t, c in spec.sends)
    receives = frozenset((c, _resolve_side(t, n1, n2, c), t) for c, t in spec.receives)
    return _build(n1, n2, spec.channels, sends, receives)


def refine_in_composition(
    abstract: ComposedNet, phi: AlphaMorphism
) -> tuple[ComposedNet, AlphaMorphism]:
    """Substitute one component by its refinement and lift the map.

    The target of `phi` must be one of the two components.  Channel arcs that
    touched an abstract transition are duplicated across all its preimages;
    the other component and its channel arcs stay untouched.  The lifted map
    (the refinement plus identity elsewhere) is certified before returning.
    """
    if phi.target == abstract.agent1.marked:
        side = A1
    elif phi.target == abstract.agent2.marked:
        side = A2
    else:
        raise ComponentMismatch(
            "the map's target net is neither component of the composition"
        )

    refined = recognize_gwf(phi.source.net)

    def rewrite(origin: str, t: str) -> list[tuple[str, str]]:
        if origin != side:
            return [(origin, t)]
        return [
            (origin, x)
            for x in sorted(phi.preimage(t))
            if refined.net.is_transition(x)
        ]

    sends = frozenset(
        (o2, t2, c) for o, t, c in abstract.sends for o2, t2 in rewrite(o, t)
    )
    receives = frozenset(
        (c, o2, t2) for c, o, t in abstract.receives for o2, t2 in rewrite(o, t)
    )

    if side == A1:
        result = _build(refined, abstract.agent2, abstract.channels, sends, receives)
    else:
        result = _build(abstract.agent1, refined, abstract.channels, sends, receives)

    lifted: dict[str, str] = {}
    for node in result.gwf.net.nodes:
        origin, orig = result.provenance[node]
        if origin == side:
            prefix = "a1." if side == A1 else "a2."
            lifted[node] = f"{prefix}{phi.apply(orig)}"
        else:
            lifted[node] = node
    induced = check_alpha(result.gwf.marked, abstract.gwf.marked, lifted)
    return result, induced


def decompose_marking(c: ComposedNet, m: Marking) -> tuple[Marking, Marking, Marking]:
    """Split a composition marking into agent-1, channel and agent-2 parts.

    The returned markings use the original component place ids.
    """
    parts: dict[str, dict[str, int]] = {A1: {}, CH: {}, A2: {}}
    for p in m.support:
        if p not in c.provenance:
            raise InvalidMarking(f"token on unknown place '{p}'")
        origin, orig = c.provenance[p]
        parts[origin][orig] = m.count(p)
    return Marking(parts[A1]), Marking(parts[CH]), Marking(parts[A2])


def composed_to_document(c: ComposedNet) -> NetDocument:
    """Serializable form: channel places flagged, m0/mf as init/final."""
    return NetDocument(
        c.gwf.net,
        c.gwf.m0.support,
        c.gwf.mf.support,
        frozenset(f"ch.{ch}" for ch in c.channels),
    )


def composed_from_document(doc: NetDocument) -> ComposedNet:
    """Rebuild a composition from its serialized form.

    The file format's prefix convention ("a1.", "a2.", "ch.") identifies the
    components; nets not produced by the composer are rejected.
    """
    channels: list[str] = []
    sides: dict[str, dict] = {
        "a1.": {"places": [], "transitions": [], "arcs": [], "labels": {}},
        "a2.": {"places": [], "transitions": [], "arcs": [], "labels": {}},
    }

    def side_of(node: str) -> str:
        for prefix in ("a1.", "a2."):
            if node.startswith(prefix):
                return prefix
        raise ParseError(
            f"node '{node}' carries no component prefix; not a serialized composition"
        )

    for p in doc.net.places:
        if p in doc.channels:
            if not p.startswith("ch."):
                raise ParseError(f"channel place '{p}' lacks the 'ch.' prefix")
            channels.append(p[len("ch."):])
        else:
            prefix = side_of(p)
            sides[prefix]["places"].append(p[len(prefix):])
    for t in doc.net.transitions:
        prefix = side_of(t)
        sides[prefix]["transitions"].append(t[len(prefix):])
        if t in doc.net.labels:
            sides[prefix]["labels"][t[len(prefix):]] = doc.net.labels[t]

    sends: set[tuple[str, str, str]] = set()
    receives: set[tuple[str, str, str]] = set()
    tag = {"a1.": A1, "a2.": A2}
    for a, b in doc.net.arcs:
        a_chan, b_chan = a in doc.channels, b in doc.channels
        if a_chan and b_chan:
            raise ParseError(f"arc ({a}, {b}) connects two channels")
        if a_chan:
            prefix = side_of(b)
            receives.add((a[len("ch."):], tag[prefix], b[len(prefix):]))
        elif b_chan:
            prefix = side_of(a)
            sends.add((tag[prefix], a[len(prefix):], b[len("ch."):]))
        else:
            pa, pb = side_of(a), side_of(b)
            if pa != pb:
                raise ParseError(f"arc ({a}, {b}) crosses components without a channel")
            sides[pa]["arcs"].append((a[len(pa):], b[len(pa):]))

    nets = {}
    for prefix in ("a1.", "a2."):
        data = sides[prefix]
        if not data["places"]:
            raise ParseError(f"composition has no '{prefix}' component")
        net = PetriNet(data["places"], data["transitions"], data["arcs"], data["labels"])
        nets[prefix] = recognize_gwf(net)
    return _build(
        nets["a1."], nets["a2."], tuple(channels), frozenset(sends), frozenset(receives)
    )


def parse_chan(text: str, source: str | None = None) -> ChannelSpec:
    channels: list[str] = []
    sends: set[tuple[str, str]] = set()
    receives: set[tuple[str, str]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "channel" and len(words) == 2:
            if words[1] in channels:
                raise ParseError(f"duplicate channel '{words[1]}'", lineno, source)
            channels.append(words[1])
        elif words[0] == "send" and len(words) == 3:
            sends.add((words[1], words[2]))
        elif words[0] == "recv" and len(words) == 3:
            receives.add((words[1], words[2]))
        else:
            raise ParseError(f"malformed channel directive '{line}'", lineno, source)
    return ChannelSpec(tuple(channels), frozenset(sends), frozenset(receives))


def format_chan(spec: ChannelSpec) -> str:
    lines = [f"channel {c}" for c in spec.channels]
    lines += [f"send {t} {c}" for t, c in sorted(spec.sends)]
    lines += [f"recv {c} {t}" for c, t in sorted(spec.receives)]
    return "\n".join(lines) + "\n"
