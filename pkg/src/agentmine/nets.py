"""Petri net structures and the token game.

A net is an immutable bipartite graph of places and transitions; a marking is
an immutable multiset of place ids.  All operations here are pure.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping

from .errors import InvalidMarking, NetStructureError, NotEnabled, UnknownNode


class Marking:
    """Immutable multiset of place ids; safe markings are plain sets."""

    __slots__ = ("_counts", "_hash")

    def __init__(self, tokens: Iterable[str] | Mapping[str, int] = ()):
        counts: dict[str, int] = {}
        if isinstance(tokens, Mapping):
            for place, n in tokens.items():
                n = int(n)
                if n < 0:
                    raise InvalidMarking(f"negative token count for place '{place}'")
                if n:
                    counts[place] = n
        else:
            for place in tokens:
                counts[place] = counts.get(place, 0) + 1
        self._counts = counts
        self._hash = hash(frozenset(counts.items()))

    def count(self, place: str) -> int:
        return self._counts.get(place, 0)

    @property
    def support(self) -> frozenset[str]:
        return frozenset(self._counts)

    def elements(self) -> Iterator[str]:
        """Places with multiplicity, in sorted order."""
        for place in sorted(self._counts):
            for _ in range(self._counts[place]):
                yield place

    def total(self) -> int:
        return sum(self._counts.values())

    def is_set(self) -> bool:
        return all(n == 1 for n in self._counts.values())

    def __contains__(self, place: str) -> bool:
        return place in self._counts

    def __len__(self) -> int:
        return len(self._counts)

    def __le__(self, other: "Marking") -> bool:
        """Multiset inclusion."""
        return all(n <= other.count(p) for p, n in self._counts.items())

    def __add__(self, other: "Marking") -> "Marking":
        counts = dict(self._counts)
        for p, n in other._counts.items():
            counts[p] = counts.get(p, 0) + n
        return Marking(counts)

    def __sub__(self, other: "Marking") -> "Marking":
        """Multiset difference, clamped at zero."""
        counts = dict(self._counts)
        for p, n in other._counts.items():
            counts[p] = max(counts.get(p, 0) - n, 0)
        return Marking(counts)

    def map(self, fn: Callable[[str], str]) -> "Marking":
        """Set-style image: token counts collapse to presence."""
        return Marking({fn(p): 1 for p in self._counts})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Marking) and self._counts == other._counts

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        parts = [p if n == 1 else f"{p}:{n}" for p, n in sorted(self._counts.items())]
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class Subnet:
    """Fragment generated by a node subset, with its input/output elements.

    Input elements have a predecessor outside the fragment or an empty preset;
    output elements a successor outside or an empty postset.  No structural
    invariants are enforced: fragments may have dangling transitions.
    """

    nodes: frozenset[str]
    places: frozenset[str]
    transitions: frozenset[str]
    arcs: frozenset[tuple[str, str]]
    inputs: frozenset[str]
    outputs: frozenset[str]


class PetriNet:
    """Immutable place/transition net with optional activity labels.

    Every transition must have a nonempty preset and postset, and every node
    must occur in at least one arc; violations raise NetStructureError.
    """

    __slots__ = ("places", "transitions", "arcs", "labels", "_pre", "_post", "_nodes", "_pset")

    def __init__(
        self,
        places: Iterable[str],
        transitions: Iterable[str],
        arcs: Iterable[tuple[str, str]],
        labels: Mapping[str, str] | None = None,
    ):
        self.places: tuple[str, ...] = tuple(places)
        self.transitions: tuple[str, ...] = tuple(transitions)
        self.arcs: frozenset[tuple[str, str]] = frozenset(arcs)
        self.labels: dict[str, str] = dict(labels or {})

        pset, tset = set(self.places), set(self.transitions)
        if len(pset) != len(self.places) or len(tset) != len(self.transitions):
            raise NetStructureError("duplicate node id")
        overlap = pset & tset
        if overlap:
            raise NetStructureError(f"ids used both as place and transition: {sorted(overlap)}")
        self._nodes = pset | tset
        self._pset = frozenset(pset)

        pre: dict[str, set[str]] = {x: set() for x in self._nodes}
        post: dict[str, set[str]] = {x: set() for x in self._nodes}
        for src, dst in self.arcs:
            if src not in self._nodes or dst not in self._nodes:
                raise NetStructureError(f"arc ({src}, {dst}) references unknown node")
            if (src in pset) == (dst in pset):
                raise NetStructureError(f"arc ({src}, {dst}) is not place/transition bipartite")
            post[src].add(dst)
            pre[dst].add(src)
        self._pre = {x: frozenset(s) for x, s in pre.items()}
        self._post = {x: frozenset(s) for x, s in post.items()}

        for t in self.transitions:
            if not self._pre[t] or not self._post[t]:
                raise NetStructureError(f"transition '{t}' has an empty preset or postset")
        for x in self._nodes:
            if not self._pre[x] and not self._post[x]:
                raise NetStructureError(f"node '{x}' occurs in no arc")
        for t in self.labels:
            if t not in tset:
                raise NetStructureError(f"label attached to unknown transition '{t}'")

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(self._nodes)

    def has_node(self, x: str) -> bool:
        return x in self._nodes

    def is_place(self, x: str) -> bool:
        return x in self._pset

    def _place_set(self) -> frozenset[str]:
        return self._pset

    def is_transition(self, x: str) -> bool:
        return x in self._nodes and x not in self._pset

    def pre(self, x: str) -> frozenset[str]:
        if x not in self._nodes:
            raise UnknownNode(f"unknown node '{x}'")
        return self._pre[x]

    def post(self, x: str) -> frozenset[str]:
        if x not in self._nodes:
            raise UnknownNode(f"unknown node '{x}'")
        return self._post[x]

    def neighborhood(self, x: str) -> frozenset[str]:
        return self.pre(x) | self.post(x)

    def pre_of(self, xs: Iterable[str]) -> frozenset[str]:
        out: set[str] = set()
        for x in xs:
            out |= self.pre(x)
        return frozenset(out)

    def post_of(self, xs: Iterable[str]) -> frozenset[str]:
        out: set[str] = set()
        for x in xs:
            out |= self.post(x)
        return frozenset(out)

    def subnet(self, nodes: Iterable[str]) -> Subnet:
        """Fragment generated by `nodes` plus its input/output elements."""
        sel = frozenset(nodes)
        foreign = sel - self._nodes
        if foreign:
            raise UnknownNode(f"unknown nodes in subnet selection: {sorted(foreign)}")
        places = sel & self._place_set()
        transitions = sel - places
        arcs = frozenset((a, b) for a, b in self.arcs if a in sel and b in sel)
        inputs = frozenset(
            y for y in sel if (self._pre[y] - sel) or not self._pre[y]
        )
        outputs = frozenset(
            y for y in sel if (self._post[y] - sel) or not self._post[y]
        )
        return Subnet(sel, places, transitions, arcs, inputs, outputs)

    def rename(self, fn: Callable[[str], str]) -> "PetriNet":
        """New net with every node id mapped through `fn` (must stay injective)."""
        return PetriNet(
            [fn(p) for p in self.places],
            [fn(t) for t in self.transitions],
            [(fn(a), fn(b)) for a, b in self.arcs],
            {fn(t): lab for t, lab in self.labels.items()},
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PetriNet):
            return NotImplemented
        return (
            self._place_set() == other._place_set()
            and frozenset(self.transitions) == frozenset(other.transitions)
            and self.arcs == other.arcs
            and self.labels == other.labels
        )

    def __hash__(self) -> int:
        return hash((self._place_set(), frozenset(self.transitions), self.arcs))

    def __repr__(self) -> str:
        return f"PetriNet({len(self.places)} places, {len(self.transitions)} transitions, {len(self.arcs)} arcs)"


@dataclass(frozen=True)
class MarkedNet:
    """A net together with an initial marking over its places."""

    net: PetriNet
    m0: Marking

    def __post_init__(self):
        foreign = self.m0.support - self.net._place_set()
        if foreign:
            raise InvalidMarking(f"marked places not in net: {sorted(foreign)}")


def enabled(net: PetriNet, m: Marking) -> frozenset[str]:
    """Transitions whose preset is contained in the marking."""
    foreign = m.support - net._place_set()
    if foreign:
        raise InvalidMarking(f"marking refers to unknown places: {sorted(foreign)}")
    return frozenset(t for t in net.transitions if all(m.count(p) >= 1 for p in net.pre(t)))


def fire(net: PetriNet, m: Marking, t: str) -> Marking:
    """Fire `t` at `m`: consume the preset, produce the postset."""
    if not net.has_node(t) or not net.is_transition(t):
        raise UnknownNode(f"unknown transition '{t}'")
    if not all(m.count(p) >= 1 for p in net.pre(t)):
        raise NotEnabled(f"transition '{t}' is not enabled at {m}")
    return (m - Marking(net.pre(t))) + Marking(net.post(t))
