"""Occurrence nets and branching processes; finite unfolding construction.

The unfolding uses the possible-extensions scheme with a deterministic
lexicographic order on (transition id, sorted condition ids) so results are
reproducible byte for byte.  No cut-off criterion is applied: the intended
inputs are acyclic fragments whose unfoldings are finite, and the event cap
is only a guard against cyclic inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .errors import Unsafe
from .nets import Marking, PetriNet
from .netfile import NetDocument


@dataclass(frozen=True)
class OccurrenceNet:
    """Acyclic net of conditions and events with unbranched condition presets."""

    conditions: tuple[str, ...]
    events: tuple[str, ...]
    arcs: frozenset[tuple[str, str]]

    def pre(self, x: str) -> frozenset[str]:
        return frozenset(a for a, b in self.arcs if b == x)

    def post(self, x: str) -> frozenset[str]:
        return frozenset(b for a, b in self.arcs if a == x)

    def minimal(self) -> frozenset[str]:
        """Nodes with an empty preset."""
        targets = {b for _, b in self.arcs}
        return frozenset(x for x in self.conditions + self.events if x not in targets)

    def ancestors(self) -> dict[str, frozenset[str]]:
        """Strict causal past of every node; raises ValueError on a cycle."""
        nodes = list(self.conditions) + list(self.events)
        pre = {x: set() for x in nodes}
        for a, b in self.arcs:
            pre[b].add(a)
        past: dict[str, frozenset[str]] = {}
        mark: dict[str, int] = {}

        def visit(x: str) -> frozenset[str]:
            state = mark.get(x, 0)
            if state == 1:
                raise ValueError("causal relation is cyclic")
            if state == 2:
                return past[x]
            mark[x] = 1
            acc: set[str] = set()
            for y in pre[x]:
                acc |= visit(y)
                acc.add(y)
            past[x] = frozenset(acc)
            mark[x] = 2
            return past[x]

        for x in nodes:
            visit(x)
        return past

    def causally_ordered(self, x: str, y: str, past: dict[str, frozenset[str]]) -> bool:
        return x == y or x in past[y] or y in past[x]

    def in_conflict(self, x: str, y: str, past: dict[str, frozenset[str]]) -> bool:
        events = set(self.events)
        ex_set = (past[x] | {x}) & events
        ey_set = (past[y] | {y}) & events
        for ex in ex_set:
            pex = self.pre(ex)
            for ey in ey_set:
                if ex != ey and pex & self.pre(ey):
                    return True
        return False

    def concurrent(self, x: str, y: str, past: dict[str, frozenset[str]]) -> bool:
        return not self.causally_ordered(x, y, past) and not self.in_conflict(x, y, past)

    def validate(self) -> tuple[bool, str]:
        """Check the four occurrence-net clauses; returns (ok, diagnostic)."""
        for b in self.conditions:
            if len(self.pre(b)) > 1:
                return False, f"condition '{b}' has more than one producing event"
        try:
            past = self.ancestors()
        except ValueError:
            return False, "causal relation is not a partial order"
        # finite pasts hold by construction for finite nets
        for x in list(self.conditions) + list(self.events):
            if self.in_conflict(x, x, past):
                return False, f"node '{x}' is in self-conflict"
        return True, "ok"


@dataclass(frozen=True)
class BranchingProcess:
    """An occurrence net folded onto a source net."""

    occ: OccurrenceNet
    fold: dict[str, str]
    truncated: bool = False

    def to_document(self) -> NetDocument:
        """Render as a net document with fold annotations."""
        net = PetriNet(
            self.occ.conditions,
            self.occ.events,
            self.occ.arcs,
        )
        minimal = self.occ.minimal() & set(self.occ.conditions)
        maximal = frozenset(
            b for b in self.occ.conditions if not self.occ.post(b)
        )
        return NetDocument(net, frozenset(minimal), maximal, frozenset(), dict(self.fold))


def unfold(net: PetriNet, m0: Marking, event_cap: int = 10_000) -> BranchingProcess:
    """Maximal branching process, up to `event_cap` events.

    The input must be safe from m0; a same-image pair of concurrent
    conditions aborts the construction with Unsafe.
    """
    if not m0.is_set():
        raise Unsafe("initial marking is not a set")
    if event_cap < 0:
        raise ValueError("event cap must be nonnegative")

    conditions: list[str] = []
    events: list[str] = []
    arcs: set[tuple[str, str]] = set()
    fold: dict[str, str] = {}
    pre_map: dict[str, frozenset[str]] = {}
    past: dict[str, frozenset[str]] = {}

    def conflict(x: str, y: str) -> bool:
        ex_set = {e for e in past[x] | {x} if e in pre_map}
        ey_set = {e for e in past[y] | {y} if e in pre_map}
        for ex in ex_set:
            for ey in ey_set:
                if ex != ey and pre_map[ex] & pre_map[ey]:
                    return True
        return False

    def concurrent(x: str, y: str) -> bool:
        if x == y or x in past[y] or y in past[x]:
            return False
        return not conflict(x, y)

    def add_condition(place: str, producer: str | None) -> str:
        b = f"b{len(conditions)}"
        conditions.append(b)
        fold[b] = place
        if producer is None:
            past[b] = frozenset()
        else:
            past[b] = past[producer] | {producer}
            arcs.add((producer, b))
        for other in conditions[:-1]:
            if fold[other] == place and concurrent(other, b):
                raise Unsafe(
                    f"conditions '{other}' and '{b}' for place '{place}' are concurrent"
                )
        return b

    for place in sorted(m0.support):
        add_condition(place, None)

    existing: set[tuple[str, frozenset[str]]] = set()
    truncated = False
    while True:
        if len(events) >= event_cap:
            if _has_extension(net, conditions, fold, existing, concurrent):
                truncated = True
            break
        ext = _next_extension(net, conditions, fold, existing, concurrent)
        if ext is None:
            break
        t, coset = ext
        e = f"e{len(events)}"
        events.append(e)
        fold[e] = t
        pre_map[e] = frozenset(coset)
        existing.add((t, frozenset(coset)))
        combined: set[str] = set()
        for b in coset:
            combined |= past[b]
            combined.add(b)
        past[e] = frozenset(combined)
        for b in coset:
            arcs.add((b, e))
        for place in sorted(net.post(t)):
            add_condition(place, e)

    occ = OccurrenceNet(tuple(conditions), tuple(events), frozenset(arcs))
    return BranchingProcess(occ, fold, truncated)


def _candidate_cosets(net, conditions, fold, t, concurrent):
    groups: list[list[str]] = []
    for place in sorted(net.pre(t)):
        pool = [b for b in conditions if fold[b] == place]
        if not pool:
            return
        groups.append(pool)
    for combo in product(*groups):
        if len(set(combo)) != len(combo):
            continue
        if all(
            concurrent(combo[i], combo[j])
            for i in range(len(combo))
            for j in range(i + 1, len(combo))
        ):
            yield frozenset(combo)


def _next_extension(net, conditions, fold, existing, concurrent):
    best = None
    for t in sorted(net.transitions):
        for coset in _candidate_cosets(net, conditions, fold, t, concurrent):
            if (t, coset) in existing:
                continue
            key = (t, tuple(sorted(coset)))
            if best is None or key < best[0]:
                best = (key, (t, coset))
    return best[1] if best else None


def _has_extension(net, conditions, fold, existing, concurrent) -> bool:
    return _next_extension(net, conditions, fold, existing, concurrent) is not None


def verify_branching_process(
    bp: BranchingProcess, net: PetriNet, m0: Marking
) -> tuple[bool, str]:
    """Exhaustively check the occurrence-net and folding clauses."""
    occ = bp.occ
    ok, diag = occ.validate()
    if not ok:
        return False, diag

    cond_set, event_set = set(occ.conditions), set(occ.events)
    for x in list(occ.conditions) + list(occ.events):
        if x not in bp.fold:
            return False, f"node '{x}' has no fold image"
    for b in occ.conditions:
        if not net.is_place(bp.fold[b]):
            return False, f"condition '{b}' folds to a non-place"
    for e in occ.events:
        if not (net.has_node(bp.fold[e]) and net.is_transition(bp.fold[e])):
            return False, f"event '{e}' folds to a non-transition"

    minimal = occ.minimal() & cond_set
    images = [bp.fold[b] for b in minimal]
    if len(set(images)) != len(images) or set(images) != set(m0.support):
        return False, "minimal conditions do not map bijectively onto the initial marking"
    if occ.minimal() - cond_set:
        return False, "an event has an empty preset"

    for e in occ.events:
        t = bp.fold[e]
        pre_imgs = [bp.fold[b] for b in occ.pre(e)]
        post_imgs = [bp.fold[b] for b in occ.post(e)]
        if len(set(pre_imgs)) != len(pre_imgs) or set(pre_imgs) != set(net.pre(t)):
            return False, f"event '{e}' preset does not match its image's preset"
        if len(set(post_imgs)) != len(post_imgs) or set(post_imgs) != set(net.post(t)):
            return False, f"event '{e}' postset does not match its image's postset"

    seen: dict[tuple[str, frozenset[str]], str] = {}
    for e in occ.events:
        key = (bp.fold[e], occ.pre(e))
        if key in seen:
            return False, f"events '{seen[key]}' and '{e}' duplicate preset and image"
        seen[key] = e
    return True, "ok"
