"""Explicit-state exploration of the marking graph."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .nets import Marking, PetriNet, enabled, fire

DEFAULT_STATE_CAP = 1_000_000


@dataclass
class ReachabilityGraph:
    """BFS snapshot of the markings reachable from `initial`.

    `safe=False` means exploration stopped at the first marking holding more
    than one token in some place; `truncated=True` means the state cap was hit.
    Either way the graph is incomplete and completeness-sensitive callers must
    reject it.
    """

    net: PetriNet
    initial: Marking
    states: list[Marking]
    edges: list[tuple[Marking, str, Marking]]
    deadlocks: set[Marking]
    safe: bool
    truncated: bool
    unsafe_witness: Marking | None = None
    _parent: dict[Marking, tuple[Marking, str]] = field(default_factory=dict, repr=False)

    @property
    def state_set(self) -> set[Marking]:
        return set(self.states)

    @property
    def complete(self) -> bool:
        return self.safe and not self.truncated

    def path_to(self, m: Marking) -> list[str]:
        """A firing sequence from the initial marking to `m`."""
        seq: list[str] = []
        cur = m
        while cur != self.initial:
            cur, t = self._parent[cur]
            seq.append(t)
        seq.reverse()
        return seq

    def predecessors(self) -> dict[Marking, set[Marking]]:
        back: dict[Marking, set[Marking]] = {m: set() for m in self.states}
        for src, _, dst in self.edges:
            back[dst].add(src)
        return back


def explore(net: PetriNet, m0: Marking, cap: int = DEFAULT_STATE_CAP) -> ReachabilityGraph:
    """Breadth-first construction of the reachability graph.

    Stops early on the first unsafe marking (token count above one) or when
    `cap` states have been discovered.
    """
    if cap < 1:
        raise ValueError("state cap must be at least 1")
    enabled(net, m0)  # validates the marking's support

    states: list[Marking] = [m0]
    seen: set[Marking] = {m0}
    edges: list[tuple[Marking, str, Marking]] = []
    deadlocks: set[Marking] = set()
    parent: dict[Marking, tuple[Marking, str]] = {}
    truncated = False

    if not m0.is_set():
        return ReachabilityGraph(net, m0, states, edges, deadlocks, False, False, m0, parent)

    queue: deque[Marking] = deque([m0])
    order = sorted(net.transitions)
    while queue:
        m = queue.popleft()
        fired = False
        for t in order:
            if not all(m.count(p) >= 1 for p in net.pre(t)):
                continue
            fired = True
            m2 = fire(net, m, t)
            if not m2.is_set():
                parent.setdefault(m2, (m, t))
                return ReachabilityGraph(net, m0, states, edges, deadlocks, False, truncated, m2, parent)
            if m2 not in seen:
                if len(seen) >= cap:
                    truncated = True
                    continue
                seen.add(m2)
                states.append(m2)
                parent[m2] = (m, t)
                queue.append(m2)
            edges.append((m, t, m2))
        if not fired:
            deadlocks.add(m)
    return ReachabilityGraph(net, m0, states, edges, deadlocks, True, truncated, None, parent)
