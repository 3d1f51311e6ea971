"""Sequential components and state-machine decomposition.

A sequential component is identified by a place set A such that the subnet
generated by A and its neighborhood transitions is a connected state machine
(every adjacent transition has exactly one input and one output place in A)
holding exactly one token initially.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import BudgetExceeded
from .nets import Marking, PetriNet

DEFAULT_SEARCH_BUDGET = 1_000_000


@dataclass(frozen=True)
class SmdCover:
    """Cover verdict: the component list, or the first uncoverable place."""

    components: tuple[frozenset[str], ...]
    uncoverable: str | None

    @property
    def covered(self) -> bool:
        return self.uncoverable is None


class _Budget:
    __slots__ = ("left",)

    def __init__(self, n: int):
        self.left = n

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise BudgetExceeded("sequential-component search budget exhausted")


def _component_connected(net: PetriNet, A: frozenset[str]) -> bool:
    if not A:
        return False
    adjacent = {t for p in A for t in net.neighborhood(p)}
    nodes = A | adjacent
    start = next(iter(A))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in (net.pre(x) | net.post(x)) & nodes:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return nodes <= seen


def find_sequential_component(
    net: PetriNet,
    m0: Marking,
    seed: str,
    required: frozenset[str] = frozenset(),
    budget: int = DEFAULT_SEARCH_BUDGET,
) -> frozenset[str] | None:
    """Backtracking search for a sequential component containing `seed`.

    `required` transitions must end up adjacent to the component.  Returns the
    place set, or None when no component exists.  Raises BudgetExceeded when
    the search could not finish, which callers must treat as "unknown", never
    as "no component".
    """
    tracker = _Budget(budget)
    failed: set[frozenset[str]] = set()

    def tokens(A: frozenset[str]) -> int:
        return sum(m0.count(p) for p in A)

    def search(A: frozenset[str]) -> frozenset[str] | None:
        tracker.spend()
        if A in failed:
            return None
        if tokens(A) > 1:
            failed.add(A)
            return None
        adjacent = {t for p in A for t in net.neighborhood(p)}
        pending: list[tuple[str, str]] = []
        for t in sorted(adjacent):
            ins = net.pre(t) & A
            outs = net.post(t) & A
            if len(ins) > 1 or len(outs) > 1:
                failed.add(A)
                return None
            if not ins:
                pending.append((t, "in"))
            if not outs:
                pending.append((t, "out"))
        for t in sorted(required - adjacent):
            pending.append((t, "both"))
        if not pending:
            if tokens(A) == 1 and _component_connected(net, A):
                return A
            failed.add(A)
            return None
        t, side = pending[0]
        if side == "in":
            options = [frozenset([p]) for p in sorted(net.pre(t))]
        elif side == "out":
            options = [frozenset([p]) for p in sorted(net.post(t))]
        else:
            options = [
                frozenset([pin, pout])
                for pin in sorted(net.pre(t))
                for pout in sorted(net.post(t))
            ]
        for extra in options:
            result = search(A | extra)
            if result is not None:
                return result
        failed.add(A)
        return None

    return search(frozenset([seed]))


def smd_cover(net: PetriNet, m0: Marking, budget: int = DEFAULT_SEARCH_BUDGET) -> SmdCover:
    """Find, for every place, a sequential component containing it."""
    components: list[frozenset[str]] = []
    covered: set[str] = set()
    for p in sorted(net.places):
        if p in covered:
            continue
        comp = find_sequential_component(net, m0, p, budget=budget)
        if comp is None:
            return SmdCover(tuple(components), p)
        components.append(comp)
        covered |= comp
    return SmdCover(tuple(components), None)
