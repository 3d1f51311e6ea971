"""Generalized workflow nets and the three-part soundness check."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import NotGwf, UncheckedMorphism
from .nets import Marking, MarkedNet, PetriNet
from .reachability import DEFAULT_STATE_CAP, explore

if TYPE_CHECKING:  # pragma: no cover - import cycle guard
    from .morphisms import AlphaMorphism


@dataclass(frozen=True)
class GwfNet:
    """A net whose source places form m0 and sink places mf.

    Instances are certified by recognize_gwf; construct them through it.
    """

    net: PetriNet
    m0: Marking
    mf: Marking

    @property
    def marked(self) -> MarkedNet:
        return MarkedNet(self.net, self.m0)

    @property
    def is_wf(self) -> bool:
        """Plain workflow net: single source and single sink place."""
        return len(self.m0) == 1 and len(self.mf) == 1


def _structural_reach(net: PetriNet, seeds: frozenset[str], forward: bool) -> frozenset[str]:
    seen = set(seeds)
    queue = deque(seeds)
    step = net.post if forward else net.pre
    while queue:
        x = queue.popleft()
        for y in step(x):
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return frozenset(seen)


def recognize_gwf(
    net: PetriNet,
    declared_m0: Marking | None = None,
    declared_mf: Marking | None = None,
) -> GwfNet:
    """Certify the three structural workflow clauses.

    Sources (empty preset) must form the initial marking, sinks (empty
    postset) the final one, and every node must lie on a path from a source
    to a sink.  Declared markings, when given, are cross-checked against the
    derived sets.
    """
    sources = frozenset(p for p in net.places if not net.pre(p))
    sinks = frozenset(p for p in net.places if not net.post(p))
    if not sources:
        raise NotGwf(1, "-", "no place has an empty preset, so no initial marking exists")
    if not sinks:
        raise NotGwf(2, "-", "no place has an empty postset, so no final marking exists")
    if declared_m0 is not None and declared_m0.support != sources:
        off = sorted(declared_m0.support ^ sources)[0]
        raise NotGwf(1, off, f"declared initial marking disagrees with source places at '{off}'")
    if declared_mf is not None and declared_mf.support != sinks:
        off = sorted(declared_mf.support ^ sinks)[0]
        raise NotGwf(2, off, f"declared final marking disagrees with sink places at '{off}'")
    if declared_m0 is not None and not declared_m0.is_set():
        raise NotGwf(1, "-", "initial marking must be a set")
    if declared_mf is not None and not declared_mf.is_set():
        raise NotGwf(2, "-", "final marking must be a set")

    from_sources = _structural_reach(net, sources, forward=True)
    to_sinks = _structural_reach(net, sinks, forward=False)
    for x in sorted(net.nodes):
        if x not in from_sources or x not in to_sinks:
            raise NotGwf(3, x, f"node '{x}' is not on a path from a source to a sink")
    return GwfNet(net, Marking(sorted(sources)), Marking(sorted(sinks)))


@dataclass(frozen=True)
class SoundnessReport:
    """Verdict of the soundness check, with a replayable witness.

    violated is one of none / option-to-complete / proper-completion /
    dead-transition / unsafe / truncated.  For marking-witnessed violations
    `witness_trace` fires from m0 to the witness marking.
    """

    sound: bool
    violated: str
    witness: str | None = None
    witness_trace: tuple[str, ...] | None = None
    states: int = 0

    def render(self) -> str:
        lines = [f"sound: {'yes' if self.sound else 'no'}", f"violated: {self.violated}"]
        lines.append(f"witness: {self.witness if self.witness is not None else '-'}")
        if self.witness_trace is not None:
            lines.append("trace: " + " ".join(self.witness_trace))
        lines.append(f"states: {self.states}")
        return "\n".join(lines) + "\n"


def check_soundness(g: GwfNet, cap: int = DEFAULT_STATE_CAP) -> SoundnessReport:
    """Decide soundness over the explored marking graph.

    Checks, in order of report precedence: strict covering of the final
    marking, reachability of the final marking from every state, and dead
    transitions.  Unsafe or truncated exploration leaves soundness undecided
    and is reported as such.
    """
    graph = explore(g.net, g.m0, cap=cap)
    if not graph.safe:
        w = graph.unsafe_witness
        return SoundnessReport(False, "unsafe", repr(w), tuple(graph.path_to(w)), len(graph.states))
    if graph.truncated:
        return SoundnessReport(False, "truncated", None, None, len(graph.states))

    state_count = len(graph.states)
    for m in graph.states:
        if g.mf <= m and m != g.mf:
            return SoundnessReport(
                False, "proper-completion", repr(m), tuple(graph.path_to(m)), state_count
            )

    back = graph.predecessors()
    can_finish: set[Marking] = set()
    if g.mf in back:
        can_finish.add(g.mf)
        queue = deque([g.mf])
        while queue:
            m = queue.popleft()
            for prev in back[m]:
                if prev not in can_finish:
                    can_finish.add(prev)
                    queue.append(prev)
    for m in graph.states:
        if m not in can_finish:
            return SoundnessReport(
                False, "option-to-complete", repr(m), tuple(graph.path_to(m)), state_count
            )

    fired = {t for _, t, _ in graph.edges}
    for t in sorted(g.net.transitions):
        if t not in fired:
            return SoundnessReport(False, "dead-transition", t, None, state_count)
    return SoundnessReport(True, "none", None, None, state_count)


def well_marked(refined: MarkedNet, phi: "AlphaMorphism") -> bool:
    """Does the marking sit exactly on the subnet input places of marked images?

    For every marked place of the abstract net, all input places of the
    refining fragment must be marked, and nothing else may be.
    """
    if not phi.certified:
        raise UncheckedMorphism("the refinement map must be certified first")
    expected: set[str] = set()
    for p2 in phi.target.m0.support:
        region = phi.preimage(p2)
        frag = phi.source.net.subnet(region)
        expected |= set(frag.inputs & frag.places)
    return refined.m0.support == frozenset(expected) and refined.m0.is_set()
