"""Block-structured discovery of sound workflow nets from event logs.

Recursive cut detection on the directly-follows graph, trying exclusive
choice, sequence, concurrency and loop cuts in that fixed order, with a
session-split fall-through and finally the flower model.  Ties inside
partitions break lexicographically, so identical logs give identical trees.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyLog
from .gwf import GwfNet, check_soundness, recognize_gwf
from .logs import EventLog
from .nets import Marking, PetriNet

KINDS = ("activity", "silent", "seq", "xor", "par", "loop")


@dataclass(frozen=True)
class ProcessTree:
    kind: str
    label: str | None = None
    children: tuple["ProcessTree", ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown node kind '{self.kind}'")
        if self.kind == "activity" and (self.label is None or self.children):
            raise ValueError("activity leaves carry a label and no children")
        if self.kind == "silent" and (self.label is not None or self.children):
            raise ValueError("silent leaves carry nothing")
        if self.kind in ("seq", "xor", "par") and len(self.children) < 2:
            raise ValueError(f"'{self.kind}' needs at least two children")
        if self.kind == "loop" and len(self.children) < 2:
            raise ValueError("'loop' needs a body and at least one redo child")

    def render(self) -> str:
        if self.kind == "activity":
            return self.label  # type: ignore[return-value]
        if self.kind == "silent":
            return "tau"
        return f"{self.kind}({', '.join(c.render() for c in self.children)})"


def activity(label: str) -> ProcessTree:
    return ProcessTree("activity", label)


def silent() -> ProcessTree:
    return ProcessTree("silent")


@dataclass(frozen=True)
class DirectlyFollowsGraph:
    nodes: frozenset[str]
    edges: dict[tuple[str, str], int]
    starts: frozenset[str]
    ends: frozenset[str]

    @classmethod
    def from_traces(cls, traces: Sequence[tuple[str, ...]]) -> "DirectlyFollowsGraph":
        edges: Counter = Counter()
        starts: set[str] = set()
        ends: set[str] = set()
        nodes: set[str] = set()
        for trace in traces:
            if not trace:
                continue
            nodes.update(trace)
            starts.add(trace[0])
            ends.add(trace[-1])
            for a, b in zip(trace, trace[1:]):
                edges[(a, b)] += 1
        return cls(frozenset(nodes), dict(edges), frozenset(starts), frozenset(ends))

    def has_edge(self, a: str, b: str) -> bool:
        return (a, b) in self.edges


def discover_tree(log: EventLog) -> ProcessTree:
    """Deterministic block-structured model of the log."""
    if not len(log):
        raise EmptyLog("cannot discover a model from an empty log")
    return _discover(list(log.traces))


def _discover(traces: list[tuple[str, ...]]) -> ProcessTree:
    nonempty = [t for t in traces if t]
    if not nonempty:
        return silent()
    if len(nonempty) < len(traces):
        return ProcessTree("xor", children=(silent(), _discover(nonempty)))

    alphabet = sorted({a for t in nonempty for a in t})
    if len(alphabet) == 1:
        act = alphabet[0]
        if all(len(t) == 1 for t in nonempty):
            return activity(act)
        return ProcessTree("loop", children=(activity(act), silent()))

    dfg = DirectlyFollowsGraph.from_traces(nonempty)

    groups = _xor_cut(dfg)
    if groups:
        sublogs = _split_xor(nonempty, groups)
        return ProcessTree("xor", children=tuple(_discover(s) for s in sublogs))

    groups = _seq_cut(dfg)
    if groups:
        sublogs = _split_project(nonempty, groups)
        return ProcessTree("seq", children=tuple(_discover(s) for s in sublogs))

    groups = _par_cut(dfg)
    if groups:
        sublogs = _split_project(nonempty, groups)
        return ProcessTree("par", children=tuple(_discover(s) for s in sublogs))

    cut = _loop_cut(dfg)
    if cut:
        body, redos = cut
        body_log, redo_logs = _split_loop(nonempty, body, redos)
        children = [_discover(body_log)] + [_discover(r) for r in redo_logs]
        return ProcessTree("loop", children=tuple(children))

    sessions = _tau_loop_split(nonempty, dfg)
    if sessions is not None:
        return ProcessTree("loop", children=(_discover(sessions), silent()))

    # flower: any interleaving of the alphabet
    leaves = tuple(activity(a) for a in alphabet)
    return ProcessTree("loop", children=(silent(),) + leaves)


# -- cut detection -----------------------------------------------------------

def _undirected_components(nodes: Iterable[str], pairs: set[tuple[str, str]]) -> list[set[str]]:
    nodes = sorted(nodes)
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in pairs:
        adj[a].add(b)
        adj[b].add(a)
    seen: set[str] = set()
    comps: list[set[str]] = []
    for n in nodes:
        if n in seen:
            continue
        comp = {n}
        stack = [n]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in comp:
                    comp.add(y)
                    stack.append(y)
        seen |= comp
        comps.append(comp)
    return comps


def _sorted_groups(comps: list[set[str]]) -> list[frozenset[str]]:
    return [frozenset(c) for c in sorted(comps, key=min)]


def _xor_cut(dfg: DirectlyFollowsGraph) -> list[frozenset[str]] | None:
    comps = _undirected_components(dfg.nodes, {(a, b) for a, b in dfg.edges})
    if len(comps) < 2:
        return None
    return _sorted_groups(comps)


def _reachability(dfg: DirectlyFollowsGraph) -> dict[str, set[str]]:
    reach: dict[str, set[str]] = {n: set() for n in dfg.nodes}
    adj: dict[str, set[str]] = {n: set() for n in dfg.nodes}
    for a, b in dfg.edges:
        adj[a].add(b)
    for n in dfg.nodes:
        stack = list(adj[n])
        while stack:
            x = stack.pop()
            if x not in reach[n]:
                reach[n].add(x)
                stack.extend(adj[x])
    return reach


def _seq_cut(dfg: DirectlyFollowsGraph) -> list[frozenset[str]] | None:
    reach = _reachability(dfg)
    merge_pairs: set[tuple[str, str]] = set()
    for a in dfg.nodes:
        for b in dfg.nodes:
            if a >= b:
                continue
            ab, ba = b in reach[a], a in reach[b]
            if ab == ba:  # mutually reachable or mutually unreachable
                merge_pairs.add((a, b))
    comps = _undirected_components(dfg.nodes, merge_pairs)
    if len(comps) < 2:
        return None
    # order groups by reachability and validate strictness
    groups = [frozenset(c) for c in comps]

    def before(g1: frozenset[str], g2: frozenset[str]) -> bool:
        return all(b in reach[a] and a not in reach[b] for a in g1 for b in g2)

    ordered: list[frozenset[str]] = []
    remaining = list(groups)
    while remaining:
        heads = [g for g in remaining if all(g is h or before(g, h) for h in remaining)]
        if not heads:
            return None
        head = min(heads, key=min)
        ordered.append(head)
        remaining.remove(head)
    return ordered


def _par_cut(dfg: DirectlyFollowsGraph) -> list[frozenset[str]] | None:
    glue: set[tuple[str, str]] = set()
    for a in dfg.nodes:
        for b in dfg.nodes:
            if a >= b:
                continue
            if not (dfg.has_edge(a, b) and dfg.has_edge(b, a)):
                glue.add((a, b))
    comps = _undirected_components(dfg.nodes, glue)
    if len(comps) < 2:
        return None
    for comp in comps:
        if not (comp & dfg.starts) or not (comp & dfg.ends):
            return None
    return _sorted_groups(comps)


def _loop_cut(dfg: DirectlyFollowsGraph) -> tuple[frozenset[str], list[frozenset[str]]] | None:
    body = set(dfg.starts | dfg.ends)
    rest = dfg.nodes - body
    if not rest:
        return None
    comps = _undirected_components(rest, {(a, b) for a, b in dfg.edges if a in rest and b in rest})
    changed = True
    while changed:
        changed = False
        kept: list[set[str]] = []
        for comp in comps:
            if _valid_redo(dfg, comp, body):
                kept.append(comp)
            else:
                body |= comp
                changed = True
        comps = kept
    if not comps:
        return None
    return frozenset(body), _sorted_groups(comps)


def _valid_redo(dfg: DirectlyFollowsGraph, comp: set[str], body: set[str]) -> bool:
    entries: set[str] = set()
    exits: set[str] = set()
    for (a, b) in dfg.edges:
        if a not in comp and b in comp:
            if a not in body or a not in dfg.ends:
                return False
            entries.add(b)
        if a in comp and b not in comp:
            if b not in body or b not in dfg.starts:
                return False
            exits.add(a)
    if not entries or not exits:
        return False
    for c in entries:
        if {e for e in dfg.ends if dfg.has_edge(e, c)} != dfg.ends:
            return False
    for c in exits:
        if {s for s in dfg.starts if dfg.has_edge(c, s)} != dfg.starts:
            return False
    return True


def _tau_loop_split(
    traces: list[tuple[str, ...]], dfg: DirectlyFollowsGraph
) -> list[tuple[str, ...]] | None:
    """Split traces into sessions at end-to-start boundaries."""
    sessions: list[tuple[str, ...]] = []
    found = False
    for trace in traces:
        start = 0
        for i in range(1, len(trace)):
            if trace[i - 1] in dfg.ends and trace[i] in dfg.starts:
                sessions.append(trace[start:i])
                start = i
                found = True
        sessions.append(trace[start:])
    return sessions if found else None


# -- log splitting ------------------------------------------------------------

def _split_xor(
    traces: list[tuple[str, ...]], groups: list[frozenset[str]]
) -> list[list[tuple[str, ...]]]:
    sublogs: list[list[tuple[str, ...]]] = [[] for _ in groups]
    for trace in traces:
        overlaps = [len([a for a in trace if a in g]) for g in groups]
        best = overlaps.index(max(overlaps))
        sublogs[best].append(tuple(a for a in trace if a in groups[best]))
    return sublogs


def _split_project(
    traces: list[tuple[str, ...]], groups: list[frozenset[str]]
) -> list[list[tuple[str, ...]]]:
    return [[tuple(a for a in t if a in g) for t in traces] for g in groups]


def _split_loop(
    traces: list[tuple[str, ...]],
    body: frozenset[str],
    redos: list[frozenset[str]],
) -> tuple[list[tuple[str, ...]], list[list[tuple[str, ...]]]]:
    body_log: list[tuple[str, ...]] = []
    redo_logs: list[list[tuple[str, ...]]] = [[] for _ in redos]

    def group_index(act: str) -> int:
        for i, g in enumerate(redos):
            if act in g:
                return i
        return -1  # body

    for trace in traces:
        segment: list[str] = []
        current = -1 if not trace else group_index(trace[0])
        for act in trace:
            g = group_index(act)
            if g != current:
                _emit_segment(segment, current, body_log, redo_logs)
                segment = []
                current = g
            segment.append(act)
        _emit_segment(segment, current, body_log, redo_logs)
        if trace and group_index(trace[-1]) != -1:
            body_log.append(())  # loop must end in the body
    return body_log, redo_logs


def _emit_segment(segment, group, body_log, redo_logs):
    if not segment:
        if group == -1:
            body_log.append(())
        return
    if group == -1:
        body_log.append(tuple(segment))
    else:
        redo_logs[group].append(tuple(segment))


# -- net construction ---------------------------------------------------------

class _Builder:
    def __init__(self):
        self.places: list[str] = []
        self.transitions: list[str] = []
        self.arcs: list[tuple[str, str]] = []
        self.labels: dict[str, str] = {}

    def place(self) -> str:
        p = f"p{len(self.places)}"
        self.places.append(p)
        return p

    def transition(self, label: str | None) -> str:
        t = f"t{len(self.transitions)}"
        self.transitions.append(t)
        if label is not None:
            self.labels[t] = label
        return t

    def arc(self, src: str, dst: str):
        self.arcs.append((src, dst))

    def build(self, tree: ProcessTree, entry: str, exit_: str):
        if tree.kind in ("activity", "silent"):
            t = self.transition(tree.label)
            self.arc(entry, t)
            self.arc(t, exit_)
        elif tree.kind == "seq":
            cur = entry
            for child in tree.children[:-1]:
                nxt = self.place()
                self.build(child, cur, nxt)
                cur = nxt
            self.build(tree.children[-1], cur, exit_)
        elif tree.kind == "xor":
            for child in tree.children:
                self.build(child, entry, exit_)
        elif tree.kind == "par":
            split = self.transition(None)
            join = self.transition(None)
            self.arc(entry, split)
            self.arc(join, exit_)
            for child in tree.children:
                cin, cout = self.place(), self.place()
                self.arc(split, cin)
                self.arc(cout, join)
                self.build(child, cin, cout)
        elif tree.kind == "loop":
            enter = self.transition(None)
            leave = self.transition(None)
            head, tail = self.place(), self.place()
            self.arc(entry, enter)
            self.arc(enter, head)
            self.arc(tail, leave)
            self.arc(leave, exit_)
            self.build(tree.children[0], head, tail)
            for redo in tree.children[1:]:
                self.build(redo, tail, head)
        else:  # pragma: no cover
            raise ValueError(tree.kind)


def tree_to_wfnet(tree: ProcessTree) -> GwfNet:
    """Standard block translation; always a sound workflow net."""
    b = _Builder()
    entry = b.place()
    exit_ = b.place()
    b.build(tree, entry, exit_)
    net = PetriNet(b.places, b.transitions, b.arcs, b.labels)
    gwf = recognize_gwf(net, Marking([entry]), Marking([exit_]))
    report = check_soundness(gwf)
    if not report.sound:  # pragma: no cover - translation is sound by construction
        raise AssertionError(f"block translation produced an unsound net: {report.violated}")
    return gwf


def discover_wfnet(log: EventLog) -> tuple[ProcessTree, GwfNet]:
    tree = discover_tree(log)
    return tree, tree_to_wfnet(tree)
