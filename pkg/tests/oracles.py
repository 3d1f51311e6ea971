"""Independent oracle implementations for cross-checking the toolkit.

Everything here is deliberately written from scratch against the raw net
structure (arc sets and dict arithmetic), not via the library's own helper
methods, so a bug in the implementation cannot hide in its oracle.
"""
from __future__ import annotations

from itertools import combinations

State = tuple[tuple[str, int], ...]


def _to_state(counts: dict[str, int]) -> State:
    return tuple(sorted((p, n) for p, n in counts.items() if n > 0))


def _arc_pre(net, x: str) -> set[str]:
    return {a for a, b in net.arcs if b == x}


def _arc_post(net, x: str) -> set[str]:
    return {b for a, b in net.arcs if a == x}


def naive_enabled(net, counts: dict[str, int]) -> set[str]:
    out = set()
    for t in net.transitions:
        if all(counts.get(p, 0) >= 1 for p in _arc_pre(net, t)):
            out.add(t)
    return out


def naive_fire(net, counts: dict[str, int], t: str) -> dict[str, int]:
    new = dict(counts)
    for p in _arc_pre(net, t):
        new[p] = max(new.get(p, 0) - 1, 0)
    for p in _arc_post(net, t):
        new[p] = new.get(p, 0) + 1
    return new


def naive_reachable(net, m0_counts: dict[str, int], limit: int = 200_000):
    """Depth-first enumeration; returns (states, edges, unsafe_flag)."""
    start = _to_state(m0_counts)
    states: set[State] = {start}
    edges: set[tuple[State, str, State]] = set()
    unsafe = any(n > 1 for _, n in start)
    if unsafe:
        return states, edges, True
    stack = [start]
    while stack:
        state = stack.pop()
        counts = dict(state)
        for t in net.transitions:
            if not all(counts.get(p, 0) >= 1 for p in _arc_pre(net, t)):
                continue
            nxt_counts = naive_fire(net, counts, t)
            nxt = _to_state(nxt_counts)
            if any(n > 1 for _, n in nxt):
                return states, edges, True
            edges.add((state, t, nxt))
            if nxt not in states:
                if len(states) >= limit:
                    raise RuntimeError("oracle state limit hit")
                states.add(nxt)
                stack.append(nxt)
    return states, edges, False


def naive_soundness(net, m0_counts: dict[str, int], mf_counts: dict[str, int]) -> str:
    """Full-enumeration verdict with the same reporting precedence:

    unsafe, then strict covering of the final marking, then states that
    cannot reach it, then transitions that never fire.
    """
    states, edges, unsafe = naive_reachable(net, m0_counts)
    if unsafe:
        return "unsafe"
    mf = _to_state(mf_counts)
    mf_dict = dict(mf)

    def covers(state: State) -> bool:
        counts = dict(state)
        return all(counts.get(p, 0) >= n for p, n in mf_dict.items())

    for state in states:
        if covers(state) and state != mf:
            return "proper-completion"

    back: dict[State, set[State]] = {s: set() for s in states}
    for src, _, dst in edges:
        back[dst].add(src)
    can_finish: set[State] = set()
    if mf in states:
        can_finish.add(mf)
        stack = [mf]
        while stack:
            s = stack.pop()
            for prev in back[s]:
                if prev not in can_finish:
                    can_finish.add(prev)
                    stack.append(prev)
    if any(s not in can_finish for s in states):
        return "option-to-complete"

    fired = {t for _, t, _ in edges}
    if any(t not in fired for t in net.transitions):
        return "dead-transition"
    return "none"


# ---------------------------------------------------------------------------
# subnets and sequential components by exhaustive definition-chasing
# ---------------------------------------------------------------------------


def naive_in_out(net, selection: set[str]) -> tuple[set[str], set[str]]:
    ins = set()
    outs = set()
    for y in selection:
        pre = _arc_pre(net, y)
        post = _arc_post(net, y)
        if (pre - selection) or not pre:
            ins.add(y)
        if (post - selection) or not post:
            outs.add(y)
    return ins, outs


def _is_sequential_component(net, m0_counts: dict[str, int], A: frozenset[str]) -> bool:
    if not A:
        return False
    adjacent = {
        t for t in net.transitions if (_arc_pre(net, t) | _arc_post(net, t)) & A
    }
    for t in adjacent:
        if len(_arc_pre(net, t) & A) != 1 or len(_arc_post(net, t) & A) != 1:
            return False
    if sum(m0_counts.get(p, 0) for p in A) != 1:
        return False
    # connectivity of the generated subnet
    nodes = set(A) | adjacent
    start = next(iter(A))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in nodes:
            if y in seen:
                continue
            if (x, y) in net.arcs or (y, x) in net.arcs:
                seen.add(y)
                stack.append(y)
    return nodes <= seen


def enumerate_components(net, m0_counts: dict[str, int]) -> list[frozenset[str]]:
    """All sequential components, by brute force over place subsets."""
    places = list(net.places)
    out = []
    for r in range(1, len(places) + 1):
        for combo in combinations(places, r):
            A = frozenset(combo)
            if _is_sequential_component(net, m0_counts, A):
                out.append(A)
    return out


def naive_smd_cover(net, m0_counts: dict[str, int]) -> bool:
    comps = enumerate_components(net, m0_counts)
    covered = set().union(*comps) if comps else set()
    return set(net.places) <= covered


# ---------------------------------------------------------------------------
# refinement-map certificate by quantifier expansion
# ---------------------------------------------------------------------------


def _acyclic_by_closure(nodes: set[str], arcs: set[tuple[str, str]]) -> bool:
    """Warshall-style closure; a node reaching itself means a cycle."""
    reach = {x: {y for (a, y) in arcs if a == x} for x in nodes}
    for k in nodes:
        for i in nodes:
            if k in reach[i]:
                reach[i] |= reach[k]
    return all(x not in reach[x] for x in nodes)


def alpha_oracle(source, target, mapping: dict[str, str]):
    """Independent per-condition evaluation of the refinement-map clauses.

    Returns ("not-smd-safe", None) when a precondition fails, otherwise
    ("certificate", {condition: bool}).
    """
    n1, n2 = source.net, target.net
    m01 = {p: source.m0.count(p) for p in source.m0.support}
    m02 = {p: target.m0.count(p) for p in target.m0.support}

    for net, counts in ((n1, m01), (n2, m02)):
        if not naive_smd_cover(net, counts):
            return "not-smd-safe", None
        _, _, unsafe = naive_reachable(net, counts)
        if unsafe:
            return "not-smd-safe", None

    places1, places2 = set(n1.places), set(n2.places)
    trans1, trans2 = set(n1.transitions), set(n2.transitions)
    phi = mapping

    verdict: dict[str, bool] = {}
    verdict["place-image"] = {phi[p] for p in places1} == places2

    image_m0 = {phi[p] for p, n in m01.items() if n > 0}
    verdict["initial-marking"] = image_m0 == {p for p, n in m02.items() if n > 0}

    ok = True
    for t in trans1:
        if phi[t] in trans2:
            if {phi[x] for x in _arc_pre(n1, t)} != _arc_pre(n2, phi[t]):
                ok = False
            if {phi[x] for x in _arc_post(n1, t)} != _arc_post(n2, phi[t]):
                ok = False
    verdict["transition-neighborhood"] = ok

    ok = True
    for t in trans1:
        if phi[t] in places2:
            hood = _arc_pre(n1, t) | _arc_post(n1, t)
            if {phi[x] for x in hood} != {phi[t]}:
                ok = False
    verdict["collapsed-transition"] = ok

    comps = enumerate_components(n1, m01)
    acyclic_ok = input_ok = output_ok = internal_ok = cover_ok = True
    for p2 in places2:
        region = {x for x in phi if phi[x] == p2}
        region_arcs = {(a, b) for a, b in n1.arcs if a in region and b in region}
        if not _acyclic_by_closure(region, region_arcs):
            acyclic_ok = False
        ins, outs = naive_in_out(n1, region)
        for p in region & places1:
            if p in ins:
                if not {phi[x] for x in _arc_pre(n1, p)} <= _arc_pre(n2, p2):
                    input_ok = False
                if _arc_pre(n2, p2) and not _arc_pre(n1, p):
                    input_ok = False
            else:
                if {phi[x] for x in _arc_pre(n1, p)} != {p2}:
                    internal_ok = False
            if p in outs:
                if {phi[x] for x in _arc_post(n1, p)} != _arc_post(n2, p2):
                    output_ok = False
            else:
                if {phi[x] for x in _arc_post(n1, p)} != {p2}:
                    internal_ok = False
        required = {
            x
            for t2 in (_arc_pre(n2, p2) | _arc_post(n2, p2))
            for x in phi
            if phi[x] == t2 and x in trans1
        }
        for p in region & places1:
            found = False
            for A in comps:
                if p not in A:
                    continue
                adjacent = {
                    t for t in n1.transitions
                    if (_arc_pre(n1, t) | _arc_post(n1, t)) & A
                }
                if required <= adjacent:
                    found = True
                    break
            if not found:
                cover_ok = False
    verdict["subnet-acyclic"] = acyclic_ok
    verdict["subnet-input"] = input_ok
    verdict["subnet-output"] = output_ok
    verdict["subnet-internal"] = internal_ok
    verdict["subnet-cover"] = cover_ok
    return "certificate", verdict


# ---------------------------------------------------------------------------
# unfolding oracle: brute-force possible extensions over structural keys
# ---------------------------------------------------------------------------


def brute_unfolding_events(net, m0_places: set[str], cap: int = 5_000):
    """Fixpoint enumeration of unfolding events for safe acyclic inputs.

    Conditions are structural keys (place, producer-event-key-or-None) and
    events are (transition, frozen condition set), so equal histories
    collapse by construction.  Returns the set of event keys.
    """
    from itertools import product

    conditions: set = {(p, None) for p in m0_places}
    events: set = set()

    def condition_ancestors(cond, acc: set):
        """All conditions strictly before `cond`."""
        _, producer = cond
        if producer is None:
            return
        for c in producer[1]:
            if c not in acc:
                acc.add(c)
                condition_ancestors(c, acc)

    def event_past(cond, acc: set):
        """All events at or before the producer of `cond`."""
        _, producer = cond
        if producer is None or producer in acc:
            return
        acc.add(producer)
        for c in producer[1]:
            event_past(c, acc)

    def concurrent(c1, c2) -> bool:
        if c1 == c2:
            return False
        anc1: set = set()
        anc2: set = set()
        condition_ancestors(c1, anc1)
        condition_ancestors(c2, anc2)
        if c1 in anc2 or c2 in anc1:
            return False
        past1: set = set()
        past2: set = set()
        event_past(c1, past1)
        event_past(c2, past2)
        for e1 in past1:
            for e2 in past2:
                if e1 != e2 and set(e1[1]) & set(e2[1]):
                    return False
        return True

    changed = True
    while changed:
        changed = False
        if len(events) >= cap:
            raise RuntimeError("oracle event cap hit")
        for t in net.transitions:
            pools = [
                [c for c in conditions if c[0] == p]
                for p in sorted(_arc_pre(net, t))
            ]
            if any(not pool for pool in pools):
                continue
            for combo in product(*pools):
                if len(set(combo)) != len(combo):
                    continue
                if not all(concurrent(x, y) for x, y in combinations(combo, 2)):
                    continue
                key = (t, frozenset(combo))
                if key in events:
                    continue
                events.add(key)
                for p in _arc_post(net, t):
                    conditions.add((p, key))
                changed = True
    return events
