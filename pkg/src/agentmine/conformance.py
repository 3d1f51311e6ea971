"""Replay fitness and escaping-edges precision.

Fitness follows the token-replay scheme: missing tokens are inserted and
counted, leftover tokens (beyond the final marking) are counted, and

    fitness = (1 - missing/consumed)/2 + (1 - remaining/produced)/2

aggregated over all trace instances.  Precision compares, at every state of
the log's prefix automaton, the activities the model enables against the
continuations the log actually shows.  Both measures are exact rationals.
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction

from .errors import DuplicateLabel
from .gwf import GwfNet
from .logs import EventLog
from .nets import Marking, PetriNet, fire

SILENT_SEARCH_CAP = 20_000


@dataclass(frozen=True)
class TraceReplay:
    trace: tuple[str, ...]
    instances: int
    produced: int
    consumed: int
    missing: int
    remaining: int

    @property
    def fits(self) -> bool:
        return self.missing == 0 and self.remaining == 0


@dataclass(frozen=True)
class PrefixState:
    prefix: tuple[str, ...]
    weight: int
    observed: frozenset[str]
    enabled: frozenset[str]


@dataclass(frozen=True)
class QualityReport:
    fitness: Fraction
    precision: Fraction
    replay: tuple[TraceReplay, ...] = ()
    prefix_states: tuple[PrefixState, ...] = ()
    skipped_events: int = 0

    def render(self) -> str:
        """Fixed-key text block; only the measures actually computed appear."""
        lines = []
        if self.replay:
            produced = sum(r.produced * r.instances for r in self.replay)
            consumed = sum(r.consumed * r.instances for r in self.replay)
            missing = sum(r.missing * r.instances for r in self.replay)
            remaining = sum(r.remaining * r.instances for r in self.replay)
            lines += [
                f"fitness: {float(self.fitness):.4f}",
                f"produced: {produced}",
                f"consumed: {consumed}",
                f"missing: {missing}",
                f"remaining: {remaining}",
            ]
        if self.prefix_states:
            observed = sum(len(s.observed) * s.weight for s in self.prefix_states)
            enabled = sum(len(s.enabled) * s.weight for s in self.prefix_states)
            lines += [
                f"precision: {float(self.precision):.4f}",
                f"prefix-states: {len(self.prefix_states)}",
                f"observed-sum: {observed}",
                f"enabled-sum: {enabled}",
            ]
        return "\n".join(lines) + "\n"


def _label_map(net: PetriNet) -> dict[str, str]:
    out: dict[str, str] = {}
    for t, label in net.labels.items():
        if label in out:
            raise DuplicateLabel(
                f"label '{label}' is carried by transitions '{out[label]}' and '{t}'"
            )
        out[label] = t
    return out


def _silents(net: PetriNet) -> tuple[str, ...]:
    return tuple(sorted(t for t in net.transitions if t not in net.labels))


def _shortest_silent_path(
    net: PetriNet, silents: tuple[str, ...], m: Marking, goal
) -> list[str] | None:
    """Shortest silent firing sequence to a marking satisfying `goal`.

    Ties break toward the lexicographically smallest transition sequence.
    """
    if goal(m):
        return []
    seen = {m}
    queue: deque[tuple[Marking, list[str]]] = deque([(m, [])])
    while queue and len(seen) < SILENT_SEARCH_CAP:
        cur, path = queue.popleft()
        for t in silents:
            if not all(cur.count(p) >= 1 for p in net.pre(t)):
                continue
            nxt = fire(net, cur, t)
            if nxt in seen:
                continue
            seen.add(nxt)
            if goal(nxt):
                return path + [t]
            queue.append((nxt, path + [t]))
    return None


def _silent_closure(net: PetriNet, silents: tuple[str, ...], m: Marking) -> set[Marking]:
    seen = {m}
    queue = deque([m])
    while queue and len(seen) < SILENT_SEARCH_CAP:
        cur = queue.popleft()
        for t in silents:
            if all(cur.count(p) >= 1 for p in net.pre(t)):
                nxt = fire(net, cur, t)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return seen


def _replay_event(net, silents, label_map, m, event, counts):
    """Fire the transition for one event, inserting missing tokens as needed."""
    t = label_map.get(event)
    if t is None:
        counts["missing"] += 1
        counts["consumed"] += 1
        return m
    path = _shortest_silent_path(
        net, silents, m, lambda mm: all(mm.count(p) >= 1 for p in net.pre(t))
    )
    if path:
        for s in path:
            counts["consumed"] += len(net.pre(s))
            counts["produced"] += len(net.post(s))
            m = fire(net, m, s)
    deficit = {p: 1 - m.count(p) for p in net.pre(t) if m.count(p) < 1}
    if deficit:
        counts["missing"] += sum(deficit.values())
        m = m + Marking(deficit)
    counts["consumed"] += len(net.pre(t))
    counts["produced"] += len(net.post(t))
    return fire(net, m, t)


def replay_trace(g: GwfNet, trace: tuple[str, ...]) -> tuple[int, int, int, int]:
    """Replay one trace; returns (produced, consumed, missing, remaining)."""
    net = g.net
    label_map = _label_map(net)
    silents = _silents(net)
    counts = {"produced": g.m0.total(), "consumed": 0, "missing": 0}
    m = g.m0
    for event in trace:
        m = _replay_event(net, silents, label_map, m, event, counts)
    path = _shortest_silent_path(
        net, silents, m, lambda mm: all(mm.count(p) >= 1 for p in g.mf.support)
    )
    if path:
        for s in path:
            counts["consumed"] += len(net.pre(s))
            counts["produced"] += len(net.post(s))
            m = fire(net, m, s)
    for p in g.mf.support:
        counts["consumed"] += 1
        if m.count(p) >= 1:
            m = m - Marking([p])
        else:
            counts["missing"] += 1
    return counts["produced"], counts["consumed"], counts["missing"], m.total()


def token_replay_fitness(g: GwfNet, log: EventLog) -> QualityReport:
    """Aggregate token-replay fitness of the log on the net."""
    from .errors import EmptyLog

    if not len(log):
        raise EmptyLog("fitness of an empty log is undefined")
    _label_map(g.net)  # rejects duplicate labels up front
    grouped = Counter(log.traces)
    records: list[TraceReplay] = []
    for trace in sorted(grouped):
        produced, consumed, missing, remaining = replay_trace(g, trace)
        records.append(
            TraceReplay(trace, grouped[trace], produced, consumed, missing, remaining)
        )
    total_p = sum(r.produced * r.instances for r in records)
    total_c = sum(r.consumed * r.instances for r in records)
    total_m = sum(r.missing * r.instances for r in records)
    total_r = sum(r.remaining * r.instances for r in records)
    fitness = Fraction(1, 2) * (1 - Fraction(total_m, total_c)) + Fraction(1, 2) * (
        1 - Fraction(total_r, total_p)
    )
    return QualityReport(fitness, Fraction(0), tuple(records))


def escaping_edges_precision(g: GwfNet, log: EventLog) -> QualityReport:
    """Escaping-edges precision over the log's prefix automaton.

    Defined for fitting logs; events that cannot be replayed are forced (and
    counted as skipped) so the measure degrades gracefully.
    """
    from .errors import EmptyLog

    if not len(log):
        raise EmptyLog("precision of an empty log is undefined")
    net = g.net
    label_map = _label_map(net)
    silents = _silents(net)
    grouped = Counter(log.traces)

    weights: Counter = Counter()
    observed: dict[tuple[str, ...], set[str]] = {}
    prefixes: list[tuple[str, ...]] = []
    seen_prefixes: set[tuple[str, ...]] = set()
    for trace, n in sorted(grouped.items()):
        for i in range(len(trace) + 1):
            prefix = trace[:i]
            weights[prefix] += n
            if prefix not in seen_prefixes:
                seen_prefixes.add(prefix)
                prefixes.append(prefix)
                observed[prefix] = set()
            if i < len(trace):
                observed[prefix].add(trace[i])

    markings: dict[tuple[str, ...], Marking] = {(): g.m0}
    skipped = 0
    states: list[PrefixState] = []
    numerator = 0
    denominator = 0
    for prefix in sorted(prefixes, key=lambda p: (len(p), p)):
        if prefix:
            parent = markings[prefix[:-1]]
            counts = {"produced": 0, "consumed": 0, "missing": 0}
            markings[prefix] = _replay_event(
                net, silents, label_map, parent, prefix[-1], counts
            )
            if counts["missing"]:
                skipped += 1
        m = markings[prefix]
        enabled_labels: set[str] = set()
        for mm in _silent_closure(net, silents, m):
            for t in net.transitions:
                if t in net.labels and all(mm.count(p) >= 1 for p in net.pre(t)):
                    enabled_labels.add(net.labels[t])
        w = weights[prefix]
        obs = frozenset(observed[prefix])
        states.append(PrefixState(prefix, w, obs, frozenset(enabled_labels)))
        numerator += w * len(obs)
        denominator += w * len(enabled_labels)
    precision = Fraction(numerator, denominator) if denominator else Fraction(1)
    return QualityReport(Fraction(0), precision, (), tuple(states), skipped)


def quality(g: GwfNet, log: EventLog) -> QualityReport:
    """Fitness and precision combined into one report."""
    fit = token_replay_fitness(g, log)
    prec = escaping_edges_precision(g, log)
    return QualityReport(
        fit.fitness, prec.precision, fit.replay, prec.prefix_states, prec.skipped_events
    )
