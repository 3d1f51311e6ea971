"""Event logs: data model, CSV/XES ingestion, per-agent projection."""
from __future__ import annotations

import csv
import io
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .errors import EmptyLog, ParseError

Trace = tuple[str, ...]


class EventLog:
    """Finite multiset of finite nonempty activity traces."""

    __slots__ = ("traces",)

    def __init__(self, traces: Iterable[Iterable[str]]):
        out: list[Trace] = []
        for trace in traces:
            t = tuple(trace)
            if not t:
                raise EmptyLog("traces must be nonempty")
            out.append(t)
        self.traces: tuple[Trace, ...] = tuple(out)

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset(a for t in self.traces for a in t)

    def counter(self) -> Counter:
        return Counter(self.traces)

    def event_count(self) -> int:
        return sum(len(t) for t in self.traces)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def __eq__(self, other: object) -> bool:
        """Multiset equality: trace order does not matter."""
        if not isinstance(other, EventLog):
            return NotImplemented
        return self.counter() == other.counter()

    def __hash__(self) -> int:
        return hash(frozenset(self.counter().items()))

    def __repr__(self) -> str:
        return f"EventLog({len(self.traces)} traces, {len(self.alphabet)} activities)"


@dataclass(frozen=True)
class AgentPartition:
    """Disjoint agent alphabets plus channel-action annotations."""

    a1: frozenset[str]
    a2: frozenset[str]
    interactions: dict[str, tuple[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        overlap = self.a1 & self.a2
        if overlap:
            raise ValueError(f"agent alphabets overlap: {sorted(overlap)}")
        for act, (channel, kind) in self.interactions.items():
            if kind not in ("send", "receive"):
                raise ValueError(f"interaction '{act}' must send or receive, got '{kind}'")
            if act not in self.a1 and act not in self.a2:
                raise ValueError(f"interaction '{act}' belongs to no agent alphabet")

    def covers(self, alphabet: frozenset[str]) -> bool:
        return alphabet <= (self.a1 | self.a2)


def project(log: EventLog, alphabet: Iterable[str]) -> tuple[EventLog, int]:
    """Restrict every trace to `alphabet`; empty projections are dropped.

    Returns the projected log and the number of dropped traces.
    """
    keep = frozenset(alphabet)
    projected: list[Trace] = []
    dropped = 0
    for trace in log.traces:
        t = tuple(a for a in trace if a in keep)
        if t:
            projected.append(t)
        else:
            dropped += 1
    return EventLog(projected), dropped


# ---------------------------------------------------------------------------
# CSV: header `case_id,activity[,timestamp]`, events grouped by case in file
# order; the timestamp column is carried along but never used for ordering.
# ---------------------------------------------------------------------------

def parse_csv_log(text: str, source: str | None = None) -> EventLog:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise EmptyLog("log file has no rows" + (f" ({source})" if source else ""))
    header = [h.strip() for h in rows[0]]
    if header[:2] != ["case_id", "activity"]:
        raise ParseError("header must start with 'case_id,activity'", 1, source)
    cases: dict[str, list[str]] = {}
    order: list[str] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < 2 or not row[0].strip() or not row[1].strip():
            raise ParseError("row needs a case id and an activity", lineno, source)
        case, activity = row[0].strip(), row[1].strip()
        if case not in cases:
            cases[case] = []
            order.append(case)
        cases[case].append(activity)
    if not order:
        raise EmptyLog("log file has no events" + (f" ({source})" if source else ""))
    return EventLog([cases[c] for c in order])


def format_csv_log(log: EventLog) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["case_id", "activity"])
    for i, trace in enumerate(log.traces):
        for activity in trace:
            writer.writerow([f"c{i}", activity])
    return out.getvalue()


# ---------------------------------------------------------------------------
# XES subset: log/trace/event elements with the string attribute concept:name.
# ---------------------------------------------------------------------------

def parse_xes_log(text: str, source: str | None = None) -> EventLog:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"invalid XML: {exc}", None, source) from exc
    if not root.tag.endswith("log"):
        raise ParseError(f"root element is '{root.tag}', expected 'log'", None, source)
    traces: list[list[str]] = []
    for trace_el in root:
        if not trace_el.tag.endswith("trace"):
            continue
        events: list[str] = []
        for event_el in trace_el:
            if not event_el.tag.endswith("event"):
                continue
            name = None
            for attr in event_el:
                if attr.get("key") == "concept:name":
                    name = attr.get("value")
            if name is None:
                raise ParseError("event without concept:name", None, source)
            events.append(name)
        if events:
            traces.append(events)
    if not traces:
        raise EmptyLog("XES log has no traces" + (f" ({source})" if source else ""))
    return EventLog(traces)


def format_xes_log(log: EventLog) -> str:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', '<log>']
    for trace in log.traces:
        lines.append("  <trace>")
        for activity in trace:
            lines.append("    <event>")
            lines.append(f'      <string key="concept:name" value="{_xml_escape(activity)}"/>')
            lines.append("    </event>")
        lines.append("  </trace>")
    lines.append("</log>")
    return "\n".join(lines) + "\n"


def _xml_escape(s: str) -> str:
    return (
        s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )


def detect_format(path: str) -> str:
    return "xes" if path.lower().endswith(".xes") else "csv"


def parse_log(text: str, fmt: str, source: str | None = None) -> EventLog:
    if fmt == "csv":
        return parse_csv_log(text, source)
    if fmt == "xes":
        return parse_xes_log(text, source)
    raise ParseError(f"unknown log format '{fmt}'", None, source)


def format_log(log: EventLog, fmt: str) -> str:
    if fmt == "csv":
        return format_csv_log(log)
    if fmt == "xes":
        return format_xes_log(log)
    raise ParseError(f"unknown log format '{fmt}'")


def read_log(path: str, fmt: str | None = None) -> EventLog:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_log(fh.read(), fmt or detect_format(path), source=path)


def write_log(log: EventLog, path: str, fmt: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_log(log, fmt or detect_format(path)))
