"""Line-oriented text format for nets (".pnet").

Directives, one per line:

    place <id> [init] [final]
    channel <id>                # a place acting as a message channel
    trans <id> [label=<name>]
    arc <src> <dst>
    fold <node> <image>         # only emitted for occurrence nets

Blank lines and `#` comments are ignored.  Printing then parsing yields an
equal document, and printing is byte-deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError
from .nets import Marking, NetStructureError, PetriNet


@dataclass(frozen=True)
class NetDocument:
    """A parsed net file: the net plus declared markings and channel places."""

    net: PetriNet
    init: frozenset[str]
    final: frozenset[str]
    channels: frozenset[str] = frozenset()
    folds: dict[str, str] = field(default_factory=dict)

    @property
    def m0(self) -> Marking:
        return Marking(sorted(self.init))

    @property
    def mf(self) -> Marking:
        return Marking(sorted(self.final))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NetDocument):
            return NotImplemented
        return (
            self.net == other.net
            and self.init == other.init
            and self.final == other.final
            and self.channels == other.channels
            and self.folds == other.folds
        )


def parse_pnet(text: str, source: str | None = None) -> NetDocument:
    places: list[str] = []
    transitions: list[str] = []
    arcs: list[tuple[str, str]] = []
    labels: dict[str, str] = {}
    init: set[str] = set()
    final: set[str] = set()
    channels: set[str] = set()
    folds: dict[str, str] = {}
    seen: set[str] = set()

    def fail(lineno: int, msg: str):
        raise ParseError(msg, line=lineno, source=source)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        kind, args = words[0], words[1:]
        if kind in ("place", "channel"):
            if not args:
                fail(lineno, f"'{kind}' needs an id")
            name = args[0]
            if name in seen:
                fail(lineno, f"duplicate node id '{name}'")
            seen.add(name)
            places.append(name)
            if kind == "channel":
                if args[1:]:
                    fail(lineno, "channel places take no flags")
                channels.add(name)
                continue
            for flag in args[1:]:
                if flag == "init":
                    init.add(name)
                elif flag == "final":
                    final.add(name)
                else:
                    fail(lineno, f"unknown place flag '{flag}'")
        elif kind == "trans":
            if not args:
                fail(lineno, "'trans' needs an id")
            name = args[0]
            if name in seen:
                fail(lineno, f"duplicate node id '{name}'")
            seen.add(name)
            transitions.append(name)
            for opt in args[1:]:
                if opt.startswith("label="):
                    labels[name] = opt[len("label="):]
                else:
                    fail(lineno, f"unknown transition option '{opt}'")
        elif kind == "arc":
            if len(args) != 2:
                fail(lineno, "'arc' needs a source and a target")
            arcs.append((args[0], args[1]))
        elif kind == "fold":
            if len(args) != 2:
                fail(lineno, "'fold' needs a node and an image")
            folds[args[0]] = args[1]
        else:
            fail(lineno, f"unknown directive '{kind}'")

    try:
        net = PetriNet(places, transitions, arcs, labels)
    except NetStructureError as exc:
        raise ParseError(str(exc), source=source) from exc
    return NetDocument(net, frozenset(init), frozenset(final), frozenset(channels), folds)


def format_pnet(doc: NetDocument) -> str:
    lines: list[str] = []
    for p in doc.net.places:
        if p in doc.channels:
            lines.append(f"channel {p}")
            continue
        flags = ""
        if p in doc.init:
            flags += " init"
        if p in doc.final:
            flags += " final"
        lines.append(f"place {p}{flags}")
    for t in doc.net.transitions:
        label = doc.net.labels.get(t)
        lines.append(f"trans {t}" + (f" label={label}" if label is not None else ""))
    for src, dst in sorted(doc.net.arcs):
        lines.append(f"arc {src} {dst}")
    for node in sorted(doc.folds):
        lines.append(f"fold {node} {doc.folds[node]}")
    return "\n".join(lines) + "\n"


def read_pnet(path: str) -> NetDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_pnet(fh.read(), source=path)


def write_pnet(doc: NetDocument, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_pnet(doc))
