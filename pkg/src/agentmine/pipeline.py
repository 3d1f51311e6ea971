"""End-to-end compositional discovery.

Project the log per agent, discover one workflow net per agent, certify the
refinement maps onto the abstract protocol components, compose the protocol
over its channels, check its soundness, substitute both discovered nets into
the composition, and compare the result against direct discovery on the full
log.
"""
from __future__ import annotations

from dataclasses import dataclass

from .compose import ChannelSpec, ComposedNet, channel_compose, refine_in_composition
from .conformance import QualityReport, quality
from .discover import ProcessTree, discover_wfnet
from .errors import InvalidPartition, MapDerivationError, ParseError
from .gwf import GwfNet, SoundnessReport, check_soundness
from .logs import AgentPartition, EventLog, project
from .morphisms import AlphaMorphism, check_alpha


@dataclass(frozen=True)
class PartitionDocument:
    """Parsed partition file: agent alphabets plus optional explicit maps."""

    partition: AgentPartition
    map1: dict[str, str] | None = None
    map2: dict[str, str] | None = None


def parse_partition_file(text: str, source: str | None = None) -> PartitionDocument:
    """Sectioned key=value format.

    [agent1]/[agent2] hold `activities = a b c`; the optional [interactions]
    section maps an activity to `send <channel>` or `receive <channel>`; the
    optional [map1]/[map2] sections pin discovered nodes (or labels) to
    abstract nodes, one `node = abstract-node` line each.
    """
    section = None
    activities: dict[str, list[str]] = {"agent1": [], "agent2": []}
    interactions: dict[str, tuple[str, str]] = {}
    maps: dict[str, dict[str, str]] = {"map1": {}, "map2": {}}
    saw: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("agent1", "agent2", "interactions", "map1", "map2"):
                raise ParseError(f"unknown section '[{section}]'", lineno, source)
            saw.add(section)
            continue
        if section is None:
            raise ParseError("content before any section header", lineno, source)
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno, source)
        key, value = (part.strip() for part in line.split("=", 1))
        if section in ("agent1", "agent2"):
            if key != "activities":
                raise ParseError(f"unknown key '{key}' in [{section}]", lineno, source)
            activities[section].extend(value.replace(",", " ").split())
        elif section == "interactions":
            words = value.split()
            if len(words) != 2 or words[0] not in ("send", "receive"):
                raise ParseError(
                    "interaction value must be 'send <channel>' or 'receive <channel>'",
                    lineno,
                    source,
                )
            interactions[key] = (words[1], words[0])
        else:
            maps[section][key] = value
    if "agent1" not in saw or "agent2" not in saw:
        raise ParseError("partition file needs [agent1] and [agent2] sections", None, source)
    try:
        partition = AgentPartition(
            frozenset(activities["agent1"]), frozenset(activities["agent2"]), interactions
        )
    except ValueError as exc:
        raise ParseError(str(exc), None, source) from exc
    return PartitionDocument(
        partition, maps["map1"] or None, maps["map2"] or None
    )


def derive_refinement_map(detailed: GwfNet, abstract: GwfNet) -> dict[str, str]:
    """Label-anchored map proposal from a discovered net onto a protocol net.

    Transitions sharing a label are anchored to each other; the remaining
    regions of the detailed net must each resolve to exactly one abstract
    place consistent with the anchors' neighborhoods and the two markings.
    The proposal carries no certificate of its own.
    """
    dn, an = detailed.net, abstract.net
    anchor_of: dict[str, str] = {}
    for t2 in an.transitions:
        label = an.labels.get(t2)
        if label is None:
            raise MapDerivationError(
                f"abstract transition '{t2}' has no label to anchor on"
            )
        if label in anchor_of:
            raise MapDerivationError(f"abstract label '{label}' is not unique")
        anchor_of[label] = t2

    mapping: dict[str, str] = {}
    anchored: set[str] = set()
    hit: set[str] = set()
    for t1 in dn.transitions:
        label = dn.labels.get(t1)
        if label is not None and label in anchor_of:
            mapping[t1] = anchor_of[label]
            anchored.add(t1)
            hit.add(anchor_of[label])
    missing = set(an.transitions) - hit
    if missing:
        raise MapDerivationError(
            f"no detailed transition carries the label of {sorted(missing)}"
        )

    # regions: connected components of the detailed net without the anchors
    remaining = dn.nodes - anchored
    adj: dict[str, set[str]] = {x: set() for x in remaining}
    for a, b in dn.arcs:
        if a in remaining and b in remaining:
            adj[a].add(b)
            adj[b].add(a)
    seen: set[str] = set()
    for start in sorted(remaining):
        if start in seen:
            continue
        region = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in region:
                    region.add(y)
                    stack.append(y)
        seen |= region

        candidates = set(an.places)
        for t1 in sorted(anchored):
            t2 = mapping[t1]
            if dn.post(t1) & region:
                candidates &= an.post(t2)
            if dn.pre(t1) & region:
                candidates &= an.pre(t2)
        if region & detailed.m0.support:
            candidates &= abstract.m0.support
        if region & detailed.mf.support:
            candidates &= abstract.mf.support
        if len(candidates) != 1:
            raise MapDerivationError(
                f"region containing '{min(region)}' matches "
                f"{len(candidates)} abstract places, need exactly 1"
            )
        target = next(iter(candidates))
        for x in region:
            mapping[x] = target
    return mapping


def resolve_map_entries(detailed: GwfNet, entries: dict[str, str]) -> dict[str, str]:
    """Resolve map keys that are labels to the labeled transition's id."""
    by_label: dict[str, list[str]] = {}
    for t, label in detailed.net.labels.items():
        by_label.setdefault(label, []).append(t)
    out: dict[str, str] = {}
    for key, value in entries.items():
        if detailed.net.has_node(key):
            out[key] = value
        elif key in by_label and len(by_label[key]) == 1:
            out[by_label[key][0]] = value
        else:
            raise InvalidPartition(f"map key '{key}' is neither a node nor a unique label")
    return out


@dataclass(frozen=True)
class PipelineResult:
    ok: bool
    failure: str | None
    partition: AgentPartition
    dropped: tuple[int, int]
    trees: tuple[ProcessTree, ProcessTree] | None = None
    agents: tuple[GwfNet, GwfNet] | None = None
    morphisms: tuple[AlphaMorphism, AlphaMorphism] | None = None
    protocol: ComposedNet | None = None
    protocol_soundness: SoundnessReport | None = None
    composed: ComposedNet | None = None
    composed_soundness: SoundnessReport | None = None
    lifted: tuple[AlphaMorphism, AlphaMorphism] | None = None
    direct_tree: ProcessTree | None = None
    direct: GwfNet | None = None
    direct_quality: QualityReport | None = None
    composed_quality: QualityReport | None = None

    def comparison_table(self) -> str:
        def row(name: str, q: QualityReport) -> str:
            return f"{name:<10} {float(q.fitness):>8.4f} {float(q.precision):>10.4f}"

        lines = [f"{'model':<10} {'fitness':>8} {'precision':>10}"]
        if self.direct_quality is not None:
            lines.append(row("direct", self.direct_quality))
        if self.composed_quality is not None:
            lines.append(row("composed", self.composed_quality))
        return "\n".join(lines) + "\n"

    def render(self) -> str:
        lines = [f"pipeline: {'ok' if self.ok else 'failed'}"]
        if self.failure:
            lines.append(f"failure: {self.failure}")
        lines.append(f"dropped-traces: agent1={self.dropped[0]} agent2={self.dropped[1]}")
        if self.trees:
            lines.append(f"tree1: {self.trees[0].render()}")
            lines.append(f"tree2: {self.trees[1].render()}")
        if self.direct_tree is not None:
            lines.append(f"direct-tree: {self.direct_tree.render()}")
        if self.protocol_soundness is not None:
            lines.append(f"protocol-sound: {'yes' if self.protocol_soundness.sound else 'no'}")
        if self.composed_soundness is not None:
            lines.append(f"composed-sound: {'yes' if self.composed_soundness.sound else 'no'}")
        if self.direct_quality is not None and self.composed_quality is not None:
            lines.append(self.comparison_table().rstrip("\n"))
        return "\n".join(lines) + "\n"


def run_pipeline(
    log: EventLog,
    partition: AgentPartition,
    abstract1: GwfNet,
    abstract2: GwfNet,
    spec: ChannelSpec,
    map1: dict[str, str] | None = None,
    map2: dict[str, str] | None = None,
) -> PipelineResult:
    """Run the full compositional discovery against an interaction protocol."""
    if not partition.covers(log.alphabet):
        missing = sorted(log.alphabet - (partition.a1 | partition.a2))
        raise InvalidPartition(f"log activities not assigned to any agent: {missing}")

    log1, dropped1 = project(log, partition.a1)
    log2, dropped2 = project(log, partition.a2)
    dropped = (dropped1, dropped2)

    def failed(stage: str, **kw) -> PipelineResult:
        return PipelineResult(False, stage, partition, dropped, **kw)

    tree1, agent1 = discover_wfnet(log1)
    tree2, agent2 = discover_wfnet(log2)
    trees = (tree1, tree2)
    agents = (agent1, agent2)

    entries1 = resolve_map_entries(agent1, map1) if map1 else derive_refinement_map(agent1, abstract1)
    entries2 = resolve_map_entries(agent2, map2) if map2 else derive_refinement_map(agent2, abstract2)
    phi1 = check_alpha(agent1.marked, abstract1.marked, entries1)
    phi2 = check_alpha(agent2.marked, abstract2.marked, entries2)
    morphisms = (phi1, phi2)
    if not phi1.certified or not phi2.certified:
        which = "agent1" if not phi1.certified else "agent2"
        bad = phi1 if not phi1.certified else phi2
        conds = ", ".join(r.condition for r in bad.failures())
        return failed(
            f"refinement map for {which} failed conditions: {conds}",
            trees=trees, agents=agents, morphisms=morphisms,
        )

    protocol = channel_compose(abstract1, abstract2, spec)
    protocol_report = check_soundness(protocol.gwf)
    if not protocol_report.sound:
        return failed(
            f"abstract protocol composition is not sound ({protocol_report.violated})",
            trees=trees, agents=agents, morphisms=morphisms,
            protocol=protocol, protocol_soundness=protocol_report,
        )

    half, lifted1 = refine_in_composition(protocol, phi1)
    composed, lifted2 = refine_in_composition(half, phi2)
    composed_report = check_soundness(composed.gwf)
    if not composed_report.sound:
        return failed(
            f"refined composition is not sound ({composed_report.violated})",
            trees=trees, agents=agents, morphisms=morphisms,
            protocol=protocol, protocol_soundness=protocol_report,
            composed=composed, composed_soundness=composed_report,
            lifted=(lifted1, lifted2),
        )

    direct_tree, direct = discover_wfnet(log)
    direct_q = quality(direct, log)
    composed_q = quality(composed.gwf, log)
    return PipelineResult(
        True,
        None,
        partition,
        dropped,
        trees=trees,
        agents=agents,
        morphisms=morphisms,
        protocol=protocol,
        protocol_soundness=protocol_report,
        composed=composed,
        composed_soundness=composed_report,
        lifted=(lifted1, lifted2),
        direct_tree=direct_tree,
        direct=direct,
        direct_quality=direct_q,
        composed_quality=composed_q,
    )
