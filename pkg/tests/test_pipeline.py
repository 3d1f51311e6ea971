import pytest

import corpus
from agentmine.errors import InvalidPartition, MapDerivationError, ParseError
from agentmine.logs import EventLog
from agentmine.pipeline import (
    derive_refinement_map,
    parse_partition_file,
    resolve_map_entries,
    run_pipeline,
)
from agentmine.morphisms import check_alpha
from agentmine.simulate import playout

PART_TEXT = """\
[agent1]
activities = a1 a2 a3 a4 w1 w2 send_req recv_ack
[agent2]
activities = b1, b2, b3, b4, recv_req, send_ack
[interactions]
send_req = send x
recv_req = receive x
send_ack = send y
recv_ack = receive y
"""


def test_parse_partition_file():
    doc = parse_partition_file(PART_TEXT)
    assert "send_req" in doc.partition.a1
    assert doc.partition.interactions["recv_req"] == ("x", "receive")
    assert doc.map1 is None


def test_parse_partition_with_maps():
    doc = parse_partition_file(PART_TEXT + "[map1]\nsend_req = sr\n")
    assert doc.map1 == {"send_req": "sr"}


def test_partition_parse_errors():
    with pytest.raises(ParseError):
        parse_partition_file("[agent1]\nactivities = a\n")  # missing agent2
    with pytest.raises(ParseError):
        parse_partition_file("[agent3]\nactivities = a\n")
    with pytest.raises(ParseError):
        parse_partition_file("activities = a\n")  # content before sections
    with pytest.raises(ParseError) as err:
        parse_partition_file("[agent1]\nactivities = a\n[interactions]\na = shout x\n")
    assert err.value.line == 4


def test_derive_map_on_discovered_agent(mas_system):
    from agentmine.discover import discover_wfnet
    from agentmine.logs import project

    log = playout(mas_system.gwf, 200, seed=7).log
    part = corpus.mas_partition()
    l1, _ = project(log, part.a1)
    _, agent1 = discover_wfnet(l1)
    mapping = derive_refinement_map(agent1, corpus.mas_abstract1())
    phi = check_alpha(agent1.marked, corpus.mas_abstract1().marked, mapping)
    assert phi.certified


def test_derive_map_requires_labeled_anchors(seq2):
    import agentmine.nets as nets
    from agentmine.gwf import recognize_gwf

    unlabeled = recognize_gwf(
        nets.PetriNet(
            ["s", "f"], ["t"], [("s", "t"), ("t", "f")]
        )
    )
    with pytest.raises(MapDerivationError):
        derive_refinement_map(seq2, unlabeled)


def test_resolve_map_entries_accepts_labels(seq2):
    resolved = resolve_map_entries(seq2, {"a": "x", "s": "y"})
    assert resolved == {"a": "x", "s": "y"}
    with pytest.raises(InvalidPartition):
        resolve_map_entries(seq2, {"zz": "x"})


def test_full_pipeline_on_mas(mas_system):
    log = playout(mas_system.gwf, 300, seed=7).log
    result = run_pipeline(
        log,
        corpus.mas_partition(),
        corpus.mas_abstract1(),
        corpus.mas_abstract2(),
        corpus.mas_protocol_spec(),
    )
    assert result.ok, result.failure
    assert result.protocol_soundness.sound
    assert result.composed_soundness.sound
    assert result.direct_quality.fitness == 1
    assert result.composed_quality.fitness == 1
    assert result.composed_quality.precision > result.direct_quality.precision
    table = result.comparison_table()
    assert "direct" in table and "composed" in table


def test_pipeline_rejects_uncovered_alphabet(mas_system):
    log = EventLog([("mystery",)])
    with pytest.raises(InvalidPartition):
        run_pipeline(
            log,
            corpus.mas_partition(),
            corpus.mas_abstract1(),
            corpus.mas_abstract2(),
            corpus.mas_protocol_spec(),
        )


def test_pipeline_requires_total_explicit_maps(mas_system):
    from agentmine.errors import MapShapeError

    log = playout(mas_system.gwf, 100, seed=7).log
    with pytest.raises(MapShapeError):
        run_pipeline(
            log,
            corpus.mas_partition(),
            corpus.mas_abstract1(),
            corpus.mas_abstract2(),
            corpus.mas_protocol_spec(),
            map1={"send_req": "ra", "recv_ack": "sr"},
        )


def test_pipeline_reports_uncertified_map(mas_system):
    from agentmine.discover import discover_wfnet
    from agentmine.logs import project

    log = playout(mas_system.gwf, 100, seed=7).log
    l1, _ = project(log, corpus.mas_partition().a1)
    _, agent1 = discover_wfnet(l1)
    good = derive_refinement_map(agent1, corpus.mas_abstract1())
    flipped = {
        node: {"sr": "ra", "ra": "sr"}.get(target, target)
        for node, target in good.items()
    }
    result = run_pipeline(
        log,
        corpus.mas_partition(),
        corpus.mas_abstract1(),
        corpus.mas_abstract2(),
        corpus.mas_protocol_spec(),
        map1=flipped,
    )
    assert not result.ok
    assert "agent1" in result.failure


def test_pipeline_reports_unsound_protocol(mas_system):
    # both agents wait to receive before sending: circular wait, deadlock
    from agentmine.compose import ChannelSpec

    bad_spec = ChannelSpec(
        ("x", "y"),
        frozenset([("ra", "x"), ("sa", "y")]),
        frozenset([("x", "rr"), ("y", "sr")]),
    )
    log = playout(mas_system.gwf, 50, seed=7).log
    result = run_pipeline(
        log,
        corpus.mas_partition(),
        corpus.mas_abstract1(),
        corpus.mas_abstract2(),
        bad_spec,
    )
    assert not result.ok
    assert "protocol" in result.failure


def test_precision_gap_is_seed_robust(mas_system):
    """The quality ordering should not hinge on one magic seed."""
    for seed in (99, 123):
        log = playout(mas_system.gwf, 300, seed=seed).log
        result = run_pipeline(
            log,
            corpus.mas_partition(),
            corpus.mas_abstract1(),
            corpus.mas_abstract2(),
            corpus.mas_protocol_spec(),
        )
        assert result.ok, result.failure
        assert result.direct_quality.fitness == 1
        assert result.composed_quality.fitness == 1
        gap = result.composed_quality.precision - result.direct_quality.precision
        assert gap >= 0.10, f"seed {seed}: gap {float(gap):.4f}"
