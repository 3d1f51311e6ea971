import random

import pytest

import corpus
import oracles
from agentmine.errors import NotGwf, UncheckedMorphism
from agentmine.gwf import check_soundness, recognize_gwf, well_marked
from agentmine.morphisms import check_alpha
from agentmine.nets import Marking, MarkedNet, PetriNet
from generators import random_safe_gwf


def test_seq2_certified(seq2):
    assert repr(seq2.m0) == "{s}"
    assert repr(seq2.mf) == "{f}"
    assert seq2.is_wf


def test_disconnected_place_fails_clause_3():
    # q sits on its own little cycle, unreachable from the source
    net = PetriNet(
        ["s", "p", "f", "q"],
        ["a", "b", "tq"],
        [("s", "a"), ("a", "p"), ("p", "b"), ("b", "f"), ("q", "tq"), ("tq", "q")],
    )
    with pytest.raises(NotGwf) as err:
        recognize_gwf(net)
    assert err.value.clause == 3
    assert err.value.node == "q"


def test_run2_composition_is_gwf(run2):
    # recertify from scratch
    g = recognize_gwf(run2.gwf.net)
    assert g.m0 == run2.gwf.m0
    assert g.mf == run2.gwf.mf


def test_declared_marking_mismatch_rejected(seq2):
    with pytest.raises(NotGwf) as err:
        recognize_gwf(seq2.net, declared_m0=Marking(["p"]))
    assert err.value.clause == 1


def test_no_sinks_rejected():
    net = PetriNet(["p", "q"], ["t", "u"], [("p", "t"), ("t", "q"), ("q", "u"), ("u", "p")])
    with pytest.raises(NotGwf) as err:
        recognize_gwf(net)
    assert err.value.clause in (1, 2)


def test_seq2_sound(seq2):
    report = check_soundness(seq2)
    assert report.sound
    assert report.violated == "none"
    assert "sound: yes" in report.render()


def test_dead_transition_witnessed():
    report = check_soundness(corpus.dead_transition_net())
    assert not report.sound
    assert report.violated == "dead-transition"
    assert report.witness == "y1"


def test_leaky_choice_reports_proper_completion():
    g = corpus.leaky_choice()
    report = check_soundness(g)
    assert report.violated == "proper-completion"
    # the witness marking strictly covers the final marking; replay the trace
    cur = g.m0
    from agentmine.nets import fire

    for t in report.witness_trace:
        cur = fire(g.net, cur, t)
    assert repr(cur) == report.witness
    assert g.mf <= cur and cur != g.mf
    # cross-check with the enumeration oracle (well under 20 states)
    counts = {p: 1 for p in g.m0.support}
    finals = {p: 1 for p in g.mf.support}
    assert oracles.naive_soundness(g.net, counts, finals) == "proper-completion"
    states, _, _ = oracles.naive_reachable(g.net, counts)
    assert len(states) <= 20


def test_unsafe_verdict():
    # both forked branches dump their token into the same place
    net = PetriNet(
        ["s", "p1", "p2", "q", "f"],
        ["a", "b", "c", "d"],
        [
            ("s", "a"), ("a", "p1"), ("a", "p2"),
            ("p1", "b"), ("b", "q"),
            ("p2", "c"), ("c", "q"),
            ("q", "d"), ("d", "f"),
        ],
    )
    g = recognize_gwf(net)
    report = check_soundness(g)
    assert report.violated == "unsafe"
    assert not report.sound


def test_truncated_verdict(seq2):
    report = check_soundness(seq2, cap=2)
    assert report.violated == "truncated"


def test_soundness_matches_oracle_on_random_nets():
    rng = random.Random(7)
    for _ in range(60):
        g = random_safe_gwf(rng, max_places=8)
        report = check_soundness(g)
        counts = {p: g.m0.count(p) for p in g.m0.support}
        finals = {p: g.mf.count(p) for p in g.mf.support}
        assert report.violated == oracles.naive_soundness(g.net, counts, finals)


def test_witness_traces_replay(seq2):
    rng = random.Random(13)
    from agentmine.nets import fire

    for _ in range(40):
        g = random_safe_gwf(rng, max_places=7)
        report = check_soundness(g)
        if report.witness_trace is None:
            continue
        cur = g.m0
        for t in report.witness_trace:
            cur = fire(g.net, cur, t)
        assert repr(cur) == report.witness


def test_well_marked_identity(seq2):
    phi = check_alpha(seq2.marked, seq2.marked, {x: x for x in seq2.net.nodes})
    assert well_marked(seq2.marked, phi)


def test_well_marked_false_when_token_past_input():
    src, dst, mapping = corpus.chain_refinement()
    phi = check_alpha(src, dst, mapping)
    # token sitting past the fragment's input place
    inside = MarkedNet(src.net, Marking(["q2"]))
    assert not well_marked(inside, phi)
    at_input = MarkedNet(src.net, Marking(["s"]))
    assert well_marked(at_input, phi)


def test_well_marked_matches_quantifier_on_random_markings():
    src, dst, mapping = corpus.choice_refinement()
    phi = check_alpha(src, dst, mapping)
    rng = random.Random(3)
    places = sorted(src.net.places)
    for _ in range(50):
        marked = MarkedNet(src.net, Marking(rng.sample(places, rng.randint(0, 3))))
        expected_places: set[str] = set()
        for p2 in dst.m0.support:
            region = {x for x, y in mapping.items() if y == p2}
            ins, _ = oracles.naive_in_out(src.net, region)
            expected_places |= {p for p in ins if src.net.is_place(p)}
        assert well_marked(marked, phi) == (marked.m0.support == frozenset(expected_places))


def test_well_marked_requires_certificate(seq2):
    src, dst, mapping = corpus.broken_subnet_cycle()
    phi = check_alpha(src, dst, mapping)
    assert not phi.certified
    with pytest.raises(UncheckedMorphism):
        well_marked(src, phi)
