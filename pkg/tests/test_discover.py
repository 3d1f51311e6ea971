import random

import pytest

from agentmine.conformance import token_replay_fitness
from agentmine.discover import (
    ProcessTree,
    activity,
    discover_tree,
    discover_wfnet,
    silent,
    tree_to_wfnet,
)
from agentmine.errors import EmptyLog
from agentmine.gwf import check_soundness
from agentmine.logs import EventLog
from agentmine.simulate import playout
from agentmine.smd import smd_cover
from generators import random_tree


def render(log_traces) -> str:
    return discover_tree(EventLog(log_traces)).render()


def test_sequence_cut():
    assert render([("a", "b")]) == "seq(a, b)"


def test_parallel_cut():
    assert render([("a", "b"), ("b", "a")]) == "par(a, b)"


def test_loop_cut():
    assert render([("a",), ("a", "b", "a")]) == "loop(a, b)"


def test_xor_cut():
    assert render([("a",), ("b",)]) == "xor(a, b)"


def test_single_activity_repeats_become_a_loop():
    assert render([("a",), ("a", "a")]) == "loop(a, tau)"


def test_session_repetition_becomes_tau_loop():
    assert render([("a", "b"), ("a", "b", "a", "b")]) == "loop(seq(a, b), tau)"


def test_nested_structure():
    traces = [("a", "b", "d"), ("a", "c", "d")]
    assert render(traces) == "seq(a, xor(b, c), d)"


def test_empty_log_rejected():
    with pytest.raises(EmptyLog):
        discover_tree(EventLog([]))


def test_tree_validation():
    with pytest.raises(ValueError):
        ProcessTree("seq", children=(activity("a"),))
    with pytest.raises(ValueError):
        ProcessTree("activity")
    with pytest.raises(ValueError):
        ProcessTree("silent", label="x")


def test_determinism_byte_for_byte():
    traces = [("a", "b", "c"), ("b", "a", "c"), ("a", "c", "b")]
    first = discover_tree(EventLog(traces)).render()
    for _ in range(5):
        shuffled = list(traces)
        random.Random(0).shuffle(shuffled)
        assert discover_tree(EventLog(shuffled)).render() == first


def test_seq_translation_matches_two_step_line(seq2):
    g = tree_to_wfnet(ProcessTree("seq", children=(activity("a"), activity("b"))))
    assert len(g.net.places) == 3
    assert len(g.net.transitions) == 2
    assert sorted(g.net.labels.values()) == ["a", "b"]
    assert check_soundness(g).sound


def test_xor_translation_shape():
    g = tree_to_wfnet(ProcessTree("xor", children=(activity("a"), activity("b"))))
    assert len(g.net.places) == 2
    assert len(g.net.transitions) == 2
    assert check_soundness(g).sound


def test_discovered_nets_are_single_entry_single_exit():
    for traces in ([("a", "b")], [("a",), ("b", "c")], [("x", "y"), ("y", "x")]):
        _, g = discover_wfnet(EventLog(traces))
        assert len(g.m0) == 1 and len(g.mf) == 1


def test_random_trees_translate_to_sound_smd_nets():
    rng = random.Random(2)
    for i in range(100):
        labels = [f"x{k}" for k in range(rng.randint(1, 6))]
        tree = random_tree(rng, labels, depth=4)
        g = tree_to_wfnet(tree)
        assert check_soundness(g).sound
        cover = smd_cover(g.net, g.m0)
        assert cover.covered


def test_replay_fitness_one_on_own_log():
    rng = random.Random(11)
    for _ in range(10):
        labels = [f"x{k}" for k in range(rng.randint(1, 5))]
        tree = random_tree(rng, labels, depth=3)
        g = tree_to_wfnet(tree)
        log = playout(g, 30, seed=5).log
        rediscovered_tree, rediscovered = discover_wfnet(log)
        assert token_replay_fitness(rediscovered, log).fitness == 1
        assert token_replay_fitness(g, log).fitness == 1


def test_skippable_sequence_child_becomes_xor_with_silent():
    assert render([("a",), ("a", "b")]) == "seq(a, xor(tau, b))"
