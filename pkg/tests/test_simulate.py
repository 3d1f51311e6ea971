import math
from collections import Counter

import pytest

import corpus
from agentmine.conformance import token_replay_fitness
from agentmine.discover import ProcessTree, activity, tree_to_wfnet
from agentmine.errors import SoundnessContradiction
from agentmine.simulate import playout


def test_deterministic_net_yields_identical_traces(seq2):
    result = playout(seq2, 5, seed=42)
    assert result.log.traces == (("a", "b"),) * 5
    assert result.regenerated == 0


def test_choice_frequency_within_three_sigma():
    g = tree_to_wfnet(ProcessTree("xor", children=(activity("a"), activity("b"))))
    log = playout(g, 1000, seed=42).log
    counts = Counter(log.traces)
    sigma = math.sqrt(1000 * 0.25)
    for trace in (("a",), ("b",)):
        assert abs(counts[trace] - 500) <= 3 * sigma


def test_channel_order_respected_in_every_trace(run2):
    log = playout(run2.gwf, 200, seed=9).log
    for trace in log:
        assert trace.index("b") < trace.index("c")


def test_reproducibility(mas_system):
    first = playout(mas_system.gwf, 50, seed=7)
    second = playout(mas_system.gwf, 50, seed=7)
    assert first.log.traces == second.log.traces
    third = playout(mas_system.gwf, 50, seed=8)
    assert third.log.traces != first.log.traces


def test_generated_traces_replay_perfectly(mas_system):
    log = playout(mas_system.gwf, 100, seed=3).log
    assert token_replay_fitness(mas_system.gwf, log).fitness == 1


def test_unsound_net_rejected_up_front():
    g = corpus.dead_transition_net()
    with pytest.raises(SoundnessContradiction):
        playout(g, 5, seed=1)


def test_unsound_ok_still_produces_complete_traces():
    g = corpus.dead_transition_net()  # deadlock-free; only a dead transition
    result = playout(g, 20, seed=1, allow_unsound=True)
    assert len(result.log) == 20
    for trace in result.log:
        assert trace  # nonempty by construction


def test_deadlocking_net_regenerates_or_fails():
    g = corpus.leaky_choice()
    result = playout(g, 10, seed=2, allow_unsound=True)
    assert len(result.log) == 10
    assert result.regenerated >= 0
