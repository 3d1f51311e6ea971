"""Seeded random playout of workflow nets into event logs."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import SoundnessContradiction
from .gwf import GwfNet, check_soundness
from .logs import EventLog
from .nets import fire
from .reachability import DEFAULT_STATE_CAP

MAX_ATTEMPTS_PER_TRACE = 1_000


@dataclass(frozen=True)
class PlayoutResult:
    log: EventLog
    regenerated: int


def playout(
    g: GwfNet,
    traces: int,
    seed: int,
    max_steps: int | None = None,
    allow_unsound: bool = False,
    soundness_cap: int = DEFAULT_STATE_CAP,
) -> PlayoutResult:
    """Generate `traces` runs from m0 to mf, picking uniformly among enabled.

    Labeled transitions emit events; silent ones do not.  Runs exceeding
    `max_steps` (default ten firings per transition) and runs that emit no
    event are discarded and regenerated, with the count reported.  Each trace
    index derives its own generator from the seed, so identical arguments
    yield identical logs.
    """
    if max_steps is None:
        max_steps = 10 * max(len(g.net.transitions), 1)
    claimed_sound = not allow_unsound
    if claimed_sound:
        report = check_soundness(g, cap=soundness_cap)
        if not report.sound:
            raise SoundnessContradiction(
                f"net is not sound ({report.violated}); pass allow_unsound to play it out anyway"
            )

    order = sorted(g.net.transitions)
    out: list[tuple[str, ...]] = []
    regenerated = 0
    for index in range(traces):
        rng = random.Random(f"{seed}:{index}")
        trace: tuple[str, ...] | None = None
        for _ in range(MAX_ATTEMPTS_PER_TRACE):
            result = _one_run(g, rng, order, max_steps, claimed_sound)
            if result is not None:
                trace = result
                break
            regenerated += 1
        if trace is None:
            raise SoundnessContradiction(
                f"could not generate a complete nonempty trace for index {index}"
            )
        out.append(trace)
    return PlayoutResult(EventLog(out), regenerated)


def _one_run(g, rng, order, max_steps, claimed_sound):
    m = g.m0
    events: list[str] = []
    for _ in range(max_steps):
        if m == g.mf:
            return tuple(events) if events else None
        enabled = [t for t in order if all(m.count(p) >= 1 for p in g.net.pre(t))]
        if not enabled:
            if claimed_sound:
                raise SoundnessContradiction(
                    f"deadlock at {m} before the final marking in a net claimed sound"
                )
            return None
        t = rng.choice(enabled)
        m = fire(g.net, m, t)
        label = g.net.labels.get(t)
        if label is not None:
            events.append(label)
    if m == g.mf:
        return tuple(events) if events else None
    return None
