"""Runs and traces: construction, validation, enumeration, prefix order.

A run is a finite alternating sequence of configurations and labeled,
optionally timed steps.  Timed models start from the all-zero clock
interpretation; clocks advance by the time delta of each step, guards are
checked after the advance and before the taken edge's resets apply.
Density models (tapd/sta) reset exactly the clocks whose edge-domain lower
bound is zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ResourceError, UsageError
from .exactmath import evaluate_exact, evaluate_numeric, is_polynomial, taylor
from .machines import (
    Machine,
    eval_constraint,
    edge_reset,
    is_timed,
    model_tag,
    n_clocks,
    outgoing,
)

DEFAULT_RUN_CAP = 10**6


@dataclass(frozen=True)
class Run:
    """Model-tagged finite run.

    states has one entry per configuration; labels/times (and the
    per-step prob/edge annotations) have one entry per step.  valuations
    and resets decorate configurations of timed models.
    """

    model: str
    states: tuple[int, ...]
    labels: tuple[str, ...]
    times: tuple[Fraction, ...] | None = None
    valuations: tuple[tuple[Fraction, ...], ...] | None = None
    resets: tuple[frozenset[int], ...] | None = None
    probs: tuple[Fraction, ...] | None = None
    edge_ids: tuple[int, ...] | None = None

    @property
    def steps(self) -> int:
        return len(self.labels)

    def skeleton(self) -> tuple[tuple[int, ...], tuple[str, ...]]:
        return (self.states, self.labels)

    def sort_key(self):
        return (
            self.states,
            self.labels,
            self.times if self.times is not None else (),
            self.edge_ids if self.edge_ids is not None else (),
        )


@dataclass(frozen=True)
class Trace:
    """A run with every configuration hidden behind padding."""

    model: str
    labels: tuple[str, ...]
    times: tuple[Fraction, ...] | None
    n_configs: int


def advance_clocks(
    iota: Sequence[Fraction], dt: Fraction, reset: Iterable[int] = ()
) -> tuple[Fraction, ...]:
    """All clocks advance by dt, then the reset set snaps to zero."""
    dt = Fraction(dt)
    if dt < 0:
        raise UsageError("time delta must be nonnegative")
    reset = set(reset)
    return tuple(Fraction(0) if c in reset else Fraction(x) + dt for c, x in enumerate(iota))


def empty_run(machine: Machine) -> Run:
    tag = model_tag(machine)
    timed = tag in ("ta", "pta", "tapd", "sta")
    m = n_clocks(machine)
    return Run(
        model=tag,
        states=(machine.start,),
        labels=(),
        times=() if timed else None,
        valuations=((Fraction(0),) * m,) if timed else None,
        resets=(frozenset(),) if tag in ("ta", "pta") else None,
        probs=() if tag in ("pa", "pta") else None,
        edge_ids=(),
    )


def trace_of(run: Run) -> Trace:
    """Hide configurations, keep labels and times."""
    return Trace(run.model, run.labels, run.times, len(run.states))


def is_prefix(a: Run, b: Run) -> bool:
    """Initial-segment test on configurations, labels, times, and edges."""
    if a.model != b.model:
        return False
    k = len(a.states)
    if k > len(b.states):
        return False

    def head(seq, n):
        return None if seq is None else seq[:n]

    return (
        a.states == b.states[:k]
        and a.labels == head(b.labels, k - 1)
        and a.times == head(b.times, k - 1)
        and a.valuations == head(b.valuations, k)
        and a.resets == head(b.resets, k)
        and a.probs == head(b.probs, k - 1)
        and a.edge_ids == head(b.edge_ids, k - 1)
    )


def prefix_violation(runs: Sequence[Run]) -> tuple[int, int] | None:
    """Indices (i, j) of an ordered prefix pair, or None when prefix-free.

    Matches the strict reading of prefix-freeness: no member may be a
    prefix of another, equality included, so duplicates also violate it.
    """
    for i, a in enumerate(runs):
        for j, b in enumerate(runs):
            if i != j and is_prefix(a, b):
                return (i, j)
    return None


def prefix_free(runs: Sequence[Run]) -> bool:
    return prefix_violation(runs) is None


# ---------------------------------------------------------------------------
# stepping logic shared by validation and enumeration
# ---------------------------------------------------------------------------


class _Stepper:
    """Per-model transition attempt: configuration + edge + dt -> next."""

    def __init__(self, machine: Machine):
        self.machine = machine
        self.tag = model_tag(machine)
        self.m = n_clocks(machine)
        self._trunc_cache: dict[int, object] = {}

    def truncation(self, edge_id: int):
        got = self._trunc_cache.get(edge_id)
        if got is None:
            e = self.machine.edges[edge_id]
            got = taylor(e.func, e.degree, self.m)
            self._trunc_cache[edge_id] = got
        return got

    def density_positive(self, edge_id: int, iota) -> bool:
        e = self.machine.edges[edge_id]
        if self.tag == "tapd":
            # the normalized transition P is positive iff the truncation is
            # nonzero at the point (the sibling sum then dominates it)
            return self.truncation(edge_id).evaluate(iota) != 0
        if is_polynomial(e.func):
            return evaluate_exact(e.func, iota) > 0
        return evaluate_numeric(e.func, iota) > 0

    def try_step(self, state: int, iota, edge_id: int, dt: Fraction):
        """Return (next_state, next_iota, reset, prob) or None."""
        e = self.machine.edges[edge_id]
        if e.src != state:
            return None
        if self.tag == "nfa":
            return (e.dst, None, None, None)
        if self.tag == "pa":
            if e.prob <= 0:
                return None
            return (e.dst, None, None, e.prob)
        if self.tag in ("ta", "pta"):
            advanced = advance_clocks(iota, dt)
            if not eval_constraint(e.guard, advanced):
                return None
            if self.tag == "pta" and e.prob <= 0:
                return None
            nxt = advance_clocks(iota, dt, e.reset)
            return (e.dst, nxt, e.reset, e.prob if self.tag == "pta" else None)
        # density models: advance, auto-reset per domain lower bound, land
        # inside the edge domain; density positive at the source valuation
        reset = edge_reset(self.machine, e)
        nxt = advance_clocks(iota, dt, reset)
        if not e.dom.contains(nxt):
            return None
        if not self.density_positive(edge_id, iota):
            return None
        return (e.dst, nxt, reset, None)


def validate_run(machine: Machine, run: Run) -> tuple[bool, list[str]]:
    """Check a run against the machine's step conditions."""
    out: list[str] = []
    tag = model_tag(machine)
    if run.model != tag:
        return False, [f"run model {run.model!r} does not match machine {tag!r}"]
    timed = is_timed(machine)
    k = run.steps
    if len(run.states) != k + 1:
        return False, ["configuration count must be label count + 1"]
    if run.edge_ids is None or len(run.edge_ids) != k:
        return False, ["run must record one machine edge per step"]
    if not run.states or run.states[0] != machine.start:
        out.append(f"run does not begin at the start state {machine.start}")
    if timed:
        if run.times is None or len(run.times) != k:
            return False, ["timed run must carry one time stamp per step"]
        if any(t < 0 for t in run.times):
            out.append("negative time stamp")
        if any(a >= b for a, b in zip(run.times, run.times[1:])):
            out.append("time stamps must strictly increase")
        if run.valuations is None or len(run.valuations) != k + 1:
            return False, ["timed run must carry one clock interpretation per configuration"]
        if any(v != 0 for v in run.valuations[0]):
            out.append("initial clock interpretation must be all zeros")
    if tag in ("ta", "pta"):
        if run.resets is None or len(run.resets) != k + 1:
            return False, ["run must carry one reset set per configuration"]
        if run.resets[0] != frozenset():
            out.append("initial reset set must be empty")
    if tag in ("pa", "pta"):
        if run.probs is None or len(run.probs) != k:
            return False, ["run must carry one edge probability per step"]
    if out:
        return False, out

    stepper = _Stepper(machine)
    iota = run.valuations[0] if timed else None
    prev_t = Fraction(0)
    for i in range(k):
        edge_id = run.edge_ids[i]
        if not 0 <= edge_id < len(machine.edges):
            out.append(f"step {i}: edge id {edge_id} out of range")
            break
        e = machine.edges[edge_id]
        if e.label != run.labels[i]:
            out.append(f"step {i}: label {run.labels[i]!r} does not match edge label {e.label!r}")
        dt = (run.times[i] - prev_t) if timed else Fraction(0)
        got = stepper.try_step(run.states[i], iota, edge_id, dt)
        if got is None:
            out.append(f"step {i}: edge condition fails")
            break
        dst, nxt, reset, prob = got
        if dst != run.states[i + 1]:
            out.append(f"step {i}: edge targets {dst}, run goes to {run.states[i + 1]}")
        if timed:
            if nxt != run.valuations[i + 1]:
                out.append(f"step {i}: clock interpretation does not follow advance/reset")
            prev_t = run.times[i]
            iota = nxt
        if tag in ("ta", "pta") and run.resets[i + 1] != reset:
            out.append(f"step {i}: recorded reset set differs from the edge's")
        if tag in ("pa", "pta") and run.probs[i] != prob:
            out.append(f"step {i}: recorded probability differs from the edge's")
        if out:
            break
    return (not out), out


def enumerate_runs(
    machine: Machine,
    depth: int,
    grid: Sequence[Fraction] | None = None,
    cap: int = DEFAULT_RUN_CAP,
) -> list[Run]:
    """All valid runs of exactly ``depth`` steps.

    Timed models draw their strictly increasing time stamps in order from
    the grid.  Output is deterministic: sorted by state sequence, labels,
    times, then edge ids.  Exceeding the exploration cap raises
    ResourceError.
    """
    if depth < 0:
        raise UsageError("depth must be a natural number")
    tag = model_tag(machine)
    timed = is_timed(machine)
    if timed and depth > 0:
        if not grid:
            raise UsageError("timed models need a non-empty time grid")
        grid = tuple(sorted({Fraction(t) for t in grid}))
        if any(t < 0 for t in grid):
            raise UsageError("grid times must be nonnegative")
    if depth == 0:
        return [empty_run(machine)]

    stepper = _Stepper(machine)
    m = n_clocks(machine)
    base = empty_run(machine)
    results: list[Run] = []
    explored = 0

    def extend(run: Run, grid_pos: int) -> None:
        nonlocal explored
        if run.steps == depth:
            results.append(run)
            return
        state = run.states[-1]
        iota = run.valuations[-1] if timed else None
        time_options = range(grid_pos, len(grid)) if timed else (None,)
        for ti in time_options:
            if timed:
                t = grid[ti]
                dt = t - (run.times[-1] if run.times else Fraction(0))
                if dt < 0 or (run.times and dt == 0):
                    continue
            for edge_id, _ in outgoing(machine, state):
                explored += 1
                if explored > cap:
                    raise ResourceError(
                        f"run enumeration exceeded the budget of {cap} extensions"
                    )
                got = stepper.try_step(state, iota, edge_id, dt if timed else Fraction(0))
                if got is None:
                    continue
                dst, nxt, reset, prob = got
                e = machine.edges[edge_id]
                extend(
                    Run(
                        model=tag,
                        states=run.states + (dst,),
                        labels=run.labels + (e.label,),
                        times=(run.times + (grid[ti],)) if timed else None,
                        valuations=(run.valuations + (nxt,)) if timed else None,
                        resets=(run.resets + (reset,)) if tag in ("ta", "pta") else None,
                        probs=(run.probs + (prob,)) if tag in ("pa", "pta") else None,
                        edge_ids=run.edge_ids + (edge_id,),
                    ),
                    ti + 1 if timed else 0,
                )

    extend(base, 0)
    results.sort(key=Run.sort_key)
    return results
