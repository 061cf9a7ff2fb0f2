"""Constructive machine-to-machine translations with witness maps.

Each translation emits the target machine plus the maps (state, action,
time) that certify the expressiveness relation, validates its output, and
is deterministic.  The region construction follows the classical integer-
constant quotient; rational constants are rescaled away first and the
scale factor is recorded in the witness time map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ResourceError, StructureError, UnsupportedShapeError, UsageError, ValidationError
from .exactmath import from_multipoly, taylor
from .exactmath.funcexpr import Const
from .machines import (
    Atom,
    Constraint,
    Machine,
    Nfa,
    NfaEdge,
    Not,
    Or,
    PaEdge,
    PolyDelayTA,
    ProbAutomaton,
    ProbTimedAutomaton,
    PtaEdge,
    StochasticTA,
    TaEdge,
    TimedAutomaton,
    TrueCon,
    TRUE,
    WeightAssignment,
    DensityEdge,
    constraint_constants,
    eval_constraint,
    has_diagonal_atom,
    model_tag,
    normalize_domains,
    validate_machine,
)


@dataclass(frozen=True)
class Witness:
    """Certifying maps between two machines' run collections.

    state_map carries the state correspondence: source -> target for
    relabellings, target -> source (the collapsing direction) for
    embeddings.  time_map is None for untimed relations, otherwise the
    rational factor of the order-preserving time rescaling (1 = identity).
    """

    state_map: dict[int, int] = field(default_factory=dict)
    action_map: dict[str, str] = field(default_factory=dict)
    time_map: Fraction | None = None
    kind: str = "relabelling"


def _validated(machine: Machine) -> Machine:
    report = validate_machine(machine)
    if not report.ok:
        raise ValidationError(
            "translation produced an invalid machine: " + "; ".join(report.violations)
        )
    return machine


def _identity_witness(machine: Machine, timed: bool, kind: str = "relabelling") -> Witness:
    return Witness(
        state_map={s: s for s in range(1, machine.n_states + 1)},
        action_map={a: a for a in machine.actions},
        time_map=Fraction(1) if timed else None,
        kind=kind,
    )


def _distinct_targets(machine: Machine) -> dict[int, int]:
    targets: dict[int, set[int]] = {}
    for e in machine.edges:
        targets.setdefault(e.src, set()).add(e.dst)
    return {s: len(ts) for s, ts in targets.items()}


# ---------------------------------------------------------------------------
# liftings (structure-preserving embeddings into richer classes)
# ---------------------------------------------------------------------------


def nfa_to_timed(machine: Nfa) -> tuple[TimedAutomaton, Witness]:
    """Same shape with empty reset sets and the empty (true) constraint."""
    if model_tag(machine) != "nfa":
        raise UsageError("nfa_to_timed expects an nfa")
    edges = tuple(TaEdge(e.src, frozenset(), TRUE, e.label, e.dst) for e in machine.edges)
    timed = TimedAutomaton(machine.n_states, machine.start, machine.actions, 0, edges)
    return _validated(timed), _identity_witness(machine, timed=True)


def nfa_to_prob(machine: Nfa) -> tuple[ProbAutomaton, Witness]:
    """Same shape with the uniform distribution over each state's targets.

    Probabilities attach to state pairs, so the uniform share is one over
    the number of distinct targets (equal to the outgoing edge count
    whenever no two edges join the same pair).
    """
    if model_tag(machine) != "nfa":
        raise UsageError("nfa_to_prob expects an nfa")
    fan = _distinct_targets(machine)
    edges = tuple(
        PaEdge(e.src, e.dst, Fraction(1, fan[e.src]), e.label) for e in machine.edges
    )
    prob = ProbAutomaton(machine.n_states, machine.start, machine.actions, edges)
    return _validated(prob), _identity_witness(machine, timed=False)


def timed_to_probtimed(machine: TimedAutomaton) -> tuple[ProbTimedAutomaton, Witness]:
    """Guards and resets preserved; uniform outgoing probabilities added."""
    if model_tag(machine) != "ta":
        raise UsageError("timed_to_probtimed expects a timed automaton")
    fan = _distinct_targets(machine)
    edges = tuple(
        PtaEdge(e.src, e.dst, Fraction(1, fan[e.src]), e.label, e.guard, e.reset)
        for e in machine.edges
    )
    out = ProbTimedAutomaton(
        machine.n_states, machine.start, machine.actions, machine.n_clocks, edges
    )
    return _validated(out), _identity_witness(machine, timed=True)


def prob_to_probtimed(machine: ProbAutomaton) -> tuple[ProbTimedAutomaton, Witness]:
    """Probabilities preserved; empty guards and reset sets added."""
    if model_tag(machine) != "pa":
        raise UsageError("prob_to_probtimed expects a probabilistic automaton")
    edges = tuple(
        PtaEdge(e.src, e.dst, e.prob, e.label, TRUE, frozenset()) for e in machine.edges
    )
    out = ProbTimedAutomaton(machine.n_states, machine.start, machine.actions, 0, edges)
    return _validated(out), _identity_witness(machine, timed=True)


def probtimed_to_delay(machine: ProbTimedAutomaton, degree: int) -> tuple[PolyDelayTA, Witness]:
    """Constant transition polynomials over the normalized guard boxes."""
    if model_tag(machine) != "pta":
        raise UsageError("probtimed_to_delay expects a probabilistic timed automaton")
    if degree < 0:
        raise UsageError("truncation degree must be a natural number")
    boxes = normalize_domains(machine)
    edges = tuple(
        DensityEdge(e.src, e.dst, box, Const(e.prob), e.label, degree)
        for e, box in zip(machine.edges, boxes)
    )
    out = PolyDelayTA(machine.n_states, machine.start, machine.actions, machine.n_clocks, edges)
    return _validated(out), _identity_witness(machine, timed=True)


def delay_to_stochastic(machine: PolyDelayTA) -> tuple[StochasticTA, Witness]:
    """Identical components; the (polynomial) truncations become the
    stochastic transition densities."""
    if model_tag(machine) != "tapd":
        raise UsageError("delay_to_stochastic expects a polynomial-delay machine")
    m = machine.n_clocks
    edges = tuple(
        DensityEdge(
            e.src,
            e.dst,
            e.dom,
            from_multipoly(taylor(e.func, e.degree, m)),
            e.label,
            None,
        )
        for e in machine.edges
    )
    out = StochasticTA(machine.n_states, machine.start, machine.actions, m, edges)
    return _validated(out), _identity_witness(machine, timed=True)


# ---------------------------------------------------------------------------
# gcd splitting (probabilities to parallel edges)
# ---------------------------------------------------------------------------


def edge_prob_gcd(machine: ProbAutomaton | ProbTimedAutomaton) -> Fraction:
    """gcd of the edge probabilities: over a common denominator d the
    value gcd(numerators)/d."""
    probs = [e.prob for e in machine.edges]
    if not probs:
        raise UsageError("machine has no edges")
    denom = math.lcm(*(p.denominator for p in probs))
    num = math.gcd(*(p.numerator * (denom // p.denominator) for p in probs))
    return Fraction(num, denom)


def _copy_layout(machine, k: Fraction):
    """Copies per state (max incoming multiplicity, floor 1) plus the
    contiguous renumbering (state, copy) -> new index."""
    copies = {s: 1 for s in range(1, machine.n_states + 1)}
    for e in machine.edges:
        j = e.prob / k
        if j.denominator != 1:
            raise StructureError(f"probability {e.prob} is not a multiple of the gcd {k}")
        copies[e.dst] = max(copies[e.dst], int(j))
    index: dict[tuple[int, int], int] = {}
    state_map: dict[int, int] = {}
    nxt = 1
    for s in range(1, machine.n_states + 1):
        for c in range(1, copies[s] + 1):
            index[(s, c)] = nxt
            state_map[nxt] = s
            nxt += 1
    return copies, index, state_map, nxt - 1


def prob_to_nfa_gcd(machine: ProbAutomaton) -> tuple[Nfa, Witness]:
    """Split each probability-p edge into p/k parallel edges to fresh
    copies of its target; every copy inherits the target's outgoing
    structure.  The witness collapses copies back onto their original."""
    if model_tag(machine) != "pa":
        raise UsageError("prob_to_nfa_gcd expects a probabilistic automaton")
    k = edge_prob_gcd(machine)
    copies, index, state_map, n_states = _copy_layout(machine, k)
    edges = []
    for e in machine.edges:
        j = int(e.prob / k)
        for c in range(1, copies[e.src] + 1):
            for i in range(1, j + 1):
                edges.append(NfaEdge(index[(e.src, c)], e.label, index[(e.dst, i)]))
    out = Nfa(n_states, index[(machine.start, 1)], machine.actions, tuple(sorted(
        edges, key=lambda e: (e.src, e.label, e.dst)
    )))
    witness = Witness(
        state_map=state_map,
        action_map={a: a for a in machine.actions},
        time_map=None,
        kind="embedding",
    )
    return _validated(out), witness


def probtimed_to_timed(machine: ProbTimedAutomaton) -> tuple[TimedAutomaton, Witness]:
    """gcd splitting on timed edges; guards and resets copied onto every
    parallel copy."""
    if model_tag(machine) != "pta":
        raise UsageError("probtimed_to_timed expects a probabilistic timed automaton")
    k = edge_prob_gcd(machine)
    copies, index, state_map, n_states = _copy_layout(machine, k)
    edges = []
    for e in machine.edges:
        j = int(e.prob / k)
        for c in range(1, copies[e.src] + 1):
            for i in range(1, j + 1):
                edges.append(TaEdge(index[(e.src, c)], e.reset, e.guard, e.label, index[(e.dst, i)]))
    out = TimedAutomaton(
        n_states,
        index[(machine.start, 1)],
        machine.actions,
        machine.n_clocks,
        tuple(sorted(edges, key=lambda e: (e.src, e.label, e.dst))),
    )
    witness = Witness(
        state_map=state_map,
        action_map={a: a for a in machine.actions},
        time_map=Fraction(1),
        kind="embedding",
    )
    return _validated(out), witness


# ---------------------------------------------------------------------------
# region automaton
# ---------------------------------------------------------------------------
#
# A region over integer ceiling C records, per clock, the integer part
# clipped at C (C+1 meaning "beyond every constraint"), and the ordered
# partition of the bounded clocks by fractional part, the zero-fraction
# class first.  Regions decide every constraint atom, so guards evaluate
# on a representative point.

Region = tuple[tuple[int, ...], tuple[tuple[int, ...], ...]]

DEFAULT_REGION_BUDGET = 10**5


def _initial_region(m: int) -> Region:
    return ((0,) * m, (tuple(range(m)),))


def _region_rep(z: Region, ceiling: int) -> tuple[Fraction, ...]:
    ints, classes = z
    m = len(ints)
    rep = [Fraction(0)] * m
    positive = classes[1:]
    t = len(positive)
    for r in range(m):
        if ints[r] > ceiling:
            rep[r] = Fraction(ceiling + 1)
        elif r in classes[0]:
            rep[r] = Fraction(ints[r])
        else:
            for j, cls in enumerate(positive, start=1):
                if r in cls:
                    rep[r] = Fraction(ints[r]) + Fraction(j, t + 1)
                    break
    return tuple(rep)


def _region_successor(z: Region, ceiling: int) -> Region:
    ints, classes = z
    m = len(ints)
    bounded = [r for r in range(m) if ints[r] <= ceiling]
    if not bounded:
        return z
    zero, positive = classes[0], list(classes[1:])
    new_ints = list(ints)
    if zero:
        stay = tuple(sorted(r for r in zero if ints[r] < ceiling))
        for r in zero:
            if ints[r] == ceiling:
                new_ints[r] = ceiling + 1
        new_positive = ([stay] if stay else []) + positive
        return (tuple(new_ints), ((),) + tuple(new_positive))
    top = positive.pop()
    for r in top:
        new_ints[r] += 1
    return (tuple(new_ints), (tuple(sorted(top)),) + tuple(positive))


def _elapse_set(z: Region, ceiling: int) -> list[Region]:
    """Regions reachable by letting a positive amount of time pass."""
    ints, classes = z
    bounded_exists = any(i <= ceiling for i in ints)
    out = []
    if not classes[0] or not bounded_exists:
        out.append(z)
    cur = z
    while True:
        nxt = _region_successor(cur, ceiling)
        if nxt == cur:
            break
        out.append(nxt)
        cur = nxt
    return out


def _region_reset(z: Region, reset: frozenset[int]) -> Region:
    if not reset:
        return z
    ints, classes = z
    new_ints = tuple(0 if r in reset else i for r, i in enumerate(ints))
    zero = tuple(sorted(set(classes[0]) | set(reset)))
    positive = []
    for cls in classes[1:]:
        kept = tuple(r for r in cls if r not in reset)
        if kept:
            positive.append(kept)
    return (new_ints, (zero,) + tuple(positive))


def _rescale_machine(machine: TimedAutomaton) -> tuple[TimedAutomaton, Fraction]:
    """Multiply every guard constant by the lcm of their denominators."""
    consts: set[Fraction] = set()
    for e in machine.edges:
        consts |= constraint_constants(e.guard)
    denoms = [c.denominator for c in consts] or [1]
    scale = Fraction(math.lcm(*denoms))
    if scale == 1:
        return machine, Fraction(1)

    def scale_con(con: Constraint) -> Constraint:
        if isinstance(con, TrueCon):
            return con
        if isinstance(con, Atom):
            return Atom(con.left_clock, con.left_off * scale, con.right_clock, con.right_off * scale, con.strict)
        if isinstance(con, Not):
            return Not(scale_con(con.inner))
        if isinstance(con, Or):
            return Or(scale_con(con.left), scale_con(con.right))
        raise StructureError("unsupported constraint node")

    edges = tuple(
        TaEdge(e.src, e.reset, scale_con(e.guard), e.label, e.dst) for e in machine.edges
    )
    return (
        TimedAutomaton(machine.n_states, machine.start, machine.actions, machine.n_clocks, edges),
        scale,
    )


def region_automaton(
    machine: TimedAutomaton,
    weights: WeightAssignment,
    budget: int = DEFAULT_REGION_BUDGET,
) -> tuple[Nfa, WeightAssignment, Witness]:
    """The finite region quotient with the inductive weight splitting.

    Region-automaton weights divide the source edge's weight by that
    edge's target multiplicity (the number of distinct region states the
    edge produces anywhere in the reachable graph), which keeps every
    region state sub-stochastic.  Diagonal constraints are unsupported;
    rational constants are rescaled away and the factor is recorded in
    the witness time map.
    """
    if model_tag(machine) != "ta":
        raise UsageError("region_automaton expects a timed automaton")
    if len(weights.weights) != len(machine.edges):
        raise UsageError("weight assignment does not match the machine")
    for i, e in enumerate(machine.edges):
        if has_diagonal_atom(e.guard):
            raise UnsupportedShapeError(f"edge {i}: diagonal constraints are unsupported")
    scaled, scale = _rescale_machine(machine)
    consts = set()
    for e in scaled.edges:
        consts |= constraint_constants(e.guard)
    top = max([c for c in consts if c > 0], default=Fraction(0))
    if top.denominator != 1:
        raise UnsupportedShapeError("non-integer constants survived rescaling")
    ceiling = int(top) + 1
    m = scaled.n_clocks

    start_key = (scaled.start, _initial_region(m))
    index: dict[tuple[int, Region], int] = {start_key: 1}
    order = [start_key]
    queue = [start_key]
    transitions: dict[tuple[int, str, int], set[int]] = {}
    edge_targets: dict[int, set[int]] = {i: set() for i in range(len(scaled.edges))}
    reps: dict[Region, tuple[Fraction, ...]] = {}

    def rep_of(z: Region) -> tuple[Fraction, ...]:
        got = reps.get(z)
        if got is None:
            got = _region_rep(z, ceiling)
            reps[z] = got
        return got

    while queue:
        key = queue.pop(0)
        src_idx = index[key]
        state, z = key
        found: list[tuple[int, str, tuple[int, Region]]] = []
        for z_e in _elapse_set(z, ceiling):
            point = rep_of(z_e)
            for edge_id, e in enumerate(scaled.edges):
                if e.src != state:
                    continue
                if not eval_constraint(e.guard, point):
                    continue
                target = (e.dst, _region_reset(z_e, e.reset))
                found.append((edge_id, e.label, target))
        for edge_id, label, target in sorted(
            found, key=lambda item: (item[2][0], item[2][1], item[0])
        ):
            if target not in index:
                if len(index) >= budget:
                    raise ResourceError(f"region construction exceeded {budget} states")
                index[target] = len(index) + 1
                order.append(target)
                queue.append(target)
            dst_idx = index[target]
            transitions.setdefault((src_idx, label, dst_idx), set()).add(edge_id)
            edge_targets[edge_id].add(dst_idx)

    multiplicity = {i: max(1, len(ts)) for i, ts in edge_targets.items()}
    edge_list = sorted(transitions)
    nfa_edges = tuple(NfaEdge(src, label, dst) for src, label, dst in edge_list)
    nfa_weights = [
        sum(
            (weights.weight_of(i) / multiplicity[i] for i in transitions[key]),
            Fraction(0),
        )
        for key in edge_list
    ]
    out = Nfa(len(index), 1, machine.actions, nfa_edges)
    _validated(out)
    assignment = (
        WeightAssignment.create(out, nfa_weights, strict=False, same_label=False)
        if nfa_edges
        else WeightAssignment(())
    )
    witness = Witness(
        state_map={idx: key[0] for key, idx in index.items()},
        action_map={a: a for a in machine.actions},
        time_map=scale,
        kind="embedding",
    )
    return out, assignment, witness


def region_universe_size(n_clocks: int, ceiling: int) -> int:
    """Number of distinct regions reachable by elapsing from zero and
    resetting, counted by exhaustive closure.  Used as an oracle in tests
    and reports."""
    seen: set[Region] = set()
    frontier = [_initial_region(n_clocks)]
    while frontier:
        z = frontier.pop()
        if z in seen:
            continue
        seen.add(z)
        for nxt in _elapse_set(z, ceiling):
            if nxt not in seen:
                frontier.append(nxt)
        for mask in range(1, 2**n_clocks):
            reset = frozenset(r for r in range(n_clocks) if mask >> r & 1)
            nxt = _region_reset(z, reset)
            if nxt not in seen:
                frontier.append(nxt)
    return len(seen)
