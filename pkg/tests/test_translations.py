"""Constructive translations: shapes, witnesses, and measure bookkeeping."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from quantauto.errors import UnsupportedShapeError
from quantauto.exactmath import Box, evaluate_exact
from quantauto.fixtures import fig3_pta, fig5_ta, fig7_pa, fig8_tapd, two_state_uniform_nfa
from quantauto.machines import (
    Nfa,
    NfaEdge,
    PaEdge,
    ProbAutomaton,
    ProbTimedAutomaton,
    PtaEdge,
    TaEdge,
    TimedAutomaton,
    TRUE,
    WeightAssignment,
    clock_le,
    diag_le,
    validate_machine,
)
from quantauto.measures import assign_weights, measure_run, uniform_boundary_weights
from quantauto.runs import enumerate_runs
from quantauto.translations import (
    delay_to_stochastic,
    edge_prob_gcd,
    nfa_to_prob,
    nfa_to_timed,
    prob_to_nfa_gcd,
    prob_to_probtimed,
    probtimed_to_delay,
    probtimed_to_timed,
    region_automaton,
    region_universe_size,
    timed_to_probtimed,
)

from _gen import grid_reachable_states, rand_pa, rand_ta

F = Fraction


# -- untimed-to-timed and untimed-to-probabilistic ---------------------------


def test_nfa_to_timed_single_loop():
    machine = Nfa(1, 1, ("a",), (NfaEdge(1, "a", 1),))
    timed, witness = nfa_to_timed(machine)
    assert timed.n_clocks == 0
    assert timed.edges == (TaEdge(1, frozenset(), TRUE, "a", 1),)
    assert witness.state_map == {1: 1}
    assert witness.kind == "relabelling"


def test_nfa_to_timed_preserves_edge_count():
    shape = Nfa(
        3,
        1,
        ("a", "b", "c", "d", "e", "f", "g"),
        (
            NfaEdge(1, "a", 1), NfaEdge(1, "b", 3), NfaEdge(1, "c", 2),
            NfaEdge(2, "d", 2), NfaEdge(2, "e", 3),
            NfaEdge(3, "f", 1), NfaEdge(3, "g", 2),
        ),
    )
    timed, _ = nfa_to_timed(shape)
    assert len(timed.edges) == 7
    assert all(e.guard is TRUE and not e.reset for e in timed.edges)


def test_nfa_to_timed_edgeless():
    machine = Nfa(2, 1, ("a",), ())
    timed, _ = nfa_to_timed(machine)
    assert timed.edges == ()


def test_nfa_to_prob_uniform_rows():
    machine = Nfa(3, 1, ("a", "b"), (NfaEdge(1, "a", 2), NfaEdge(1, "b", 3), NfaEdge(2, "a", 1)))
    prob, _ = nfa_to_prob(machine)
    assert [e.prob for e in prob.edges] == [F(1, 2), F(1, 2), F(1)]
    three = Nfa(3, 1, ("a",), tuple(NfaEdge(1, "a", t) for t in (1, 2, 3)))
    prob, _ = nfa_to_prob(three)
    assert {e.prob for e in prob.edges} == {F(1, 3)}


def test_nfa_to_prob_chain_of_single_edges():
    chain = Nfa(3, 1, ("a",), (NfaEdge(1, "a", 2), NfaEdge(2, "a", 3)))
    prob, _ = nfa_to_prob(chain)
    assert all(e.prob == 1 for e in prob.edges)


# -- addition/removal of probabilistic structure ------------------------------


def test_timed_to_probtimed_keeps_guards():
    machine = fig5_ta()
    lifted, _ = timed_to_probtimed(machine)
    assert all(e.prob == F(1, 2) for e in lifted.edges)
    assert [e.guard for e in lifted.edges] == [e.guard for e in machine.edges]
    assert [e.reset for e in lifted.edges] == [e.reset for e in machine.edges]


def test_prob_to_probtimed_keeps_rows():
    machine = fig7_pa()
    lifted, _ = prob_to_probtimed(machine)
    assert [e.prob for e in lifted.edges] == [e.prob for e in machine.edges]
    assert all(e.guard is TRUE and not e.reset for e in lifted.edges)
    assert lifted.n_clocks == 0


def test_lift_edgeless_machines():
    machine = ProbAutomaton(2, 1, ("a",), ())
    lifted, _ = prob_to_probtimed(machine)
    assert lifted.edges == ()


def test_probtimed_to_delay_constant_polynomials():
    machine = ProbTimedAutomaton(
        2, 1, ("a", "b"), 1,
        (
            PtaEdge(1, 2, F(1, 2), "a", clock_le(0, 2), frozenset()),
            PtaEdge(1, 2, F(1, 2), "b", clock_le(0, 4), frozenset()),
            PtaEdge(2, 1, F(1), "a", clock_le(0, 4), frozenset()),
        ),
    )
    delayed, witness = probtimed_to_delay(machine, 1)
    assert delayed.edges[0].dom.intervals == ((F(0), F(2, 5)),)
    assert evaluate_exact(delayed.edges[0].func, (F(0),)) == F(1, 2)
    assert witness.time_map == 1


def test_probtimed_to_delay_unguarded_full_cube():
    machine = ProbTimedAutomaton(
        2, 1, ("a",), 2,
        (PtaEdge(1, 2, F(1), "a", TRUE, frozenset()), PtaEdge(2, 1, F(1), "a", TRUE, frozenset())),
    )
    delayed, _ = probtimed_to_delay(machine, 0)
    assert delayed.edges[0].dom == Box.unit(2)
    assert evaluate_exact(delayed.edges[0].func, (F(0), F(0))) == 1


def test_probtimed_to_delay_reset_forces_zero_lower_bound():
    machine = ProbTimedAutomaton(
        2, 1, ("a",), 1,
        (
            PtaEdge(1, 2, F(1), "a", clock_le(0, 2), frozenset({0})),
            PtaEdge(2, 1, F(1), "a", clock_le(0, 2), frozenset()),
        ),
    )
    delayed, _ = probtimed_to_delay(machine, 1)
    assert delayed.edges[0].dom.intervals[0][0] == 0


def test_delay_to_stochastic_copies_densities():
    machine = fig8_tapd()
    stochastic, witness = delay_to_stochastic(machine)
    assert validate_machine(stochastic).ok
    assert witness.kind == "relabelling"
    for original, lifted in zip(machine.edges, stochastic.edges):
        assert lifted.dom == original.dom
        assert lifted.degree is None
        for x in (F(0), F(1, 4), F(1, 2)):
            assert evaluate_exact(lifted.func, (x,)) == evaluate_exact(original.func, (x,))


# -- gcd splitting -----------------------------------------------------------


def test_gcd_of_figure_rows():
    assert edge_prob_gcd(fig7_pa()) == F(1, 4)


def test_gcd_split_parallel_edge_counts():
    machine = fig7_pa()
    nfa, witness = prob_to_nfa_gcd(machine)
    assert witness.kind == "embedding"
    copies = {}
    for new, orig in witness.state_map.items():
        copies[orig] = copies.get(orig, 0) + 1
    assert copies == {1: 3, 2: 3}
    start_copy = nfa.start
    loop_edges = [e for e in nfa.edges if e.src == start_copy and witness.state_map[e.dst] == 1]
    cross_edges = [e for e in nfa.edges if e.src == start_copy and witness.state_map[e.dst] == 2]
    assert len(loop_edges) == 3 and len(cross_edges) == 1


def test_gcd_split_uniform_rows():
    machine = ProbAutomaton(
        2, 1, ("a", "b"),
        (PaEdge(1, 1, F(1, 2), "a"), PaEdge(1, 2, F(1, 2), "b")),
    )
    nfa, witness = prob_to_nfa_gcd(machine)
    assert edge_prob_gcd(machine) == F(1, 2)
    assert len([e for e in nfa.edges if e.src == nfa.start]) == 2


def test_gcd_split_probability_one_chain():
    machine = ProbAutomaton(3, 1, ("a",), (PaEdge(1, 2, F(1), "a"), PaEdge(2, 3, F(1), "a")))
    nfa, witness = prob_to_nfa_gcd(machine)
    assert nfa.n_states == 3 and len(nfa.edges) == 2


def test_gcd_split_fiber_measures():
    # the probability product of every source run equals the total weight
    # of its fiber when each split edge carries the gcd as weight
    rng = random.Random(4)
    for _ in range(3):
        machine = rand_pa(rng)
        k = edge_prob_gcd(machine)
        nfa, witness = prob_to_nfa_gcd(machine)
        weights = WeightAssignment.create(nfa, [k] * len(nfa.edges), strict=False, same_label=False)
        for depth in (1, 2, 3, 4):
            source_runs = enumerate_runs(machine, depth)
            target_runs = enumerate_runs(nfa, depth)
            fibers: dict[tuple, Fraction] = {}
            for run in target_runs:
                key = (tuple(witness.state_map[s] for s in run.states), run.labels)
                value = measure_run(nfa, weights, run).exact
                fibers[key] = fibers.get(key, F(0)) + value
            for run in source_runs:
                expected = measure_run(machine, None, run).exact
                assert fibers.get((run.states, run.labels)) == expected


def test_timed_gcd_split_examples():
    half_rows = ProbTimedAutomaton(
        2, 1, ("a", "b"), 1,
        (
            PtaEdge(1, 1, F(1, 2), "a", clock_le(0, 2), frozenset()),
            PtaEdge(1, 2, F(1, 2), "b", clock_le(0, 3), frozenset({0})),
        ),
    )
    timed, witness = probtimed_to_timed(half_rows)
    assert timed.n_states == 2
    assert [e.guard for e in timed.edges] != [TRUE, TRUE]

    third = fig3_pta()
    timed, witness = probtimed_to_timed(third)
    copies: dict[int, int] = {}
    for new, orig in witness.state_map.items():
        copies[orig] = copies.get(orig, 0) + 1
    assert edge_prob_gcd(third) == F(1, 100)
    assert copies == {1: 50, 2: 50, 3: 50}

    deterministic = ProbTimedAutomaton(
        2, 1, ("a",), 1,
        (PtaEdge(1, 2, F(1), "a", clock_le(0, 1), frozenset()), PtaEdge(2, 1, F(1), "a", TRUE, frozenset())),
    )
    timed, witness = probtimed_to_timed(deterministic)
    assert timed.n_states == 2 and len(timed.edges) == 2


# -- region automaton --------------------------------------------------------


def test_region_universe_counts():
    assert region_universe_size(1, 1) == 4
    assert region_universe_size(1, 5) == 12  # 2 * ceiling + 2


def test_region_of_unguarded_loop():
    machine = TimedAutomaton(1, 1, ("a",), 1, (TaEdge(1, frozenset(), TRUE, "a", 1),))
    nfa, weights, witness = region_automaton(machine, assign_weights(machine, F(1, 2)))
    assert nfa.n_states == 4
    assert all(witness.state_map[i] == 1 for i in witness.state_map)
    assert set(weights.weights) == {F(1, 6)}  # w / multiplicity = (1/2)/3


def test_region_of_edgeless_machine():
    machine = TimedAutomaton(2, 1, ("a",), 1, ())
    nfa, weights, witness = region_automaton(machine, WeightAssignment(()))
    assert nfa.n_states == 1 and nfa.edges == ()
    assert witness.state_map == {1: 1}


def test_region_rejects_diagonal_guards():
    machine = TimedAutomaton(
        2, 1, ("a",), 2,
        (TaEdge(1, frozenset(), diag_le(0, 0, 1, 0), "a", 2),
         TaEdge(2, frozenset(), TRUE, "a", 1)),
    )
    with pytest.raises(UnsupportedShapeError):
        region_automaton(machine, assign_weights(machine, F(1, 2)))


def test_region_rescales_rational_constants():
    machine = TimedAutomaton(
        2, 1, ("a",), 1,
        (TaEdge(1, frozenset(), clock_le(0, F(1, 2)), "a", 2),
         TaEdge(2, frozenset(), TRUE, "a", 1)),
    )
    nfa, weights, witness = region_automaton(machine, assign_weights(machine, F(1, 2)))
    assert witness.time_map == 2  # times stretch by the lcm of denominators
    assert validate_machine(nfa).ok


def test_region_reachability_matches_dense_grid_oracle():
    rng = random.Random(9)
    for _ in range(3):
        machine = rand_ta(rng, max_states=3, always_guarded=True)
        weights = assign_weights(machine, F(1, 4))
        nfa, _, witness = region_automaton(machine, weights)
        region_reach = {witness.state_map[i] for i in range(1, nfa.n_states + 1)}
        assert region_reach == grid_reachable_states(machine)


def test_region_weights_stay_substochastic():
    rng = random.Random(13)
    for _ in range(3):
        machine = rand_ta(rng, max_states=3, always_guarded=True)
        nfa, weights, _ = region_automaton(machine, assign_weights(machine, F(1, 4)))
        mass: dict[int, Fraction] = {}
        for e, w in zip(nfa.edges, weights.weights):
            mass[e.src] = mass.get(e.src, F(0)) + w
        assert all(total < 1 for total in mass.values())


# -- measure preservation of the liftings ------------------------------------


def test_liftings_preserve_measures_run_by_run():
    nfa = two_state_uniform_nfa()
    weights = assign_weights(nfa, F(1, 4))
    timed, _ = nfa_to_timed(nfa)
    timed_weights = WeightAssignment.create(timed, weights.weights)
    grid = (F(1, 2), F(1), F(3, 2), F(2))
    for depth in (1, 2, 3, 4):
        source = enumerate_runs(nfa, depth)
        image = enumerate_runs(timed, depth, grid)
        skeletons = {}
        for run in image:
            skeletons.setdefault((run.states, run.labels), measure_run(timed, timed_weights, run).exact)
        for run in source:
            assert skeletons[(run.states, run.labels)] == measure_run(nfa, weights, run).exact

    prob, _ = nfa_to_prob(nfa)
    boundary = uniform_boundary_weights(nfa)
    for depth in (1, 2, 3, 4):
        for a, b in zip(enumerate_runs(nfa, depth), enumerate_runs(prob, depth)):
            assert (a.states, a.labels) == (b.states, b.labels)
            assert measure_run(nfa, boundary, a).exact == measure_run(prob, None, b).exact

    machine = fig5_ta()
    lifted, _ = timed_to_probtimed(machine)
    for depth in (1, 2, 3):
        for a, b in zip(enumerate_runs(machine, depth, grid), enumerate_runs(lifted, depth, grid)):
            assert a.states == b.states and a.times == b.times
            assert measure_run(machine, uniform_boundary_weights(machine), a).exact == measure_run(lifted, None, b).exact

    pa = fig7_pa()
    lifted_pa, _ = prob_to_probtimed(pa)
    for depth in (1, 2, 3, 4):
        image = {}
        for run in enumerate_runs(lifted_pa, depth, grid):
            image.setdefault((run.states, run.labels), measure_run(lifted_pa, None, run).exact)
        for a in enumerate_runs(pa, depth):
            assert image[(a.states, a.labels)] == measure_run(pa, None, a).exact

    tapd = fig8_tapd()
    sta, _ = delay_to_stochastic(tapd)
    small_grid = (F(1, 8), F(1, 4), F(3, 8), F(1, 2))
    for depth in (1, 2, 3, 4):
        runs_a = enumerate_runs(tapd, depth, small_grid)
        runs_b = enumerate_runs(sta, depth, small_grid)
        assert [(r.states, r.labels, r.times) for r in runs_a] == [
            (r.states, r.labels, r.times) for r in runs_b
        ]
        for a, b in zip(runs_a, runs_b):
            assert measure_run(tapd, None, a).exact == measure_run(sta, None, b).exact


def test_translations_validate_their_outputs():
    rng = random.Random(21)
    machines = [rand_pa(rng) for _ in range(3)]
    for machine in machines:
        nfa, _ = prob_to_nfa_gcd(machine)
        assert validate_machine(nfa).ok
        lifted, _ = prob_to_probtimed(machine)
        assert validate_machine(lifted).ok


def test_region_budget_is_enforced():
    from quantauto.errors import ResourceError

    machine = fig5_ta()
    with pytest.raises(ResourceError):
        region_automaton(machine, assign_weights(machine, F(1, 5)), budget=3)
