"""Machine definitions, constraint semantics, ceilings, and weightings."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from quantauto.errors import UnsupportedShapeError, UsageError
from quantauto.exactmath import Box, const
from quantauto.fixtures import fig1_pa, fig5_ta
from quantauto.machines import (
    Atom,
    DensityEdge,
    Nfa,
    NfaEdge,
    Not,
    Or,
    PaEdge,
    PolyDelayTA,
    ProbAutomaton,
    ProbTimedAutomaton,
    PtaEdge,
    TaEdge,
    TimedAutomaton,
    TRUE,
    WeightAssignment,
    clock_ceiling,
    clock_eq,
    clock_ge,
    clock_le,
    clock_lt,
    con_and,
    constraint_constants,
    diag_le,
    eval_constraint,
    normalize_domains,
    per_clock_intervals,
    validate_machine,
)

F = Fraction


# -- constraint evaluation ---------------------------------------------------


def test_eval_threshold_atom():
    assert eval_constraint(clock_lt(0, 2), (F(1),)) is True
    assert eval_constraint(clock_lt(0, 2), (F(2),)) is False


def test_eval_empty_constraint():
    for iota in ((), (F(0),), (F(7), F(3))):
        assert eval_constraint(TRUE, iota) is True


def test_eval_diagonal_atom():
    # 3 + c1 <= 1 + c2 at (0, 2): 3 <= 3
    atom = diag_le(0, 3, 1, 1)
    assert eval_constraint(atom, (F(0), F(2))) is True
    assert eval_constraint(atom, (F(0), F(1))) is False


def rand_con(rng, m, depth=2):
    if depth == 0 or rng.random() < 0.4:
        kind = rng.randrange(3)
        clock = rng.randrange(m)
        bound = F(rng.randint(0, 4), rng.randint(1, 2))
        return (clock_lt, clock_le, clock_ge)[kind](clock, bound)
    if rng.random() < 0.5:
        return Not(rand_con(rng, m, depth - 1))
    return Or(rand_con(rng, m, depth - 1), rand_con(rng, m, depth - 1))


def test_negation_involution_property():
    rng = random.Random(5)
    for _ in range(200):
        m = rng.randint(1, 3)
        con = rand_con(rng, m)
        iota = tuple(F(rng.randint(0, 8), 2) for _ in range(m))
        assert eval_constraint(Not(con), iota) == (not eval_constraint(con, iota))
        assert eval_constraint(Not(Not(con)), iota) == eval_constraint(con, iota)


def test_derived_equality_constraint():
    eq = clock_eq(0, 2)
    assert eval_constraint(eq, (F(2),))
    assert not eval_constraint(eq, (F(3),))
    assert not eval_constraint(eq, (F(199, 100),))


# -- validation --------------------------------------------------------------


def test_validate_figure_pa_passes():
    report = validate_machine(fig1_pa())
    assert report.ok and not report.violations


def test_validate_reports_row_deficit():
    edges = (PaEdge(1, 1, F(9, 10), "a"),)
    report = validate_machine(ProbAutomaton(1, 1, ("a",), edges))
    assert not report.ok
    assert any("state 1" in v and "9/10" in v for v in report.violations)


def test_validate_rejects_degenerate_domain():
    edge = DensityEdge(1, 1, Box([(F(1, 2), F(1, 2))]), const(1), "a", 1)
    report = validate_machine(PolyDelayTA(1, 1, ("a",), 1, (edge,)))
    assert not report.ok
    assert any("0 <= lo < hi <= 1" in v for v in report.violations)


def test_validate_is_pure_and_idempotent():
    machine = fig1_pa()
    first = validate_machine(machine)
    second = validate_machine(machine)
    assert first.ok == second.ok and first.violations == second.violations


def test_validate_checks_guard_clock_range():
    edges = (TaEdge(1, frozenset(), clock_lt(3, 1), "a", 1),)
    report = validate_machine(TimedAutomaton(1, 1, ("a",), 1, edges))
    assert not report.ok


# -- clock ceiling -----------------------------------------------------------


def test_clock_ceiling_on_figure_machine():
    machine = fig5_ta()
    # oracle: brute-force maximum over the constraint atoms, plus one
    top = F(0)
    for e in machine.edges:
        for c in constraint_constants(e.guard):
            top = max(top, c)
    assert top == 4
    assert clock_ceiling(machine) == top + 1 == 5


def test_clock_ceiling_without_constraints():
    machine = TimedAutomaton(1, 1, ("a",), 1, (TaEdge(1, frozenset(), TRUE, "a", 1),))
    assert clock_ceiling(machine) == 1


def test_clock_ceiling_single_atom():
    machine = TimedAutomaton(1, 1, ("a",), 1, (TaEdge(1, frozenset(), clock_le(0, 3), "a", 1),))
    assert clock_ceiling(machine) == 4


# -- interval extraction and domain normalization ----------------------------


def test_per_clock_intervals_equality_guard():
    got = per_clock_intervals(clock_eq(0, 2), 1)
    assert got[0].lo == got[0].hi == 2


def test_per_clock_intervals_rejects_split_disjunction():
    con = Or(clock_lt(0, 1), Atom(None, F(3), 0, F(0), True))  # c < 1 or 3 < c
    with pytest.raises(UnsupportedShapeError):
        per_clock_intervals(con, 1)


def test_per_clock_intervals_rejects_diagonals():
    with pytest.raises(UnsupportedShapeError):
        per_clock_intervals(diag_le(0, 0, 1, 0), 2)


def _pta(n_clocks, *edges):
    return ProbTimedAutomaton(2, 1, ("a", "b"), n_clocks, tuple(edges))


def test_normalize_domains_guard_upper_bound():
    # ceiling pinned to 5 by a sibling constant 4
    machine = _pta(
        1,
        PtaEdge(1, 2, F(1), "a", clock_le(0, 2), frozenset()),
        PtaEdge(2, 1, F(1), "b", clock_le(0, 4), frozenset()),
    )
    assert clock_ceiling(machine) == 5
    boxes = normalize_domains(machine)
    assert boxes[0].intervals == ((F(0), F(2, 5)),)


def test_normalize_domains_reset_and_unconstrained():
    machine = _pta(1, PtaEdge(1, 2, F(1), "a", TRUE, frozenset({0})),
                   PtaEdge(2, 1, F(1), "b", TRUE, frozenset()))
    boxes = normalize_domains(machine)
    assert boxes[0].intervals == ((F(0), F(1)),)


def test_normalize_domains_two_sided_guard():
    machine = _pta(
        1,
        PtaEdge(1, 2, F(1), "a", con_and(clock_ge(0, 1), clock_le(0, 3)), frozenset()),
        PtaEdge(2, 1, F(1), "b", clock_le(0, 3), frozenset()),
    )
    assert clock_ceiling(machine) == 4
    assert normalize_domains(machine)[0].intervals == ((F(1, 4), F(3, 4)),)


def test_normalized_points_satisfy_the_guard():
    # sampled interior points of the box, scaled back up by the ceiling,
    # satisfy the original constraint
    rng = random.Random(3)
    machine = _pta(
        2,
        PtaEdge(1, 2, F(1), "a", con_and(clock_ge(0, 1), clock_lt(0, 3), clock_le(1, 2)), frozenset()),
        PtaEdge(2, 1, F(1), "b", clock_le(0, 3), frozenset()),
    )
    ceiling = clock_ceiling(machine)
    box = normalize_domains(machine)[0]
    for _ in range(60):
        point = []
        for lo, hi in box.intervals:
            t = F(rng.randint(1, 63), 64)
            point.append(lo + (hi - lo) * t)
        scaled = tuple(v * ceiling for v in point)
        assert eval_constraint(machine.edges[0].guard, scaled)


def test_normalize_domains_rejects_disjunctive_guard():
    machine = _pta(
        1,
        PtaEdge(1, 2, F(1), "a", Or(clock_lt(0, 1), Atom(None, F(3), 0, F(0), True)), frozenset()),
        PtaEdge(2, 1, F(1), "b", TRUE, frozenset()),
    )
    with pytest.raises(UnsupportedShapeError) as err:
        normalize_domains(machine)
    assert "edge 0" in str(err.value)


# -- weight assignments ------------------------------------------------------


def _nfa_two_edges():
    return Nfa(2, 1, ("a", "b"), (NfaEdge(1, "a", 1), NfaEdge(1, "a", 2)))


def test_weights_reject_unequal_colabeled():
    with pytest.raises(UsageError):
        WeightAssignment.create(_nfa_two_edges(), [F(1, 4), F(1, 3)])


def test_weights_reject_super_stochastic_rows():
    with pytest.raises(UsageError):
        WeightAssignment.create(_nfa_two_edges(), [F(1, 2), F(1, 2)])


def test_weights_boundary_allowed_when_relaxed():
    got = WeightAssignment.create(_nfa_two_edges(), [F(1, 2), F(1, 2)], strict=False)
    assert got.weights == (F(1, 2), F(1, 2))


def test_weights_must_cover_every_edge():
    with pytest.raises(UsageError):
        WeightAssignment.create(_nfa_two_edges(), [F(1, 4)])


def test_eval_constraint_rejects_bad_clock_index():
    from quantauto.errors import StructureError

    with pytest.raises(StructureError):
        eval_constraint(clock_lt(2, 1), (F(0),))


def test_validate_requires_natural_truncation_degree():
    edge = DensityEdge(1, 1, Box([(F(0), F(1, 2))]), const(1), "a", None)
    report = validate_machine(PolyDelayTA(1, 1, ("a",), 1, (edge,)))
    assert not report.ok
    assert any("degree" in v for v in report.violations)
