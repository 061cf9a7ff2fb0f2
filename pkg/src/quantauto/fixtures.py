"""Built-in example machines used by the CLI and the verification suite."""

from __future__ import annotations

from fractions import Fraction

from .exactmath import Box, add, const, exp_of, mul, var
from .machines import (
    DensityEdge,
    Nfa,
    NfaEdge,
    PaEdge,
    PolyDelayTA,
    ProbAutomaton,
    ProbTimedAutomaton,
    PtaEdge,
    StochasticTA,
    TaEdge,
    TimedAutomaton,
    TRUE,
    clock_eq,
    clock_ge,
    clock_le,
    clock_lt,
)

_HALF = Fraction(1, 2)


def fig1_ta() -> TimedAutomaton:
    """Three states, two clocks, one guard per edge."""
    c1, c2 = 0, 1
    edges = (
        TaEdge(1, frozenset(), clock_le(c1, 3), "a", 1),
        TaEdge(1, frozenset({c1}), clock_le(c2, 2), "b", 3),
        TaEdge(1, frozenset({c2}), clock_ge(c1, 3), "c", 2),
        TaEdge(2, frozenset(), clock_le(c1, 3), "d", 2),
        TaEdge(2, frozenset(), clock_le(c1, 3), "e", 3),
        TaEdge(3, frozenset(), clock_le(c1, 3), "f", 1),
        TaEdge(3, frozenset({c2}), clock_le(c2, 3), "g", 2),
    )
    return TimedAutomaton(3, 1, ("a", "b", "c", "d", "e", "f", "g"), 2, edges)


def fig1_pa() -> ProbAutomaton:
    """Three states with rows 0.33/0.33/0.34, 0.5/0.5, 0.5/0.5."""
    edges = (
        PaEdge(1, 1, Fraction(33, 100), "a"),
        PaEdge(1, 3, Fraction(33, 100), "b"),
        PaEdge(1, 2, Fraction(34, 100), "c"),
        PaEdge(2, 2, _HALF, "d"),
        PaEdge(2, 3, _HALF, "e"),
        PaEdge(3, 1, _HALF, "f"),
        PaEdge(3, 2, _HALF, "g"),
    )
    return ProbAutomaton(3, 1, ("a", "b", "c", "d", "e", "f", "g"), edges)


def fig3_pta() -> ProbTimedAutomaton:
    """The probabilistic timed combination of the two machines above."""
    c1, c2 = 0, 1
    edges = (
        PtaEdge(1, 1, Fraction(33, 100), "a", clock_le(c1, 3), frozenset()),
        PtaEdge(1, 3, Fraction(33, 100), "b", clock_le(c2, 2), frozenset({c1})),
        PtaEdge(1, 2, Fraction(34, 100), "c", clock_ge(c1, 3), frozenset({c2})),
        PtaEdge(2, 2, _HALF, "d", TRUE, frozenset()),
        PtaEdge(2, 3, _HALF, "e", clock_le(c1, 3), frozenset()),
        PtaEdge(3, 1, _HALF, "f", TRUE, frozenset()),
        PtaEdge(3, 2, _HALF, "g", clock_le(c2, 3), frozenset()),
    )
    return ProbTimedAutomaton(3, 1, ("a", "b", "c", "d", "e", "f", "g"), 2, edges)


def fig5_ta() -> TimedAutomaton:
    """Two states, one clock: a strict loop below 2, punctual exits at 2
    and 4, reset on the way back."""
    c = 0
    edges = (
        TaEdge(1, frozenset(), clock_lt(c, 2), "g1", 1),
        TaEdge(1, frozenset(), clock_eq(c, 2), "g2", 2),
        TaEdge(2, frozenset(), clock_lt(c, 4), "g3", 2),
        TaEdge(2, frozenset({c}), clock_eq(c, 4), "g4", 1),
    )
    return TimedAutomaton(2, 1, ("g1", "g2", "g3", "g4"), 1, edges)


def fig7_pa() -> ProbAutomaton:
    """Two states with 0.75 self-loops and 0.25 cross edges."""
    edges = (
        PaEdge(1, 1, Fraction(3, 4), "g1"),
        PaEdge(1, 2, Fraction(1, 4), "g2"),
        PaEdge(2, 2, Fraction(3, 4), "g3"),
        PaEdge(2, 1, Fraction(1, 4), "g4"),
    )
    return ProbAutomaton(2, 1, ("g1", "g2", "g3", "g4"), edges)


def two_state_uniform_nfa() -> Nfa:
    """The fig7 shape with probabilities forgotten; weighted uniformly it
    is the untimed side of the 3/4-vs-1/2 separation."""
    edges = (
        NfaEdge(1, "g1", 1),
        NfaEdge(1, "g2", 2),
        NfaEdge(2, "g3", 2),
        NfaEdge(2, "g4", 1),
    )
    return Nfa(2, 1, ("g1", "g2", "g3", "g4"), edges)


def fig8_tapd() -> PolyDelayTA:
    """Three states, one clock; complementary linear densities x + 1/2 and
    1/2 - x on [0, 1/2], truncation degree 1."""
    dom = Box([(Fraction(0), _HALF)])
    up = add(var(0), const(_HALF))
    down = add(const(_HALF), mul(const(-1), var(0)))
    edges = (
        DensityEdge(1, 2, dom, up, "g2", 1),
        DensityEdge(1, 3, dom, down, "g1", 1),
        DensityEdge(2, 1, dom, up, "g2", 1),
        DensityEdge(2, 3, dom, down, "g3", 1),
        DensityEdge(3, 1, dom, up, "g1", 1),
        DensityEdge(3, 2, dom, down, "g3", 1),
    )
    return PolyDelayTA(3, 1, ("g1", "g2", "g3"), 1, edges)


def fig8_sta() -> StochasticTA:
    """The fig8 shape with exponential densities exp(x) on [0, 1]; the
    one-step measure from state 1 to state 2 is e - 1."""
    dom = Box([(Fraction(0), Fraction(1))])
    density = exp_of(var(0))
    edges = (
        DensityEdge(1, 2, dom, density, "g2", None),
        DensityEdge(1, 3, dom, density, "g1", None),
        DensityEdge(2, 1, dom, density, "g2", None),
        DensityEdge(2, 3, dom, density, "g3", None),
        DensityEdge(3, 1, dom, density, "g1", None),
        DensityEdge(3, 2, dom, density, "g3", None),
    )
    return StochasticTA(3, 1, ("g1", "g2", "g3"), 1, edges)


FIXTURES = {
    "fig1_ta": fig1_ta,
    "fig1_pa": fig1_pa,
    "fig3_pta": fig3_pta,
    "fig5_ta": fig5_ta,
    "fig7_pa": fig7_pa,
    "fig8_tapd": fig8_tapd,
    "fig8_sta": fig8_sta,
}
