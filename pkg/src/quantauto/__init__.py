"""quantauto: exact-arithmetic quantitative automata toolkit.

Six machine classes (untimed, timed, probabilistic, probabilistic timed,
polynomial-delay, stochastic timed), their run and trace semantics, exact
run and collection measures, constructive translations between the
classes, and bounded-depth isomorphic/homomorphic expressiveness checks.
"""

from .exactmath import (
    Box,
    MeasureValue,
    MultiPoly,
    format_rational,
    integrate_box,
    l1_norm,
    parse_rational,
    poly_mul,
    quad_numeric,
    taylor,
)
from .machines import (
    Machine,
    Nfa,
    PolyDelayTA,
    ProbAutomaton,
    ProbTimedAutomaton,
    StochasticTA,
    TimedAutomaton,
    WeightAssignment,
    clock_ceiling,
    eval_constraint,
    model_tag,
    normalize_domains,
    validate_machine,
)
from .measures import assign_weights, mc_estimate, measure_run, measure_runset
from .runs import Run, Trace, advance_clocks, enumerate_runs, is_prefix, prefix_free, trace_of, validate_run
from .translations import (
    Witness,
    delay_to_stochastic,
    nfa_to_prob,
    nfa_to_timed,
    prob_to_nfa_gcd,
    prob_to_probtimed,
    probtimed_to_delay,
    probtimed_to_timed,
    region_automaton,
    timed_to_probtimed,
)
from .expressiveness import check_machine_iso, find_hom, find_iso, verify_counterexamples

__version__ = "0.1.0"
