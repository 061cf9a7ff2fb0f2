"""The six machine classes, clock-constraint semantics, and validation.

States are the integers 1..k with a distinguished start state; actions are
non-empty strings.  Clock constraints are expression trees over threshold
and diagonal atoms with negation and disjunction; conjunction and equality
are provided as derived builders.  All machine values are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import StructureError, UnsupportedShapeError, UsageError
from .exactmath import Box, FuncExpr, check_expr

# ---------------------------------------------------------------------------
# clock constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrueCon:
    """The empty (always true) constraint."""


@dataclass(frozen=True)
class Atom:
    """left < right (strict) or left <= right, where each side is an
    optional clock plus a rational offset."""

    left_clock: int | None
    left_off: Fraction
    right_clock: int | None
    right_off: Fraction
    strict: bool


@dataclass(frozen=True)
class Not:
    inner: "Constraint"


@dataclass(frozen=True)
class Or:
    left: "Constraint"
    right: "Constraint"


Constraint = Union[TrueCon, Atom, Not, Or]

TRUE = TrueCon()


def clock_lt(clock: int, bound) -> Atom:
    """c < q"""
    return Atom(clock, Fraction(0), None, Fraction(bound), True)


def clock_le(clock: int, bound) -> Atom:
    """c <= q"""
    return Atom(clock, Fraction(0), None, Fraction(bound), False)


def clock_gt(clock: int, bound) -> Atom:
    """q < c"""
    return Atom(None, Fraction(bound), clock, Fraction(0), True)


def clock_ge(clock: int, bound) -> Atom:
    """q <= c"""
    return Atom(None, Fraction(bound), clock, Fraction(0), False)


def diag_le(c1: int, q1, c2: int, q2) -> Atom:
    """c1 + q1 <= c2 + q2"""
    return Atom(c1, Fraction(q1), c2, Fraction(q2), False)


def diag_lt(c1: int, q1, c2: int, q2) -> Atom:
    """c1 + q1 < c2 + q2"""
    return Atom(c1, Fraction(q1), c2, Fraction(q2), True)


def con_not(c: Constraint) -> Constraint:
    return Not(c)


def con_or(*parts: Constraint) -> Constraint:
    if not parts:
        raise UsageError("con_or needs at least one operand")
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def con_and(*parts: Constraint) -> Constraint:
    """Conjunction, derived: a and b == not(not a or not b)."""
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = Not(Or(Not(out), Not(p)))
    return out


def clock_eq(clock: int, bound) -> Constraint:
    """c == q, derived: not(c < q or q < c)."""
    return Not(Or(clock_lt(clock, bound), clock_gt(clock, bound)))


def eval_constraint(con: Constraint, iota: Sequence[Fraction]) -> bool:
    """Truth value of the constraint under the clock interpretation."""

    def side(clock: int | None, off: Fraction) -> Fraction:
        if clock is None:
            return off
        if not 0 <= clock < len(iota):
            raise StructureError(f"clock index {clock} out of range")
        return Fraction(iota[clock]) + off

    if isinstance(con, TrueCon):
        return True
    if isinstance(con, Atom):
        lhs = side(con.left_clock, con.left_off)
        rhs = side(con.right_clock, con.right_off)
        return lhs < rhs if con.strict else lhs <= rhs
    if isinstance(con, Not):
        return not eval_constraint(con.inner, iota)
    if isinstance(con, Or):
        return eval_constraint(con.left, iota) or eval_constraint(con.right, iota)
    raise StructureError(f"unsupported constraint node {type(con).__name__}")


def constraint_atoms(con: Constraint) -> Iterable[Atom]:
    if isinstance(con, Atom):
        yield con
    elif isinstance(con, Not):
        yield from constraint_atoms(con.inner)
    elif isinstance(con, Or):
        yield from constraint_atoms(con.left)
        yield from constraint_atoms(con.right)


def constraint_clocks(con: Constraint) -> set[int]:
    clocks: set[int] = set()
    for atom in constraint_atoms(con):
        if atom.left_clock is not None:
            clocks.add(atom.left_clock)
        if atom.right_clock is not None:
            clocks.add(atom.right_clock)
    return clocks


def constraint_constants(con: Constraint) -> set[Fraction]:
    """Offsets of atoms that mention at least one clock."""
    consts: set[Fraction] = set()
    for atom in constraint_atoms(con):
        if atom.left_clock is None and atom.right_clock is None:
            continue
        consts.add(atom.left_off)
        consts.add(atom.right_off)
    return consts


def has_diagonal_atom(con: Constraint) -> bool:
    return any(
        a.left_clock is not None and a.right_clock is not None for a in constraint_atoms(con)
    )


# ---------------------------------------------------------------------------
# per-clock interval extraction (for domain normalization)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Satisfying set of a one-clock condition; None bounds are unbounded."""

    lo: Fraction | None
    lo_strict: bool
    hi: Fraction | None
    hi_strict: bool

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, lo_s = self.lo, self.lo_strict
        if other.lo is not None and (lo is None or other.lo > lo or (other.lo == lo and other.lo_strict)):
            lo, lo_s = other.lo, other.lo_strict
        hi, hi_s = self.hi, self.hi_strict
        if other.hi is not None and (hi is None or other.hi < hi or (other.hi == hi and other.hi_strict)):
            hi, hi_s = other.hi, other.hi_strict
        if lo is not None and hi is not None:
            if lo > hi or (lo == hi and (lo_s or hi_s)):
                return None
        return Interval(lo, lo_s, hi, hi_s)

    def union_interval(self, other: "Interval") -> "Interval | None":
        """Union when it is again an interval, else None."""
        a, b = (self, other)
        # order by lower bound (None = -inf)
        def lo_key(iv):
            return (iv.lo is not None, iv.lo if iv.lo is not None else Fraction(0), iv.lo_strict)

        if lo_key(b) < lo_key(a):
            a, b = b, a
        # union is an interval iff a reaches b's start
        if a.hi is None:
            reach = True
        elif b.lo is None:
            reach = True
        elif a.hi > b.lo:
            reach = True
        elif a.hi == b.lo and not (a.hi_strict and b.lo_strict):
            reach = True
        else:
            reach = False
        if not reach:
            return None
        if a.hi is None or b.hi is None:
            hi, hi_s = None, False
        elif a.hi > b.hi or (a.hi == b.hi and not a.hi_strict):
            hi, hi_s = a.hi, a.hi_strict
        else:
            hi, hi_s = b.hi, b.hi_strict
        return Interval(a.lo, a.lo_strict, hi, hi_s)


def _atom_interval(atom: Atom) -> tuple[int, Interval] | None:
    """(clock, interval) for single-clock atoms; None for constant atoms."""
    if atom.left_clock is not None and atom.right_clock is not None:
        raise UnsupportedShapeError("diagonal atom has no per-clock interval")
    if atom.left_clock is not None:
        # c + loff (<|<=) roff  ->  c (<|<=) roff - loff
        bound = atom.right_off - atom.left_off
        return atom.left_clock, Interval(None, False, bound, atom.strict)
    if atom.right_clock is not None:
        bound = atom.left_off - atom.right_off
        return atom.right_clock, Interval(bound, atom.strict, None, False)
    return None


def per_clock_intervals(con: Constraint, n_clocks: int) -> dict[int, Interval]:
    """Decompose a constraint into one satisfying interval per clock.

    Only conjunction-equivalent interval shapes are supported; diagonal
    atoms, non-interval disjunctions, and unsatisfiable constraints raise
    UnsupportedShapeError.
    """

    def negate_atom(atom: Atom) -> Atom:
        # not(L < R) == R <= L ; not(L <= R) == R < L
        return Atom(atom.right_clock, atom.right_off, atom.left_clock, atom.left_off, not atom.strict)

    def walk(node: Constraint, negated: bool):
        # returns ("const", bool) or ("map", {clock: Interval})
        if isinstance(node, TrueCon):
            return ("const", not negated)
        if isinstance(node, Atom):
            atom = negate_atom(node) if negated else node
            got = _atom_interval(atom)
            if got is None:
                truth = eval_constraint(atom, [Fraction(0)] * n_clocks)
                return ("const", truth)
            return ("map", {got[0]: got[1]})
        if isinstance(node, Not):
            return walk(node.inner, not negated)
        if isinstance(node, Or):
            l = walk(node.left, negated)
            r = walk(node.right, negated)
            if not negated:
                return _combine_or(l, r)
            return _combine_and(l, r)
        raise StructureError(f"unsupported constraint node {type(node).__name__}")

    def _combine_and(l, r):
        if l[0] == "const":
            return r if l[1] else ("const", False)
        if r[0] == "const":
            return l if r[1] else ("const", False)
        merged = dict(l[1])
        for clock, iv in r[1].items():
            if clock in merged:
                joint = merged[clock].intersect(iv)
                if joint is None:
                    return ("const", False)
                merged[clock] = joint
            else:
                merged[clock] = iv
        return ("map", merged)

    def _combine_or(l, r):
        if l[0] == "const":
            return ("const", True) if l[1] else r
        if r[0] == "const":
            return ("const", True) if r[1] else l
        lm, rm = l[1], r[1]
        if len(lm) == 1 and len(rm) == 1 and set(lm) == set(rm):
            clock = next(iter(lm))
            joined = lm[clock].union_interval(rm[clock])
            if joined is not None:
                return ("map", {clock: joined})
        raise UnsupportedShapeError("disjunction does not describe per-clock intervals")

    result = walk(con, False)
    if result[0] == "const":
        if result[1]:
            return {}
        raise UnsupportedShapeError("constraint is unsatisfiable")
    return result[1]


# ---------------------------------------------------------------------------
# machines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NfaEdge:
    src: int
    label: str
    dst: int


@dataclass(frozen=True)
class TaEdge:
    src: int
    reset: frozenset[int]
    guard: Constraint
    label: str
    dst: int


@dataclass(frozen=True)
class PaEdge:
    src: int
    dst: int
    prob: Fraction
    label: str


@dataclass(frozen=True)
class PtaEdge:
    src: int
    dst: int
    prob: Fraction
    label: str
    guard: Constraint
    reset: frozenset[int]


@dataclass(frozen=True)
class DensityEdge:
    """TAPD/STA edge: domain box, transition function, optional truncation
    degree (TAPD only)."""

    src: int
    dst: int
    dom: Box
    func: FuncExpr
    label: str
    degree: int | None = None


@dataclass(frozen=True)
class Nfa:
    n_states: int
    start: int
    actions: tuple[str, ...]
    edges: tuple[NfaEdge, ...]


@dataclass(frozen=True)
class TimedAutomaton:
    n_states: int
    start: int
    actions: tuple[str, ...]
    n_clocks: int
    edges: tuple[TaEdge, ...]


@dataclass(frozen=True)
class ProbAutomaton:
    n_states: int
    start: int
    actions: tuple[str, ...]
    edges: tuple[PaEdge, ...]


@dataclass(frozen=True)
class ProbTimedAutomaton:
    n_states: int
    start: int
    actions: tuple[str, ...]
    n_clocks: int
    edges: tuple[PtaEdge, ...]


@dataclass(frozen=True)
class PolyDelayTA:
    n_states: int
    start: int
    actions: tuple[str, ...]
    n_clocks: int
    edges: tuple[DensityEdge, ...]


@dataclass(frozen=True)
class StochasticTA:
    n_states: int
    start: int
    actions: tuple[str, ...]
    n_clocks: int
    edges: tuple[DensityEdge, ...]


Machine = Union[Nfa, TimedAutomaton, ProbAutomaton, ProbTimedAutomaton, PolyDelayTA, StochasticTA]

_TAGS = {
    Nfa: "nfa",
    TimedAutomaton: "ta",
    ProbAutomaton: "pa",
    ProbTimedAutomaton: "pta",
    PolyDelayTA: "tapd",
    StochasticTA: "sta",
}

TIMED_TAGS = {"ta", "pta", "tapd", "sta"}
PROB_TAGS = {"pa", "pta"}


def model_tag(machine: Machine) -> str:
    try:
        return _TAGS[type(machine)]
    except KeyError:
        raise StructureError(f"not a machine: {type(machine).__name__}") from None


def is_timed(machine: Machine) -> bool:
    return model_tag(machine) in TIMED_TAGS


def n_clocks(machine: Machine) -> int:
    return getattr(machine, "n_clocks", 0)


def outgoing(machine: Machine, state: int) -> list[tuple[int, object]]:
    return [(i, e) for i, e in enumerate(machine.edges) if e.src == state]


def edge_reset(machine: Machine, edge) -> frozenset[int]:
    """Reset set of an edge.  TAPD/STA encode resets as a zero lower
    domain bound."""
    tag = model_tag(machine)
    if tag in ("ta", "pta"):
        return edge.reset
    if tag in ("tapd", "sta"):
        return frozenset(r for r, (lo, _) in enumerate(edge.dom.intervals) if lo == 0)
    return frozenset()


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str]

    def __bool__(self) -> bool:
        return self.ok


def _check_triple(machine: Machine, out: list[str]) -> None:
    if machine.n_states < 1:
        out.append("state set is empty")
    if not 1 <= machine.start <= machine.n_states:
        out.append(f"start state {machine.start} not in 1..{machine.n_states}")
    if not machine.actions:
        out.append("action set is empty")
    for action in machine.actions:
        if not isinstance(action, str) or not action:
            out.append(f"action {action!r} is not a non-empty string")
    if len(set(machine.actions)) != len(machine.actions):
        out.append("duplicate actions")


def _check_edge_endpoints(machine: Machine, out: list[str]) -> None:
    for i, e in enumerate(machine.edges):
        if not 1 <= e.src <= machine.n_states or not 1 <= e.dst <= machine.n_states:
            out.append(f"edge {i}: endpoint out of range")
        if e.label not in machine.actions:
            out.append(f"edge {i}: label {e.label!r} not in the action set")


def _check_guard(machine: Machine, guard: Constraint, where: str, out: list[str]) -> None:
    m = machine.n_clocks
    for atom in constraint_atoms(guard):
        for clock in (atom.left_clock, atom.right_clock):
            if clock is not None and not 0 <= clock < m:
                out.append(f"{where}: clock index {clock} out of range (m={m})")


def _check_reset(machine: Machine, reset: frozenset[int], where: str, out: list[str]) -> None:
    for clock in reset:
        if not 0 <= clock < machine.n_clocks:
            out.append(f"{where}: reset clock index {clock} out of range")


def _check_row_distributions(machine: Machine, out: list[str]) -> None:
    # distr is assigned to state pairs; repeated pairs must agree, and the
    # outgoing mass per state with successors must be exactly 1
    pair_prob: dict[tuple[int, int], Fraction] = {}
    seen: set[tuple[int, int, str]] = set()
    for i, e in enumerate(machine.edges):
        if not 0 < e.prob <= 1:
            out.append(f"edge {i}: probability {e.prob} not in (0, 1]")
        if (e.src, e.dst, e.label) in seen:
            out.append(f"edge {i}: duplicate transition {(e.src, e.label, e.dst)}")
        seen.add((e.src, e.dst, e.label))
        key = (e.src, e.dst)
        if key in pair_prob and pair_prob[key] != e.prob:
            out.append(f"edges on state pair {key} carry different probabilities")
        pair_prob[key] = e.prob
    for s in range(1, machine.n_states + 1):
        mass = sum((p for (src, _), p in pair_prob.items() if src == s), Fraction(0))
        if any(src == s for (src, _) in pair_prob) and mass != 1:
            out.append(f"state {s}: outgoing probabilities sum to {mass}, not 1")


def _check_density_edges(machine: Machine, out: list[str], need_degree: bool) -> None:
    m = machine.n_clocks
    for i, e in enumerate(machine.edges):
        if e.dom.nvars != m:
            out.append(f"edge {i}: domain has {e.dom.nvars} intervals, machine has {m} clocks")
            continue
        for v in e.dom.domain_violations():
            out.append(f"edge {i}: {v}")
        for problem in check_expr(e.func, m):
            out.append(f"edge {i}: {problem}")
        if need_degree:
            if e.degree is None or e.degree < 0:
                out.append(f"edge {i}: truncation degree must be a natural number")
        elif e.degree is not None:
            out.append(f"edge {i}: stochastic edges carry no truncation degree")


def validate_machine(machine: Machine) -> ValidationReport:
    """Definition-level validation; violations are data, not exceptions."""
    out: list[str] = []
    tag = model_tag(machine)
    _check_triple(machine, out)
    _check_edge_endpoints(machine, out)
    if tag == "nfa":
        if len(set(machine.edges)) != len(machine.edges):
            out.append("duplicate transitions")
    elif tag == "ta":
        for i, e in enumerate(machine.edges):
            _check_guard(machine, e.guard, f"edge {i}", out)
            _check_reset(machine, e.reset, f"edge {i}", out)
    elif tag == "pa":
        _check_row_distributions(machine, out)
    elif tag == "pta":
        _check_row_distributions(machine, out)
        for i, e in enumerate(machine.edges):
            _check_guard(machine, e.guard, f"edge {i}", out)
            _check_reset(machine, e.reset, f"edge {i}", out)
    elif tag == "tapd":
        _check_density_edges(machine, out, need_degree=True)
    elif tag == "sta":
        _check_density_edges(machine, out, need_degree=False)
    return ValidationReport(not out, out)


# ---------------------------------------------------------------------------
# clock ceiling and domain normalization
# ---------------------------------------------------------------------------


def clock_ceiling(machine: Machine) -> Fraction:
    """Smallest ceiling 1 + (max constraint constant), floored at 1.

    Above the ceiling every constraint is insensitive to the exact clock
    value, which is all downstream constructions need.
    """
    tag = model_tag(machine)
    if tag not in ("ta", "pta"):
        raise UsageError("clock ceiling applies to guarded machines (ta, pta)")
    top = Fraction(0)
    for e in machine.edges:
        for c in constraint_constants(e.guard):
            if c > top:
                top = c
    return top + 1


def normalize_domains(machine: ProbTimedAutomaton) -> list[Box]:
    """Per-edge unit-cube domains for the guarded-to-density construction.

    Each clock gets [min satisfying value, max satisfying value] of the
    edge guard divided by the clock ceiling and clipped to [0, 1]; reset
    clocks get lower bound 0 and unconstrained clocks the full [0, 1].
    """
    if model_tag(machine) != "pta":
        raise UsageError("normalize_domains expects a probabilistic timed automaton")
    ceiling = clock_ceiling(machine)
    m = machine.n_clocks
    boxes: list[Box] = []
    for i, e in enumerate(machine.edges):
        try:
            ivals = per_clock_intervals(e.guard, m)
        except UnsupportedShapeError as err:
            raise UnsupportedShapeError(f"edge {i}: {err}") from None
        intervals = []
        for r in range(m):
            iv = ivals.get(r)
            lo = Fraction(0) if iv is None or iv.lo is None else max(Fraction(0), iv.lo)
            hi = ceiling if iv is None or iv.hi is None else min(iv.hi, ceiling)
            if r in e.reset:
                lo = Fraction(0)
            lo, hi = lo / ceiling, hi / ceiling
            intervals.append((min(lo, Fraction(1)), min(hi, Fraction(1))))
        boxes.append(Box(intervals))
    return boxes


# ---------------------------------------------------------------------------
# weight assignments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightAssignment:
    """Edge weights for non-probabilistic machines, indexed like edges."""

    weights: tuple[Fraction, ...]

    @staticmethod
    def violations(
        machine: Machine,
        weights: Sequence[Fraction],
        strict: bool = True,
        same_label: bool = True,
    ) -> list[str]:
        """Check the weighting conditions.

        strict mode demands weights in (0,1) and per-state sums strictly
        below 1 at states with successors; the relaxed mode allows the
        boundary (0,1] / sum == 1 used by the gcd-splitting checks.
        """
        out: list[str] = []
        if model_tag(machine) not in ("nfa", "ta"):
            out.append("weight assignments apply to nfa/ta machines only")
            return out
        if len(weights) != len(machine.edges):
            out.append(f"{len(weights)} weights for {len(machine.edges)} edges")
            return out
        for i, w in enumerate(weights):
            if strict and not 0 < w < 1:
                out.append(f"edge {i}: weight {w} not in (0, 1)")
            if not strict and not 0 < w <= 1:
                out.append(f"edge {i}: weight {w} not in (0, 1]")
        by_state: dict[int, Fraction] = {}
        groups: dict[tuple[int, str], set[Fraction]] = {}
        for e, w in zip(machine.edges, weights):
            by_state[e.src] = by_state.get(e.src, Fraction(0)) + w
            groups.setdefault((e.src, e.label), set()).add(w)
        if same_label:
            for (s, label), ws in groups.items():
                if len(ws) > 1:
                    out.append(f"state {s}: co-labeled edges ({label}) carry unequal weights")
        for s, mass in by_state.items():
            if strict and mass >= 1:
                out.append(f"state {s}: outgoing weights sum to {mass}, not < 1")
            if not strict and mass > 1:
                out.append(f"state {s}: outgoing weights sum to {mass}, above 1")
        return out

    @classmethod
    def create(
        cls,
        machine: Machine,
        weights: Sequence[Fraction],
        strict: bool = True,
        same_label: bool = True,
    ) -> "WeightAssignment":
        problems = cls.violations(machine, weights, strict=strict, same_label=same_label)
        if problems:
            raise UsageError("invalid weight assignment: " + "; ".join(problems))
        return cls(tuple(Fraction(w) for w in weights))

    def weight_of(self, edge_id: int) -> Fraction:
        return self.weights[edge_id]
