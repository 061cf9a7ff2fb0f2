"""Run measures, collection measures, weightings, and a Monte-Carlo oracle.

Weighted models (nfa/ta) multiply edge weights; probabilistic models
(pa/pta) multiply edge probabilities; density models (tapd/sta) integrate
the product of their per-step transition functions over the intersection
of the step domains, sharing one clock vector across steps.  A per-step
product variant is available behind a flag for experimentation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import StructureError, UsageError
from .exactmath import Box, MeasureValue, MultiPoly, integrate_box, mul as expr_mul, taylor
from .exactmath.funcexpr import compile_mpf, compile_numpy, contains_exp, to_multipoly
from .exactmath.quadrature import DEFAULT_MAX_EVALS, quad_callable
from .machines import Machine, WeightAssignment, model_tag, outgoing
from .runs import Run, prefix_violation

DEFAULT_TOL = Fraction(1, 10**12)


# ---------------------------------------------------------------------------
# weight assignment
# ---------------------------------------------------------------------------


def assign_weights(machine: Machine, slack: Fraction) -> WeightAssignment:
    """Deterministic sub-stochastic weighting: every outgoing edge of a
    state gets an equal share of 1 - slack.  Equal shares make co-labeled
    edges trivially equal-weight."""
    slack = Fraction(slack)
    if not 0 < slack < 1:
        raise UsageError("slack must lie strictly between 0 and 1")
    if model_tag(machine) not in ("nfa", "ta"):
        raise UsageError("weights apply to nfa/ta machines")
    degree = {s: 0 for s in range(1, machine.n_states + 1)}
    for e in machine.edges:
        degree[e.src] += 1
    weights = [Fraction(1 - slack, degree[e.src]) for e in machine.edges]
    return WeightAssignment.create(machine, weights, strict=True)


def uniform_boundary_weights(machine: Machine) -> WeightAssignment:
    """Boundary weighting w(e) = 1/outdegree; per-state sums reach 1.

    Used when matching the uniform probabilistic liftings exactly; it is
    constructed in relaxed mode since it is not strictly sub-stochastic.
    """
    if model_tag(machine) not in ("nfa", "ta"):
        raise UsageError("weights apply to nfa/ta machines")
    degree = {s: 0 for s in range(1, machine.n_states + 1)}
    for e in machine.edges:
        degree[e.src] += 1
    weights = [Fraction(1, degree[e.src]) for e in machine.edges]
    return WeightAssignment.create(machine, weights, strict=False)


# ---------------------------------------------------------------------------
# normalized transitions for density machines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizedHandle:
    """Pointwise |T_j| / sum_k |T_k| over the source state's edge family,
    for families that are not an exact stochastic family."""

    numerator: MultiPoly
    family: tuple[MultiPoly, ...]

    def evaluate_mpf(self, point) -> "mpmath.mpf":
        num = abs(_poly_mpf(self.numerator, point))
        den = mpmath.mpf(0)
        for p in self.family:
            den += abs(_poly_mpf(p, point))
        return num / den

    def evaluate_numpy(self, pts):
        import numpy as np

        num = np.abs(_poly_numpy(self.numerator, pts))
        den = np.zeros(pts.shape[0])
        for p in self.family:
            den += np.abs(_poly_numpy(p, pts))
        return num / den


def _poly_mpf(p: MultiPoly, point) -> "mpmath.mpf":
    total = mpmath.mpf(0)
    for expo, coeff in p.terms.items():
        term = mpmath.mpf(coeff.numerator) / coeff.denominator
        for x, e in zip(point, expo):
            if e:
                term *= mpmath.mpf(x) ** e
        total += term
    return total


def _poly_numpy(p: MultiPoly, pts):
    import numpy as np

    total = np.zeros(pts.shape[0])
    for expo, coeff in p.terms.items():
        term = np.full(pts.shape[0], float(coeff))
        for r, e in enumerate(expo):
            if e:
                term = term * pts[:, r] ** e
        total += term
    return total


def _proportional_constant(num: MultiPoly, den: MultiPoly) -> Fraction | None:
    """c with num == c * den, if one exists."""
    if den.is_zero():
        return None
    if num.is_zero():
        return Fraction(0)
    expo, coeff = next(iter(den.terms.items()))
    c = num.coefficient(expo) / coeff
    return c if den * c == num else None


def normalized_transition(machine: Machine, edge_id: int):
    """The probability function P of a polynomial-delay edge.

    Fast path: if the source state's truncation family is nonnegative on
    its domains and sums identically to 1, P is the truncation itself.
    A truncation proportional to the family sum also simplifies exactly.
    Anything else is returned as a pointwise handle for numeric use.
    """
    if model_tag(machine) != "tapd":
        raise UsageError("normalized transitions apply to polynomial-delay machines")
    if not 0 <= edge_id < len(machine.edges):
        raise UsageError(f"edge id {edge_id} out of range")
    edge = machine.edges[edge_id]
    m = machine.n_clocks
    siblings = outgoing(machine, edge.src)
    truncs = {i: taylor(machine.edges[i].func, machine.edges[i].degree, m) for i, _ in siblings}
    if all(t.is_zero() for t in truncs.values()):
        raise StructureError(
            f"state {edge.src}: every sibling truncation is identically zero"
        )
    family_sum = MultiPoly.zero(m)
    for t in truncs.values():
        family_sum = family_sum + t
    nonneg = all(
        truncs[i].evaluate(pt) >= 0
        for i, _ in siblings
        for pt in machine.edges[i].dom.sample_points()
    )
    if nonneg and family_sum == MultiPoly.constant(m, 1):
        return truncs[edge_id]
    c = _proportional_constant(truncs[edge_id], family_sum)
    if c is not None and c >= 0:
        return MultiPoly.constant(m, c)
    return NormalizedHandle(truncs[edge_id], tuple(truncs[i] for i, _ in siblings))


# ---------------------------------------------------------------------------
# run measures
# ---------------------------------------------------------------------------


def _weighted_measure(machine, weights: WeightAssignment | None, run: Run) -> MeasureValue:
    if weights is None:
        raise UsageError("nfa/ta run measures need a weight assignment")
    if len(weights.weights) != len(machine.edges):
        raise UsageError("weight assignment does not match the machine")
    total = Fraction(1)
    for edge_id in run.edge_ids:
        total *= weights.weight_of(edge_id)
    return MeasureValue.from_exact(total)


def _probabilistic_measure(run: Run) -> MeasureValue:
    total = Fraction(1)
    for p in run.probs:
        total *= p
    return MeasureValue.from_exact(total)


def _domain_intersection(machine, run: Run) -> Box | None:
    box = None
    for edge_id in run.edge_ids:
        dom = machine.edges[edge_id].dom
        box = dom if box is None else box.intersect(dom)
        if box is None:
            return None
    return box


def _integral_of_parts(parts, box: Box, tol, max_evals) -> MeasureValue:
    if all(isinstance(p, MultiPoly) for p in parts):
        product = MultiPoly.constant(box.nvars, 1)
        for p in parts:
            product = product * p
        return MeasureValue.from_exact(integrate_box(product, box))

    def fn(point):
        total = mpmath.mpf(1)
        for p in parts:
            if isinstance(p, MultiPoly):
                total *= _poly_mpf(p, point)
            else:
                total *= p.evaluate_mpf(point)
        return total

    value, bound = quad_callable(fn, box, tol, max_evals)
    return MeasureValue.from_approx(value, bound)


def _tapd_measure(machine, run: Run, tol, max_evals, per_step_product: bool) -> MeasureValue:
    parts = [normalized_transition(machine, edge_id) for edge_id in run.edge_ids]
    if per_step_product:
        out = MeasureValue.from_exact(1)
        for edge_id, part in zip(run.edge_ids, parts):
            out = out.times(
                _integral_of_parts([part], machine.edges[edge_id].dom, tol, max_evals)
            )
        return out
    box = _domain_intersection(machine, run)
    if box is None or box.is_degenerate():
        return MeasureValue.from_exact(0)
    return _integral_of_parts(parts, box, tol, max_evals)


def _sta_measure(machine, run: Run, tol, max_evals, per_step_product: bool) -> MeasureValue:
    funcs = [machine.edges[edge_id].func for edge_id in run.edge_ids]

    def integral(fs, box: Box) -> MeasureValue:
        product = expr_mul(*fs)
        if not contains_exp(product):
            poly = to_multipoly(product, box.nvars)
            return MeasureValue.from_exact(integrate_box(poly, box))
        value, bound = quad_callable(compile_mpf(product), box, tol, max_evals)
        return MeasureValue.from_approx(value, bound)

    if per_step_product:
        out = MeasureValue.from_exact(1)
        for edge_id, f in zip(run.edge_ids, funcs):
            out = out.times(integral([f], machine.edges[edge_id].dom))
        return out
    box = _domain_intersection(machine, run)
    if box is None or box.is_degenerate():
        return MeasureValue.from_exact(0)
    return integral(funcs, box)


def measure_run(
    machine: Machine,
    weights: WeightAssignment | None,
    run: Run,
    tol: Fraction = DEFAULT_TOL,
    max_evals: int = DEFAULT_MAX_EVALS,
    per_step_product: bool = False,
) -> MeasureValue:
    """The run measure of a single run.

    Weighted and probabilistic models multiply their per-step values;
    density models integrate the product of per-step transition functions
    over the intersection of the step domains.  The empty run measures 1
    (empty product).
    """
    tag = model_tag(machine)
    if run.model != tag:
        raise UsageError(f"run model {run.model!r} does not match machine {tag!r}")
    if tag in ("nfa", "ta"):
        measure = _weighted_measure(machine, weights, run)
    else:
        if weights is not None:
            raise UsageError(f"{tag} machines take no weight assignment")
        if run.steps == 0:
            return MeasureValue.from_exact(1)
        if tag in ("pa", "pta"):
            measure = _probabilistic_measure(run)
        elif tag == "tapd":
            measure = _tapd_measure(machine, run, tol, max_evals, per_step_product)
        else:
            measure = _sta_measure(machine, run, tol, max_evals, per_step_product)
    return measure


def measure_runset(
    machine: Machine,
    weights: WeightAssignment | None,
    runs: Sequence[Run],
    tol: Fraction = DEFAULT_TOL,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> MeasureValue:
    """Sum of run measures over a prefix-free collection.

    The boundary value 1 (complete level cuts of row-stochastic machines)
    is reported with a warning rather than rejected.
    """
    bad = prefix_violation(runs)
    if bad is not None:
        raise UsageError(f"run collection is not prefix-free: run {bad[0]} precedes run {bad[1]}")
    total = MeasureValue.from_exact(0)
    for run in runs:
        total = total.plus(measure_run(machine, weights, run, tol=tol, max_evals=max_evals))
    if total.is_exact and total.exact >= 1:
        warnings.warn(
            f"collection measure {total.exact} reached the boundary 1",
            stacklevel=2,
        )
    return total


def max_prefix_free_measure(
    machine: Machine,
    weights: WeightAssignment | None,
    runs: Sequence[Run],
) -> Fraction:
    """Largest collection measure over prefix-free subsets of the given
    runs, one run per edge-path skeleton.

    Runs that differ only in their time stamps carry the same measure and
    the same edge path; the maximization works on the edge-path tree, the
    structure the sub-stochastic bound is about.  Requires exact measures.
    """
    by_path: dict[tuple[int, ...], Fraction] = {}
    children: dict[tuple[int, ...], set[tuple[int, ...]]] = {(): set()}
    for run in runs:
        if run.steps == 0:
            continue
        path = run.edge_ids
        if path not in by_path:
            value = measure_run(machine, weights, run)
            if not value.is_exact:
                raise UsageError("maximization over collections needs exact measures")
            by_path[path] = value.exact
        for i in range(len(path)):
            children.setdefault(path[:i], set()).add(path[: i + 1])
            children.setdefault(path[: i + 1], set())

    def best(path: tuple[int, ...]) -> Fraction:
        below = sum((best(c) for c in sorted(children.get(path, ()))), Fraction(0))
        own = by_path.get(path)
        if own is None:
            return below
        return max(own, below)

    return sum((best(c) for c in sorted(children[()])), Fraction(0))


# ---------------------------------------------------------------------------
# Monte-Carlo oracle
# ---------------------------------------------------------------------------


def mc_estimate(
    machine: Machine, run: Run, samples: int, seed: int = 0
) -> tuple[float, float]:
    """Unbiased Monte-Carlo estimate of a density-run measure.

    Uniform sampling over the domain intersection scaled by its volume;
    reproducible for a fixed seed.  Returns (estimate, standard_error).
    """
    import numpy as np

    tag = model_tag(machine)
    if tag not in ("tapd", "sta"):
        raise UsageError("the Monte-Carlo oracle applies to density machines")
    if samples < 10**3:
        raise UsageError("use at least 1000 samples")
    if run.steps == 0:
        return 1.0, 0.0
    box = _domain_intersection(machine, run)
    if box is None or box.is_degenerate():
        return 0.0, 0.0
    if tag == "tapd":
        parts = [normalized_transition(machine, edge_id) for edge_id in run.edge_ids]
    else:
        parts = [machine.edges[edge_id].func for edge_id in run.edge_ids]
    volume = box.volume()
    if box.nvars == 0:
        onepoint = np.zeros((1, 0))
        total = np.ones(1)
        for p in parts:
            total = total * _part_numpy(p, onepoint)
        return float(total[0]), 0.0
    rng = np.random.default_rng(seed)
    pts = np.column_stack(
        [rng.uniform(float(lo), float(hi), size=samples) for lo, hi in box.intervals]
    )
    values = np.ones(samples)
    for p in parts:
        values = values * _part_numpy(p, pts)
    vol = float(volume)
    estimate = vol * float(values.mean())
    std_error = vol * float(values.std(ddof=1)) / float(samples) ** 0.5
    return estimate, std_error


def _part_numpy(part, pts):
    if isinstance(part, MultiPoly):
        return _poly_numpy(part, pts)
    if isinstance(part, NormalizedHandle):
        return part.evaluate_numpy(pts)
    return compile_numpy(part)(pts)
