"""Machine, run, and witness wire formats.

Machines are JSON documents with fields model/states/start/actions/clocks
/edges; rationals are "num/den" strings, transition functions prefix
lists like ["mul", ["add", "x1", "1/2"], "x1"], guards prefix lists over
["lt"|"le", side, side] atoms with ["not", g] and ["or", g, g]; ["and",
...] is accepted on input and desugared.  Clock variables are named
x1..xm.  Runs serialize as {config, action, time} records; traces hide
the config behind "#".
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .errors import ParseError
from .exactmath import (
    Add,
    Box,
    Const,
    Exp,
    FuncExpr,
    Mul,
    MultiPoly,
    Var,
    format_rational,
    parse_rational,
)
from .machines import (
    Atom,
    Constraint,
    DensityEdge,
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
    con_and,
    model_tag,
)
from .runs import Run, Trace
from .translations import Witness

_MODELS = {"nfa", "ta", "pa", "pta", "tapd", "sta"}


def _clock_name(index: int) -> str:
    return f"x{index + 1}"


def _parse_clock(name: Any, n_clocks: int) -> int:
    if not isinstance(name, str) or not name.startswith("x"):
        raise ParseError(f"expected a clock name x1..x{n_clocks}, got {name!r}")
    try:
        index = int(name[1:]) - 1
    except ValueError:
        raise ParseError(f"malformed clock name {name!r}") from None
    if not 0 <= index < n_clocks:
        raise ParseError(f"clock {name} out of range for {n_clocks} clocks")
    return index


# ---------------------------------------------------------------------------
# transition-function expressions
# ---------------------------------------------------------------------------


def func_to_obj(e: FuncExpr):
    if isinstance(e, Const):
        return format_rational(e.value)
    if isinstance(e, Var):
        return _clock_name(e.index)
    if isinstance(e, Add):
        return ["add", func_to_obj(e.left), func_to_obj(e.right)]
    if isinstance(e, Mul):
        return ["mul", func_to_obj(e.left), func_to_obj(e.right)]
    if isinstance(e, Exp):
        return ["exp", func_to_obj(e.arg)]
    raise ParseError(f"unsupported expression node {type(e).__name__}")


def obj_to_func(obj, n_clocks: int) -> FuncExpr:
    if isinstance(obj, (int, str)):
        if isinstance(obj, str) and obj.startswith("x") and obj[1:].isdigit():
            return Var(_parse_clock(obj, n_clocks))
        return Const(parse_rational(obj))
    if not isinstance(obj, list) or not obj:
        raise ParseError(f"malformed expression {obj!r}")
    head, *rest = obj
    if head in ("add", "mul"):
        if len(rest) < 2:
            raise ParseError(f"{head} needs at least two operands")
        out = obj_to_func(rest[0], n_clocks)
        for part in rest[1:]:
            nxt = obj_to_func(part, n_clocks)
            out = Add(out, nxt) if head == "add" else Mul(out, nxt)
        return out
    if head == "exp":
        if len(rest) != 1:
            raise ParseError("exp takes exactly one operand")
        return Exp(obj_to_func(rest[0], n_clocks))
    raise ParseError(f"unknown expression operator {head!r}")


def poly_to_obj(p: MultiPoly) -> list:
    return [
        {"exponents": list(expo), "coeff": format_rational(coeff)}
        for expo, coeff in sorted(p.terms.items())
    ]


def obj_to_poly(obj, nvars: int) -> MultiPoly:
    if not isinstance(obj, list):
        raise ParseError("polynomial must be a list of monomial objects")
    terms = {}
    for item in obj:
        expo = tuple(int(e) for e in item["exponents"])
        terms[expo] = parse_rational(item["coeff"])
    return MultiPoly(nvars, terms)


# ---------------------------------------------------------------------------
# clock constraints
# ---------------------------------------------------------------------------


def _side_to_obj(clock: int | None, off: Fraction):
    if clock is None:
        return format_rational(off)
    if off == 0:
        return _clock_name(clock)
    return ["add", _clock_name(clock), format_rational(off)]


def _obj_to_side(obj, n_clocks: int) -> tuple[int | None, Fraction]:
    if isinstance(obj, str) and obj.startswith("x") and obj[1:].isdigit():
        return _parse_clock(obj, n_clocks), Fraction(0)
    if isinstance(obj, (str, int)):
        return None, parse_rational(obj)
    if isinstance(obj, list) and len(obj) == 3 and obj[0] == "add":
        clock = _parse_clock(obj[1], n_clocks)
        return clock, parse_rational(obj[2])
    raise ParseError(f"malformed atom side {obj!r}")


def guard_to_obj(con: Constraint):
    if isinstance(con, TrueCon):
        return None
    if isinstance(con, Atom):
        op = "lt" if con.strict else "le"
        return [op, _side_to_obj(con.left_clock, con.left_off), _side_to_obj(con.right_clock, con.right_off)]
    if isinstance(con, Not):
        return ["not", guard_to_obj(con.inner)]
    if isinstance(con, Or):
        return ["or", guard_to_obj(con.left), guard_to_obj(con.right)]
    raise ParseError(f"unsupported constraint node {type(con).__name__}")


def obj_to_guard(obj, n_clocks: int) -> Constraint:
    if obj is None:
        return TRUE
    if not isinstance(obj, list) or not obj:
        raise ParseError(f"malformed guard {obj!r}")
    head, *rest = obj
    if head in ("lt", "le"):
        if len(rest) != 2:
            raise ParseError(f"{head} takes two sides")
        lc, lo = _obj_to_side(rest[0], n_clocks)
        rc, ro = _obj_to_side(rest[1], n_clocks)
        if lc is None and rc is None:
            raise ParseError("constraint atom mentions no clock")
        return Atom(lc, lo, rc, ro, head == "lt")
    if head == "not":
        if len(rest) != 1:
            raise ParseError("not takes one operand")
        return Not(obj_to_guard(rest[0], n_clocks))
    if head == "or":
        if len(rest) < 2:
            raise ParseError("or needs at least two operands")
        out = obj_to_guard(rest[0], n_clocks)
        for part in rest[1:]:
            out = Or(out, obj_to_guard(part, n_clocks))
        return out
    if head == "and":
        if len(rest) < 2:
            raise ParseError("and needs at least two operands")
        return con_and(*(obj_to_guard(part, n_clocks) for part in rest))
    raise ParseError(f"unknown guard operator {head!r}")


# ---------------------------------------------------------------------------
# boxes and resets
# ---------------------------------------------------------------------------


def _box_to_obj(box: Box):
    return [[format_rational(lo), format_rational(hi)] for lo, hi in box.intervals]


def _obj_to_box(obj, n_clocks: int) -> Box:
    if not isinstance(obj, list) or len(obj) != n_clocks:
        raise ParseError(f"domain must list one interval per clock ({n_clocks})")
    try:
        return Box([(parse_rational(lo), parse_rational(hi)) for lo, hi in obj])
    except (TypeError, ValueError):
        raise ParseError(f"malformed domain {obj!r}") from None


def _reset_to_obj(reset: frozenset[int]):
    return [_clock_name(r) for r in sorted(reset)]


def _obj_to_reset(obj, n_clocks: int) -> frozenset[int]:
    if obj is None:
        return frozenset()
    if not isinstance(obj, list):
        raise ParseError(f"malformed reset list {obj!r}")
    return frozenset(_parse_clock(name, n_clocks) for name in obj)


# ---------------------------------------------------------------------------
# machines
# ---------------------------------------------------------------------------


def machine_to_dict(machine: Machine) -> dict:
    tag = model_tag(machine)
    doc = {
        "model": tag,
        "states": machine.n_states,
        "start": machine.start,
        "actions": list(machine.actions),
    }
    if tag in ("ta", "pta", "tapd", "sta"):
        doc["clocks"] = machine.n_clocks
    edges = []
    for e in machine.edges:
        if tag == "nfa":
            edges.append({"src": e.src, "label": e.label, "dst": e.dst})
        elif tag == "ta":
            edges.append(
                {
                    "src": e.src,
                    "dst": e.dst,
                    "label": e.label,
                    "guard": guard_to_obj(e.guard),
                    "reset": _reset_to_obj(e.reset),
                }
            )
        elif tag == "pa":
            edges.append(
                {"src": e.src, "dst": e.dst, "label": e.label, "prob": format_rational(e.prob)}
            )
        elif tag == "pta":
            edges.append(
                {
                    "src": e.src,
                    "dst": e.dst,
                    "label": e.label,
                    "prob": format_rational(e.prob),
                    "guard": guard_to_obj(e.guard),
                    "reset": _reset_to_obj(e.reset),
                }
            )
        elif tag == "tapd":
            edges.append(
                {
                    "src": e.src,
                    "dst": e.dst,
                    "label": e.label,
                    "dom": _box_to_obj(e.dom),
                    "f": func_to_obj(e.func),
                    "pi": e.degree,
                }
            )
        else:
            edges.append(
                {
                    "src": e.src,
                    "dst": e.dst,
                    "label": e.label,
                    "dom": _box_to_obj(e.dom),
                    "f": func_to_obj(e.func),
                }
            )
    doc["edges"] = edges
    return doc


def _need(doc: dict, key: str):
    if key not in doc:
        raise ParseError(f"missing field {key!r}")
    return doc[key]


def machine_from_dict(doc: dict) -> Machine:
    if not isinstance(doc, dict):
        raise ParseError("machine document must be an object")
    model = _need(doc, "model")
    if model not in _MODELS:
        raise ParseError(f"unknown model {model!r}")
    n_states = int(_need(doc, "states"))
    start = int(_need(doc, "start"))
    actions = tuple(_need(doc, "actions"))
    n_clocks = int(doc.get("clocks", 0))
    raw_edges = _need(doc, "edges")
    if not isinstance(raw_edges, list):
        raise ParseError("edges must be a list")

    def ints(e):
        return int(_need(e, "src")), int(_need(e, "dst")), str(_need(e, "label"))

    edges: list = []
    for e in raw_edges:
        if model == "nfa":
            src, dst, label = int(_need(e, "src")), int(_need(e, "dst")), str(_need(e, "label"))
            edges.append(NfaEdge(src, label, dst))
        elif model == "ta":
            src, dst, label = ints(e)
            edges.append(
                TaEdge(
                    src,
                    _obj_to_reset(e.get("reset"), n_clocks),
                    obj_to_guard(e.get("guard"), n_clocks),
                    label,
                    dst,
                )
            )
        elif model == "pa":
            src, dst, label = ints(e)
            edges.append(PaEdge(src, dst, parse_rational(_need(e, "prob")), label))
        elif model == "pta":
            src, dst, label = ints(e)
            edges.append(
                PtaEdge(
                    src,
                    dst,
                    parse_rational(_need(e, "prob")),
                    label,
                    obj_to_guard(e.get("guard"), n_clocks),
                    _obj_to_reset(e.get("reset"), n_clocks),
                )
            )
        elif model == "tapd":
            src, dst, label = ints(e)
            edges.append(
                DensityEdge(
                    src,
                    dst,
                    _obj_to_box(_need(e, "dom"), n_clocks),
                    obj_to_func(_need(e, "f"), n_clocks),
                    label,
                    int(_need(e, "pi")),
                )
            )
        else:
            src, dst, label = ints(e)
            edges.append(
                DensityEdge(
                    src,
                    dst,
                    _obj_to_box(_need(e, "dom"), n_clocks),
                    obj_to_func(_need(e, "f"), n_clocks),
                    label,
                    None,
                )
            )
    edges = tuple(edges)
    if model == "nfa":
        return Nfa(n_states, start, actions, edges)
    if model == "ta":
        return TimedAutomaton(n_states, start, actions, n_clocks, edges)
    if model == "pa":
        return ProbAutomaton(n_states, start, actions, edges)
    if model == "pta":
        return ProbTimedAutomaton(n_states, start, actions, n_clocks, edges)
    if model == "tapd":
        return PolyDelayTA(n_states, start, actions, n_clocks, edges)
    return StochasticTA(n_states, start, actions, n_clocks, edges)


def machine_to_json(machine: Machine) -> str:
    return json.dumps(machine_to_dict(machine), indent=2, sort_keys=True) + "\n"


def machine_from_json(text: str) -> Machine:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, line=err.lineno, column=err.colno) from None
    return machine_from_dict(doc)


# ---------------------------------------------------------------------------
# runs, traces, witnesses
# ---------------------------------------------------------------------------


def run_to_obj(run: Run) -> dict:
    records = []
    k = len(run.states)
    for i in range(k):
        config: dict[str, Any] = {"state": run.states[i]}
        if run.valuations is not None:
            config["clocks"] = [format_rational(v) for v in run.valuations[i]]
        if run.resets is not None:
            config["reset"] = _reset_to_obj(run.resets[i])
        if run.probs is not None and i < len(run.probs):
            config["prob"] = format_rational(run.probs[i])
        if run.edge_ids is not None and i < len(run.edge_ids):
            config["edge"] = run.edge_ids[i]
        record = {"config": config}
        if i < k - 1:
            record["action"] = run.labels[i]
            if run.times is not None:
                record["time"] = format_rational(run.times[i])
        records.append(record)
    return {"model": run.model, "steps": records}


def trace_to_obj(trace: Trace) -> dict:
    records = []
    for i in range(trace.n_configs):
        record: dict[str, Any] = {"config": "#"}
        if i < len(trace.labels):
            record["action"] = trace.labels[i]
            if trace.times is not None:
                record["time"] = format_rational(trace.times[i])
        records.append(record)
    return {"model": trace.model, "steps": records}


def run_from_obj(doc: dict, machine: Machine) -> Run:
    """Rebuild a run against its machine; derived fields are recomputed
    and checked by the caller through validate_run."""
    if not isinstance(doc, dict) or "steps" not in doc:
        raise ParseError("run document must carry a steps list")
    model = doc.get("model")
    if model != model_tag(machine):
        raise ParseError(f"run model {model!r} does not match the machine")
    steps = doc["steps"]
    if not steps:
        raise ParseError("run document has no configurations")
    states = []
    labels = []
    times = []
    valuations = []
    resets = []
    probs = []
    edge_ids = []
    timed = model in ("ta", "pta", "tapd", "sta")
    for i, record in enumerate(steps):
        config = _need(record, "config")
        states.append(int(_need(config, "state")))
        if timed:
            valuations.append(tuple(parse_rational(v) for v in config.get("clocks", [])))
        if model in ("ta", "pta"):
            resets.append(_obj_to_reset(config.get("reset"), getattr(machine, "n_clocks", 0)))
        if i < len(steps) - 1:
            labels.append(str(_need(record, "action")))
            if timed:
                times.append(parse_rational(_need(record, "time")))
            if model in ("pa", "pta"):
                probs.append(parse_rational(_need(config, "prob")))
            if "edge" not in config:
                raise ParseError("run steps must name the machine edge taken")
            edge_ids.append(int(config["edge"]))
    return Run(
        model=model,
        states=tuple(states),
        labels=tuple(labels),
        times=tuple(times) if timed else None,
        valuations=tuple(valuations) if timed else None,
        resets=tuple(resets) if model in ("ta", "pta") else None,
        probs=tuple(probs) if model in ("pa", "pta") else None,
        edge_ids=tuple(edge_ids),
    )


def run_from_json(text: str, machine: Machine) -> Run:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, line=err.lineno, column=err.colno) from None
    return run_from_obj(doc, machine)


def witness_to_obj(witness: Witness) -> dict:
    return {
        "state_map": {str(k): v for k, v in sorted(witness.state_map.items())},
        "action_map": dict(sorted(witness.action_map.items())),
        "time_map": None if witness.time_map is None else format_rational(witness.time_map),
        "kind": witness.kind,
    }
