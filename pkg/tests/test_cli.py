"""File formats and the command-line interface."""

from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest

from quantauto.cli import main
from quantauto.errors import ParseError
from quantauto.fileformat import (
    machine_from_json,
    machine_to_json,
    run_from_obj,
    run_to_obj,
)
from quantauto.fixtures import FIXTURES, fig7_pa, fig8_tapd
from quantauto.runs import enumerate_runs, validate_run

from _gen import rand_nfa, rand_pa, rand_pta, rand_ta, rand_tapd

F = Fraction


# -- round-trips ---------------------------------------------------------------


def test_fixture_round_trips():
    for name, builder in FIXTURES.items():
        machine = builder()
        assert machine_from_json(machine_to_json(machine)) == machine, name


def test_random_machine_round_trips():
    rng = random.Random(31)
    machines = []
    for _ in range(25):
        machines.append(rand_nfa(rng))
        machines.append(rand_ta(rng))
        machines.append(rand_pa(rng))
        machines.append(rand_pta(rng))
    machines.extend(rand_tapd(rng) for _ in range(10))
    assert len(machines) >= 100
    for machine in machines:
        assert machine_from_json(machine_to_json(machine)) == machine


def test_run_round_trip():
    machine = fig8_tapd()
    run = enumerate_runs(machine, 2, (F(1, 8), F(1, 4)))[0]
    rebuilt = run_from_obj(run_to_obj(run), machine)
    assert rebuilt == run
    ok, problems = validate_run(machine, rebuilt)
    assert ok, problems


def test_malformed_rational_is_a_parse_error():
    text = machine_to_json(fig7_pa()).replace('"3/4"', '"1/0"')
    with pytest.raises(ParseError):
        machine_from_json(text)


# -- CLI ---------------------------------------------------------------------


def test_cli_validate_fixture(capsys):
    assert main(["validate", "fixture:fig7_pa"]) == 0
    assert "valid: True" in capsys.readouterr().out


def test_cli_validate_rejects_deficit_row(tmp_path, capsys):
    doc = json.loads(machine_to_json(fig7_pa()))
    doc["edges"][0]["prob"] = "1/2"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", str(path)]) == 3
    out = capsys.readouterr().out
    assert "state 1" in out


def test_cli_parse_error_exit(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"model": "pa",')
    assert main(["validate", str(path)]) == 3


def test_cli_runs(capsys):
    assert main(["runs", "fixture:fig7_pa", "--depth", "1"]) == 0
    out = capsys.readouterr().out
    assert "2 runs at depth 1" in out


def test_cli_runs_depth_zero(capsys):
    assert main(["runs", "fixture:fig7_pa", "--depth", "0"]) == 0
    assert "1 runs" in capsys.readouterr().out


def test_cli_measure_cycle(capsys):
    assert main(["measure", "fixture:fig8_tapd", "--depth", "2", "--grid", "1/8,1/4"]) == 0
    out = capsys.readouterr().out
    assert "H = 1/12" in out


def test_cli_measure_run_file(tmp_path, capsys):
    machine = fig8_tapd()
    run = next(
        r for r in enumerate_runs(machine, 2, (F(1, 8), F(1, 4))) if r.states == (1, 3, 1)
    )
    path = tmp_path / "run.json"
    path.write_text(json.dumps(run_to_obj(run)))
    assert main(["measure", "fixture:fig8_tapd", "--run", str(path)]) == 0
    assert "H = 1/12" in capsys.readouterr().out


def test_cli_measure_needs_exactly_one_source(capsys):
    assert main(["measure", "fixture:fig8_tapd"]) == 2


def test_cli_translate_round_trip(tmp_path, capsys):
    out = tmp_path / "out.json"
    wit = tmp_path / "wit.json"
    code = main(
        ["translate", "fixture:fig7_pa", "--to", "nfa-gcd", "--out", str(out), "--witness-out", str(wit)]
    )
    assert code == 0
    machine = machine_from_json(out.read_text())
    assert machine.n_states == 6
    witness = json.loads(wit.read_text())
    assert witness["kind"] == "embedding"
    assert len(witness["state_map"]) == 6


def test_cli_translate_region(tmp_path):
    out = tmp_path / "region.json"
    code = main(
        ["translate", "fixture:fig5_ta", "--to", "region", "--weights", "1/5", "--out", str(out), "--witness-out", str(tmp_path / "w.json")]
    )
    assert code == 0
    machine = machine_from_json(out.read_text())
    assert machine.n_states == 8


def test_cli_express_self(capsys):
    assert main(["express", "fixture:fig7_pa", "fixture:fig7_pa", "--depth", "2"]) == 0
    assert "verdict yes" in capsys.readouterr().out


def test_cli_express_separation(capsys, tmp_path):
    from quantauto.fileformat import machine_to_json as mj
    from quantauto.fixtures import two_state_uniform_nfa

    path = tmp_path / "nfa.json"
    path.write_text(mj(two_state_uniform_nfa()))
    code = main(
        ["express", "fixture:fig7_pa", str(path), "--depth", "1", "--weights-b", "0"]
    )
    assert code == 1
    assert "verdict no" in capsys.readouterr().out


def test_cli_express_hom(capsys, tmp_path):
    assert (
        main(["express", "fixture:fig7_pa", "fixture:fig7_pa", "--mode", "hom", "--depth", "1"])
        == 0
    )


def test_cli_repro(capsys):
    assert main(["repro"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 5 and "FAIL" not in out


def test_cli_repro_json(capsys):
    assert main(["repro", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True
    assert len(doc["checks"]) == 5


def test_cli_budget_env(monkeypatch, capsys):
    monkeypatch.setenv("QUANTAUTO_BUDGET", "5")
    code = main(["runs", "fixture:fig7_pa", "--depth", "9"])
    assert code == 4


def test_cli_deterministic_output_bytes(capsys):
    main(["measure", "fixture:fig8_tapd", "--depth", "2", "--grid", "1/8,1/4", "--json"])
    first = capsys.readouterr().out
    main(["measure", "fixture:fig8_tapd", "--depth", "2", "--grid", "1/8,1/4", "--json"])
    second = capsys.readouterr().out
    assert first == second


def test_cli_fixtures_listing(capsys, tmp_path):
    assert main(["fixtures"]) == 0
    names = capsys.readouterr().out.split()
    assert names == sorted(FIXTURES)
    assert main(["fixtures", "--export", str(tmp_path)]) == 0
    capsys.readouterr()
    for name in FIXTURES:
        assert (tmp_path / f"{name}.json").exists()
    assert main(["fixtures", "--dump", "fig5_ta"]) == 0
    assert machine_from_json(capsys.readouterr().out).n_states == 2


def test_cli_mc_flag(capsys):
    code = main(
        [
            "measure", "fixture:fig8_tapd", "--depth", "2", "--grid", "1/8,1/4",
            "--mc", "2000", "--seed", "3",
        ]
    )
    assert code == 0
    assert "mc " in capsys.readouterr().out


def test_polynomial_wire_format():
    from quantauto.exactmath import MultiPoly
    from quantauto.fileformat import obj_to_poly, poly_to_obj

    poly = MultiPoly(2, {(0, 0): F(1, 4), (2, 0): F(-1), (1, 1): F(3, 7)})
    obj = poly_to_obj(poly)
    assert obj[0] == {"exponents": [0, 0], "coeff": "1/4"}
    assert obj_to_poly(obj, 2) == poly


def test_trace_wire_format():
    from quantauto.fileformat import trace_to_obj
    from quantauto.runs import trace_of

    machine = fig8_tapd()
    run = enumerate_runs(machine, 2, (F(1, 8), F(1, 4)))[0]
    doc = trace_to_obj(trace_of(run))
    assert all(step["config"] == "#" for step in doc["steps"])
    assert [s.get("action") for s in doc["steps"][:-1]] == list(run.labels)
    assert [s.get("time") for s in doc["steps"][:-1]] == ["1/8", "1/4"]


def test_guard_and_sugar_parses():
    from quantauto.fileformat import obj_to_guard
    from quantauto.machines import eval_constraint

    guard = obj_to_guard(["and", ["le", "1", "x1"], ["le", "x1", "3"]], 1)
    assert eval_constraint(guard, (F(2),))
    assert not eval_constraint(guard, (F(4),))
    assert not eval_constraint(guard, (F(1, 2),))


def test_cli_express_timed_machines(capsys):
    code = main(
        [
            "express", "fixture:fig5_ta", "fixture:fig5_ta",
            "--depth", "2", "--grid", "1/2,1,3/2,2",
            "--weights-a", "1/5", "--weights-b", "1/5",
        ]
    )
    assert code == 0
    assert "verdict yes" in capsys.readouterr().out


def test_exported_fixture_files_match_the_builders():
    from pathlib import Path

    root = Path(__file__).resolve().parent.parent / "fixtures"
    for name, builder in FIXTURES.items():
        on_disk = machine_from_json((root / f"{name}.json").read_text())
        assert on_disk == builder(), name
