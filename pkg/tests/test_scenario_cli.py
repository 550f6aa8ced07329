import json
import math

import numpy as np
import pytest

from eventclock.cli import main
from eventclock.errors import ConfigError, ContractError, UnreadableConfig
from eventclock.exporter import ReportExporter
from eventclock.oracle import compare_fields, oracle_check
from eventclock.scenario import (
    build_finite_dim,
    load_scenario,
    parse_complex,
    parse_scenario,
    run_scenario,
    sweep_scenario,
    with_parameter,
)
from eventclock.schema import ReportDocument, SweepDocument

RABI = {
    "kind": "finite_dim",
    "name": "rabi",
    "clock": {"d": 16, "dt": 0.25},
    "system": {"dimension": 2, "hamiltonian": "x"},
    "initial_state": [1, 0],
    "event": {"projector": {"onto": [[0, 1]]}},
}


def _last_error(capsys) -> dict:
    lines = [line for line in capsys.readouterr().err.splitlines() if line.strip()]
    return json.loads(lines[-1])


def _write(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_parse_complex_forms():
    assert parse_complex([1, 0], 1).tolist() == [1, 0]
    assert parse_complex([[0, 1], [1, 0]], 1).tolist() == [1j, 1]
    pair = parse_complex({"real": [0.6, 0], "imag": [0, 0.8]}, 1)
    assert np.allclose(pair, [0.6, 0.8j])
    with pytest.raises(ValueError):
        parse_complex([[1, 2, 3]], 1)
    with pytest.raises(ValueError):
        parse_complex({"imag": [1]}, 1)


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"clock": {"d": 15, "dt": 0.25}}, "clock.d"),
        ({"clock": {"d": 16, "dt": -1.0}}, "clock.dt"),
        ({"system": {"dimension": 2, "hamiltonian": [[0, 1], [0, 0]]}}, "system.hamiltonian"),
        ({"system": {"dimension": 2, "hamiltonian": "w"}}, "system.hamiltonian"),
        ({"initial_state": [1, 1]}, "initial_state"),
        ({"event": {"projector": [[2, 0], [0, 0]]}}, "event.projector"),
        ({"event": {}}, "event.projector"),
        ({"color": "blue"}, "color"),
        ({"sweep": {"parameter": "N", "values": [1]}}, "sweep.parameter"),
    ],
)
def test_scenario_validation_names_the_field(patch, field):
    with pytest.raises(ConfigError) as info:
        parse_scenario({**RABI, **patch})
    assert info.value.field == field


def test_scenario_tolerances_apply_at_load():
    skewed = {"dimension": 2, "hamiltonian": [[[0, 0], [1, 1e-10]], [[1, 0], [0, 0]]]}
    with pytest.raises(ConfigError) as info:
        parse_scenario({**RABI, "system": skewed})
    assert info.value.field == "system.hamiltonian"

    config = parse_scenario({**RABI, "system": skewed, "tolerances": {"hermitian": 1e-8}})
    history, _ = build_finite_dim(config)
    assert history.Hs.matrix[0, 1] == pytest.approx(1 + 1e-10j)

    drifted = {**RABI, "initial_state": [1 + 1e-10, 0]}
    with pytest.raises(ConfigError) as info:
        parse_scenario(drifted)
    assert info.value.field == "initial_state"
    assert parse_scenario({**drifted, "tolerances": {"norm": 1e-8}}).tolerances.norm == 1e-8


def test_photon_scenarios_need_spectrum():
    with pytest.raises(ConfigError) as info:
        parse_scenario({"kind": "photon_arrival"})
    assert info.value.field == "spectrum"
    with pytest.raises(ConfigError) as info:
        parse_scenario({"kind": "photon_frequency",
                        "spectrum": {"omega0": 8.0, "sigma": 1.0},
                        "event": {"T_total": 10.0}})
    assert info.value.field == "event.omega0"


def test_load_scenario_failures(tmp_path):
    with pytest.raises(UnreadableConfig):
        load_scenario(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(UnreadableConfig):
        load_scenario(bad)
    listing = _write(tmp_path, [1, 2])
    with pytest.raises(UnreadableConfig):
        load_scenario(listing)


def test_rabi_matches_golden(scenarios_dir):
    golden = json.loads((scenarios_dir / "golden" / "rabi_qubit.report.json").read_text())
    config, _ = load_scenario(scenarios_dir / "rabi_qubit.json")
    produced = run_scenario(config).report.to_dict()

    numeric = {k: v for k, v in golden["report"].items() if not isinstance(v, str)}
    assert compare_fields(produced, numeric, golden["tolerance"]) == []
    for name, expected in golden["report"].items():
        if isinstance(expected, str):
            assert produced[name] == expected


def test_rabi_scenario_passes_oracle(scenarios_dir):
    config, _ = load_scenario(scenarios_dir / "rabi_qubit.json")
    history, ev = build_finite_dim(config)
    result = run_scenario(config)
    oracle_check(history, ev, result.report)
    diag = result.diagnostics
    assert diag["constraint_residual"] < 1e-9
    assert diag["energy_equality"]["mean_discrepancy"] < 1e-9
    assert abs(diag["centering"]["time_centered"] - diag["centering"]["t_var"]) < 1e-9


def test_gaussian_photon_scenario(scenarios_dir):
    config, _ = load_scenario(scenarios_dir / "gaussian_photon.json")
    report = run_scenario(config).report
    assert report.product == pytest.approx(0.5, rel=1e-6)

    chirped, _ = load_scenario(scenarios_dir / "chirped_photon.json")
    report = run_scenario(chirped).report
    assert report.t_mean == pytest.approx(3.0, abs=1e-6)
    assert report.product == pytest.approx(math.sqrt(4.25), rel=1e-6)


def test_photon_toy_scenario(scenarios_dir):
    config, _ = load_scenario(scenarios_dir / "photon_toy.json")
    result = run_scenario(config)
    assert not result.report.boundary_warning
    assert result.report.product_conditional >= 0.5 * (1 - 0.02)
    sweep = sweep_scenario(config)
    first, second = sweep.rows
    assert second.p_event * second.value == pytest.approx(first.p_event * first.value, rel=1e-2)


def test_with_parameter():
    config = parse_scenario(RABI)
    finer = with_parameter(config, "d", 64)
    assert finer.clock.d == 64
    assert finer.clock.d * finer.clock.dt == pytest.approx(16 * 0.25)
    longer = with_parameter(config, "T_total", 8.0)
    assert longer.clock.d == 32
    assert longer.clock.dt == 0.25
    with pytest.raises(ContractError):
        with_parameter(config, "sigma", 1.0)


def test_rabi_sweep_flags(scenarios_dir):
    config, _ = load_scenario(scenarios_dir / "rabi_sweep.json")
    result = sweep_scenario(config)
    assert [row.value for row in result.rows] == [64, 128, 256, 512]
    assert result.flags == {
        "margin_improving": True,
        "residual_decreasing": True,
        "commutator_residual_decreasing": True,
        "energy_equality_improving": True,
    }
    parallel = sweep_scenario(config, jobs=3)
    assert [row.t_std for row in parallel.rows] == [row.t_std for row in result.rows]


def test_frequency_sweep(scenarios_dir):
    config, _ = load_scenario(scenarios_dir / "frequency_event.json")
    result = sweep_scenario(config)
    for row in result.rows:
        assert row.t_std == pytest.approx(row.value / math.sqrt(12) * math.sqrt(1 - 1 / 256**2), rel=1e-12)
        assert row.E_std == pytest.approx(0.01 / math.sqrt(12))
    assert result.flags["margin_improving"] is True
    assert result.flags["residual_decreasing"] is None
    assert result.flags["commutator_residual_decreasing"] is None


def test_gaussian_sweep_converges(scenarios_dir):
    config, _ = load_scenario(scenarios_dir / "gaussian_photon.json")
    result = sweep_scenario(config)
    assert result.flags["margin_improving"] is True
    assert abs(result.rows[-1].margin) < 1e-6


def test_sweep_requires_block():
    with pytest.raises(ConfigError):
        sweep_scenario(parse_scenario(RABI))


def test_cli_run_writes_report_and_distribution(tmp_path, scenarios_dir, capsys):
    out = tmp_path / "out"
    code = main(["run", str(scenarios_dir / "rabi_qubit.json"), "--out", str(out)])
    assert code == 0
    paths = json.loads(capsys.readouterr().out)
    document = json.loads((out / "rabi_qubit.report.json").read_text())
    assert paths["report"].endswith("rabi_qubit.report.json")
    ReportDocument.model_validate(document)
    assert document["units"] == "hbar=1"
    assert document["report"]["kind"] == "finite_dim"
    assert len(document["provenance"]["config_sha256"]) == 64

    lines = (out / "rabi_qubit.distribution.csv").read_text().splitlines()
    assert lines[0] == "t,p"
    assert len(lines) == 33


def test_reports_are_deterministic(scenarios_dir):
    config, raw = load_scenario(scenarios_dir / "rabi_qubit.json")
    exporter = ReportExporter(generated_at="2024-01-01T00:00:00+00:00")
    first = exporter.to_json(exporter.report_document(run_scenario(config), raw, config.tolerances))
    second = exporter.to_json(exporter.report_document(run_scenario(config), raw, config.tolerances))
    assert first == second


def test_cli_sweep(tmp_path, scenarios_dir):
    out = tmp_path / "out"
    assert main(["sweep", str(scenarios_dir / "frequency_event.json"), "--out", str(out), "--jobs", "2"]) == 0
    document = json.loads((out / "frequency_event.sweep.json").read_text())
    SweepDocument.model_validate(document)
    assert [row["value"] for row in document["rows"]] == [100, 200, 400, 800]
    table = (out / "frequency_event.sweep.csv").read_text().splitlines()
    assert table[0].startswith("parameter,value,p_event")
    assert len(table) == 5


def test_cli_validation_error(tmp_path, capsys):
    path = _write(tmp_path, {**RABI, "system": {"dimension": 2, "hamiltonian": [[0, 1], [0, 0]]}})
    assert main(["run", str(path), "--out", str(tmp_path)]) == 2
    error = _last_error(capsys)
    assert error["error"] == "validation"
    assert error["field"] == "system.hamiltonian"
    assert error["message"]


def test_cli_event_never_happens(tmp_path, capsys):
    path = _write(tmp_path, {**RABI, "event": {"projector": [[0, 0], [0, 0]]}})
    assert main(["run", str(path), "--out", str(tmp_path)]) == 3
    assert _last_error(capsys)["error"] == "event_never_happens"


def test_cli_unreadable(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.json")]) == 4
    assert _last_error(capsys)["error"] == "unreadable"


def test_cli_resource_cap(tmp_path, capsys):
    path = _write(tmp_path, {**RABI, "tolerances": {"max_joint_dim": 16}})
    assert main(["run", str(path), "--out", str(tmp_path)]) == 6
    assert _last_error(capsys)["error"] == "resource"


def test_cli_oracle_check(scenarios_dir, capsys):
    assert main(["oracle-check", str(scenarios_dir / "rabi_qubit.json")]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "ok"
    assert main(["oracle-check", str(scenarios_dir / "gaussian_photon.json")]) == 2


def test_cli_schema(capsys):
    assert main(["schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert "report" in schema["properties"]


def test_cli_verify(capsys):
    assert main(["verify", "--seed", "3", "--trials", "6", "--d", "256"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["trials"] == 6
    assert summary["violations"] == []
