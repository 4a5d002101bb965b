import json
import logging
from pathlib import Path

import numpy as np
import pytest

from qflow.core.kernels import TsallisKernel
from qflow.main import main
from qflow.services.diagnostics_service import DiagnosticsService
from qflow.services.simulation_service import SimulationService
from qflow.services.verify_service import VerifyService

MANIFESTS = Path(__file__).parent / "manifests"

DOMINANT_GAME = {
    "name": "dominant",
    "classical_tables": [[[2, 1], [-2, -1]], [[-2, -1], [2, 1]]],
    "zero_sum": True,
    "equilibrium": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]],
}


def error_report(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def write_run(tmp_path, name="run", game=None, **config):
    game_file = tmp_path / "game.json"
    game_file.write_text(json.dumps(game or DOMINANT_GAME))
    manifest = {
        "game_path": "game.json",
        "config": {
            "kernels": "vonneumann",
            "horizon": 5.0,
            "record_stride": 0.5,
            "initial": [
                {"kind": "primal", "matrix": [[0.2, 0], [0, 0.8]]},
                {"kind": "primal", "matrix": [[0.8, 0], [0, 0.2]]},
            ],
            **config,
        },
        "diagnostics": ["regret", "fenchel", "recurrence", "vsprobe", "bloch"],
        "diagnostic_options": {"vs_samples": 20},
        "output_dir": f"out_{name}",
        "seed": 0,
    }
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(manifest))
    return path


def test_simulate_writes_outputs(tmp_path, capsys):
    manifest = write_run(tmp_path)
    assert main(["simulate", str(manifest)]) == 0

    summary = json.loads(capsys.readouterr().out)
    assert sorted(summary["files"]) == ["metadata.json", "trajectory.csv", "trajectory.json"]
    out = tmp_path / "out_run"
    header = (out / "trajectory.csv").read_text().splitlines()[0].split(",")
    assert header == ["t", "p0_eig0", "p0_eig1", "p0_bloch_x", "p0_bloch_y", "p0_bloch_z",
                      "p1_eig0", "p1_eig1", "p1_bloch_x", "p1_bloch_y", "p1_bloch_z"]
    assert len((out / "trajectory.csv").read_text().splitlines()) == 1 + 11

    metadata = json.loads((out / "metadata.json").read_text())
    assert metadata["seed"] == 0
    assert metadata["run_id"] != "startup"
    assert "numpy" in metadata["versions"]


def test_simulate_is_reproducible(tmp_path):
    first = write_run(tmp_path, "first", initial=[{"kind": "random"}, {"kind": "random"}])
    second = write_run(tmp_path, "second", initial=[{"kind": "random"}, {"kind": "random"}])
    assert main(["simulate", str(first)]) == 0
    assert main(["simulate", str(second)]) == 0
    assert (tmp_path / "out_first" / "trajectory.csv").read_bytes() == \
        (tmp_path / "out_second" / "trajectory.csv").read_bytes()


def test_persisted_trajectory_reloads(tmp_path):
    manifest = write_run(tmp_path)
    service = SimulationService(str(manifest))
    run = service.run()
    reloaded = service.load_existing()
    assert np.array_equal(reloaded.times, run.trajectory.times)
    for i in range(2):
        assert np.array_equal(reloaded.states[i], run.trajectory.states[i])
        assert np.array_equal(reloaded.dual_scores[i], run.trajectory.dual_scores[i])


def test_malformed_manifest_names_the_field(tmp_path, capsys):
    manifest = write_run(tmp_path, horizon=-1.0)
    assert main(["simulate", str(manifest)]) == 2
    report = error_report(capsys)
    assert report["error_code"] == "SPEC_VALIDATION"
    assert "config.horizon" in report["message"]
    assert report["exit_code"] == 2


def test_invalid_json_reports_position(tmp_path, capsys):
    manifest = tmp_path / "broken.json"
    manifest.write_text('{"game_path": "game.json",\n "config": }')
    assert main(["simulate", str(manifest)]) == 2
    assert "line 2" in error_report(capsys)["message"]


def test_non_density_initial_state_is_rejected(tmp_path):
    manifest = write_run(tmp_path, initial=[{"kind": "primal", "matrix": [[0.7, 0], [0, 0.7]]}, {"kind": "uniform"}])
    assert main(["simulate", str(manifest)]) == 2


def test_diagnose_writes_reports(tmp_path):
    manifest = write_run(tmp_path)
    assert main(["diagnose", str(manifest)]) == 0
    out = tmp_path / "out_run"
    for name in ["regret", "fenchel", "recurrence", "vsprobe", "bloch", "summary"]:
        assert (out / f"{name}.json").exists()
    assert (out / "diagnostics.csv").exists()

    vsprobe = json.loads((out / "vsprobe.json").read_text())
    assert vsprobe["certified"]
    assert vsprobe["stationarity"]["residual"] <= 1e-8
    fenchel = json.loads((out / "fenchel.json").read_text())
    assert np.all(np.diff(fenchel["series"]) <= 1e-9)
    regret = json.loads((out / "regret.json").read_text())
    assert [p["player"] for p in regret["players"]] == [0, 1]


def test_diagnose_reuses_persisted_trajectory(tmp_path):
    manifest = write_run(tmp_path)
    assert main(["simulate", str(manifest)]) == 0
    before = (tmp_path / "out_run" / "trajectory.json").read_bytes()
    reports = DiagnosticsService(str(manifest)).run()
    assert (tmp_path / "out_run" / "trajectory.json").read_bytes() == before
    assert reports["summary"]["horizon"] == 5.0


def test_diagnose_resimulates_when_manifest_changed(tmp_path):
    manifest = write_run(tmp_path)
    assert main(["simulate", str(manifest)]) == 0
    write_run(tmp_path, horizon=8.0)
    reports = DiagnosticsService(str(manifest)).run()
    assert reports["summary"]["horizon"] == 8.0
    metadata = json.loads((tmp_path / "out_run" / "metadata.json").read_text())
    assert metadata["config"]["horizon"] == 8.0


def test_diagnose_resimulates_when_game_file_changed(tmp_path):
    manifest = write_run(tmp_path)
    assert main(["simulate", str(manifest)]) == 0
    before = (tmp_path / "out_run" / "trajectory.json").read_bytes()
    write_run(tmp_path, game={**DOMINANT_GAME, "classical_tables": [[[3, 1], [-2, -1]], [[-3, -1], [2, 1]]]})
    DiagnosticsService(str(manifest)).run()
    assert (tmp_path / "out_run" / "trajectory.json").read_bytes() != before


def test_fenchel_on_primal_run_is_missing_data(tmp_path, capsys):
    manifest = write_run(tmp_path, space="primal")
    assert main(["diagnose", str(manifest)]) == 4
    assert error_report(capsys)["error_code"] == "MISSING_DATA"


def test_unstable_fixed_step_run_fails_integration(tmp_path, capsys):
    manifest = write_run(tmp_path, space="primal", horizon=40.0, record_stride=2.0,
                         integrator={"method": "rk4", "step": 2.0})
    assert main(["simulate", str(manifest)]) == 3
    assert error_report(capsys)["exit_code"] == 3


def test_verify_single_oracle(capsys):
    assert main(["verify", "--only", "kernel_invariants"]) == 0
    assert "kernel_invariants" in capsys.readouterr().out


def test_verify_unknown_oracle():
    assert main(["verify", "--only", "nonexistent"]) == 2


class MiscalibratedTsallis(TsallisKernel):
    def inv_dtheta(self, y):
        return 1.1 * super().inv_dtheta(y)


def test_mirror_oracle_catches_broken_kernel():
    [result] = VerifyService(mirror_kernels=[MiscalibratedTsallis(0.5)]).run(only="mirror_optimality")
    assert not result.passed
    assert result.value > 1e-4


def test_mirror_oracle_finishes_quickly():
    [result] = VerifyService().run(only="mirror_optimality")
    assert result.passed
    assert result.elapsed < 30.0


@pytest.mark.parametrize("name", [
    "matrixcore_invariants",
    "game_invariants",
    "mirror_invariants",
    "vonneumann_specialization",
    "primal_rank",
    "bloch_norm_bound",
])
def test_invariant_oracles_pass(name):
    assert name in VerifyService().oracles
    [result] = VerifyService().run(only=name)
    assert result.passed, result.detail


def test_log_records_carry_run_id(tmp_path, caplog):
    manifest = write_run(tmp_path)
    with caplog.at_level(logging.INFO):
        assert main(["simulate", str(manifest)]) == 0
    run_ids = {getattr(r, "run_id", None) for r in caplog.records if r.name.startswith("qflow")}
    assert len(run_ids) == 1
    assert run_ids.pop() not in (None, "startup")


@pytest.mark.parametrize("name", ["appendix_f", "matching_pennies", "random_game", "qubit_povm"])
def test_bundled_manifests_load(name):
    service = SimulationService(str(MANIFESTS / f"{name}.json"))
    assert service.config.horizon > 0
    assert len(service.config.kernels) == service.game.n_players
