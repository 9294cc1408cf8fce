import csv
import json

import numpy as np
import pytest

from asynclp import cli, problems
from asynclp.formulation import StandardLP, save_problem, to_asynchronous_form


@pytest.fixture
def lp_file(tmp_path):
    lp = StandardLP(f=[-1.0, -2.0], A=[[1.0, 1.0], [2.0, 1.0]], b=[4.0, 6.0])
    path = tmp_path / "lp.json"
    save_problem(lp, path)
    return path


@pytest.fixture
def cheb_file(tmp_path):
    inst = problems.gen_chebyshev(3, 6, seed=0)
    path = tmp_path / "cheb.json"
    path.write_text(json.dumps(problems.instance_to_dict(inst)))
    return path


def _read_solution(out_dir):
    with open(out_dir / "solution.json") as fh:
        return json.load(fh)


def test_solve_standard_lp(lp_file, tmp_path):
    out = tmp_path / "run"
    rc = cli.main(["solve", "--problem", str(lp_file), "--tol", "1e-9",
                   "--out", str(out)])
    assert rc == 0
    sol = _read_solution(out)
    assert sol["converged"] and sol["mode"] == "bernoulli"
    assert sol["objective"] == pytest.approx(-8.0, abs=1e-6)
    assert np.allclose(sol["variables"]["x1"], [0.0, 4.0], atol=1e-6)
    with open(out / "trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["equiv_iter", "objective", "residual", "dist_to_ref"]
    assert len(rows) > 2


def test_solve_async_form_file(tmp_path):
    prob = to_asynchronous_form(
        StandardLP(f=[-1.0, -2.0], A=[[1.0, 1.0], [2.0, 1.0]], b=[4.0, 6.0]))
    path = tmp_path / "prob.json"
    save_problem(prob, path)
    out = tmp_path / "run"
    rc = cli.main(["solve", "--problem", str(path), "--mode", "randomk",
                   "--tol", "1e-9", "--out", str(out)])
    assert rc == 0
    sol = _read_solution(out)
    assert sol["converged"] and sol["mode"] == "randomk"
    assert sol["objective"] == pytest.approx(-8.0, abs=1e-6)


def test_solve_distributed_writes_reports(cheb_file, tmp_path):
    out = tmp_path / "run"
    rc = cli.main(["solve", "--problem", str(cheb_file), "--mode", "distributed",
                   "--workers", "2", "--tol", "1e-8", "--out", str(out)])
    assert rc == 0
    sol = _read_solution(out)
    assert sol["workers"] == 2 and len(sol["worker_reports"]) == 2
    assert sol["converged"]


def test_solve_with_reference_and_dump(cheb_file, tmp_path):
    out = tmp_path / "run"
    rc = cli.main(["solve", "--problem", str(cheb_file), "--with-reference",
                   "--dump-system", "--tol", "1e-9", "--out", str(out)])
    assert rc == 0
    data = np.load(out / "system.npz")
    assert "Gprime" in data.files and "e" in data.files
    with open(out / "trajectory.csv") as fh:
        rows = list(csv.DictReader(fh))
    dist = [float(r["dist_to_ref"]) for r in rows]
    assert np.isfinite(dist).all()
    assert dist[-1] <= 1e-4


def test_solve_sync_with_ramp(lp_file, tmp_path):
    out = tmp_path / "run"
    rc = cli.main(["solve", "--problem", str(lp_file), "--mode", "sync",
                   "--homotopy", "ramp:0.5:2500", "--max-equiv-iters", "2600",
                   "--tol", "1e-8", "--out", str(out)])
    assert rc == 0
    assert _read_solution(out)["converged"]


def test_oracle_command(lp_file, capsys, tmp_path):
    rc = cli.main(["oracle", "--problem", str(lp_file),
                   "--out", str(tmp_path / "o")])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "optimal"
    assert np.allclose(out["x_star"], [0.0, 4.0], atol=1e-9)
    with open(tmp_path / "o" / "oracle.json") as fh:
        assert json.load(fh)["status"] == "optimal"


def test_oracle_rejects_basis_pursuit(tmp_path, capsys):
    inst = problems.gen_basis_pursuit(8, 4, 2, seed=0)
    path = tmp_path / "bp.json"
    path.write_text(json.dumps(problems.instance_to_dict(inst)))
    rc = cli.main(["oracle", "--problem", str(path)])
    assert rc == 2


def test_config_file_merge_and_flag_precedence(lp_file, tmp_path):
    # sync mode fires exactly K updates per step, so the budget is hit exactly
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"max_equiv_iters": 7, "seed": 3,
                                  "tol": 0.0, "mode": "sync"}))
    out = tmp_path / "run"
    cli.main(["solve", "--problem", str(lp_file), "--config", str(config),
              "--out", str(out)])
    sol = _read_solution(out)
    assert sol["mode"] == "sync"
    assert sol["equivalent_iterations"] == pytest.approx(7.0)

    out2 = tmp_path / "run2"
    cli.main(["solve", "--problem", str(lp_file), "--config", str(config),
              "--max-equiv-iters", "4", "--out", str(out2)])
    sol2 = _read_solution(out2)
    assert sol2["equivalent_iterations"] == pytest.approx(4.0)


def test_experiment_bp_battery(tmp_path):
    out = tmp_path / "exp"
    rc = cli.main(["experiment", "--preset", "bp", "--n", "16", "--m", "8",
                   "--sparsity", "2", "--trials", "2", "--p-list", "0.5,1.0",
                   "--max-equiv-iters", "400", "--tol", "1e-9",
                   "--out", str(out)])
    assert rc == 0
    with open(out / "summary.json") as fh:
        summary = json.load(fh)
    assert summary["groups"]["p=0.5"]["converged"] == 2
    for name in ("experiment_p0.5.csv", "experiment_p1.0.csv",
                 "experiment_combined.csv"):
        assert (out / name).exists()
    with open(out / "experiment_p0.5.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 401
    # converged trials hold their final values to the end of the grid
    assert float(rows[-1]["log10_residual_median"]) < -8.0
    # the planted solution is the reference, so dist must fall with residual
    assert float(rows[-1]["log10_dist_median"]) < -6.0
    # p=1 is the synchronous recurrence: an explicit sync-mode experiment
    # must reproduce the p=1.0 aggregate bit-for-bit
    out_sync = tmp_path / "exp_sync"
    rc = cli.main(["experiment", "--preset", "bp", "--n", "16", "--m", "8",
                   "--sparsity", "2", "--trials", "2", "--mode", "sync",
                   "--max-equiv-iters", "400", "--tol", "1e-9",
                   "--out", str(out_sync)])
    assert rc == 0
    assert (out / "experiment_p1.0.csv").read_text() == \
        (out_sync / "experiment_sync.csv").read_text()


def test_experiment_chebyshev_bernoulli(tmp_path):
    out = tmp_path / "exp"
    rc = cli.main(["experiment", "--preset", "chebyshev", "--n", "3",
                   "--m", "6", "--trials", "2", "--mode", "bernoulli",
                   "--p-list", "0.5", "--max-equiv-iters", "1500",
                   "--tol", "1e-8", "--out", str(out)])
    assert rc == 0
    with open(out / "summary.json") as fh:
        summary = json.load(fh)
    assert list(summary["groups"]) == ["p=0.5"]
    assert summary["groups"]["p=0.5"]["converged"] == 2
    assert summary["groups"]["p=0.5"]["median_final_residual"] < 1e-6
    assert (out / "experiment_p0.5.csv").exists()


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        cli.main([])
    with pytest.raises(SystemExit):
        cli.main(["solve"])  # --problem is required
