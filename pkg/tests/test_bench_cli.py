import json
import math

import pytest

from restartopt.bench import (
    ConfigError,
    ExperimentConfig,
    format_summary,
    format_trace,
    load_configs,
    run_experiment,
    run_matrix,
)
from restartopt.cli import main
from restartopt.submodular import random_coverage, write_coverage


@pytest.fixture
def coverage_file(tmp_path):
    path = tmp_path / "cov.txt"
    write_coverage(random_coverage(10, 25, 3), path)
    return str(path)


def three_cells(coverage_file):
    return [
        ExperimentConfig("continuous", "restarted-gd", "quadratic:L=10,mu=1,n=2,start=ones", 1e-6),
        ExperimentConfig("augment", "bit-scaling", "cube-powers:n=10"),
        ExperimentConfig("submodular", "threshold-greedy", coverage_file, 0.1, k=3),
    ]


def test_continuous_example():
    rec, rows = run_experiment(ExperimentConfig("continuous", "restarted-gd", "quadratic:L=10,mu=1,n=2,start=ones", 1e-6))
    assert rec.bound_satisfied
    # gap0 is the gradient certificate |grad f(x0)|^2 / (2 mu) = 50.5
    assert rec.bound == 40 * math.ceil(math.log2(50.5 / 1e-6))
    assert rec.measured == len(rows) == 80
    assert rows[0][:3] == (rec.experiment_id, 1, 1)


def test_augment_example():
    rec, rows = run_experiment(ExperimentConfig("augment", "bit-scaling", "cube-powers:n=10"))
    assert rec.bound == 100 and rec.measured <= 100 and rec.bound_satisfied
    assert rec.gap_or_ratio == 0


def test_submodular_example(coverage_file):
    rec, rows = run_experiment(ExperimentConfig("submodular", "threshold-greedy", coverage_file, 0.1, k=3))
    assert rec.gap_or_ratio >= 1 - 1 / math.e - 0.1
    assert rec.bound_satisfied


def test_matrix_three_rows(coverage_file):
    records, rows = run_matrix(three_cells(coverage_file))
    assert len(records) == 3 and all(r.bound_satisfied for r in records)
    ids = [r[0] for r in rows]
    # merged in config order
    assert ids == sorted(ids, key=[c.experiment_id for c in three_cells(coverage_file)].index)


def test_parallel_matches_serial(coverage_file):
    serial = run_matrix(three_cells(coverage_file), jobs=1)
    parallel = run_matrix(three_cells(coverage_file), jobs=3)
    assert format_trace(serial[1]) == format_trace(parallel[1])
    assert format_summary(serial[0], with_time=False) == format_summary(parallel[0], with_time=False)


def test_wrong_mu_violates():
    cfg = ExperimentConfig("continuous", "restarted-gd", "quadratic:kappa=100,n=20", 1e-6, mu_scale=10)
    rec, _ = run_experiment(cfg)
    assert not rec.bound_satisfied
    assert rec.gap_or_ratio > 1e-6


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(domain="optics", algo="x", instance="y"), "domain"),
        (dict(domain="augment", algo="simplex", instance="cube-powers:n=3"), "algo"),
        (dict(domain="augment", algo="naive", instance="hypercube"), "instance"),
        (dict(domain="continuous", algo="restarted-gd", instance="quadratic", epsilon=-1), "epsilon"),
        (dict(domain="submodular", algo="greedy", instance="toy"), "k"),
        (dict(domain="augment", algo="naive", instance="cube-powers:n=3", policy="random"), "policy"),
        (dict(domain="augment", algo="naive", instance="cube-powers:n"), "instance"),
    ],
)
def test_config_errors_name_field(kwargs, field):
    with pytest.raises(ConfigError, match=f"^{field}"):
        ExperimentConfig(**kwargs)


def test_from_dict_rejects_unknown_field():
    with pytest.raises(ConfigError, match="colour"):
        ExperimentConfig.from_dict({"domain": "augment", "algo": "naive", "instance": "cube-powers:n=2", "colour": 1})


def test_cell_failure_does_not_abort(tmp_path):
    broken = tmp_path / "broken.txt"
    broken.write_text("3 2\n0 1\n")
    cells = [
        ExperimentConfig("augment", "bit-scaling", str(broken)),
        ExperimentConfig("augment", "bit-scaling", "cube-powers:n=4"),
    ]
    records, rows = run_matrix(cells)
    assert records[0].error and not records[0].bound_satisfied
    assert records[1].bound_satisfied and rows


def test_load_configs_expands_seeds(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({
        "defaults": {"domain": "augment", "algo": "bit-scaling"},
        "experiments": [
            {"instance": "random:n=5,m=10", "seed_range": [0, 3], "experiment_id": "r"},
            {"instance": "cube-powers:n=3", "seeds": [7]},
        ],
    }))
    cells = load_configs(path)
    assert [c.seed for c in cells] == [0, 1, 2, 7]
    assert cells[0].experiment_id == "r/seed0"
    with pytest.raises(ConfigError, match="not found"):
        load_configs(tmp_path / "missing.json")
    with pytest.raises(ConfigError):
        run_matrix([])


def test_cli_exit_codes(tmp_path, coverage_file, capsys):
    assert main(["continuous", "--algo", "restarted-gd", "--instance", "quadratic:L=10,mu=1,n=2", "--quiet"]) == 0
    assert main(["continuous", "--algo", "restarted-gd", "--instance", "quadratic:kappa=100",
                 "--mu-scale", "10", "--quiet"]) == 1
    assert main(["continuous", "--algo", "newton", "--instance", "quadratic"]) == 2
    assert main(["augment", "--algo", "naive", "--instance", "no/such/file"]) == 2
    assert main(["submodular", "--algo", "greedy", "--instance", coverage_file]) == 2
    assert main(["submodular", "--algo", "greedy", "--instance", coverage_file, "--k", "11"]) == 2
    assert main(["submodular", "--algo", "greedy", "--instance", coverage_file, "--k", "3", "--quiet"]) == 0
    assert main([]) == 2


def test_cli_matrix_filter_and_injection(tmp_path, coverage_file):
    cfg = tmp_path / "m.json"
    cfg.write_text(json.dumps([
        {"experiment_id": "c1", "domain": "continuous", "algo": "restarted-gd",
         "instance": "quadratic:kappa=10,n=20", "epsilon": 1e-6},
        {"experiment_id": "aug", "domain": "augment", "algo": "bit-scaling", "instance": "cube-powers:n=6"},
    ]))
    assert main(["matrix", "--config", str(cfg), "--quiet"]) == 0
    assert main(["matrix", "--config", str(cfg), "--filter", "nothing"]) == 2
    assert main(["matrix", "--config", str(cfg), "--mu-scale", "10", "--quiet"]) == 1
    assert main(["matrix", "--config", str(cfg), "--filter", "aug", "--mu-scale", "10", "--quiet"]) == 0


def test_cli_output_is_reproducible(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        main(["continuous", "--algo", "restarted-agd", "--instance", "quadratic:kappa=100", "--seed", "4",
              "--out", str(out), "--quiet"])
        outs.append(out)
    assert outs[0].read_bytes() == outs[1].read_bytes()
    header = outs[0].read_text().splitlines()[0]
    assert header == "experiment_id,phase,global_iter,value,gap,oracle_calls"
    summary = tmp_path / "run0.csv.summary.csv"
    assert summary.read_bytes() == (tmp_path / "run1.csv.summary.csv").read_bytes()


def test_cli_json_and_config(tmp_path):
    cfg = tmp_path / "one.json"
    cfg.write_text(json.dumps({"domain": "submodular", "algo": "threshold-greedy", "instance": "toy",
                               "k": 2, "epsilon": 0.25}))
    out = tmp_path / "t.json"
    assert main(["submodular", "--config", str(cfg), "--out", str(out), "--format", "json", "--quiet"]) == 0
    rows = json.loads(out.read_text())
    assert [r["value"] for r in rows] == [2.0, 4.0]
    summary = json.loads((tmp_path / "t.json.summary.json").read_text())
    assert summary[0]["measured"] == 5 and summary[0]["bound"] == 33
