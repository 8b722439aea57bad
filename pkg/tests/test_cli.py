import json

import numpy as np
import pytest

from rbhmc import io
from rbhmc.cli import main


def run(argv, monkeypatch, tmp_path):
    monkeypatch.setenv("RBHMC_OUTPUT_ROOT", str(tmp_path / "runs"))
    return main(argv)


SAMPLE = ["sample", "--target", "gaussian2d", "--constraint", "halfplane_y:mu=500", "--eps", "0.002",
          "--L", "20", "--n", "50", "--init", "0.5,0.5"]


def test_sample_writes_outputs(tmp_path, monkeypatch):
    out = tmp_path / "a"
    assert run(SAMPLE + ["--seed", "1", "--out", str(out)], monkeypatch, tmp_path) == 0
    chain = io.read_chain_csv(out / "chain.csv")
    assert chain.samples.shape == (50, 2)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["acceptance_rate"] == pytest.approx(chain.accepted.mean())
    assert json.loads((out / "config.json").read_text())["seed"] == 1


def test_sample_byte_identical(tmp_path, monkeypatch):
    for d in ("a", "b"):
        assert run(SAMPLE + ["--seed", "9", "--out", str(tmp_path / d)], monkeypatch, tmp_path) == 0
    assert (tmp_path / "a" / "chain.csv").read_bytes() == (tmp_path / "b" / "chain.csv").read_bytes()


def test_config_file_and_override(tmp_path, monkeypatch):
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps(dict(target="gaussian1d", eps=0.1, L=10, n=20, seed=2)))
    out = tmp_path / "o"
    assert run(["sample", "--config", str(cfgfile), "--n", "7", "--out", str(out)], monkeypatch, tmp_path) == 0
    assert io.read_chain_csv(out / "chain.csv").samples.shape == (7, 1)


def test_default_output_root(tmp_path, monkeypatch):
    assert run(SAMPLE + ["--seed", "3"], monkeypatch, tmp_path) == 0
    dirs = list((tmp_path / "runs").iterdir())
    assert len(dirs) == 1 and dirs[0].name.startswith("sample_") and dirs[0].name.endswith("seed3")


def test_step_size_warning(tmp_path, monkeypatch, caplog):
    argv = ["sample", "--target", "gaussian2d", "--constraint", "halfplane_y:mu=500", "--eps", "0.05",
            "--L", "5", "--n", "5", "--seed", "0", "--init", "0,1", "--out", str(tmp_path / "w")]
    assert run(argv, monkeypatch, tmp_path) == 0
    assert "exceeds step-size bound 0.002" in caplog.text


@pytest.mark.parametrize(
    "argv",
    [
        ["sample", "--target", "gaussian2d", "--L", "5", "--n", "5", "--seed", "0"],
        ["sample", "--target", "banana", "--eps", "0.1", "--L", "5", "--n", "5", "--seed", "0"],
        ["sample", "--target", "gaussian2d", "--eps", "0.1", "--L", "5", "--n", "5", "--seed", "0",
         "--constraint", "disk2:mu=oops"],
        ["sample", "--target", "gaussian2d", "--eps", "0.1", "--L", "5", "--n", "5", "--seed", "0",
         "--init", "1,2,3"],
        ["sample", "--target", "gaussian2d", "--eps", "0.1", "--L", "5", "--n", "5", "--seed", "0",
         "--sampler", "baseline"],
        ["gen", "nmf"],
    ],
)
def test_config_errors_exit_2(argv, tmp_path, monkeypatch, capsys):
    assert run(argv, monkeypatch, tmp_path) == 2
    assert capsys.readouterr().err


def test_argparse_error_exits_2(tmp_path, monkeypatch):
    with pytest.raises(SystemExit) as info:
        run(["experiment", "bogus"], monkeypatch, tmp_path)
    assert info.value.code == 2


def test_unsupported_geometry_exits_3(tmp_path, monkeypatch):
    argv = ["sample", "--target", "gaussian2d", "--sampler", "rhmc", "--constraint", "parabola:mu=100",
            "--eps", "0.01", "--L", "5", "--n", "5", "--seed", "0", "--init", "1,0", "--out", str(tmp_path / "r")]
    assert run(argv, monkeypatch, tmp_path) == 3


def test_rhmc_on_disk(tmp_path, monkeypatch):
    out = tmp_path / "r"
    argv = ["sample", "--target", "gaussian2d", "--sampler", "rhmc", "--constraint", "disk2:mu=100",
            "--eps", "0.05", "--L", "10", "--n", "40", "--seed", "0", "--out", str(out)]
    assert run(argv, monkeypatch, tmp_path) == 0
    s = io.read_chain_csv(out / "chain.csv").samples
    assert np.all(np.sum(s**2, axis=1) <= 2.0 + 1e-9)


def test_experiment_dry_run_echo(tmp_path, monkeypatch, capsys):
    assert run(["experiment", "nmf", "--paper-scale", "--dry-run"], monkeypatch, tmp_path) == 0
    echoed = json.loads(capsys.readouterr().out.splitlines()[0])
    assert echoed["K"] == 4 and echoed["eps"] == 0.002 and echoed["L"] == 200 and echoed["mu"] == 200.0
    assert echoed["n"] == 1000 and echoed["scale"] == "full"
    assert not (tmp_path / "runs").exists()


def test_experiment_small(tmp_path, monkeypatch):
    out = tmp_path / "e"
    argv = ["experiment", "truncated-gaussian", "--boundary", "b", "--n", "100", "--L", "20", "--seed", "4",
            "--out", str(out)]
    assert run(argv, monkeypatch, tmp_path) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["config"]["boundary_kind"] == "b" and "l1_error" in doc["summary"]
    assert "chain.csv" in doc["artifacts"]


def test_gen_sidecar_roundtrip(tmp_path, monkeypatch):
    a, b = tmp_path / "g1", tmp_path / "g2"
    assert run(["gen", "nmf", "--n", "12", "--noise", "0.3", "--seed", "5", "--out", str(a)], monkeypatch, tmp_path) == 0
    assert run(["gen", "nmf", "--sidecar", str(a / "dataset.json"), "--out", str(b)], monkeypatch, tmp_path) == 0
    for name in ("X.csv", "W_true.csv", "A_true.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert io.read_matrix(a / "X.csv").shape == (12, 36)


def test_gen_diag_a(tmp_path, monkeypatch):
    out = tmp_path / "d"
    assert run(["gen", "diag-a", "--dim", "6", "--seed", "1", "--out", str(out)], monkeypatch, tmp_path) == 0
    a = np.loadtxt(out / "a_diag.csv", skiprows=1)
    assert a.shape == (6,) and set(np.round(np.log(a))) <= {-5.0, 5.0}
