import csv
import json

import numpy as np
import pytest

from rbhmc import harness, io
from rbhmc.constraints import table_constraints
from rbhmc.errors import InvalidArgument
from rbhmc.integrator import LeapfrogParams
from rbhmc.samplers import HmcConfig, make_rng, rbhmc
from rbhmc.targets import gaussian_std


def small_truncated(**kw):
    args = dict(boundary_kind="e", n_samples=300, eps=0.004, L=50, seed=3, init=(0.2, 0.5))
    args.update(kw)
    return harness.exp_truncated_gaussian(**args)


class TestTruncated:
    def test_summary_recomputable_from_csv(self, tmp_path):
        report = small_truncated()
        harness.write_report(report, tmp_path)
        chain = io.read_chain_csv(tmp_path / "chain.csv")
        doc = json.loads((tmp_path / "report.json").read_text())
        np.testing.assert_allclose(chain.samples.mean(axis=0), doc["summary"]["mean"], rtol=1e-12)
        assert chain.accepted.mean() == pytest.approx(doc["summary"]["acceptance_rate"], rel=1e-12)
        outside = np.mean(~table_constraints("e", 500.0).contains(chain.samples))
        assert outside == pytest.approx(doc["summary"]["out_of_roi_fraction"], abs=1e-12)

    def test_histogram_reference_normalised(self, tmp_path):
        report = small_truncated(boundary_kind="d")
        h, ref = report.traces["histogram"], report.traces["reference"]
        assert np.sum(ref * h.areas) == pytest.approx(1.0, rel=1e-12)
        assert np.sum(h.density * h.areas) == pytest.approx(1.0, rel=1e-12)
        # disk of radius sqrt(2) lies inside the box; its Gaussian mass is 1 - e^-1,
        # up to the midpoint rule smearing the curved edge
        assert report.summary["roi_mass_in_box"] == pytest.approx(1 - np.exp(-1.0), rel=5e-3)

    def test_half_disk_equals_composed_rows(self):
        mu = 500.0
        cfg = HmcConfig(LeapfrogParams(0.004, 30), 200, np.array([0.2, 0.5]))
        e = rbhmc(gaussian_std(2), table_constraints("e", mu), cfg, make_rng(4))
        bd = rbhmc(gaussian_std(2), table_constraints("b", mu) + table_constraints("d", mu), cfg, make_rng(4))
        np.testing.assert_array_equal(e.samples, bd.samples)

    def test_unknown_row(self):
        with pytest.raises(InvalidArgument):
            harness.exp_truncated_gaussian(boundary_kind="z")


class TestWmae:
    def test_small_run(self, tmp_path):
        report = harness.exp_wmae(D=4, rounds=2, L=40, budget=30, seed=1)
        s = report.summary
        assert set(s) >= {"rbhmc", "rhmc", "baseline_hmc", "rbhmc_beats_baseline_rounds"}
        assert s["rbhmc"]["iterations"] == [30, 30]
        paths = harness.write_report(report, tmp_path)
        names = {p.name for p in paths}
        assert {"wmae_trace.csv", "setup.csv", "timing.csv", "report.json"} <= names
        with open(tmp_path / "wmae_trace.csv") as fh:
            rows = [r for r in csv.DictReader(fh) if r["sampler"] == "rbhmc" and r["round"] == "1"]
        assert float(rows[-1]["wmae"]) == pytest.approx(s["rbhmc"]["final_wmae"][1], rel=1e-12)

    def test_shared_setup_across_samplers(self):
        a = harness.exp_wmae(D=3, rounds=1, L=10, budget=5, seed=2, samplers=("rbhmc",))
        b = harness.exp_wmae(D=3, rounds=1, L=10, budget=5, seed=2)
        np.testing.assert_array_equal(a.traces["init"][0], b.traces["init"][0])
        np.testing.assert_array_equal(a.traces["wmae"]["rbhmc"][0], b.traces["wmae"]["rbhmc"][0])

    def test_time_budget_truncates(self):
        r = harness.exp_wmae(D=3, rounds=1, L=10, budget=10_000, seed=0, time_budget=0.05, samplers=("rbhmc",))
        assert r.summary["rbhmc"]["iterations"][0] < 10_000

    def test_threads_do_not_change_traces(self):
        a = harness.exp_wmae(D=3, rounds=2, L=10, budget=20, seed=5, threads=1)
        b = harness.exp_wmae(D=3, rounds=2, L=10, budget=20, seed=5, threads=3)
        for s in harness.WMAE_SAMPLERS:
            for x, y in zip(a.traces["wmae"][s], b.traces["wmae"][s]):
                np.testing.assert_array_equal(x, y)

    def test_bad_sampler(self):
        with pytest.raises(InvalidArgument):
            harness.exp_wmae(samplers=("nuts",))


class TestNmf:
    def test_small_run(self, tmp_path):
        report = harness.exp_nmf(n=20, iters=30, rounds=2, L=20, burn_in=10, seed=0)
        s = report.summary
        assert len(report.traces["diff"]["gibbs"]) == 2
        assert len(report.traces["diff"]["rbhmc"][0]) == 30
        expected = np.vstack(report.traces["diff"]["gibbs"])[:, 10:].mean()
        assert s["gibbs"]["mean_diff"] == pytest.approx(expected, rel=1e-12)
        harness.write_report(report, tmp_path)
        A = io.read_matrix(tmp_path / "A_last_gibbs.csv")
        assert A.shape == (4, 36) and A.min() >= 0
        assert (tmp_path / "diff_trace.csv").exists()

    def test_iters_must_exceed_burn_in(self):
        with pytest.raises(InvalidArgument):
            harness.exp_nmf(iters=50, burn_in=100)


def test_presets_cover_experiments():
    assert set(harness.PRESETS) == {"truncated-gaussian", "wmae", "nmf"}
    for p in harness.PRESETS.values():
        assert set(p) == {"desk", "full"}


def test_plots_optional(tmp_path):
    pytest.importorskip("matplotlib")
    report = harness.exp_wmae(D=3, rounds=1, L=10, budget=10, seed=0)
    paths = harness.write_report(report, tmp_path, plots=True)
    svgs = [p for p in paths if p.suffix == ".svg"]
    assert svgs and all(p.stat().st_size > 0 for p in svgs)
    small = small_truncated(n_samples=50)
    assert any(p.suffix == ".svg" for p in harness.write_report(small, tmp_path / "t", plots=True))
