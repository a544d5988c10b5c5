import json
import os

import numpy as np
import pytest

from mcvar.cli import (
    EXIT_CONTINUE,
    EXIT_INPUT,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    RunReport,
    load_chain,
    main,
    parse_targets,
    sniff_chain_file,
)
from mcvar.experiments import Ar1Config, ar1_generate


@pytest.fixture
def chain4(tmp_path):
    path = tmp_path / "chain4.csv"
    path.write_text("1\n2\n3\n4\n")
    return str(path)


@pytest.fixture
def ar1_file(tmp_path):
    path = tmp_path / "ar1.csv"
    np.savetxt(path, ar1_generate(Ar1Config(phi=0.5, n=20_000, seed=4)).values, delimiter=",")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestChainFiles:
    def test_sniffs_comma_and_tab(self, tmp_path):
        c = tmp_path / "a.csv"
        c.write_text("1,2\n3,4\n")
        t = tmp_path / "a.tsv"
        t.write_text("1\t2\n3\t4\n")
        assert sniff_chain_file(str(c)).delimiter == ","
        assert sniff_chain_file(str(t)).delimiter == "\t"

    def test_header_autodetected(self, tmp_path):
        f = tmp_path / "h.csv"
        f.write_text("alpha,beta\n1,2\n3,4\n")
        spec = sniff_chain_file(str(f))
        assert spec.header
        assert load_chain(spec).values.shape == (2, 2)

    def test_column_selection(self, tmp_path):
        f = tmp_path / "c.csv"
        f.write_text("1,10,100\n2,20,200\n3,30,300\n")
        chain = load_chain(sniff_chain_file(str(f), columns="2,0"))
        assert np.array_equal(chain.values[:, 0], [100, 200, 300])

    def test_ragged_rows_rejected(self, tmp_path):
        f = tmp_path / "r.csv"
        f.write_text("1,2\n3\n")
        with pytest.raises(Exception):
            load_chain(sniff_chain_file(str(f)))


class TestEstimateCommand:
    def test_bm_hand_case(self, capsys, chain4):
        code, out, _ = run(capsys, "estimate", chain4, "--method", "bm", "--b", "2")
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["sigma"] == [[4.0]]
        assert report["mcse"] == [1.0]
        assert report["method"]["family"] == "bm"

    def test_initseq_hand_case(self, capsys, chain4):
        code, out, _ = run(capsys, "estimate", chain4, "--method", "initseq")
        assert code == EXIT_OK
        assert json.loads(out)["sigma"] == [[1.875]]

    def test_initseq_rejects_lugsail(self, capsys, chain4):
        code, _, err = run(capsys, "estimate", chain4, "--method", "initseq", "--lugsail", "over")
        assert code == EXIT_USAGE
        assert "initseq" in err

    def test_window_only_with_sv(self, capsys, chain4):
        code, _, err = run(capsys, "estimate", chain4, "--method", "bm", "--window", "bartlett")
        assert code == EXIT_USAGE
        assert "--window" in err

    def test_r_c_only_with_custom(self, capsys, chain4):
        code, _, _ = run(capsys, "estimate", chain4, "--method", "bm", "--lugsail", "zero", "--r", "2")
        assert code == EXIT_USAGE

    def test_custom_needs_r_and_c(self, capsys, chain4):
        code, _, _ = run(capsys, "estimate", chain4, "--method", "bm", "--lugsail", "custom", "--r", "2")
        assert code == EXIT_USAGE

    def test_missing_file_is_input_error(self, capsys, tmp_path):
        code, _, err = run(capsys, "estimate", str(tmp_path / "nope.csv"))
        assert code == EXIT_INPUT

    def test_non_numeric_is_input_error(self, capsys, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("h1,h2\n1,x\n2,3\n")
        code, _, _ = run(capsys, "estimate", str(f))
        assert code == EXIT_INPUT

    def test_csv_output_is_flat(self, capsys, chain4):
        code, out, _ = run(capsys, "estimate", chain4, "--method", "bm", "--b", "2", "--out", "csv")
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "key,value"
        assert "sigma_0_0,4.0" in lines

    def test_report_roundtrips_sigma_exactly(self, capsys, ar1_file):
        code, out, _ = run(capsys, "estimate", ar1_file, "--method", "sv", "--window", "tukey-hanning")
        assert code == EXIT_OK
        report = RunReport.from_json(out)
        again = json.loads(json.dumps(report.to_dict()))
        assert again["sigma"] == json.loads(out)["sigma"]
        assert isinstance(report.sigma[0][0], float)


class TestEssCommand:
    def test_b_one_forces_ess_equal_n(self, capsys, tmp_path):
        f = tmp_path / "iid.csv"
        rng = np.random.default_rng(8)
        np.savetxt(f, rng.standard_normal(500), delimiter=",")
        code, out, _ = run(capsys, "ess", str(f), "--method", "bm", "--b", "1")
        assert code == EXIT_OK
        assert json.loads(out)["ess"] == pytest.approx(500.0, rel=1e-9)

    def test_reasonable_ratio_for_correlated_chain(self, capsys, ar1_file):
        code, out, _ = run(capsys, "ess", ar1_file, "--method", "bm", "--lugsail", "over")
        assert code == EXIT_OK
        ratio = json.loads(out)["ess_per_n"]
        assert 0.2 < ratio < 0.5  # truth for phi=0.5 is 1/3

    def test_empty_file_is_input_error(self, capsys, tmp_path):
        f = tmp_path / "empty.csv"
        f.write_text("")
        code, _, _ = run(capsys, "ess", str(f))
        assert code == EXIT_INPUT


class TestMinEssCommand:
    @pytest.mark.parametrize(
        "alpha, eps, p, want",
        [("0.05", "0.05", "1", 6146), ("0.05", "0.05", "10", 8831), ("0.05", "0.10", "1", 1536)],
    )
    def test_published_values(self, capsys, alpha, eps, p, want):
        code, out, _ = run(capsys, "miness", "--alpha", alpha, "--eps", eps, "--p", p)
        assert code == EXIT_OK
        assert abs(int(out.strip()) - want) <= 1


class TestStopcheckCommand:
    def test_short_chain_continues(self, capsys, chain4):
        code, out, _ = run(capsys, "stopcheck", chain4, "--method", "bm", "--b", "2", "--nstar", "2")
        assert code == EXIT_CONTINUE
        assert json.loads(out)["terminate"] is False

    def test_below_n_star_continues_regardless(self, capsys, ar1_file):
        code, out, _ = run(capsys, "stopcheck", ar1_file, "--nstar", "1000000")
        assert code == EXIT_CONTINUE

    def test_precise_chain_terminates(self, capsys, tmp_path):
        f = tmp_path / "iid.csv"
        rng = np.random.default_rng(21)
        np.savetxt(f, rng.standard_normal(20_000), delimiter=",")
        code, out, _ = run(capsys, "stopcheck", str(f), "--nstar", "100", "--eps", "0.05")
        assert code == EXIT_OK
        assert json.loads(out)["terminate"] is True


class TestSimciCommand:
    def test_single_mean_reduces_to_normal_quantile(self, capsys, ar1_file):
        code, out, _ = run(capsys, "simci", ar1_file, "--targets", "mean:0", "--method", "bm")
        assert code == EXIT_OK
        assert json.loads(out)["z_star"] == pytest.approx(1.96, abs=0.02)

    def test_three_targets_bracket_their_estimates(self, capsys, ar1_file):
        code, out, _ = run(capsys, "simci", ar1_file, "--targets", "mean:0,quant:0:0.1,quant:0:0.9")
        assert code == EXIT_OK
        got = json.loads(out)
        assert len(got["intervals"]) == 3
        for (lo, hi), nu in zip(got["intervals"], got["nu_hat"]):
            assert lo < nu < hi

    def test_malformed_targets(self, capsys, ar1_file):
        code, _, _ = run(capsys, "simci", ar1_file, "--targets", "mean")
        assert code == EXIT_USAGE

    def test_seeded_output_is_byte_identical(self, capsys, ar1_file):
        args = ("simci", ar1_file, "--targets", "mean:0,quant:0:0.5", "--seed", "7")
        _, first, _ = run(capsys, *args)
        _, second, _ = run(capsys, *args)
        assert first == second

    def test_parse_targets(self):
        specs = parse_targets("mean:1,quant:0:0.25")
        assert specs[0].kind == "mean" and specs[0].component == 1
        assert specs[1].q == 0.25


class TestExperimentCommand:
    def test_coverage_table_shape(self, capsys):
        code, out, _ = run(capsys, "experiment", "ar1-coverage", "--phi", "0.5",
                           "--n-grid", "2000", "--reps", "20", "--seed", "3")
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "estimator,n,replications,coverage,mc_se"
        assert len(lines) == 4  # bm, bm-zero, bm-over

    def test_seeded_runs_are_byte_identical(self, capsys):
        args = ("experiment", "ar1-ess", "--phi", "0.5", "--n-grid", "1500",
                "--reps", "10", "--seed", "11")
        _, first, _ = run(capsys, *args)
        _, second, _ = run(capsys, *args)
        assert first == second

    def test_bench_emits_one_row_per_estimator(self, capsys):
        code, out, _ = run(capsys, "experiment", "bench", "--n", "2000",
                           "--p-coef", "2", "--reps", "2", "--seed", "1")
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "estimator,median_seconds,repetitions"
        assert len(lines) == 1 + 7  # bm x3, sv x3, initseq

    def test_mixture_summary(self, capsys):
        code, out, _ = run(capsys, "experiment", "mixture", "--n", "4000", "--seed", "2", "--out", "json")
        assert code == EXIT_OK
        got = json.loads(out)
        assert 0.9 < got["lag1_autocorrelation"] < 1.0
        assert 0 < got["acceptance_rate"] < 1

    def test_logistic_summary(self, capsys):
        code, out, _ = run(capsys, "experiment", "logistic", "--n", "2000",
                           "--n-obs", "50", "--p-coef", "3", "--seed", "2", "--out", "json")
        assert code == EXIT_OK
        got = json.loads(out)
        assert len(got["posterior_mean"]) == 3
        assert got["ess"] > 0


class TestThreadCap:
    def test_mcse_threads_caps_pools_before_numpy_loads(self):
        import subprocess
        import sys

        probe = (
            "import os\n"
            "from mcvar._main import _cap_threads\n"
            "_cap_threads()\n"
            "assert os.environ['OMP_NUM_THREADS'] == '2'\n"
            "from mcvar.cli import main\n"
            "raise SystemExit(main(['miness', '--p', '3']))\n"
        )
        env = dict(os.environ, MCSE_THREADS="2")
        env.pop("OMP_NUM_THREADS", None)
        out = subprocess.run([sys.executable, "-c", probe], env=env, capture_output=True, text=True)
        assert out.returncode == EXIT_OK
        assert out.stdout.strip() == "8123"

    def test_garbage_value_is_ignored(self, monkeypatch):
        from mcvar._main import _cap_threads

        monkeypatch.setenv("MCSE_THREADS", "lots")
        monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
        _cap_threads()
        assert "OMP_NUM_THREADS" not in os.environ


class TestExitCodePartition:
    def test_usage_error_from_argparse(self, capsys):
        assert main(["estimate"]) == EXIT_USAGE

    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_numerical_failure_exit(self, capsys, tmp_path):
        # antithetic chain: batch means at b=12 vanish exactly, so this
        # custom lugsail mix is certainly negative and ESS must refuse
        f = tmp_path / "anti.csv"
        f.write_text("\n".join(str(1.0 * (-1) ** i) for i in range(40)) + "\n")
        code = main(["ess", str(f), "--method", "bm", "--b", "12", "--lugsail", "custom",
                     "--r", "12", "--c", "0.9"])
        out = capsys.readouterr()
        assert code == EXIT_NUMERICAL
        assert "numerical" in out.err
