import numpy as np
import pytest

from reputax.cli import main

SMALL = """
theta_grid_size = 101
tau_l_points = 21
tau_b_points = 21
"""


def write_config(tmp_path, body, name="run.toml"):
    path = tmp_path / name
    path.write_text(body)
    return str(path)


def data_rows(path):
    return [line for line in path.read_text().splitlines()
            if line and not line.startswith("#")][1:]  # drop params + header


def read_policy(path):
    return np.array([[float(x) for x in row.split(",")] for row in data_rows(path)])


class TestSolveStatic:
    def test_single_probe_zero_region(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "theta_probes = [0.5]\n")
        assert main(["solve-static", "--config", cfg, "--out", str(tmp_path)]) == 0
        rows = data_rows(tmp_path / "static_policy.csv")
        assert len(rows) == 1
        theta, r_star, *_ = rows[0].split(",")
        assert theta == "0.500000000"
        assert r_star == "0.000000000"

    def test_cutoff_file(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        assert main(["solve-static", "--config", cfg, "--out", str(tmp_path)]) == 0
        assert "0.594603558" in (tmp_path / "cutoff.txt").read_text()

    def test_params_header_records_configuration(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "theta_probes = [0.5]\n")
        main(["solve-static", "--config", cfg, "--out", str(tmp_path)])
        first = (tmp_path / "static_policy.csv").read_text().splitlines()[0]
        assert first.startswith("# params: ")
        assert "beta=0.95" in first

    def test_unknown_key_exits_2_without_files(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "not_a_key = 1\n")
        out = tmp_path / "out"
        assert main(["solve-static", "--config", cfg, "--out", str(out)]) == 2
        assert not out.exists()

    def test_malformed_toml_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, "beta = [unclosed\n")
        assert main(["solve-static", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_out_of_range_value_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, "beta = 1.5\n")
        assert main(["solve-static", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["solve-static", "--config", str(tmp_path / "nope.toml"),
                     "--out", str(tmp_path)]) == 2

    def test_rerun_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "theta_probes = [0.3, 0.7, 0.9]\n")
        main(["solve-static", "--config", cfg, "--out", str(tmp_path)])
        first = (tmp_path / "static_policy.csv").read_bytes()
        main(["solve-static", "--config", cfg, "--out", str(tmp_path)])
        assert (tmp_path / "static_policy.csv").read_bytes() == first


class TestSolveDynamic:
    def test_outputs_and_diagnostics(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        assert main(["solve-dynamic", "--config", cfg, "--out", str(tmp_path)]) == 0
        assert (tmp_path / "dynamic_policy.csv").is_file()
        assert (tmp_path / "value.csv").is_file()
        diag = (tmp_path / "diagnostics.txt").read_text()
        assert "value_monotone=True" in diag
        assert "value_convex=True" in diag
        assert "revenue_monotone=True" in diag
        cutoff = float([ln for ln in diag.splitlines()
                        if ln.startswith("dynamic_cutoff=")][0].split("=")[1])
        assert cutoff <= 0.594604 + 0.01 + 1e-9

    def test_beta_zero_matches_static(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "beta = 0.0\n")
        assert main(["solve-static", "--config", cfg, "--out", str(tmp_path)]) == 0
        assert main(["solve-dynamic", "--config", cfg, "--out", str(tmp_path)]) == 0
        static = read_policy(tmp_path / "static_policy.csv")
        dynamic = read_policy(tmp_path / "dynamic_policy.csv")
        assert static.shape == dynamic.shape
        assert np.max(np.abs(static - dynamic)) <= 1e-6

    def test_tiny_grid_is_well_formed(self, tmp_path):
        cfg = write_config(tmp_path, "theta_grid_size = 3\ntau_l_points = 3\ntau_b_points = 3\n")
        assert main(["solve-dynamic", "--config", cfg, "--out", str(tmp_path)]) == 0
        assert len(data_rows(tmp_path / "dynamic_policy.csv")) == 3

    def test_nonconvergence_exits_3(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "max_iters = 2\n")
        assert main(["solve-dynamic", "--config", cfg, "--out", str(tmp_path)]) == 3


class TestSweep:
    def test_garble_passes(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "garble_eps_list = [0.0, 0.2]\n")
        assert main(["sweep", "garble", "--config", cfg, "--out", str(tmp_path)]) == 0
        rows = data_rows(tmp_path / "sweep_garble.csv")
        assert len(rows) == 2 * 101
        assert all(row.endswith(",pass") for row in rows)

    def test_descending_eps_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "garble_eps_list = [0.2, 0.0]\n")
        assert main(["sweep", "garble", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_persistence_passes(self, tmp_path):
        cfg = write_config(tmp_path, SMALL
                           + "persist_pi_hh_list = [0.9, 0.95]\n"
                           + "persist_pi_oo_list = [0.9, 0.95]\n")
        assert main(["sweep", "persist", "--config", cfg, "--out", str(tmp_path)]) == 0

    def test_enforce_passes(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "lambda_list = [0.0, 1.0]\nphi_list = [0.0]\n")
        assert main(["sweep", "enforce", "--config", cfg, "--out", str(tmp_path)]) == 0

    def test_mixinfo_passes(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "mix_w_l = 0.0\nmix_w_b = 2.0\n")
        assert main(["sweep", "mixinfo", "--config", cfg, "--out", str(tmp_path)]) == 0
        assert (tmp_path / "sweep_mixinfo.csv").is_file()

    def test_sweep_rerun_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "garble_eps_list = [0.0, 0.2]\n")
        main(["sweep", "garble", "--config", cfg, "--out", str(tmp_path)])
        first = (tmp_path / "sweep_garble.csv").read_bytes()
        main(["sweep", "garble", "--config", cfg, "--out", str(tmp_path)])
        assert (tmp_path / "sweep_garble.csv").read_bytes() == first


class TestSimulate:
    def test_row_count_and_determinism(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "n_paths = 2\nhorizon = 3\nseed = 42\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
        first = (tmp_path / "paths.csv").read_bytes()
        assert len(data_rows(tmp_path / "paths.csv")) == 6
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
        assert (tmp_path / "paths.csv").read_bytes() == first

    def test_history_verdicts(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "history_probes = [0.8]\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
        text = (tmp_path / "history_check.txt").read_text()
        assert "weak=pass" in text
        assert "all_weak=pass" in text

    def test_honest_world_types(self, tmp_path):
        cfg = write_config(tmp_path, SMALL
                           + "initial_theta = 1.0\npi_hh = 1.0\nn_paths = 2\nhorizon = 4\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
        for row in data_rows(tmp_path / "paths.csv"):
            assert row.split(",")[2] == "H"

    def test_missing_policy_file_exits_3(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + f'policy_file = "{tmp_path / "nope.csv"}"\n')
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 3

    def test_policy_file_roundtrip(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        main(["solve-dynamic", "--config", cfg, "--out", str(tmp_path)])
        policy_path = tmp_path / "dynamic_policy.csv"
        cfg2 = write_config(tmp_path, SMALL + f'policy_file = "{policy_path}"\n'
                            + "n_paths = 1\nhorizon = 3\n", name="sim.toml")
        assert main(["simulate", "--config", cfg2, "--out", str(tmp_path)]) == 0

    def test_seed_override_changes_draws(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "n_paths = 1\nhorizon = 30\n")
        main(["simulate", "--config", cfg, "--out", str(tmp_path), "--seed", "1"])
        first = (tmp_path / "paths.csv").read_bytes()
        main(["simulate", "--config", cfg, "--out", str(tmp_path), "--seed", "2"])
        assert (tmp_path / "paths.csv").read_bytes() != first


class TestReplicateFigures:
    def test_replication_within_tolerance(self, tmp_path):
        cfg = write_config(tmp_path, "")
        assert main(["replicate-figures", "--config", cfg, "--out", str(tmp_path)]) == 0
        fig2 = data_rows(tmp_path / "figure2.csv")
        assert len(fig2) == 16
        assert all(row.split(",")[3] == "0.000000000" for row in fig2)
        fig1 = data_rows(tmp_path / "figure1.csv")
        assert all(float(row.split(",")[3]) <= 0.005 for row in fig1)

    def test_defaults_need_no_config(self, tmp_path):
        assert main(["replicate-figures", "--out", str(tmp_path)]) == 0
