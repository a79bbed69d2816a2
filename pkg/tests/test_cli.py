import csv
import json
import math

import numpy as np
import pytest

from nmep.cli import parse_time, run
from nmep.eigen import decompose
from nmep.errors import InvalidInputError
from nmep.model import SystemConfig

SMALL = ["--delta-omega", "0.002", "--gamma", "0.0035", "--n-modes", "201"]


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def _manifest(path):
    return json.loads(path.with_name(path.stem + ".manifest.json").read_text())


def test_eigen_csv_format(tmp_path):
    out = tmp_path / "eig.csv"
    assert run(["eigen", *SMALL, "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    header, data = _read_csv(out)
    assert header == ["k", "omega_tilde", "alpha", "weight", "residual"]
    assert data.shape == (202, 5)
    assert np.all(np.diff(data[:, 0]) >= 0)
    # 17 significant digits round-trip to the same double
    dec = decompose(SystemConfig.from_gamma(0.0035, 0.002, 201))
    np.testing.assert_array_equal(data[:, 1], dec.omega_tilde)
    np.testing.assert_array_equal(data[:, 3], dec.weight)
    for field in raw.decode().splitlines()[1].split(","):
        mantissa = field.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
        assert len(mantissa) <= 17
    man = _manifest(out)
    assert man["subcommand"] == "eigen" and man["outputs"] == [str(out)]
    assert man["derived"]["gamma"] == pytest.approx(0.0035, rel=1e-14)
    assert man["config"]["coupling"] > 0
    assert all(c["passed"] for c in man["checks"])


def test_repeated_runs_are_byte_identical(tmp_path):
    files = []
    for d in ("a", "b"):
        out = tmp_path / d / "traj.csv"
        assert run(["evolve", *SMALL, "--t-max", "1TR", "--samples-per-period", "200", "--norm",
                    "--out", str(out)]) == 0
        files.append(out)
    assert files[0].read_bytes() == files[1].read_bytes()
    m = [f.with_name("traj.manifest.json").read_text().replace(str(f.parent), "") for f in files]
    assert m[0] == m[1]


def test_evolve_columns_and_checks(tmp_path):
    out = tmp_path / "traj.csv"
    assert run(["evolve", *SMALL, "--t-max", "2TR", "--samples-per-period", "100", "--norm",
                "--out", str(out)]) == 0
    header, data = _read_csv(out)
    assert header == ["t", "re_a", "im_a", "abs2_a", "norm"]
    assert data.shape[0] == 201
    np.testing.assert_allclose(data[:, 3], data[:, 1] ** 2 + data[:, 2] ** 2, rtol=1e-12, atol=1e-300)
    man = _manifest(out)
    assert man["t_max"] == pytest.approx(2 * math.pi / 0.002 * 2, rel=1e-15)
    assert {c["name"] for c in man["checks"]} == {"initial_amplitude_error", "max_norm_deviation"}
    assert all(c["passed"] for c in man["checks"])


def test_evolve_rk4(tmp_path):
    out = tmp_path / "rk.csv"
    assert run(["evolve", "--delta-omega", "0.002", "--gamma", "0.0035", "--n-modes", "41",
                "--t-max", "200", "--samples-per-period", "100", "--method", "rk4", "--out", str(out)]) == 0
    assert _manifest(out)["method"] == "rk4"


def test_revivals_columns(tmp_path):
    out = tmp_path / "rev.csv"
    assert run(["revivals", *SMALL, "--t-max", "2TR", "--samples-per-period", "100", "--out", str(out)]) == 0
    header, data = _read_csv(out)
    assert header == ["t", "a_0", "a_1", "a_2", "reconstructed"]
    np.testing.assert_allclose(data[:, 1:4].sum(axis=1), data[:, 4], rtol=1e-14, atol=1e-15)


def test_spectrum_peak_report(tmp_path):
    out = tmp_path / "s5.csv"
    assert run(["spectrum", "--order", "5", "--gamma", "0.0071", "--out", str(out)]) == 0
    header, data = _read_csv(out)
    assert header == ["omega", "S_analytic", "abs2_S_analytic"]
    report = json.loads((tmp_path / "s5.peaks.json").read_text())
    assert report["order"] == 5 and report["count"] == len(report["peaks"]) == 11
    assert set(report["peaks"][0]) == {"omega", "height", "fwhm"}
    man = _manifest(out)
    assert sorted(man["outputs"]) == sorted([str(out), str(tmp_path / "s5.peaks.json")])


def test_spectrum_window(tmp_path):
    out = tmp_path / "w.csv"
    assert run(["spectrum", "--order", "1", *SMALL, "--spacing", "0.005", "--window", "1TR:2TR",
                "--samples-per-period", "400", "--out", str(out)]) == 0
    header, _ = _read_csv(out)
    assert header[3:] == ["re_S_windowed", "im_S_windowed", "abs2_S_windowed"]
    # strict JSON: unresolved widths are null, never NaN
    json.loads((tmp_path / "w.peaks.json").read_text(), parse_constant=lambda c: pytest.fail(c))


def test_ep_matrix_json(tmp_path):
    out = tmp_path / "ep.json"
    assert run(["ep-matrix", "--order", "3", "--gamma", "0.0035", "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["order"] == 4 and obj["algebraic_multiplicity"] == 4
    assert obj["geometric_multiplicity"] == 1 and obj["nilpotency_index"] == 4
    assert obj["eigenvalue"] == -0.0035
    assert np.array(obj["matrix"]).shape == (4, 4)


def test_out_dir_default_name(tmp_path):
    assert run(["ep-matrix", "--order", "1", "--gamma", "1", "--out-dir", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "ep_matrix.json").exists()


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("delta_omega = 0.002\ncoupling = 0.0015\nn_modes = 101\n")
    out = tmp_path / "e.csv"
    assert run(["eigen", "--config", str(cfg), "--gamma", "0.0035", "--out", str(out)]) == 0
    man = _manifest(out)
    assert man["config"]["n_modes"] == 101
    assert man["derived"]["gamma"] == pytest.approx(0.0035, rel=1e-14)


@pytest.mark.parametrize("argv", [
    ["eigen", "--gamma", "0.0035", "--coupling", "0.001", "--out", "x.csv"],
    ["eigen", "--gamma", "0.0035"],
    ["eigen", "--gamma", "0.0035", "--bogus", "--out", "x.csv"],
    ["eigen", "--gamma", "0.0035", "--n-modes", "400", "--out", "x.csv"],
    ["evolve", "--gamma", "0.0035", "--t-max", "threeTR", "--out", "x.csv"],
    ["frobnicate"],
    [],
])
def test_invalid_input_exit_one(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == 1
    err = capsys.readouterr().err.strip()
    assert err and len(err.splitlines()) == 1
    assert not (tmp_path / "x.csv").exists()


def test_missing_config_file(tmp_path):
    assert run(["eigen", "--config", str(tmp_path / "nope"), "--out", str(tmp_path / "e.csv")]) == 1


def test_parse_time():
    T = 2 * math.pi / 0.002
    assert parse_time("3TR", T) == 3 * T
    assert parse_time(" 2 TR", T) == 2 * T
    assert parse_time("0.5TR", T) == 0.5 * T
    assert parse_time("125.5", T) == 125.5
    with pytest.raises(InvalidInputError):
        parse_time("TR", T)


def test_verify_quick(tmp_path, capsys):
    out = tmp_path / "verify.json"
    assert run(["verify", "--suite", "quick", "--out", str(out)]) == 0
    man = json.loads(out.read_text())
    assert man["failures"] == []
    assert len(man["checks"]) >= 20
    assert all(set(c) >= {"name", "measured", "tolerance", "passed"} for c in man["checks"])
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == len(man["checks"]) and all(l.startswith("PASS ") for l in lines)


def test_numerical_failure_exit_two(tmp_path, monkeypatch):
    import nmep.cli as cli
    from nmep.errors import SolverError

    def broken(*a, **k):
        raise SolverError("root bracket lost")

    monkeypatch.setattr(cli, "decompose", broken)
    assert run(["eigen", *SMALL, "--out", str(tmp_path / "e.csv")]) == 2


def test_verification_failure_exit_three(tmp_path, monkeypatch):
    import nmep.cli as cli
    from nmep.verify import Check

    monkeypatch.setattr(cli, "run_suite", lambda suite: [Check("ok", 0.0, 1.0, True),
                                                         Check("broken", 2.0, 1.0, False)])
    out = tmp_path / "v.json"
    assert run(["verify", "--out", str(out)]) == 3
    assert json.loads(out.read_text())["failures"] == ["broken"]
