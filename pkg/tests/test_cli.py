import csv
import shutil
import subprocess
import sys

import pytest

from artifact.cli import EXIT_CONFIG, EXIT_OK, ConfigError, fmt, load_config, main

MINIMAL = """\
[physics]
hbar = 0.2
mass = 1
alpha = 1
sigma0 = 1

[state]
q = -2
p = 1

[time]
t_list = 1, 3, 4
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_minimal_config_three_rows(tmp_path):
    cfg = write(tmp_path, MINIMAL)
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = read_rows(out / "errors.csv")
    assert len(rows) == 4
    head = rows[0]
    assert head[:9] == ["quantity", "hbar", "m", "alpha", "sigma0", "q", "p", "t", "lhs"]
    assert head[-1] == "fitted_C_flag"
    assert any(h.startswith("rhs_") for h in head)
    assert [r[7] for r in rows[1:]] == ["1", "3", "4"]
    assert (out / "sweep_summary.csv").exists()
    assert "errors.csv" in (out / "plots.gp").read_text()


def test_csv_is_crlf_with_round_trip_floats(tmp_path):
    cfg = write(tmp_path, MINIMAL)
    out = tmp_path / "out"
    main(["--config", cfg, "--out", str(out)])
    raw = (out / "errors.csv").read_bytes()
    assert raw.count(b"\r\n") == 4
    for x in (0.1, 1 / 3, 2.0 ** -40, 12345.678901234567):
        assert float(fmt(x)) == x
    assert fmt(float("nan")) == ""


def test_q_zero_is_config_error(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL.replace("q = -2", "q = 0"))
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "qp != 0" in err
    assert "q = 0 or p = 0 are excluded" in err
    assert "run.ini:8" in err


def test_beta_mismatch(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL.replace("sigma0 = 1", "sigma0 = 1\nbeta = 5"))
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "2 alpha / hbar" in capsys.readouterr().err
    ok = write(tmp_path, MINIMAL.replace("sigma0 = 1", "sigma0 = 1\nbeta = 10"), "ok.ini")
    assert load_config(ok).alpha == 1.0


@pytest.mark.parametrize("bad, needle", [
    ("[physics]\nhbar = 0.2\ncolour = 3\n", "unknown key 'colour'"),
    ("[extras]\nx = 1\n", "unknown section"),
    ("[physics]\nhbar = -1\n", "hbar must be positive"),
    ("[physics]\nhbar = abc\n", "hbar"),
    ("[suite]\nname = nonsense\n", "unknown suite"),
    ("[time]\nt_range = 0, 1, 2.5\n", "t_range"),
])
def test_config_errors(tmp_path, bad, needle):
    with pytest.raises(ConfigError, match=needle):
        load_config(write(tmp_path, bad))


def test_missing_file(tmp_path):
    assert main(["--config", str(tmp_path / "absent.ini"), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_t_range_and_sweep_keys(tmp_path):
    text = MINIMAL.replace("t_list = 1, 3, 4", "t_range = 0, 4, 5") + (
        "\n[sweep]\nhbar_list = 0.1, 0.05\nlambda = 0.2\nc0 = 3\ndraws = 4\nseed = 7\n"
        "\n[numerics]\nrel_tol = 1e-9\nn_sd = 12\n\n[suite]\nname = lemmas\n")
    cfg = load_config(write(tmp_path, text))
    assert cfg.times == (0.0, 1.0, 2.0, 3.0, 4.0)
    assert cfg.hbar_list == (0.1, 0.05)
    assert (cfg.lam, cfg.c0, cfg.draws, cfg.seed, cfg.suite) == (0.2, 3.0, 4, 7, "lemmas")


def test_suite_flag_overrides(tmp_path):
    cfg = load_config(write(tmp_path, MINIMAL + "\n[suite]\nname = oracle\n"), "theorem2")
    assert cfg.suite == "theorem2"


def test_threads_do_not_change_output(tmp_path):
    text = MINIMAL.replace("t_list = 1, 3, 4", "t_list = 0.5, 1, 3, 4, 5")
    cfg = write(tmp_path, text)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--config", cfg, "--out", str(a), "--threads", "1"]) == EXIT_OK
    assert main(["--config", cfg, "--out", str(b), "--threads", "4"]) == EXIT_OK
    for name in ("errors.csv", "sweep_summary.csv", "plots.gp"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_bad_thread_count(tmp_path):
    assert main(["--threads", "0", "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_module_and_console_entry_points(tmp_path):
    res = subprocess.run([sys.executable, "-m", "artifact", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "--suite" in res.stdout
    exe = shutil.which("deltasc")
    if exe is None:
        pytest.skip("console script not on PATH")
    res = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert res.returncode == 0
