import pytest

from l1drift.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_estimate_zero_noise(capsys):
    code, out, _ = run_cli(capsys, "estimate", "--kernel", "fbm:H=0.7", "--theta0", "1", "--x0", "1",
                           "--eps", "0", "--n", "256", "--theta-lo", "0", "--theta-hi", "2", "--seed", "42")
    assert code == 0
    line = [l for l in out.splitlines() if l.startswith("theta_hat")][0]
    assert abs(float(line.split("=")[1]) - 1.0) <= 1e-6


def test_gdelta(capsys):
    code, out, _ = run_cli(capsys, "gdelta", "--theta0", "0", "--x0", "1", "--delta", "1", "--T", "1")
    assert code == 0
    assert "0.3678794" in out


def test_missing_key_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("kernel = fbm:H=0.7\ntheta0 = 1\nx0 = 1\neps_list = 0.3,0.1\nn = 32\n"
                   "theta-lo = 0\ntheta-hi = 2\nreplicates = 10\n")
    code, _, err = run_cli(capsys, "consistency", "--config", str(cfg))
    assert code == 2
    assert "delta" in err


def test_bad_config_lines(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("colour = blue\n")
    assert run_cli(capsys, "gdelta", "--config", str(cfg))[0] == 2
    cfg.write_text("delta = abc\n")
    assert run_cli(capsys, "gdelta", "--config", str(cfg))[0] == 2
    assert run_cli(capsys, "gdelta", "--bogus", "1")[0] == 2


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("# separation\ntheta0 = 0\nx0 = 1\ndelta = 0.5  # overridden below\n")
    _, out, _ = run_cli(capsys, "gdelta", "--config", str(cfg), "--delta", "1")
    assert "0.3678794" in out


def test_domain_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "estimate", "--kernel", "bm", "--theta0", "1", "--x0", "0",
                           "--eps", "0.1", "--n", "16", "--theta-lo", "0", "--theta-hi", "2")
    assert code == 1 and err


def test_simulate_writes_identical_files(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        code, _, _ = run_cli(capsys, "simulate", "--kernel", "subfbm:H=0.6", "--theta0", "0.5", "--x0", "1",
                             "--eps", "0.2", "--n", "64", "--seed", "7", "--out", str(d))
        assert code == 0
        outs.append(((d / "path.csv").read_bytes(), (d / "driver.csv").read_bytes()))
    assert outs[0] == outs[1]
    lines = outs[0][0].decode().splitlines()
    assert lines[0].startswith("# l1drift root_seed=7")
    assert lines[1] == "t,X"
    assert len(lines) == 2 + 65


def test_simulate_euler_stdout(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--kernel", "bm", "--theta0", "1", "--x0", "1",
                           "--eps", "0", "--n", "4", "--scheme", "euler")
    assert code == 0
    rows = out.splitlines()
    assert rows[1] == "t,X" and rows[-1].split(",")[1] == repr((1.25) ** 4)


@pytest.mark.parametrize("threads", ["1", "2"])
def test_bounds_report_independent_of_threads(tmp_path, capsys, threads):
    d = tmp_path / threads
    code, out, _ = run_cli(capsys, "bounds", "--kernel", "fbm:H=0.7", "--n", "16", "--replicates", "300",
                           "--seed", "3", "--threads", threads, "--out", str(d))
    assert code == 0 and "gronwall: PASS" in out
    ref = tmp_path / "ref"
    if not ref.exists():
        run_cli(capsys, "bounds", "--kernel", "fbm:H=0.7", "--n", "16", "--replicates", "300",
                "--seed", "3", "--out", str(ref))
    for f in ref.iterdir():
        assert (d / f.name).read_bytes() == f.read_bytes()
