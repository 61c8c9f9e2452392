import json
import subprocess
import sys

import numpy as np
import pytest

from bingham_dg.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_UNKNOWN_BENCHMARK, run_cli
from bingham_dg.config import parse_continuation, parse_orders, read_ini, resolve
from bingham_dg.errors import ConfigError
from bingham_dg.output import SNAPSHOT_COLUMNS, read_snapshot


def test_constant_free_surface_run(tmp_path, capsys):
    code = run_cli(["--benchmark", "constant-free-surface", "--orders", "1,1,1,1", "--nel", "20",
                    "--tfinal", "0.05", "--out", str(tmp_path)])
    assert code == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["Linf_h"] <= 1e-13 and summary["status"] == "ok"
    assert summary["steps"] == 5
    on_disk = json.loads((tmp_path / "summary.json").read_text())
    assert on_disk["config"]["benchmark"]["orders"] == [1, 1, 1, 1]
    snaps = sorted(tmp_path.glob("snapshot_t*.csv"))
    assert len(snaps) == 1
    assert snaps[0].read_text().splitlines()[0] == ",".join(SNAPSHOT_COLUMNS)


def test_dam_break_smoke_run(tmp_path, capsys):
    code = run_cli(["--benchmark", "dam-break", "--nel", "20", "--dt", "1e-5", "--tfinal", "5e-5", "--reg", "1",
                    "--gamma", "1e2", "--beta", "1e2", "--out", str(tmp_path / "run1"), "--snapshot-every", "2"])
    assert code == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["steps"] == 5
    snaps = sorted((tmp_path / "run1").glob("snapshot_t*.csv"))
    assert len(snaps) == 3  # steps 2, 4 and the final one
    rows = read_snapshot(snaps[-1])
    assert rows.shape[1] == 5 and np.all(rows[:, 1] > 0)
    assert np.all(np.diff(rows[:, 0]) > 0)
    assert set(np.unique(rows[:, 4])) <= {0.0, 1.0}


def test_config_file_and_flag_override(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text("[benchmark]\nname = dam-break\nn_el = 10\ndt = 1e-5\nt_final = 2e-5\n"
                   "[regularization]\nvariant = 2\n[physics]\nsigma0 = 0.1\n")
    code = run_cli(["--config", str(ini), "--nel", "12"])
    assert code == EXIT_OK
    cfg = json.loads(capsys.readouterr().out)["config"]
    assert cfg["benchmark"]["n_el"] == 12
    assert cfg["regularization"]["variant"] == 2
    assert cfg["physics"]["sigma0"] == 0.1


def test_missing_benchmark_prints_usage(capsys):
    assert run_cli([]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "usage" in err and "benchmark" in err


def test_unknown_benchmark(capsys):
    assert run_cli(["--benchmark", "tsunami"]) == EXIT_UNKNOWN_BENCHMARK
    assert "tsunami" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["--benchmark", "dam-break", "--orders", "1,1,1"],
        ["--benchmark", "dam-break", "--nel", "abc"],
        ["--benchmark", "dam-break", "--reg", "4"],
        ["--benchmark", "dam-break", "--dt", "-1"],
        ["--benchmark", "dam-break", "--continuation", "100"],
        ["--benchmark", "dam-break", "--gamma", "0"],
        ["--benchmark", "dam-break", "--bogus"],
    ],
)
def test_malformed_input(argv, capsys):
    assert run_cli(argv) == EXIT_CONFIG


def test_malformed_config_file(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[benchmark]\nname = dam-break\nspeed = 3\n")
    assert run_cli(["--config", str(bad)]) == EXIT_CONFIG
    assert run_cli(["--config", str(tmp_path / "missing.ini")]) == EXIT_CONFIG


def test_solver_failure_exit_code(tmp_path, capsys):
    code = run_cli(["--benchmark", "dam-break", "--nel", "20", "--dt", "1", "--tfinal", "2", "--out", str(tmp_path)])
    assert code == EXIT_SOLVER
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["status"] == "failed" and summary["steps"] == 0
    assert "error" in capsys.readouterr().err


def test_parsers():
    assert parse_orders("2,1,1,1") == (2, 1, 1, 1)
    assert parse_continuation("100,3") == (100.0, 3)
    assert parse_continuation("off") is None
    for bad in ("1,2", "a,b,c,d", "1,1,1,-1"):
        with pytest.raises(ConfigError):
            parse_orders(bad)
    with pytest.raises(ConfigError):
        parse_continuation("100,3,4")


def test_read_ini_and_resolve(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[benchmark]\nname = constant-free-surface\norders = 2,1,1,1\n"
                   "[regularization]\ncontinuation = 100,2\n[output]\ndir = out\nsnapshot_every = 10\n")
    cfg = resolve(read_ini(ini))
    assert cfg.spec.orders == (2, 1, 1, 1)
    assert cfg.spec.reg.continuation == (100.0, 2)
    assert cfg.snapshot_every == 10 and cfg.out_dir.name == "out"
    assert cfg.spec.dt == 1e-2  # benchmark default kept


def test_console_entry_point_help():
    out = subprocess.run([sys.executable, "-m", "bingham_dg.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "--continuation" in out.stdout
