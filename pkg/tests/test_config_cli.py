import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from coldplasma import cli
from coldplasma.config import ConfigError, load_config, parse_config
from coldplasma.io import CsvWriter, format_float, write_csv, write_summary

ROOT = Path(__file__).resolve().parents[1]
FLAME_CFG = ROOT / "configs" / "flame.cfg"
ZERO_CFG = ROOT / "configs" / "zero.cfg"

MINIMAL = """
[pulse]
kind = gaussian
wavelength = 1e-4
width = 3e-4
amplitude = 1
"""

SMALL = MINIMAL + """
polarization = circular
[plasma]
n0 = 1e18
[particle]
velocity = 0.1, 0.0, -0.2
[run]
t_count = 11
Z_max = 2e-4
Z_count = 3
samples_per_wavelength = 8
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def run(args, tmp_path, capsys=None):
    out = tmp_path / "out"
    code = cli.main(list(args) + ["--out", str(out)])
    captured = capsys.readouterr() if capsys is not None else None
    return code, out, captured


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.wavelength == 1e-4
    assert cfg.species().label == "electron"
    assert cfg.n0 == 0.0
    assert cfg.threshold == 0.1
    np.testing.assert_array_equal(cfg.direction(), [0, 0, 1])
    p = cfg.pulse()
    assert p.polarization == "linear"
    assert p.dimensionless_amplitude(p.envelope.center) == pytest.approx(1.0, rel=1e-14)


def test_negative_density_names_key_and_line():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "[plasma]\nn0 = -1\n")
    (msg,) = info.value.errors
    assert "line 8" in msg and "n0" in msg and ">= 0" in msg


def test_all_errors_reported_together():
    text = MINIMAL + "[lasers]\npower = 3\n[plasma]\nn0 = 1\nn0 = 2\nbogus = 1\n[run]\nt_count = many\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    errs = info.value.errors
    assert len(errs) == 4
    assert any("unknown section [lasers]" in e for e in errs)
    assert any("duplicate key 'n0'" in e and "first set on line 10" in e for e in errs)
    assert any("unknown key 'bogus'" in e for e in errs)
    assert any("t_count" in e and "line 14" in e for e in errs)


def test_cross_checks():
    with pytest.raises(ConfigError, match="missing required key 'width'"):
        parse_config("[pulse]\nkind = gaussian\nwavelength = 1e-4\n")
    with pytest.raises(ConfigError, match="either amplitude or peak_field"):
        parse_config(MINIMAL + "peak_field = 1e8\n")
    with pytest.raises(ConfigError, match=r"\|beta\| < 1"):
        parse_config(MINIMAL + "[particle]\nvelocity = 0.8, 0.8, 0\n")
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/run.cfg")


def test_flame_config_parses():
    cfg = load_config(FLAME_CFG)
    assert cfg.n0 == 1e18
    assert cfg.pulse().support == pytest.approx((0.0, 2e-3), abs=1e-12)


def test_csv_and_summary_helpers(tmp_path):
    assert format_float(0.1) == "0.10000000000000001"
    with CsvWriter(tmp_path / "a.csv", ["x", "y"]) as w:
        w.write([np.array([1.0, 2.0]), np.array([3.0, 4.0])])
        w.write([[5.0], [6.0]])
        assert w.rows == 3
    assert (tmp_path / "a.csv").read_bytes() == b"x,y\n1,3\n2,4\n5,6\n"
    with pytest.raises(ValueError):
        write_csv(tmp_path / "b.csv", ["x", "y"], [[1.0], [1.0, 2.0]])
    write_summary(tmp_path / "s.json", {"a": np.float64(1.5), "b": np.arange(2), "c": math.nan, "d": np.True_})
    data = json.loads((tmp_path / "s.json").read_text())
    assert data == {"a": 1.5, "b": [0, 1], "c": "nan", "d": True}


EXPECTED = {
    "pulse": ["pulse.csv"],
    "zero-density": ["phase_functions.csv", "trajectories.csv"],
    "ponderomotive": ["ponderomotive.csv"],
    "test-particle": ["trajectory.csv"],
    "correction": ["correction.csv"],
    "slingshot": ["slingshot.csv"],
    "oracle": ["oracle.csv"],
}


# the short test pulse trips the slowness warning of the ponderomotive profile
@pytest.mark.filterwarnings("ignore:envelope slowness")
@pytest.mark.parametrize("command", list(EXPECTED))
def test_every_subcommand_writes_outputs(command, tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL)
    code, out, _ = run([command, str(cfg)], tmp_path, capsys)
    assert code in (cli.EXIT_OK, cli.EXIT_VALIDATION)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["command"] == command and summary["outputs"] == EXPECTED[command]
    assert summary["status"] == code
    for name in EXPECTED[command]:
        lines = (out / name).read_text().splitlines()
        assert len(lines) >= 2
        assert all(len(l.split(",")) == len(lines[0].split(",")) for l in lines)


def test_zero_density_rows_are_z_major(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL)
    code, out, _ = run(["zero-density", str(cfg)], tmp_path, capsys)
    assert code == 0
    lines = (out / "trajectories.csv").read_text().splitlines()
    assert len(lines) == 1 + 3 * 11
    Z = [float(l.split(",")[-1]) for l in lines[1:]]
    assert Z == sorted(Z) and Z[0] == 0.0 and Z[-1] == 2e-4


def test_output_is_deterministic(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL.replace("Z_count = 3", "Z_count = 5000"))
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["zero-density", str(cfg), "--out", str(a)]) == 0
    assert cli.main(["zero-density", str(cfg), "--out", str(b), "--threads", "4"]) == 0
    capsys.readouterr()
    for name in ("phase_functions.csv", "trajectories.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_slingshot_on_flame(tmp_path, capsys):
    code, out, cap = run(["slingshot", str(FLAME_CFG)], tmp_path, capsys)
    assert code == cli.EXIT_OK
    assert "validity     = PASS" in cap.out and "MeV" in cap.out
    res = json.loads((out / "summary.json").read_text())["result"]
    assert 0.5 <= res["K_xi0_sq"] <= 2 and 0.5 <= res["H_MeV"] <= 20


def test_validation_failure_exit_code(tmp_path, capsys):
    code, _, cap = run(["slingshot", str(FLAME_CFG), "--threshold-T", "0.03"], tmp_path, capsys)
    assert code == cli.EXIT_VALIDATION
    assert "validity     = FAIL" in cap.out


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MINIMAL + "[plasma]\nn0 = -1\n")
    code, out, cap = run(["pulse", str(cfg)], tmp_path, capsys)
    assert code == cli.EXIT_CONFIG
    assert "line 8" in cap.err
    assert not (out / "summary.json").exists()
    # a correction without plasma is a usage error too
    cfg = write_cfg(tmp_path, MINIMAL, "noplasma.cfg")
    assert run(["correction", str(cfg)], tmp_path, capsys)[0] == cli.EXIT_CONFIG
    assert run(["pulse"], tmp_path, capsys)[0] == cli.EXIT_CONFIG
    assert run(["pulse", str(cfg), "--threads", "0"], tmp_path, capsys)[0] == cli.EXIT_CONFIG


def test_numerical_error_exit_code(tmp_path, capsys, monkeypatch):
    import coldplasma.pulse as mod

    monkeypatch.setattr(mod.integrate, "quad", lambda func, a, b, **kw: (1.0, 1.0, {"last": 100}))
    cfg = write_cfg(tmp_path, MINIMAL)
    code, _, cap = run(["pulse", str(cfg)], tmp_path, capsys)
    assert code == cli.EXIT_NUMERICAL
    assert "numerical error [pulse]" in cap.err


def test_validate_zero_pulse(tmp_path, capsys):
    code, _, cap = run(["validate", str(ZERO_CFG), "--threads", "4"], tmp_path, capsys)
    assert code == cli.EXIT_OK
    last = cap.out.strip().splitlines()[-1]
    k, n = last.split()[0].split("/")
    assert k == n


@pytest.mark.skipif(shutil.which("coldplasma") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["coldplasma", "pulse", str(ZERO_CFG), "--out", str(tmp_path)], capture_output=True,
                          text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "pulse.csv").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "coldplasma.cli", "--version"], capture_output=True, text=True,
                          timeout=120)
    assert proc.returncode == 0 and "coldplasma" in proc.stdout
