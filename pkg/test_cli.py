from pathlib import Path

import numpy as np
import pytest

from framework.errors import ConfigError
from main import main
from models import RunConfig
from models.config import OUTPUT_DIR_ENV
from services.output_store import OutputStore

DEFAULT_CONFIG = Path(__file__).parent / "config" / "default.yaml"

# small grids so every command finishes in seconds
SMALL = [
    "--set", "sim.R=8",
    "--set", "sim.N=64",
    "--set", "integrator.dt=2e-3",
    "--set", "sweep.N=128",
    "--set", "sweep.cutoff_scan=[4, 8]",
    "--set", "pulse.lambdas=[0, 1, 2]",
    "--set", "fock.R_F=2",
    "--set", "fock.R_F_scan=[1, 2]",
    "--set", "fock.random_states=50",
    "--set", "continuity.include_sea=false",
]


def test_default_file_mirrors_built_in_defaults():
    assert RunConfig.load(str(DEFAULT_CONFIG)).fingerprint() == RunConfig().fingerprint()


def test_overrides_change_fingerprint_of_their_section_only():
    base = RunConfig()
    changed = RunConfig.load(overrides=["fock.R_F=3"])
    assert changed.fock.R_F == 3
    assert changed.fingerprint("fock") != base.fingerprint("fock")
    assert changed.fingerprint("sim", "pulse") == base.fingerprint("sim", "pulse")


def test_output_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    assert RunConfig().output_dir == tmp_path
    assert RunConfig.load(output_dir="elsewhere").output_dir == Path("elsewhere")


@pytest.mark.parametrize("override, key", [
    ("sim.N=100", "sim.N"),
    ("packet.s=1", "packet.s"),
    ("sim.tf=0.5", "sim.tf"),
])
def test_invalid_config_names_offending_key(override, key):
    with pytest.raises(ConfigError) as err:
        RunConfig.load(overrides=[override])
    assert key in err.value.keys
    assert key in str(err.value)


def test_config_error_exits_with_code_1(tmp_path, capsys):
    code = main(["schwinger", "--output-dir", str(tmp_path), "--set", "sim.N=100"])
    assert code == 1
    assert "sim.N" in capsys.readouterr().err


def test_malformed_override_exits_with_code_1(tmp_path):
    assert main(["schwinger", "--output-dir", str(tmp_path), "--set", "fock.R_F"]) == 1


def test_schwinger_command_writes_table(tmp_path, capsys):
    code = main(["schwinger", "--output-dir", str(tmp_path), *SMALL])
    out = capsys.readouterr().out
    assert code == 0, out
    assert "min <H0> over 50 random states: " in out
    assert float(out.split("min <H0> over 50 random states: ")[1].split()[0]) > 0

    header, data = OutputStore(tmp_path).read_table("schwinger")
    assert header == ["R_F", "S_spectral", "S_direct", "abs_diff", "dim"]
    assert data[:, 0].tolist() == [1.0, 2.0]
    assert np.all(data[:, 1] > 0)
    assert data[1, 1] > data[0, 1]
    assert (tmp_path / "manifest.json").exists()


def test_coarse_step_fails_with_code_2(tmp_path, capsys):
    code = main(["verify-evolution", "--output-dir", str(tmp_path), *SMALL, "--set", "integrator.dt=0.05"])
    out = capsys.readouterr().out
    assert code == 2
    assert "FAIL" in out
    assert "step bound" in out


def test_report_reuses_fresh_outputs(tmp_path, capsys):
    args = ["report", "--output-dir", str(tmp_path), *SMALL]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert "schwinger: recomputed (missing)" in first

    report = (tmp_path / "report.md").read_text()
    assert "Schwinger term" in report
    assert "Hole theory" in report

    assert main(args) == 0
    assert "schwinger: reused" in capsys.readouterr().out

    assert main([*args, "--set", "fock.R_F_scan=[1]"]) == 0
    assert "schwinger: recomputed (stale: config changed)" in capsys.readouterr().out


def test_report_keeps_manifest_entries_of_every_output(tmp_path):
    assert main(["report", "--output-dir", str(tmp_path), *SMALL]) == 0
    store = OutputStore(tmp_path)
    for name in ["verify_evolution", "ht_sweep", "schwinger", "continuity", "report"]:
        assert store.fingerprint_of(name) is not None, name


def test_stores_sharing_a_directory_do_not_drop_entries(tmp_path):
    first = OutputStore(tmp_path)
    second = OutputStore(tmp_path)
    assert first.fingerprint_of("a") is None
    second.write_table("a", ["x"], [[1.0]], "fp-a")
    first.write_text("b", "text", "fp-b")
    assert first.is_fresh("a", "fp-a")
    assert second.is_fresh("b", "fp-b")


def test_ht_sweep_command_writes_named_columns(tmp_path, capsys):
    code = main(["ht-sweep", "--output-dir", str(tmp_path), *SMALL])
    assert code == 0, capsys.readouterr().out

    header, data = OutputStore(tmp_path).read_table("ht_sweep")
    assert header == ["lambda", "E_TR_t0", "dE_hvac", "d_xi_fp", "E_TR_tf", "predicted_E48", "abs_diff"]
    assert data.shape == (3, 7)
    assert np.all(data[:, 6] < 1e-8)


def test_continuity_command_reports_vacuum_density(tmp_path, capsys):
    code = main(["continuity", "--output-dir", str(tmp_path), *SMALL])
    out = capsys.readouterr().out
    assert code == 0, out
    assert "<0|rho|0> = 0.7957747155" in out

    header, data = OutputStore(tmp_path).read_table("continuity")
    assert header == ["dt", "packet"]
    assert data.shape == (2, 2)
    assert data[1, 0] == pytest.approx(0.5 * data[0, 0])
