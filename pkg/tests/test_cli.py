"""Command-line behavior: config resolution, outputs, determinism, exit codes."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from gkpforge import ConfigError
from gkpforge.cli import build_parser, load_config, main

_MINIMAL = """
[protocol]
n_qubits = 3
w_db = 10.0
"""

_DISPERSIVE_FAST = """
[protocol]
n_qubits = 2
w = 2.0

[dispersive]
n_flips = 1
fock_cutoff = 40

[output]
crop = 6.0
stride = 4
"""


def _write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


@pytest.fixture(scope="module")
def ideal_out(tmp_path_factory):
    """One shared run-ideal invocation; several tests read its files."""
    base = tmp_path_factory.mktemp("ideal")
    cfg = base / "run.toml"
    cfg.write_text(_MINIMAL)
    rc = main(["run-ideal", "--config", str(cfg), "--out", str(base / "out")])
    assert rc == 0
    return base


def test_load_config_applies_defaults(tmp_path):
    cfg = load_config(_write(tmp_path, _MINIMAL))
    assert cfg.protocol.n_qubits == 3
    assert cfg.protocol.w == pytest.approx(10.0 ** 0.5)
    assert cfg.protocol.p_q == pytest.approx(2.0 * math.sqrt(math.pi))
    assert cfg.protocol.vprep.theta_v == 2.6
    assert cfg.protocol.grid.n_points == 2048
    assert cfg.sim.alpha0 == 30.0
    assert cfg.sim.n_flips == 7
    assert cfg.sim.fock_cutoff == 80
    assert cfg.sim.noise.kappa_l == 0.0
    assert cfg.sim.include_number_coupling is True
    assert cfg.crop == 6.0 and cfg.stride == 4
    assert cfg.formats == ("csv", "json")
    assert cfg.echo["grid"]["n_points"] == 2048
    assert cfg.echo["protocol"]["w_db"] == 10.0
    # resolved step size is echoed, not the unset override
    assert cfg.echo["dispersive"]["dt"] == pytest.approx(cfg.sim.step_size())


@pytest.mark.parametrize(
    "body,fragment",
    [
        ("[protocol]\nw = 3.2\n", "n_qubits"),
        ("[protocol]\nn_qubits = 3\n", "exactly one"),
        ("[protocol]\nn_qubits = 3\nw = 3.2\nw_db = 10.0\n", "exactly one"),
        ("[protocol]\nn_qubits = 3\nw = 3.2\nbogus = 1\n", "bogus"),
        ("[protocol]\nn_qubits = 3\nw = 3.2\n\n[extra]\nx = 1\n", "extra"),
        ("[protocol]\nn_qubits = 3\nw = \"wide\"\n", "number"),
        ("[protocol]\nn_qubits = 2.5\nw = 3.2\n", "integer"),
        ("[protocol]\nn_qubits = 3\nw = 3.2\n\n[grid]\nn_points = 1000\n", "power of two"),
        (
            "[protocol]\nn_qubits = 3\nw = 3.2\n\n[dispersive]\n"
            "include_number_coupling = 1\n",
            "boolean",
        ),
        ("[protocol]\nn_qubits = 3\nw = 3.2\n\n[output]\nformats = [\"xml\"]\n", "formats"),
        (
            "[protocol]\nn_qubits = 3\nw = 3.2\n\n[dispersive]\nkappa_l = -0.1\n",
            "nonnegative",
        ),
    ],
)
def test_load_config_rejects(tmp_path, body, fragment):
    with pytest.raises(ConfigError, match=fragment):
        load_config(_write(tmp_path, body))


def test_peak_angle_outside_calibrated_range_warns_but_loads(tmp_path):
    body = "[protocol]\nn_qubits = 3\nw = 3.2\ntheta_v = 1.0\n"
    with pytest.warns(UserWarning):
        cfg = load_config(_write(tmp_path, body))
    assert cfg.protocol.vprep.theta_v == 1.0


def test_vstate_outputs_and_peaks(tmp_path):
    body = "[protocol]\nn_qubits = 4\nw = 4.0\nphi_v = 1.5707963267948966\n"
    cfg = _write(tmp_path, body)
    rc = main(["v-state", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0

    amp_rows = [
        l for l in (tmp_path / "amplitudes.csv").read_text().splitlines()
        if l and not l.startswith("#") and not l.startswith("index")
    ]
    assert len(amp_rows) == 16

    samples = [
        l.split(",") for l in (tmp_path / "interpolation.csv").read_text().splitlines()
        if l and not l.startswith("#") and not l.startswith("y")
    ]
    assert len(samples) == 512
    abs2 = np.array([float(r[3]) for r in samples])
    floor = 0.25 * abs2.max()
    peaks = [
        i for i in range(1, 511)
        if abs2[i] > abs2[i - 1] and abs2[i] >= abs2[i + 1] and abs2[i] > floor
    ]
    assert len(peaks) == 2


def test_run_ideal_fit_value(ideal_out):
    doc = json.loads((ideal_out / "out" / "fit.json").read_text())
    assert doc["converged"] is True
    assert abs(doc["delta"] - 0.39) < 0.04
    assert doc["config"]["protocol"]["n_qubits"] == 3
    for name in ("density.csv", "wigner.csv", "snapshots.csv", "fit.json"):
        assert (ideal_out / "out" / name).exists()


def test_run_ideal_metadata_echoes_defaults(ideal_out):
    header = (ideal_out / "out" / "density.csv").read_text().split("\n# q_axis", 1)[0]
    assert "# config: grid.n_points = 2048" in header
    assert "# config: protocol.theta_v = 2.6" in header
    assert "# config: dispersive.alpha0 = 30.0" in header
    assert "# config_hash: " in header


def test_run_ideal_reruns_byte_identical(ideal_out):
    rc = main([
        "run-ideal", "--config", str(ideal_out / "run.toml"),
        "--out", str(ideal_out / "out2"),
    ])
    assert rc == 0
    for name in ("density.csv", "wigner.csv", "snapshots.csv", "fit.json"):
        a = (ideal_out / "out" / name).read_bytes()
        b = (ideal_out / "out2" / name).read_bytes()
        assert a == b, name


def test_fit_gkp_agrees_with_run_fit(ideal_out, tmp_path):
    rc = main([
        "fit-gkp", str(ideal_out / "out" / "density.csv"),
        "--config", str(ideal_out / "run.toml"), "--out", str(tmp_path),
    ])
    assert rc == 0
    direct = json.loads((ideal_out / "out" / "fit.json").read_text())
    refit = json.loads((tmp_path / "fit.json").read_text())
    assert abs(direct["delta"] - refit["delta"]) < 0.02
    assert abs(direct["kappa"] - refit["kappa"]) < 0.03
    assert refit["source_hash"] == direct["config_hash"]


def test_snapshots_table_shape(ideal_out):
    lines = [
        l for l in (ideal_out / "out" / "snapshots.csv").read_text().splitlines()
        if l and not l.startswith("#")
    ]
    assert lines[0] == "snapshot,branch,q,re,im"
    body = [l.split(",") for l in lines[1:]]
    names = {r[0] for r in body}
    assert names == {"initial", "entangled", "transformed", "final"}
    branches = {int(r[1]) for r in body}
    assert branches == set(range(8))
    assert len(body) == 4 * 8 * 256


def test_run_dispersive_outputs(tmp_path):
    cfg = _write(tmp_path, _DISPERSIVE_FAST)
    rc = main(["run-dispersive", "--config", str(cfg), "--out", str(tmp_path / "d")])
    assert rc == 0
    for name in ("density.csv", "wigner.csv", "fit.json", "schedule.csv",
                 "diagnostics.json"):
        assert (tmp_path / "d" / name).exists()
    doc = json.loads((tmp_path / "d" / "diagnostics.json").read_text())
    assert doc["diagnostics"]["trace_drift"] < 1e-6
    assert doc["diagnostics"]["n_flips"] == 1
    assert doc["tolerances"]["trace"] == 1e-6
    sched = [
        l for l in (tmp_path / "d" / "schedule.csv").read_text().splitlines()
        if l and not l.startswith("#")
    ]
    assert len(sched) == 3  # header plus one segment per period at one flip
    assert sched[1].endswith("u_v;qft_inverse")


def test_sweep_rows_non_increasing(tmp_path):
    cfg = _write(tmp_path, _DISPERSIVE_FAST)
    rc = main([
        "sweep", "--config", str(cfg), "--channel", "osc-dephase",
        "--rates", "0,1e-4,1e-3", "--out", str(tmp_path / "s"),
    ])
    assert rc == 0
    rows = [
        l.split(",") for l in (tmp_path / "s" / "sweep.csv").read_text().splitlines()
        if l and not l.startswith("#") and not l.startswith("rate_ratio")
    ]
    assert len(rows) == 3
    assert [float(r[0]) for r in rows] == [0.0, 1e-4, 1e-3]
    assert all(r[1] == "osc-dephase" for r in rows)
    fids = [float(r[2]) for r in rows]
    assert fids[0] >= fids[1] >= fids[2]


def test_output_format_filter(tmp_path):
    body = (
        "[protocol]\nn_qubits = 2\nw = 2.0\n\n"
        "[dispersive]\nn_flips = 1\nfock_cutoff = 40\n\n"
        "[output]\nformats = [\"json\"]\n"
    )
    cfg = _write(tmp_path, body)
    rc = main(["run-dispersive", "--config", str(cfg), "--out", str(tmp_path / "j")])
    assert rc == 0
    assert (tmp_path / "j" / "fit.json").exists()
    assert (tmp_path / "j" / "diagnostics.json").exists()
    assert not (tmp_path / "j" / "density.csv").exists()
    assert not (tmp_path / "j" / "schedule.csv").exists()


def test_out_flag_overrides_configured_directory(tmp_path):
    body = _MINIMAL + f"\n[output]\ndirectory = \"{tmp_path / 'cfgdir'}\"\n"
    cfg = _write(tmp_path, body, "dir.toml")
    rc = main(["v-state", "--config", str(cfg), "--out", str(tmp_path / "flagdir")])
    assert rc == 0
    assert (tmp_path / "flagdir" / "amplitudes.csv").exists()
    assert not (tmp_path / "cfgdir").exists()

    rc = main(["v-state", "--config", str(cfg)])
    assert rc == 0
    assert (tmp_path / "cfgdir" / "amplitudes.csv").exists()


def test_exit_codes(tmp_path):
    assert main(["run-ideal", "--config", str(tmp_path / "nope.toml")]) == 2

    even = _write(tmp_path, _DISPERSIVE_FAST.replace("n_flips = 1", "n_flips = 2"), "e.toml")
    assert main(["run-dispersive", "--config", str(even), "--out", str(tmp_path)]) == 2

    tiny = _write(
        tmp_path,
        "[protocol]\nn_qubits = 3\nw = 3.2\n\n[dispersive]\nfock_cutoff = 10\n",
        "t.toml",
    )
    assert main(["run-dispersive", "--config", str(tiny), "--out", str(tmp_path)]) == 3

    good = _write(tmp_path, _DISPERSIVE_FAST, "g.toml")
    assert main([
        "sweep", "--config", str(good), "--channel", "loss",
        "--rates", "0,nan!", "--out", str(tmp_path),
    ]) == 2
    assert main([
        "sweep", "--config", str(good), "--channel", "loss",
        "--rates", "-0.5", "--out", str(tmp_path),
    ]) == 2

    bad_density = tmp_path / "junk.csv"
    bad_density.write_text("not,a,density\n")
    assert main([
        "fit-gkp", str(bad_density), "--config", str(good), "--out", str(tmp_path),
    ]) == 2


def test_parser_rejects_unknown_channel():
    with pytest.raises(SystemExit):
        build_parser().parse_args(
            ["sweep", "--config", "x.toml", "--channel", "heating", "--rates", "0"]
        )


def test_console_script_runs(tmp_path):
    cfg = _write(tmp_path, _MINIMAL)
    proc = subprocess.run(
        [sys.executable, "-m", "gkpforge.cli", "v-state",
         "--config", str(cfg), "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout == ""
    assert (tmp_path / "amplitudes.csv").exists()
