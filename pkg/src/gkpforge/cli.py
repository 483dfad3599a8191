"""Command-line entry point: config parsing and deterministic file emission.

Subcommands:
  run-ideal       exact pipeline -> density.csv, wigner.csv, fit.json, snapshots.csv
  run-dispersive  open-system run -> density.csv, wigner.csv, fit.json,
                  schedule.csv, diagnostics.json
  sweep           noise scan -> sweep.csv
  fit-gkp         comb fit of a stored density table -> fit.json
  v-state         register state -> amplitudes.csv, interpolation.csv

Exit codes: 0 success, 2 configuration error, 3 numerical-tolerance failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .dispersive import (
    NoiseRates,
    SimConfig,
    build_schedule,
    run_dispersive,
    sweep_noise,
)
from .errors import (
    ConfigError,
    GridTooSmallError,
    InsufficientCutoffError,
    ScheduleError,
    StepSizeError,
)
from .gkp import LogicalAmplitudes, fit_gkp
from .oscillator import PositionGrid, default_grid, width_from_db, wigner
from .protocol import ProtocolParams, VPrepParams, reduce_oscillator, run_ideal
from .qudit import build_v_state, interpolate
from .serialize import (
    ConfigEcho,
    fit_report_payload,
    read_density_csv,
    write_amplitudes_csv,
    write_density_csv,
    write_interpolation_csv,
    write_json,
    write_schedule_csv,
    write_snapshots_csv,
    write_sweep_csv,
    write_wigner_csv,
)

_SNAPSHOT_ORDER = ("initial", "entangled", "transformed", "final")
_CHANNELS = ("loss", "osc-dephase", "qubit-decay", "qubit-dephase")
_FORMATS = ("csv", "json")
_INTERPOLATION_SAMPLES = 512


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description: parameters plus output policy."""

    protocol: ProtocolParams
    sim: SimConfig
    out_dir: Path
    crop: float
    stride: int
    formats: tuple[str, ...]
    echo: ConfigEcho

    def wants(self, filename: str) -> bool:
        return filename.rsplit(".", 1)[-1] in self.formats


def _section(raw: dict, name: str, known: tuple[str, ...]) -> dict:
    body = raw.pop(name, {})
    if not isinstance(body, dict):
        raise ConfigError(f"[{name}] must be a table")
    for key in body:
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in [{name}]")
    return dict(body)


def _number(body: dict, key: str, default: float | None = None) -> float | None:
    if key not in body:
        return default
    value = body[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def _integer(body: dict, key: str, default: int | None = None) -> int | None:
    if key not in body:
        return default
    value = body[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return value


def load_config(path: Path, out_override: str | None = None) -> RunConfig:
    """Parse and validate a TOML run description, applying defaults."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc

    protocol = _section(
        raw, "protocol", ("n_qubits", "w", "w_db", "p_q", "theta_v", "phi_v", "omega_v")
    )
    grid_body = _section(raw, "grid", ("q_min", "q_max", "n_points"))
    disp = _section(
        raw,
        "dispersive",
        (
            "alpha0",
            "n_flips",
            "fock_cutoff",
            "chi",
            "dt",
            "kappa_l",
            "kappa_phi",
            "gamma_l",
            "gamma_phi",
            "include_number_coupling",
        ),
    )
    output = _section(raw, "output", ("directory", "crop", "stride", "formats"))
    if raw:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(raw))}")

    n_qubits = _integer(protocol, "n_qubits")
    if n_qubits is None:
        raise ConfigError("protocol.n_qubits is required")
    w = _number(protocol, "w")
    w_db = _number(protocol, "w_db")
    if (w is None) == (w_db is None):
        raise ConfigError("exactly one of protocol.w and protocol.w_db must be set")
    resolved_w = w if w is not None else width_from_db(w_db)

    base = default_grid()
    q_min = _number(grid_body, "q_min", base.q_min)
    q_max = _number(grid_body, "q_max", base.q_max)
    n_points = _integer(grid_body, "n_points", base.n_points)

    include_number = disp.get("include_number_coupling", True)
    if not isinstance(include_number, bool):
        raise ConfigError("dispersive.include_number_coupling must be a boolean")

    directory = output.get("directory", ".")
    if not isinstance(directory, str):
        raise ConfigError("output.directory must be a string")
    formats = output.get("formats", list(_FORMATS))
    if not isinstance(formats, list) or not formats or any(
        f not in _FORMATS for f in formats
    ):
        raise ConfigError(f"output.formats must be a non-empty subset of {_FORMATS}")
    crop = _number(output, "crop", 6.0)
    stride = _integer(output, "stride", 4)

    try:
        grid = PositionGrid(q_min, q_max, n_points)
        params = ProtocolParams(
            n_qubits=n_qubits,
            w=resolved_w,
            p_q=_number(protocol, "p_q", 2.0 * math.sqrt(math.pi)),
            vprep=VPrepParams(
                theta_v=_number(protocol, "theta_v", 2.6),
                phi_v=_number(protocol, "phi_v", 0.0),
                omega_v=_number(protocol, "omega_v", 0.0),
            ),
            grid=grid,
        )
        sim = SimConfig(
            n_qubits=n_qubits,
            alpha0=_number(disp, "alpha0", 30.0),
            n_flips=_integer(disp, "n_flips", 7),
            fock_cutoff=_integer(disp, "fock_cutoff", 80),
            chi=_number(disp, "chi", 1.0),
            dt=_number(disp, "dt"),
            noise=NoiseRates(
                kappa_l=_number(disp, "kappa_l", 0.0),
                kappa_phi=_number(disp, "kappa_phi", 0.0),
                gamma_l=_number(disp, "gamma_l", 0.0),
                gamma_phi=_number(disp, "gamma_phi", 0.0),
            ),
            include_number_coupling=include_number,
        )
    except (ValueError, ConfigError, ScheduleError) as exc:
        raise ConfigError(str(exc)) from exc

    echo: dict[str, dict[str, object]] = {
        "protocol": {
            "n_qubits": n_qubits,
            "w": resolved_w,
            "p_q": params.p_q,
            "theta_v": params.vprep.theta_v,
            "phi_v": params.vprep.phi_v,
            "omega_v": params.vprep.omega_v,
        },
        "grid": {"q_min": q_min, "q_max": q_max, "n_points": n_points},
        "dispersive": {
            "alpha0": sim.alpha0,
            "n_flips": sim.n_flips,
            "fock_cutoff": sim.fock_cutoff,
            "chi": sim.chi,
            "dt": sim.step_size(),
            "kappa_l": sim.noise.kappa_l,
            "kappa_phi": sim.noise.kappa_phi,
            "gamma_l": sim.noise.gamma_l,
            "gamma_phi": sim.noise.gamma_phi,
            "include_number_coupling": include_number,
        },
        "output": {"crop": crop, "stride": stride, "formats": list(formats)},
    }
    if w_db is not None:
        echo["protocol"]["w_db"] = w_db

    return RunConfig(
        protocol=params,
        sim=sim,
        out_dir=Path(out_override if out_override is not None else directory),
        crop=crop,
        stride=stride,
        formats=tuple(formats),
        echo=echo,
    )


def _amps(cfg: RunConfig) -> LogicalAmplitudes:
    return LogicalAmplitudes(cfg.protocol.vprep.phi_v, cfg.protocol.vprep.omega_v)


def cmd_run_ideal(cfg: RunConfig) -> int:
    run = run_ideal(cfg.protocol)
    rho = reduce_oscillator(run.final)
    report = fit_gkp(rho, _amps(cfg))
    out = cfg.out_dir
    if cfg.wants("density.csv"):
        write_density_csv(out / "density.csv", rho, cfg.echo, cfg.crop, cfg.stride)
    if cfg.wants("wigner.csv"):
        write_wigner_csv(out / "wigner.csv", wigner(rho), cfg.echo, cfg.crop, cfg.stride)
    if cfg.wants("snapshots.csv"):
        write_snapshots_csv(
            out / "snapshots.csv", run.snapshots, _SNAPSHOT_ORDER, cfg.echo,
            cfg.crop, cfg.stride,
        )
    if cfg.wants("fit.json"):
        write_json(out / "fit.json", fit_report_payload(report), cfg.echo)
    return 0 if report.converged else 3


def cmd_run_dispersive(cfg: RunConfig) -> int:
    result = run_dispersive(cfg.protocol, cfg.sim)
    report = fit_gkp(result.density, _amps(cfg))
    out = cfg.out_dir
    if cfg.wants("density.csv"):
        write_density_csv(
            out / "density.csv", result.density, cfg.echo, cfg.crop, cfg.stride
        )
    if cfg.wants("wigner.csv"):
        write_wigner_csv(
            out / "wigner.csv", wigner(result.density), cfg.echo, cfg.crop, cfg.stride
        )
    if cfg.wants("schedule.csv"):
        write_schedule_csv(out / "schedule.csv", result.schedule, cfg.echo)
    if cfg.wants("fit.json"):
        write_json(out / "fit.json", fit_report_payload(report), cfg.echo)
    if cfg.wants("diagnostics.json"):
        write_json(
            out / "diagnostics.json",
            {
                "diagnostics": dict(result.diagnostics),
                "tolerances": {
                    "trace": 1e-6,
                    "hermiticity": 1e-6,
                    "purity_excess": 1e-6,
                },
            },
            cfg.echo,
        )
    return 0 if report.converged else 3


def cmd_sweep(cfg: RunConfig, channel: str, rates: list[float]) -> int:
    points = sweep_noise(cfg.protocol, cfg.sim, channel, rates)
    if cfg.wants("sweep.csv"):
        write_sweep_csv(cfg.out_dir / "sweep.csv", points, cfg.echo)
    return 0


def cmd_fit(cfg: RunConfig, density_path: Path) -> int:
    rho, source_hash = read_density_csv(density_path)
    report = fit_gkp(rho, _amps(cfg))
    if cfg.wants("fit.json"):
        payload = fit_report_payload(report)
        payload["source_hash"] = source_hash
        write_json(cfg.out_dir / "fit.json", payload, cfg.echo)
    return 0 if report.converged else 3


def cmd_vstate(cfg: RunConfig) -> int:
    dims = cfg.protocol.dims
    v = build_v_state(dims, cfg.protocol.vprep)
    m = dims.dim
    # window [-M/4, 3M/4) keeps both peaks of |v(y)|^2 interior
    y = -m / 4.0 + m * np.arange(_INTERPOLATION_SAMPLES) / _INTERPOLATION_SAMPLES
    samples = interpolate(v, y)
    out = cfg.out_dir
    if cfg.wants("amplitudes.csv"):
        write_amplitudes_csv(out / "amplitudes.csv", v, cfg.echo)
    if cfg.wants("interpolation.csv"):
        write_interpolation_csv(out / "interpolation.csv", y, samples, cfg.echo)
    return 0


def _parse_rates(text: str) -> list[float]:
    try:
        rates = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse --rates {text!r}: {exc}") from exc
    if not rates:
        raise ConfigError("--rates must list at least one value")
    if any(r < 0 for r in rates):
        raise ConfigError("rates must be non-negative")
    return rates


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gkpforge",
        description="Map a register state onto an oscillator and analyze the result.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, type=Path, help="TOML run description")
        p.add_argument("--out", default=None, help="output directory override")

    common(sub.add_parser("run-ideal", help="exact pipeline and comb fit"))
    common(sub.add_parser("run-dispersive", help="open-system run and comb fit"))

    sweep = sub.add_parser("sweep", help="fidelity versus one noise rate")
    common(sweep)
    sweep.add_argument("--channel", required=True, choices=_CHANNELS)
    sweep.add_argument(
        "--rates", required=True,
        help="comma-separated rate ratios relative to the strongest coupling",
    )

    fit = sub.add_parser("fit-gkp", help="comb fit of a stored density table")
    common(fit)
    fit.add_argument("density", type=Path, help="density.csv produced by a run")

    common(sub.add_parser("v-state", help="register amplitudes and interpolation"))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.out)
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "run-ideal":
            return cmd_run_ideal(cfg)
        if args.command == "run-dispersive":
            return cmd_run_dispersive(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.channel, _parse_rates(args.rates))
        if args.command == "fit-gkp":
            return cmd_fit(cfg, args.density)
        return cmd_vstate(cfg)
    except (ConfigError, ScheduleError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (GridTooSmallError, InsufficientCutoffError, StepSizeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
