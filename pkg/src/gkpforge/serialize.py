"""Deterministic emission and recovery of run artifacts.

Every file starts with the same metadata block: the resolved configuration
echoed one `section.key = value` pair per line, then a short hash of that
echo.  Files produced by the same configuration are byte-identical; there
are no timestamps, hostnames, or paths inside the data sections.

Density and snapshot tables are cropped and strided before writing so the
files stay plot-sized.  The selection always keeps the origin sample and a
power-of-two point count, which lets a reader rebuild a valid grid.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import IO, Mapping, Sequence

import numpy as np

from .dispersive import DriveSchedule, SweepPoint
from .errors import ConfigError
from .gkp import FitReport
from .oscillator import GridDensityMatrix, PositionGrid, WignerGrid
from .protocol import JointState

ConfigEcho = Mapping[str, Mapping[str, object]]


def format_float(x: float) -> str:
    return f"{x:.17e}"


def format_complex(z: complex) -> str:
    return f"{z.real:.17e}{z.imag:+.17e}j"


def _render_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return json.dumps(list(value))
    raise TypeError(f"cannot render config value of type {type(value).__name__}")


def echo_lines(config: ConfigEcho) -> list[str]:
    """Canonical text form of the resolved configuration, sorted throughout."""
    lines = []
    for section in sorted(config):
        for key in sorted(config[section]):
            lines.append(f"{section}.{key} = {_render_value(config[section][key])}")
    return lines


def config_hash(config: ConfigEcho) -> str:
    text = "\n".join(echo_lines(config))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _write_header(fh: IO[str], config: ConfigEcho) -> None:
    for line in echo_lines(config):
        fh.write(f"# config: {line}\n")
    fh.write(f"# config_hash: {config_hash(config)}\n")


def crop_indices(grid: PositionGrid, crop: float, stride: int) -> np.ndarray:
    """Strided symmetric index window around the origin sample.

    The count is the largest power of two that fits both the grid and the
    crop radius, so the selected axis is itself a valid grid.
    """
    if crop <= 0:
        raise ConfigError(f"crop radius must be positive, got {crop}")
    if stride < 1:
        raise ConfigError(f"stride must be at least 1, got {stride}")
    points = grid.points
    i0 = int(np.argmin(np.abs(points)))
    if abs(points[i0]) > 1e-9:
        raise ConfigError("cropping requires the origin to lie on a grid sample")
    # n_sel points span half to the left of the origin, half - 1 to the right
    half_max = min(
        int(crop / (stride * grid.dq)),
        i0 // stride,
        (grid.n_points - 1 - i0) // stride + 1,
    )
    if half_max < 4:
        raise ConfigError(
            f"crop window {crop} with stride {stride} keeps fewer than 8 grid points"
        )
    half = 1 << (half_max.bit_length() - 1)
    return i0 + stride * (np.arange(2 * half) - half)


def _axis_line(name: str, values: np.ndarray) -> str:
    return f"# {name}: " + ",".join(format_float(v) for v in values) + "\n"


def write_density_csv(
    path: Path,
    rho: GridDensityMatrix,
    config: ConfigEcho,
    crop: float,
    stride: int,
) -> None:
    """Cropped position-basis density matrix, one row of complex entries per line."""
    idx = crop_indices(rho.grid, crop, stride)
    sub = rho.entries[np.ix_(idx, idx)]
    with open(path, "w", newline="\n") as fh:
        _write_header(fh, config)
        fh.write(_axis_line("q_axis", rho.grid.points[idx]))
        for row in sub:
            fh.write(",".join(format_complex(z) for z in row) + "\n")


def read_density_csv(path: Path) -> tuple[GridDensityMatrix, str]:
    """Rebuild a density matrix written by write_density_csv, plus its config hash.

    The cropped table carries slightly less than unit mass, so the entries
    are renormalized on the cropped axis before validation.
    """
    axis: np.ndarray | None = None
    source_hash = ""
    rows: list[list[complex]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# q_axis:"):
                axis = np.array([float(v) for v in line.split(":", 1)[1].split(",")])
            elif line.startswith("# config_hash:"):
                source_hash = line.split(":", 1)[1].strip()
            elif line.startswith("#"):
                continue
            else:
                try:
                    rows.append([complex(v) for v in line.split(",")])
                except ValueError as exc:
                    raise ConfigError(f"{path} has a malformed data row: {exc}") from exc
    if axis is None or not rows:
        raise ConfigError(f"{path} does not contain a density table")
    n = axis.size
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ConfigError(f"{path} has a malformed {n}-point density table")
    step = float(axis[1] - axis[0])
    try:
        grid = PositionGrid(float(axis[0]), float(axis[0]) + n * step, n)
    except ValueError as exc:
        raise ConfigError(f"{path} axis does not form a valid grid: {exc}") from exc
    entries = np.array(rows, dtype=complex)
    mass = float(np.real(np.trace(entries))) * grid.dq
    if not 0.5 < mass < 1.5:
        raise ConfigError(f"{path} table mass {mass:.3f} is not near unity")
    try:
        return GridDensityMatrix(grid, entries / mass), source_hash
    except ValueError as exc:
        raise ConfigError(f"{path} does not hold a density matrix: {exc}") from exc


def write_wigner_csv(
    path: Path,
    wig: WignerGrid,
    config: ConfigEcho,
    crop: float,
    stride: int,
) -> None:
    """Quasi-probability table, rows over the position axis, columns over momentum.

    Momentum is cropped to the same radius but never strided: its native
    resolution is already the coarser of the two.
    """
    grid = PositionGrid(
        float(wig.q_axis[0]),
        float(wig.q_axis[0]) + wig.q_axis.size * float(wig.q_axis[1] - wig.q_axis[0]),
        wig.q_axis.size,
    )
    q_idx = crop_indices(grid, crop, stride)
    p_idx = np.nonzero(np.abs(wig.p_axis) <= crop)[0]
    with open(path, "w", newline="\n") as fh:
        _write_header(fh, config)
        fh.write(_axis_line("q_axis", wig.q_axis[q_idx]))
        fh.write(_axis_line("p_axis", wig.p_axis[p_idx]))
        for row in wig.values[np.ix_(q_idx, p_idx)]:
            fh.write(",".join(format_float(v) for v in row) + "\n")


def write_snapshots_csv(
    path: Path,
    snapshots: Mapping[str, JointState],
    order: Sequence[str],
    config: ConfigEcho,
    crop: float,
    stride: int,
) -> None:
    """Per-branch waves of each retained stage in long format."""
    with open(path, "w", newline="\n") as fh:
        _write_header(fh, config)
        fh.write("snapshot,branch,q,re,im\n")
        for name in order:
            joint = snapshots[name]
            idx = crop_indices(joint.grid, crop, stride)
            points = joint.grid.points[idx]
            for branch in range(joint.branches.shape[0]):
                wave = joint.branches[branch, idx]
                for q, z in zip(points, wave):
                    fh.write(
                        f"{name},{branch},{format_float(q)},"
                        f"{format_float(z.real)},{format_float(z.imag)}\n"
                    )


def fit_report_payload(report: FitReport) -> dict[str, object]:
    return {
        "delta": report.params.delta,
        "delta_db": report.params.delta_db,
        "kappa": report.params.kappa,
        "phi": report.params.phi,
        "fidelity": report.fidelity,
        "converged": report.converged,
        "refine_gain": report.refine_gain,
    }


def write_json(path: Path, payload: Mapping[str, object], config: ConfigEcho) -> None:
    document = {
        "config": {s: dict(config[s]) for s in config},
        "config_hash": config_hash(config),
        **payload,
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(document, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_schedule_csv(path: Path, schedule: DriveSchedule, config: ConfigEcho) -> None:
    """Segment table: start time, duration, drive amplitude, preceding gates."""
    with open(path, "w", newline="\n") as fh:
        _write_header(fh, config)
        fh.write("segment,start,duration,alpha_re,alpha_im,pre_ops\n")
        start = 0.0
        for i, seg in enumerate(schedule.segments):
            ops = ";".join(seg.pre_ops)
            fh.write(
                f"{i},{format_float(start)},{format_float(seg.duration)},"
                f"{format_float(seg.alpha.real)},{format_float(seg.alpha.imag)},{ops}\n"
            )
            start += seg.duration


def write_sweep_csv(path: Path, points: Sequence[SweepPoint], config: ConfigEcho) -> None:
    with open(path, "w", newline="\n") as fh:
        _write_header(fh, config)
        fh.write("rate_ratio,channel,fidelity\n")
        for pt in points:
            fh.write(
                f"{format_float(pt.rate_ratio)},{pt.channel},{format_float(pt.fidelity)}\n"
            )


def write_amplitudes_csv(path: Path, v: np.ndarray, config: ConfigEcho) -> None:
    m = v.size
    levels = np.arange(m) - (m - 1) / 2.0
    with open(path, "w", newline="\n") as fh:
        _write_header(fh, config)
        fh.write("index,level,re,im\n")
        for i in range(m):
            fh.write(
                f"{i},{format_float(levels[i])},"
                f"{format_float(v[i].real)},{format_float(v[i].imag)}\n"
            )


def write_interpolation_csv(
    path: Path, y: np.ndarray, values: np.ndarray, config: ConfigEcho
) -> None:
    with open(path, "w", newline="\n") as fh:
        _write_header(fh, config)
        fh.write("y,re,im,abs2\n")
        for yi, z in zip(y, values):
            fh.write(
                f"{format_float(yi)},{format_float(z.real)},"
                f"{format_float(z.imag)},{format_float(abs(z) ** 2)}\n"
            )
