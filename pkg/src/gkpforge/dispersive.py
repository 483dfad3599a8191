"""Master-equation simulation of the preparation sequence in a displaced frame.

Each register qubit shifts the oscillator frequency by an amount set by its
binary place value, so a piecewise-constant frame displacement alpha(t) turns
the dispersive coupling into the controlled displacements of the ideal
protocol.  Global qubit flips with simultaneous sign reversal of alpha echo
away the residual number coupling; what survives of it is the dominant
distortion of the prepared state.  Between drive segments the register
operations (state preparation, Fourier transforms, flips) are applied as
instantaneous exact unitaries.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from scipy.linalg import null_space

from . import kernels
from .errors import ConfigError, ScheduleError, StepSizeError
from .gkp import LogicalAmplitudes, fit_gkp, logical_state
from .oscillator import (
    GridDensityMatrix,
    PositionGrid,
    density_from_factors,
    fidelity_pure,
    hermite_functions,
    momentum_displace,
    squeezed_vacuum,
    to_fock,
)
from .protocol import ProtocolParams
from .qudit import QuditDims, VPrepParams, build_v_state, qft_matrix

__all__ = [
    "NoiseRates",
    "SimConfig",
    "DriveSegment",
    "DriveSchedule",
    "DispersiveResult",
    "SweepPoint",
    "build_schedule",
    "schedule_times",
    "period_durations",
    "accumulated_areas",
    "effective_hamiltonian",
    "lindblad_rhs",
    "integrate",
    "run_dispersive",
    "sweep_noise",
]

_CHANNELS: Mapping[str, str] = {
    "loss": "kappa_l",
    "osc-dephase": "kappa_phi",
    "qubit-decay": "gamma_l",
    "qubit-dephase": "gamma_phi",
}


@dataclass(frozen=True)
class NoiseRates:
    """Channel rates in units of the base coupling: photon loss, oscillator
    dephasing, qubit decay, qubit dephasing."""

    kappa_l: float = 0.0
    kappa_phi: float = 0.0
    gamma_l: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        for name in ("kappa_l", "kappa_phi", "gamma_l", "gamma_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class SimConfig:
    n_qubits: int
    alpha0: float = 30.0
    n_flips: int = 7
    fock_cutoff: int = 80
    chi: float = 1.0
    dt: float | None = None
    noise: NoiseRates = field(default_factory=NoiseRates)
    include_number_coupling: bool = True

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("need at least one register qubit")
        if self.alpha0 <= 0:
            raise ValueError("drive amplitude must be positive")
        if self.n_flips < 1:
            raise ValueError("need at least one qubit flip")
        if self.fock_cutoff < 1:
            raise ValueError("fock cutoff must allow at least two levels")
        if self.chi <= 0:
            raise ValueError("coupling must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("step size must be positive")

    @property
    def chi_max(self) -> float:
        """Strongest per-qubit coupling, 2^(N-2) times the base value."""
        return 2.0 ** (self.n_qubits - 2) * self.chi

    @property
    def fock_dim(self) -> int:
        return self.fock_cutoff + 1

    def step_size(self) -> float:
        if self.dt is not None:
            return self.dt
        return 0.01 / (self.chi_max * self.alpha0 * math.sqrt(2.0))


@dataclass(frozen=True)
class DriveSegment:
    """One constant-drive stretch; pre_ops are instantaneous register
    unitaries applied before the drive turns on."""

    duration: float
    alpha: complex
    pre_ops: tuple[str, ...] = ()

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("segment duration must be nonnegative")


@dataclass(frozen=True)
class DriveSchedule:
    segments: tuple[DriveSegment, ...]
    alpha0: float

    def __post_init__(self):
        for seg in self.segments:
            if abs(seg.alpha) > self.alpha0 * (1.0 + 1e-12):
                raise ValueError("segment drive exceeds the schedule amplitude")

    @property
    def total_duration(self) -> float:
        return float(sum(seg.duration for seg in self.segments))

    @property
    def n_flips(self) -> int:
        return sum(seg.pre_ops.count("flip") for seg in self.segments)


def schedule_times(config: SimConfig, p_q: float) -> tuple[float, float]:
    """Durations of the spectral-kick and conditional-shift periods.

    Both scale inversely with the drive amplitude: the accumulated drive
    area, not the time, is what the protocol fixes.
    """
    dim = 2 ** config.n_qubits
    tau_i = 2.0 * math.sqrt(2.0) * math.pi / (config.alpha0 * config.chi * p_q)
    tau_d = math.sqrt(2.0) * p_q / (config.alpha0 * config.chi * dim)
    return tau_i, tau_d


def build_schedule(config: SimConfig, p_q: float) -> DriveSchedule:
    """Echoed piecewise-constant drive realizing both interaction periods.

    n_flips counts global X flips over the whole sequence and must be odd:
    each period is cut into (n_flips + 1) / 2 equal segments with the drive
    sign alternating and a flip at every boundary, including the one where
    the register Fourier transform switches the periods.  The first segment
    also prepares the register; the kick period drives along the real axis,
    the shift period along the imaginary axis.

    The Fourier gate only commutes with the flip up to level-dependent
    phases, so at the switching boundary the flip goes on whichever side
    leaves the gate acting at even accumulated flip parity.
    """
    if config.n_flips % 2 == 0:
        raise ScheduleError(
            f"flip count must be odd so both periods echo completely, got {config.n_flips}"
        )
    half = (config.n_flips + 1) // 2
    tau_i, tau_d = schedule_times(config, p_q)
    segments = []
    for j in range(half):
        pre = ("u_v", "qft_inverse") if j == 0 else ("flip",)
        segments.append(DriveSegment(tau_i / half, config.alpha0 * (-1.0) ** j + 0.0j, pre))
    # half - 1 flips have happened by the boundary
    switch = ("flip", "qft") if half % 2 == 0 else ("qft", "flip")
    for j in range(half):
        pre = switch if j == 0 else ("flip",)
        alpha = -1j * config.alpha0 * (-1.0) ** (half + j)
        segments.append(DriveSegment(tau_d / half, alpha, pre))
    return DriveSchedule(tuple(segments), config.alpha0)


def period_durations(schedule: DriveSchedule) -> tuple[float, float]:
    """Total drive time before and from the register Fourier transform."""
    first = 0.0
    second = 0.0
    in_second = False
    for seg in schedule.segments:
        if "qft" in seg.pre_ops:
            in_second = True
        if in_second:
            second += seg.duration
        else:
            first += seg.duration
    return first, second


def accumulated_areas(schedule: DriveSchedule, chi: float) -> tuple[float, float]:
    """Flip-parity-weighted drive areas (kick, shift) in phase-space units.

    Tracking the parity undoes the echo sign alternation, so a well-formed
    schedule returns (2*pi / P_q, P_q / M) regardless of the flip count.
    """
    parity = 1.0
    area_re = 0.0
    area_im = 0.0
    for seg in schedule.segments:
        if seg.pre_ops.count("flip") % 2 == 1:
            parity = -parity
        area_re += parity * seg.alpha.real * seg.duration
        area_im += parity * seg.alpha.imag * seg.duration
    scale = chi / math.sqrt(2.0)
    return scale * area_re, -scale * area_im


def effective_hamiltonian(config: SimConfig, alpha: complex) -> np.ndarray:
    """Dense joint-space Hamiltonian for one drive value.

    Intended for oracles and small diagnostics; the integrator never builds
    it, exploiting instead that every term is register-diagonal and at most
    tridiagonal in the Fock index.
    """
    f = config.fock_dim
    t = np.zeros((f, f), dtype=complex)
    sq = np.sqrt(np.arange(1, f, dtype=float))
    idx = np.arange(f - 1)
    if config.include_number_coupling:
        t[np.arange(f), np.arange(f)] = np.arange(f)
    t[idx + 1, idx] += alpha * sq
    t[idx, idx + 1] += np.conj(alpha) * sq
    b_dim = 2 ** config.n_qubits
    block = -0.5 * config.chi * (np.arange(b_dim) - (b_dim - 1) / 2.0)
    return np.kron(np.diag(block), t)


def _context(config: SimConfig) -> kernels.RhsContext:
    noise = config.noise
    return kernels.make_context(
        config.n_qubits,
        config.fock_dim,
        config.chi,
        noise.kappa_l * config.chi,
        noise.kappa_phi * config.chi,
        noise.gamma_l * config.chi,
        noise.gamma_phi * config.chi,
        include_number=config.include_number_coupling,
    )


def lindblad_rhs(rho: np.ndarray, alpha: complex, config: SimConfig) -> np.ndarray:
    """One-off time-derivative evaluation (tests and diagnostics)."""
    return kernels.RhsEvaluator(_context(config))(
        np.ascontiguousarray(rho, dtype=complex), alpha
    )


def _register_ops(config: SimConfig, vprep: VPrepParams | None) -> dict[str, np.ndarray]:
    dims = QuditDims(config.n_qubits)
    f_mat = qft_matrix(dims).matrix
    ops = {"qft": f_mat, "qft_inverse": f_mat.conj().T.copy()}
    if vprep is not None:
        v = build_v_state(dims, vprep)
        # any unitary with first column v works: the register starts in
        # the lowest label, which that column is applied to
        ops["u_v"] = np.hstack([v[:, None], null_space(v.conj()[None, :])])
    return ops


def _apply_pre_ops(rho: np.ndarray, pre_ops: tuple[str, ...], ops: dict[str, np.ndarray]) -> np.ndarray:
    for name in pre_ops:
        if name == "flip":
            # global X is the bit-complement permutation of the labels
            rho = rho[::-1, :, ::-1, :]
        elif name in ops:
            u = ops[name]
            rho = np.einsum("ab,bfdg,cd->afcg", u, rho, u.conj(), optimize=True)
        else:
            raise ScheduleError(f"unknown register operation {name!r}")
    return np.ascontiguousarray(rho)


def integrate(
    config: SimConfig,
    schedule: DriveSchedule,
    rho0: np.ndarray,
    vprep: VPrepParams | None = None,
) -> tuple[np.ndarray, dict]:
    """Fixed-step fourth-order evolution of the joint density matrix.

    Register pre-ops act exactly between segments.  Trace and Hermiticity
    are checked at every segment boundary; drifting past 1e-6 raises
    StepSizeError rather than returning a silently degraded state.
    """
    b_dim = 2 ** config.n_qubits
    f_dim = config.fock_dim
    if rho0.shape != (b_dim, f_dim, b_dim, f_dim):
        raise ValueError(
            f"density matrix must have shape {(b_dim, f_dim, b_dim, f_dim)}, got {rho0.shape}"
        )
    ops = _register_ops(config, vprep)
    evaluator = kernels.RhsEvaluator(_context(config))
    rho = np.ascontiguousarray(rho0, dtype=complex).copy()

    k1 = np.empty_like(rho)
    k2 = np.empty_like(rho)
    k3 = np.empty_like(rho)
    k4 = np.empty_like(rho)
    stage = np.empty_like(rho)

    dt_target = config.step_size()
    total_steps = 0
    trace_drift = 0.0
    herm_drift = 0.0
    max_purity = 0.0
    for seg in schedule.segments:
        rho = _apply_pre_ops(rho, seg.pre_ops, ops)
        if seg.duration > 0.0:
            n_steps = max(1, math.ceil(seg.duration / dt_target))
            h = seg.duration / n_steps
            alpha = complex(seg.alpha)
            for _ in range(n_steps):
                evaluator(rho, alpha, out=k1)
                np.multiply(k1, 0.5 * h, out=stage)
                stage += rho
                evaluator(stage, alpha, out=k2)
                np.multiply(k2, 0.5 * h, out=stage)
                stage += rho
                evaluator(stage, alpha, out=k3)
                np.multiply(k3, h, out=stage)
                stage += rho
                evaluator(stage, alpha, out=k4)
                k2 += k3
                k2 *= 2.0
                k1 += k4
                k1 += k2
                k1 *= h / 6.0
                rho += k1
            total_steps += n_steps
        trace_dev = abs(float(np.einsum("afaf->", rho).real) - 1.0)
        herm_dev = float(np.max(np.abs(rho - rho.transpose(2, 3, 0, 1).conj())))
        purity = float(np.einsum("bfcg,cgbf->", rho, rho).real)
        trace_drift = max(trace_drift, trace_dev)
        herm_drift = max(herm_drift, herm_dev)
        max_purity = max(max_purity, purity)
        # inverted comparison so NaN from a blown-up step also trips the guard
        if not (trace_dev <= 1e-6 and herm_dev <= 1e-6 and purity <= 1.0 + 1e-6):
            raise StepSizeError(
                f"trace drift {trace_dev:.2e}, hermiticity drift {herm_dev:.2e}, "
                f"purity {purity:.6f} after segment at drive {seg.alpha}; "
                f"reduce the step size"
            )
    info = {
        "n_steps": total_steps,
        "dt": dt_target,
        "trace_drift": trace_drift,
        "hermiticity_drift": herm_drift,
        "max_purity": max_purity,
    }
    return rho, info


@dataclass(frozen=True)
class DispersiveResult:
    density: GridDensityMatrix
    schedule: DriveSchedule
    diagnostics: dict


def _oscillator_density(
    rho: np.ndarray, grid: PositionGrid, f_dim: int
) -> tuple[GridDensityMatrix, float]:
    reduced = np.einsum("bfbg->fg", rho)
    reduced = 0.5 * (reduced + reduced.conj().T)
    evals, vecs = np.linalg.eigh(reduced)
    min_eig = float(evals[0])
    keep = evals > 1e-14
    basis = hermite_functions(grid, f_dim - 1)
    factors = basis.astype(complex) @ (vecs[:, keep] * np.sqrt(evals[keep]))
    return density_from_factors(grid, factors), min_eig


def run_dispersive(params: ProtocolParams, config: SimConfig) -> DispersiveResult:
    """Evolve the prepared register and oscillator through the full schedule.

    The initial density matrix is the lowest register label times the
    Fock-encoded displaced squeezed vacuum; the first segment's register
    preparation turns the label into the two-peak state.  Returns the
    reduced oscillator state on the position grid plus run diagnostics.
    """
    if params.n_qubits != config.n_qubits:
        raise ConfigError(
            f"protocol has {params.n_qubits} qubits but the simulation is "
            f"configured for {config.n_qubits}"
        )
    psi_0 = momentum_displace(
        squeezed_vacuum(params.w, params.grid), -math.pi / params.p_q
    )
    fock = to_fock(psi_0, config.fock_cutoff)
    coeffs = fock.coeffs / np.linalg.norm(fock.coeffs)
    b_dim = 2 ** config.n_qubits
    f_dim = config.fock_dim
    rho0 = np.zeros((b_dim, f_dim, b_dim, f_dim), dtype=complex)
    rho0[0, :, 0, :] = np.outer(coeffs, coeffs.conj())

    schedule = build_schedule(config, params.p_q)
    rho, info = integrate(config, schedule, rho0, vprep=params.vprep)

    density, min_eig = _oscillator_density(rho, params.grid, f_dim)
    top_level = float(np.einsum("bb->", rho[:, f_dim - 1, :, f_dim - 1]).real)
    diagnostics = {
        **info,
        "backend": kernels.active_backend(),
        "fock_cutoff": config.fock_cutoff,
        "initial_tail": float(abs(fock.coeffs[-1]) ** 2),
        "top_level_population": top_level,
        "min_eigenvalue": min_eig,
        "alpha0": config.alpha0,
        "n_flips": config.n_flips,
    }
    return DispersiveResult(density, schedule, diagnostics)


@dataclass(frozen=True)
class SweepPoint:
    channel: str
    rate_ratio: float
    fidelity: float


def _thread_cap() -> int:
    raw = os.environ.get("GKPFORGE_THREADS", "")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"GKPFORGE_THREADS must be an integer, got {raw!r}") from exc


def sweep_noise(
    params: ProtocolParams,
    config: SimConfig,
    channel: str,
    rate_ratios: list[float],
) -> list[SweepPoint]:
    """Fidelity against the noiseless fit while one channel's rate scans.

    Rates are given relative to the strongest coupling 2^(N-2) * chi.  The
    reference state is fitted once from the zero-noise run and held fixed,
    so every point measures degradation against the same target.  Points
    run independently; GKPFORGE_THREADS caps how many run at once.
    """
    if channel not in _CHANNELS:
        raise ConfigError(
            f"unknown channel {channel!r}; expected one of {sorted(_CHANNELS)}"
        )
    if any(r < 0 for r in rate_ratios):
        raise ValueError("rates must be nonnegative")
    workers_cap = _thread_cap()

    base = run_dispersive(params, replace(config, noise=NoiseRates()))
    amps = LogicalAmplitudes(params.vprep.phi_v, params.vprep.omega_v)
    report = fit_gkp(base.density, amps)
    target = logical_state(amps, report.params, params.grid, check_grid=False)
    scale = config.chi_max / config.chi

    def one(ratio: float) -> SweepPoint:
        if ratio == 0.0:
            return SweepPoint(channel, 0.0, report.fidelity)
        rates = NoiseRates(**{_CHANNELS[channel]: ratio * scale})
        result = run_dispersive(params, replace(config, noise=rates))
        return SweepPoint(channel, ratio, fidelity_pure(result.density, target))

    workers = min(workers_cap, max(1, len(rate_ratios)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, rate_ratios))
    return [one(r) for r in rate_ratios]
