"""Schedule construction, master-equation kernels, and the driven run."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from gkpforge.dispersive import (
    DriveSchedule,
    DriveSegment,
    NoiseRates,
    SimConfig,
    accumulated_areas,
    build_schedule,
    effective_hamiltonian,
    integrate,
    lindblad_rhs,
    period_durations,
    run_dispersive,
    schedule_times,
    sweep_noise,
)
from gkpforge.errors import (
    ConfigError,
    InsufficientCutoffError,
    ScheduleError,
    StepSizeError,
)
from gkpforge.oscillator import fidelity_mixed, fidelity_pure
from gkpforge.protocol import ProtocolParams, analytic_density
from gkpforge.qudit import QuditDims, VPrepParams, build_v_state

_P_Q = 2.0 * math.sqrt(math.pi)


def _pure_joint(register: np.ndarray, fock: np.ndarray) -> np.ndarray:
    psi = np.einsum("b,f->bf", register.astype(complex), fock.astype(complex)).reshape(-1)
    rho = np.outer(psi, psi.conj())
    b, f = register.size, fock.size
    return np.ascontiguousarray(rho.reshape(b, f, b, f))


def test_config_validation():
    with pytest.raises(ValueError):
        NoiseRates(kappa_l=-0.1)
    with pytest.raises(ValueError):
        SimConfig(n_qubits=0)
    with pytest.raises(ValueError):
        SimConfig(n_qubits=2, alpha0=0.0)
    with pytest.raises(ValueError):
        SimConfig(n_qubits=2, n_flips=0)
    with pytest.raises(ValueError):
        SimConfig(n_qubits=2, chi=0.0)
    with pytest.raises(ValueError):
        SimConfig(n_qubits=2, dt=0.0)
    assert SimConfig(n_qubits=1).chi_max == 0.5
    assert SimConfig(n_qubits=2).chi_max == 1.0
    assert SimConfig(n_qubits=3).chi_max == 2.0
    cfg = SimConfig(n_qubits=3, alpha0=30.0)
    assert cfg.step_size() == pytest.approx(0.01 / (2.0 * 30.0 * math.sqrt(2.0)), rel=1e-15)
    assert SimConfig(n_qubits=3, dt=1e-3).step_size() == 1e-3


def test_schedule_times_match_hand_arithmetic():
    # at P_q = 2 sqrt(pi) both times reduce to sqrt(2 pi) over a constant
    cfg = SimConfig(n_qubits=3, alpha0=30.0)
    tau_i, tau_d = schedule_times(cfg, _P_Q)
    assert tau_i == pytest.approx(8.355427582103336e-02, rel=1e-12)
    assert tau_d == pytest.approx(2.088856895525834e-02, rel=1e-12)
    # doubling the drive halves both times
    tau_i2, tau_d2 = schedule_times(SimConfig(n_qubits=3, alpha0=60.0), _P_Q)
    assert tau_i2 == pytest.approx(tau_i / 2.0, rel=1e-12)
    assert tau_d2 == pytest.approx(tau_d / 2.0, rel=1e-12)


def test_build_schedule_structure():
    cfg = SimConfig(n_qubits=3, alpha0=30.0, n_flips=3)
    schedule = build_schedule(cfg, _P_Q)
    assert len(schedule.segments) == 4
    assert schedule.segments[0].pre_ops == ("u_v", "qft_inverse")
    assert schedule.segments[1].pre_ops == ("flip",)
    assert schedule.segments[2].pre_ops == ("flip", "qft")
    assert schedule.segments[3].pre_ops == ("flip",)
    assert schedule.n_flips == 3

    alphas = [seg.alpha for seg in schedule.segments]
    assert alphas[0] == 30.0 and alphas[1] == -30.0
    assert alphas[2] == -30.0j and alphas[3] == 30.0j

    tau_i, tau_d = schedule_times(cfg, _P_Q)
    assert schedule.segments[0].duration == pytest.approx(tau_i / 2.0, rel=1e-15)
    assert schedule.segments[2].duration == pytest.approx(tau_d / 2.0, rel=1e-15)

    for n_flips in (1, 7, 15):
        s = build_schedule(SimConfig(n_qubits=3, n_flips=n_flips), _P_Q)
        assert s.n_flips == n_flips
        assert len(s.segments) == n_flips + 1

    # the Fourier gate must always see even flip parity
    for n_flips in (1, 3, 5, 7):
        s = build_schedule(SimConfig(n_qubits=3, n_flips=n_flips), _P_Q)
        parity = 0
        for seg in s.segments:
            for op in seg.pre_ops:
                if op == "flip":
                    parity ^= 1
                elif op == "qft":
                    assert parity == 0

    with pytest.raises(ScheduleError):
        build_schedule(SimConfig(n_qubits=3, n_flips=4), _P_Q)


def test_schedule_amplitude_cap():
    with pytest.raises(ValueError):
        DriveSchedule((DriveSegment(0.1, 2.0 + 0.0j),), alpha0=1.0)
    with pytest.raises(ValueError):
        DriveSegment(-0.1, 0.0j)


@pytest.mark.parametrize("n_qubits", [2, 3, 4])
@pytest.mark.parametrize("n_flips", [1, 3, 7, 15])
def test_accumulated_areas_and_durations(n_qubits, n_flips):
    cfg = SimConfig(n_qubits=n_qubits, alpha0=30.0, n_flips=n_flips)
    schedule = build_schedule(cfg, _P_Q)
    area_kick, area_shift = accumulated_areas(schedule, cfg.chi)
    assert area_kick == pytest.approx(2.0 * math.pi / _P_Q, rel=1e-12)
    assert area_shift == pytest.approx(_P_Q / 2 ** n_qubits, rel=1e-12)
    tau_i, tau_d = schedule_times(cfg, _P_Q)
    first, second = period_durations(schedule)
    assert first == pytest.approx(tau_i, rel=1e-12)
    assert second == pytest.approx(tau_d, rel=1e-12)


def test_effective_hamiltonian_properties():
    cfg = SimConfig(n_qubits=2, fock_cutoff=5)
    f = cfg.fock_dim

    h0 = effective_hamiltonian(cfg, 0.0)
    # drive off: pure number coupling, diagonal
    assert np.max(np.abs(h0 - np.diag(np.diag(h0)))) == 0.0
    k_values = np.arange(4) - 1.5
    expected = np.kron(np.diag(-0.5 * k_values), np.diag(np.arange(f, dtype=float)))
    np.testing.assert_allclose(h0, expected, atol=1e-14)

    h = effective_hamiltonian(cfg, 0.3 - 0.7j)
    assert np.max(np.abs(h - h.conj().T)) < 1e-14

    # real drive, number term off: exactly the controlled-displacement generator
    cfg_int = SimConfig(n_qubits=2, fock_cutoff=5, include_number_coupling=False)
    alpha = 4.0
    annihilate = np.diag(np.sqrt(np.arange(1, f, dtype=float)), 1)
    q_mat = (annihilate + annihilate.T) / math.sqrt(2.0)
    expected = np.kron(np.diag(-cfg_int.chi * k_values * alpha / math.sqrt(2.0)), q_mat)
    np.testing.assert_allclose(effective_hamiltonian(cfg_int, alpha), expected, atol=1e-12)

    # flipping every qubit and negating the drive leaves the interaction alone
    perm = np.kron(np.eye(4)[::-1], np.eye(f))
    h_plus = effective_hamiltonian(cfg_int, 0.8 + 0.2j)
    h_minus = effective_hamiltonian(cfg_int, -0.8 - 0.2j)
    np.testing.assert_allclose(perm @ h_plus @ perm, h_minus, atol=1e-12)


def test_rhs_matches_dense_superoperator():
    cfg = SimConfig(
        n_qubits=2,
        fock_cutoff=4,
        chi=0.7,
        noise=NoiseRates(kappa_l=0.05, kappa_phi=0.02, gamma_l=0.03, gamma_phi=0.04),
    )
    b_dim, f = 4, cfg.fock_dim
    alpha = 0.4 - 0.3j
    rng = np.random.default_rng(11)
    raw = rng.normal(size=(b_dim * f, b_dim * f)) + 1j * rng.normal(size=(b_dim * f, b_dim * f))
    rho = raw + raw.conj().T
    rho /= np.trace(rho).real

    def dissipator(op, r):
        return op @ r @ op.conj().T - 0.5 * (op.conj().T @ op @ r + r @ op.conj().T @ op)

    h = effective_hamiltonian(cfg, alpha)
    annihilate = np.diag(np.sqrt(np.arange(1, f, dtype=float)), 1)
    a_full = np.kron(np.eye(b_dim), annihilate)
    # full displaced-frame dephasing operator, constant term included: the
    # kernel drops the scalar, which changes the dissipator by exactly zero
    deph = np.kron(
        np.eye(b_dim),
        (annihilate.conj().T + np.conj(alpha) * np.eye(f)) @ (annihilate + alpha * np.eye(f)),
    )
    chi = cfg.chi
    expected = -1j * (h @ rho - rho @ h)
    expected += cfg.noise.kappa_l * chi * dissipator(a_full, rho)
    expected += 2.0 * cfg.noise.kappa_phi * chi * dissipator(deph, rho)
    for mask in (1, 2):
        lower = np.zeros((b_dim, b_dim))
        for src in range(b_dim):
            if not src & mask:
                lower[src | mask, src] = 1.0
        sz = np.diag([1.0 if not b & mask else -1.0 for b in range(b_dim)])
        expected += cfg.noise.gamma_l * chi * dissipator(np.kron(lower, np.eye(f)), rho)
        expected += 2.0 * cfg.noise.gamma_phi * chi * dissipator(np.kron(sz / 2.0, np.eye(f)), rho)

    got = lindblad_rhs(rho.reshape(b_dim, f, b_dim, f), alpha, cfg)
    np.testing.assert_allclose(got.reshape(b_dim * f, b_dim * f), expected, atol=1e-12)

    # same agreement with the number coupling switched off in the Hamiltonian
    # (the dephasing jump operator keeps its number part either way)
    cfg_off = SimConfig(
        n_qubits=2, fock_cutoff=4, chi=0.7,
        noise=cfg.noise, include_number_coupling=False,
    )
    h_off = effective_hamiltonian(cfg_off, alpha)
    expected_off = expected + 1j * (h @ rho - rho @ h) - 1j * (h_off @ rho - rho @ h_off)
    got_off = lindblad_rhs(rho.reshape(b_dim, f, b_dim, f), alpha, cfg_off)
    np.testing.assert_allclose(got_off.reshape(b_dim * f, b_dim * f), expected_off, atol=1e-12)


def test_rhs_zero_when_idle():
    cfg = SimConfig(n_qubits=1, fock_cutoff=3, include_number_coupling=False)
    rho = _pure_joint(np.array([1.0, 0.0]), np.array([0.0, 1.0, 0.0, 0.0]))
    assert np.max(np.abs(lindblad_rhs(rho, 0.0, cfg))) == 0.0


def test_amplitude_damping_oracle():
    cfg = SimConfig(
        n_qubits=1, fock_cutoff=3, dt=1e-3, noise=NoiseRates(kappa_l=0.05)
    )
    rho0 = _pure_joint(np.array([1.0, 0.0]), np.array([0.0, 1.0, 0.0, 0.0]))
    tau = 2.0
    rho, info = integrate(cfg, DriveSchedule((DriveSegment(tau, 0.0j),), 1.0), rho0)
    decayed = math.exp(-0.05 * tau)
    assert abs(rho[0, 1, 0, 1].real - decayed) < 1e-8
    assert abs(rho[0, 0, 0, 0].real - (1.0 - decayed)) < 1e-8
    assert info["trace_drift"] < 1e-10


def test_oscillator_dephasing_oracle():
    cfg = SimConfig(
        n_qubits=1, fock_cutoff=2, dt=1e-3, noise=NoiseRates(kappa_phi=0.04)
    )
    rho0 = _pure_joint(
        np.array([1.0, 0.0]), np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
    )
    tau = 3.0
    rho, _ = integrate(cfg, DriveSchedule((DriveSegment(tau, 0.0j),), 1.0), rho0)
    # one-quantum coherence decays at the bare dephasing rate
    assert abs(abs(rho[0, 0, 0, 1]) - 0.5 * math.exp(-0.04 * tau)) < 1e-8


def test_qubit_dephasing_oracle():
    cfg = SimConfig(
        n_qubits=2, fock_cutoff=1, dt=1e-3, noise=NoiseRates(gamma_phi=0.03)
    )
    reg = np.zeros(4, dtype=complex)
    reg[0] = reg[3] = 1.0 / math.sqrt(2.0)
    rho0 = _pure_joint(reg, np.array([1.0, 0.0]))
    tau = 2.5
    rho, _ = integrate(cfg, DriveSchedule((DriveSegment(tau, 0.0j),), 1.0), rho0)
    # the labels differ in both bits, so the rate doubles
    assert abs(abs(rho[0, 0, 3, 0]) - 0.5 * math.exp(-2.0 * 0.03 * tau)) < 1e-8


def test_qubit_decay_oracle():
    cfg = SimConfig(
        n_qubits=1, fock_cutoff=1, dt=1e-3, noise=NoiseRates(gamma_l=0.06)
    )
    rho0 = _pure_joint(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    tau = 4.0
    rho, _ = integrate(cfg, DriveSchedule((DriveSegment(tau, 0.0j),), 1.0), rho0)
    decayed = math.exp(-0.06 * tau)
    assert abs(rho[0, 0, 0, 0].real - decayed) < 1e-8
    assert abs(rho[1, 0, 1, 0].real - (1.0 - decayed)) < 1e-8


@pytest.mark.parametrize("include_number", [False, True])
def test_single_segment_matches_matrix_exponential(include_number):
    cfg = SimConfig(
        n_qubits=1,
        alpha0=30.0,
        fock_cutoff=23,
        include_number_coupling=include_number,
    )
    f = cfg.fock_dim
    reg = np.array([1.0, 1.0]) / math.sqrt(2.0)
    fock = np.zeros(f)
    fock[0] = 1.0
    rho0 = _pure_joint(reg, fock)
    tau = 0.05
    rho, info = integrate(cfg, DriveSchedule((DriveSegment(tau, 30.0 + 0.0j),), 30.0), rho0)

    u = expm(-1j * tau * effective_hamiltonian(cfg, 30.0))
    psi = u @ np.einsum("b,f->bf", reg, fock.astype(complex)).reshape(-1)
    fid = float(np.real(psi.conj() @ rho.reshape(2 * f, 2 * f) @ psi))
    assert fid > 1.0 - 1e-6
    assert info["trace_drift"] < 1e-9
    assert info["max_purity"] < 1.0 + 1e-8


def test_pre_ops_apply_exact_unitaries():
    cfg = SimConfig(n_qubits=3, fock_cutoff=1)
    dims = QuditDims(3)
    vprep = VPrepParams()
    fock = np.array([1.0, 0.0])
    reg0 = np.zeros(8, dtype=complex)
    reg0[0] = 1.0
    rho0 = _pure_joint(reg0, fock)

    prep = DriveSchedule((DriveSegment(0.0, 0.0j, ("u_v",)),), 1.0)
    rho, _ = integrate(cfg, prep, rho0, vprep=vprep)
    v = build_v_state(dims, vprep)
    reg_density = np.einsum("bfcf->bc", rho)
    np.testing.assert_allclose(reg_density, np.outer(v, v.conj()), atol=1e-12)

    flip = DriveSchedule((DriveSegment(0.0, 0.0j, ("flip",)),), 1.0)
    reg1 = np.zeros(8, dtype=complex)
    reg1[2] = 1.0
    rho, _ = integrate(cfg, flip, _pure_joint(reg1, fock))
    assert abs(np.einsum("bfcf->bc", rho)[5, 5] - 1.0) < 1e-14

    bogus = DriveSchedule((DriveSegment(0.0, 0.0j, ("bogus",)),), 1.0)
    with pytest.raises(ScheduleError):
        integrate(cfg, bogus, rho0)
    # preparing the register requires the preparation parameters
    with pytest.raises(ScheduleError):
        integrate(cfg, prep, rho0)


def test_integrate_rejects_wrong_shape():
    cfg = SimConfig(n_qubits=2, fock_cutoff=3)
    with pytest.raises(ValueError):
        integrate(cfg, DriveSchedule((), 1.0), np.zeros((2, 4, 2, 4), dtype=complex))


def test_coarse_step_raises():
    cfg = SimConfig(
        n_qubits=1, fock_cutoff=29, dt=0.05, noise=NoiseRates(kappa_l=5.0)
    )
    fock = np.zeros(30)
    fock[-1] = 1.0
    rho0 = _pure_joint(np.array([1.0, 0.0]), fock)
    with pytest.raises(StepSizeError):
        integrate(cfg, DriveSchedule((DriveSegment(1.0, 0.0j),), 1.0), rho0)


def test_zero_noise_matches_ideal_without_number_term():
    params = ProtocolParams(n_qubits=2, w=2.0)
    cfg = SimConfig(
        n_qubits=2,
        alpha0=30.0,
        n_flips=1,
        fock_cutoff=40,
        include_number_coupling=False,
    )
    result = run_dispersive(params, cfg)
    fid = fidelity_mixed(result.density, analytic_density(params))
    assert fid >= 0.999
    assert result.diagnostics["trace_drift"] < 1e-8
    assert result.diagnostics["max_purity"] < 1.0 + 1e-8
    assert result.diagnostics["min_eigenvalue"] > -1e-6
    assert result.diagnostics["top_level_population"] < 1e-6


def test_halving_dt_barely_moves_the_answer():
    params = ProtocolParams(n_qubits=2, w=2.0)
    cfg = SimConfig(n_qubits=2, alpha0=30.0, n_flips=3, fock_cutoff=40)
    first = run_dispersive(params, cfg)
    second = run_dispersive(
        params, SimConfig(
            n_qubits=2, alpha0=30.0, n_flips=3, fock_cutoff=40,
            dt=cfg.step_size() / 2.0,
        )
    )
    from gkpforge.gkp import LogicalAmplitudes, fit_gkp, logical_state

    amps = LogicalAmplitudes(params.vprep.phi_v, params.vprep.omega_v)
    report = fit_gkp(first.density, amps)
    target = logical_state(amps, report.params, params.grid, check_grid=False)
    fid_first = fidelity_pure(first.density, target)
    fid_second = fidelity_pure(second.density, target)
    assert abs(fid_first - fid_second) < 1e-6


def test_run_dispersive_validation():
    params = ProtocolParams(n_qubits=2, w=2.0)
    with pytest.raises(ConfigError):
        run_dispersive(params, SimConfig(n_qubits=3))
    with pytest.raises(InsufficientCutoffError):
        run_dispersive(
            ProtocolParams(n_qubits=2, w=3.2),
            SimConfig(n_qubits=2, fock_cutoff=10),
        )


def test_sweep_noise_baseline_and_decline():
    params = ProtocolParams(n_qubits=2, w=2.0)
    cfg = SimConfig(
        n_qubits=2, alpha0=30.0, n_flips=1, fock_cutoff=40,
        include_number_coupling=False,
    )
    points = sweep_noise(params, cfg, "loss", [0.0, 0.02])
    assert [p.channel for p in points] == ["loss", "loss"]
    assert points[0].rate_ratio == 0.0
    # the comb fit itself tops out near 0.89 with only four levels
    assert points[0].fidelity > 0.85
    assert points[1].fidelity < points[0].fidelity - 1e-4
    assert points[1].fidelity > 0.5

    with pytest.raises(ConfigError):
        sweep_noise(params, cfg, "cosmic-rays", [0.0])
    with pytest.raises(ValueError):
        sweep_noise(params, cfg, "loss", [-0.1])


def test_sweep_thread_cap_parsing(monkeypatch):
    params = ProtocolParams(n_qubits=2, w=2.0)
    cfg = SimConfig(n_qubits=2, fock_cutoff=40)
    monkeypatch.setenv("GKPFORGE_THREADS", "not-a-number")
    with pytest.raises(ConfigError):
        sweep_noise(params, cfg, "loss", [0.0])
