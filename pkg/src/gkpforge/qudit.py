"""Discrete quadrature algebra for a register of N qubits treated as one 2^N-level system.

The register carries a centered half-integer level ladder K, a pair of
conjugate quadrature operators related by a centered Fourier transform,
a displacement operator acting by band-limited interpolation of the
amplitudes, and constructors for the two-peak states used to imprint a
grid-state comb onto an oscillator.

Basis convention: amplitude vectors are indexed by K in ascending order,
which coincides with the computational basis ordered by binary value
with qubit 1 the least significant bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuditDims",
    "QuditOperator",
    "VPrepParams",
    "Gate",
    "Circuit",
    "index_set",
    "x_operator",
    "y_operator",
    "qft_matrix",
    "qft_circuit",
    "displacement_dx",
    "interpolate",
    "fourier_coeff",
    "build_v_state",
    "u_v_circuit",
    "peak_sigma",
    "circuit_unitary",
]


@dataclass(frozen=True)
class QuditDims:
    """Register size: n_qubits qubits forming a dim = 2**n_qubits level system."""

    n_qubits: int
    dim: int = 0

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        object.__setattr__(self, "dim", 2 ** self.n_qubits)


@dataclass(frozen=True)
class QuditOperator:
    """Dense operator on the register, with a fast-path hint for diagonal ones."""

    matrix: np.ndarray
    diagonal: bool = False

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


_THETA_RANGE = (2.5, 2.7)


@dataclass(frozen=True)
class VPrepParams:
    """Angles parameterizing the two-peak register state.

    theta_v sets the peak shape, phi_v the relative peak weight and
    omega_v the relative peak phase.  theta_v outside [2.5, 2.7] is
    allowed but warns: the peak quality degrades there.
    """

    theta_v: float = 2.6
    phi_v: float = 0.0
    omega_v: float = 0.0

    def __post_init__(self) -> None:
        if not _THETA_RANGE[0] <= self.theta_v <= _THETA_RANGE[1]:
            warnings.warn(
                f"theta_v={self.theta_v} outside validated range {_THETA_RANGE}; "
                "peak shape may develop sidelobes",
                UserWarning,
                stacklevel=2,
            )
        if not 0.0 <= self.phi_v <= np.pi:
            raise ValueError(f"phi_v must lie in [0, pi], got {self.phi_v}")
        if not 0.0 <= self.omega_v < 2.0 * np.pi:
            raise ValueError(f"omega_v must lie in [0, 2*pi), got {self.omega_v}")


def index_set(dims: QuditDims) -> np.ndarray:
    """Centered half-integer levels, ascending: -(M-1)/2 ... +(M-1)/2."""
    m = dims.dim
    return np.arange(m, dtype=float) - (m - 1) / 2.0


def x_operator(dims: QuditDims) -> QuditOperator:
    """Position-like quadrature: diagonal with spectrum K in basis order.

    Equals -sum_n 2^(n-2) sigma_z^(n) on the register, with sigma_z|0> = +|0>.
    """
    return QuditOperator(np.diag(index_set(dims)).astype(complex), diagonal=True)


def qft_matrix(dims: QuditDims) -> QuditOperator:
    """Centered Fourier transform F with F[m, n] = exp(i*2*pi*(n-1/2)*(m-1/2)/M)/sqrt(M)."""
    m = dims.dim
    k = index_set(dims)
    shifted = k - 0.5
    mat = np.exp(2j * np.pi * np.outer(shifted, shifted) / m) / np.sqrt(m)
    return QuditOperator(mat)


def y_operator(dims: QuditDims) -> QuditOperator:
    """Momentum-like quadrature: F X F^dagger, same spectrum as X."""
    f = qft_matrix(dims).matrix
    x = x_operator(dims).matrix
    return QuditOperator(f @ x @ f.conj().T)


def displacement_dx(dims: QuditDims, s: float) -> QuditOperator:
    """Displacement along the level ladder by s (real, not necessarily integer).

    Diagonalized by F: D(s) = F diag(exp(-i*2*pi*K*s/M)) F^dagger, which acts on
    amplitudes as exp(-i*pi*s/M) times the interpolation sampled at shifted points.
    """
    if not np.isfinite(s):
        raise ValueError(f"displacement distance must be finite, got {s}")
    f = qft_matrix(dims).matrix
    phases = np.exp(-2j * np.pi * index_set(dims) * s / dims.dim)
    return QuditOperator((f * phases) @ f.conj().T)


def _dirichlet_kernel(u: np.ndarray, m: int) -> np.ndarray:
    """exp(-i*pi*u/m) * sin(pi*u)/sin(pi*u/m), with the value m at u = 0 mod m."""
    u = np.asarray(u, dtype=float)
    den = np.sin(np.pi * u / m)
    at_node = np.abs(den) < 1e-12
    safe_den = np.where(at_node, 1.0, den)
    ratio = np.sin(np.pi * u) / safe_den
    kern = np.exp(-1j * np.pi * u / m) * ratio
    # Both limit factors carry (-1)^j at u = j*m, so the product limit is exactly m.
    return np.where(at_node, float(m), kern)


def interpolate(state: np.ndarray, y) -> complex | np.ndarray:
    """Band-limited interpolation v(y) of the amplitudes through the points (k, v_k).

    Periodic with period M; exact at the half-integer sample points.
    Scalar y gives a complex scalar, array y an array of the same shape.
    """
    v = np.asarray(state, dtype=complex)
    m = v.size
    k = np.arange(m, dtype=float) - (m - 1) / 2.0
    y_arr = np.asarray(y, dtype=float)
    u = y_arr[..., None] - k
    out = _dirichlet_kernel(u, m) @ v / m
    if np.isscalar(y) or y_arr.ndim == 0:
        return complex(out)
    return out


def fourier_coeff(state: np.ndarray, m_freq: int) -> complex:
    """Fourier coefficient c_m of the interpolation at frequency m/M.

    Nonzero only on the band m in [-M/2, M/2 - 1]; there it equals the
    overlap of the plane-wave state at that frequency with the amplitudes.
    """
    v = np.asarray(state, dtype=complex)
    m = v.size
    if not -m // 2 <= m_freq <= m // 2 - 1:
        return 0j
    k = np.arange(m, dtype=float) - (m - 1) / 2.0
    return complex(np.exp(-2j * np.pi * m_freq * k / m) @ v / np.sqrt(m))


def build_v_state(dims: QuditDims, params: VPrepParams) -> np.ndarray:
    """Two-peak register state by direct amplitude synthesis.

    Each peak spans four adjacent levels: an inner pair weighted
    sin(theta_v/2)/sqrt(2) and an outer pair weighted cos(theta_v/2)/sqrt(2),
    which makes a lone peak exactly normalized.  Peak 0 sits at level 0,
    peak 1 is its half-ladder translate (wrapping past the edges), and the
    two are combined with weights cos(phi_v/2) and sin(phi_v/2)*exp(i*omega_v).
    """
    if dims.n_qubits < 2:
        raise ValueError("two peaks need at least 2 qubits to be resolvable")
    m = dims.dim
    inner = np.sin(params.theta_v / 2.0) / np.sqrt(2.0)
    outer = np.cos(params.theta_v / 2.0) / np.sqrt(2.0)

    peak0 = np.zeros(m, dtype=complex)
    peak0[m // 2 - 2] = outer
    peak0[m // 2 - 1] = inner
    peak0[m // 2] = inner
    peak0[m // 2 + 1] = outer
    # Exact half-ladder translate of peak0 under periodic wrap.
    peak1 = np.roll(peak0, m // 2)

    v = np.cos(params.phi_v / 2.0) * peak0
    v = v + np.sin(params.phi_v / 2.0) * np.exp(1j * params.omega_v) * peak1
    # The peaks share levels at M = 4, so the sum is not automatically normalized.
    return v / np.linalg.norm(v)


def peak_sigma(state: np.ndarray) -> float:
    """Amplitude-weighted level spread of the dominant peak.

    Levels within a quarter ladder of the dominant peak's center (under
    periodic wrap) contribute with weight |v_k|; returns the weighted
    standard deviation of the level offset.
    """
    v = np.asarray(state, dtype=complex)
    m = v.size
    k = np.arange(m, dtype=float) - (m - 1) / 2.0
    center = float(np.round(k[int(np.argmax(np.abs(v)))]))
    delta = (k - center + m / 2.0) % m - m / 2.0
    mask = np.abs(delta) < m / 4.0
    weights = np.abs(v[mask])
    total = weights.sum()
    if total < 1e-12:
        raise ValueError("no amplitude near the dominant peak")
    mu = (weights * delta[mask]).sum() / total
    var = (weights * (delta[mask] - mu) ** 2).sum() / total
    return float(np.sqrt(var))


# --- gate-list circuits ------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    """One gate: a name, 1-based qubit indices (qubit 1 = least significant bit), a parameter.

    Names: "h", "x", "phase" (diag(1, e^{i*param})), "ry", "rz",
    "cr" (controlled phase e^{2*pi*i/2^param} on |11>), "cx" (control, target), "swap".
    """

    name: str
    qubits: tuple[int, ...]
    param: float = 0.0


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]
    global_phase: complex = 1.0 + 0.0j


def _embed_single(g: np.ndarray, target: int, n_qubits: int) -> np.ndarray:
    hi = np.eye(2 ** (n_qubits - target))
    lo = np.eye(2 ** (target - 1))
    return np.kron(hi, np.kron(g, lo))


def _gate_unitary(gate: Gate, n_qubits: int) -> np.ndarray:
    m = 2 ** n_qubits
    idx = np.arange(m)
    name = gate.name
    if name == "h":
        g = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
        return _embed_single(g, gate.qubits[0], n_qubits)
    if name == "x":
        g = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        return _embed_single(g, gate.qubits[0], n_qubits)
    if name == "phase":
        g = np.diag([1.0, np.exp(1j * gate.param)])
        return _embed_single(g, gate.qubits[0], n_qubits)
    if name == "ry":
        c, s = np.cos(gate.param / 2.0), np.sin(gate.param / 2.0)
        g = np.array([[c, -s], [s, c]], dtype=complex)
        return _embed_single(g, gate.qubits[0], n_qubits)
    if name == "rz":
        g = np.diag([np.exp(-0.5j * gate.param), np.exp(0.5j * gate.param)])
        return _embed_single(g, gate.qubits[0], n_qubits)
    if name == "cr":
        control, target = gate.qubits
        both = ((idx >> (control - 1)) & 1) & ((idx >> (target - 1)) & 1)
        diag = np.where(both == 1, np.exp(2j * np.pi / 2 ** int(round(gate.param))), 1.0)
        return np.diag(diag).astype(complex)
    if name == "cx":
        control, target = gate.qubits
        flipped = idx ^ (((idx >> (control - 1)) & 1) << (target - 1))
        u = np.zeros((m, m), dtype=complex)
        u[flipped, idx] = 1.0
        return u
    if name == "swap":
        a, b = gate.qubits
        bit_a = (idx >> (a - 1)) & 1
        bit_b = (idx >> (b - 1)) & 1
        swapped = idx ^ ((bit_a ^ bit_b) << (a - 1)) ^ ((bit_a ^ bit_b) << (b - 1))
        u = np.zeros((m, m), dtype=complex)
        u[swapped, idx] = 1.0
        return u
    raise ValueError(f"unknown gate name {name!r}")


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of the gate list, earliest gate applied first, times the global phase."""
    m = 2 ** circuit.n_qubits
    u = np.eye(m, dtype=complex)
    for gate in circuit.gates:
        u = _gate_unitary(gate, circuit.n_qubits) @ u
    return circuit.global_phase * u


def qft_circuit(dims: QuditDims) -> Circuit:
    """Gate decomposition of the centered Fourier transform.

    The centered transform equals i^M times the standard transform
    conjugated by a phase flip on qubit 1, so the list is that flip,
    the usual ladder of Hadamards and controlled phases with the final
    bit-reversal swaps, and the flip again; i^M is kept as the recorded
    global phase.
    """
    n = dims.n_qubits
    gates: list[Gate] = [Gate("phase", (1,), float(np.pi))]
    for u in range(n, 0, -1):
        gates.append(Gate("h", (u,)))
        for s in range(u - 1, 0, -1):
            gates.append(Gate("cr", (s, u), float(u + 1 - s)))
    for t in range(1, n // 2 + 1):
        gates.append(Gate("swap", (t, n + 1 - t)))
    gates.append(Gate("phase", (1,), float(np.pi)))
    return Circuit(n, tuple(gates), global_phase=1j ** dims.dim)


def u_v_circuit(dims: QuditDims, params: VPrepParams) -> Circuit:
    """Preparation circuit for the two-peak state over {X, CNOT, RY, RZ}.

    Three product degrees of freedom (peak choice on the top qubit, peak
    side on qubit 2, inner/outer level on qubit 1) are prepared locally and
    wired into place with CNOT fan-out from qubit 2.  The equal side split
    is approximated by three stacked RY(theta_v) rotations, the only
    approximation in the construction; everything else is exact.

    Needs at least 3 qubits: with 2 the side and peak wires coincide.
    """
    n = dims.n_qubits
    if n < 3:
        raise ValueError("the preparation circuit needs n_qubits >= 3")
    theta, phi, omega = params.theta_v, params.phi_v, params.omega_v
    gates: list[Gate] = [Gate("ry", (n,), phi), Gate("rz", (n,), omega)]
    gates += [Gate("ry", (2,), theta)] * 3
    gates.append(Gate("ry", (1,), theta))
    gates.append(Gate("cx", (2, n)))
    for mid in range(3, n):
        gates.append(Gate("cx", (2, mid)))
    gates.append(Gate("cx", (2, 1)))
    for mid in range(2, n):
        gates.append(Gate("x", (mid,)))
    circuit = Circuit(n, tuple(gates))

    target = build_v_state(dims, params)
    produced = circuit_unitary(circuit)[:, 0]
    fidelity = abs(np.vdot(target, produced)) ** 2
    if fidelity < 0.99:
        warnings.warn(
            f"preparation circuit reaches fidelity {fidelity:.4f} < 0.99 "
            f"against direct synthesis at theta_v={theta}",
            UserWarning,
            stacklevel=2,
        )
    return circuit
