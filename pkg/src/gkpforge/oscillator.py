"""Oscillator states on a position grid and in a truncated number basis.

Quadrature convention: [q, p] = i, vacuum variance 1/2.  Width figures in
decibels use 20*log10(W).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import erfc

from .errors import GridMismatchError, GridTooSmallError, InsufficientCutoffError

# fraction of probability mass allowed outside the grid before a state
# construction refuses to proceed
_EDGE_MASS_LIMIT = 1e-3


@dataclass(frozen=True)
class PositionGrid:
    """Uniform endpoint-exclusive sampling of the position quadrature."""

    q_min: float
    q_max: float
    n_points: int

    def __post_init__(self):
        if self.q_max <= self.q_min:
            raise ValueError("grid bounds must satisfy q_min < q_max")
        n = self.n_points
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError("n_points must be a power of two, at least 8")
        # q = 0 must fall on a sample or exactly between two samples
        offset = (-self.q_min / self.dq) % 1.0
        if min(offset, abs(offset - 0.5), abs(offset - 1.0)) > 1e-9:
            raise ValueError("origin must lie on the grid or midway between samples")

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / self.n_points

    @property
    def points(self) -> np.ndarray:
        return self.q_min + self.dq * np.arange(self.n_points)

    def matches(self, other: "PositionGrid") -> bool:
        return (
            self.q_min == other.q_min
            and self.q_max == other.q_max
            and self.n_points == other.n_points
        )


def default_grid() -> PositionGrid:
    """Grid wide and fine enough for every stock configuration."""
    return PositionGrid(-12.0, 12.0, 2048)


@dataclass(frozen=True)
class WaveFunction:
    grid: PositionGrid
    samples: np.ndarray

    def __post_init__(self):
        if self.samples.shape != (self.grid.n_points,):
            raise ValueError("sample count must match the grid")
        norm_sq = float(np.sum(np.abs(self.samples) ** 2) * self.grid.dq)
        if abs(norm_sq - 1.0) > 1e-8:
            raise ValueError(f"wave function not normalized: |psi|^2 integrates to {norm_sq}")

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.dq)


@dataclass(frozen=True)
class FockVector:
    cutoff: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (self.cutoff + 1,):
            raise ValueError("coefficient vector must have length cutoff + 1")
        norm = float(np.linalg.norm(self.coeffs))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"number-basis vector has norm {norm}")
        if abs(self.coeffs[-1]) ** 2 >= 1e-8:
            raise InsufficientCutoffError(
                f"weight {abs(self.coeffs[-1])**2:.2e} on the last retained level"
            )


@dataclass(frozen=True)
class GridDensityMatrix:
    """Density matrix sampled on the grid, (i, j) -> <q_i| rho |q_j>.

    When the state has known low rank the columns of ``factors`` satisfy
    entries = factors @ factors^dagger; fidelity and purity then work in the
    small column space instead of the full grid dimension.
    """

    grid: PositionGrid
    entries: np.ndarray
    factors: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        n = self.grid.n_points
        if self.entries.shape != (n, n):
            raise ValueError("entry matrix must be square on the grid")
        if np.max(np.abs(self.entries - self.entries.conj().T)) > 1e-8:
            raise ValueError("density matrix must be Hermitian")
        tr = float(np.real(np.trace(self.entries))) * self.grid.dq
        if abs(tr - 1.0) > 1e-6:
            raise ValueError(f"density matrix has trace {tr}")
        if self.factors is not None and self.factors.shape[0] != n:
            raise ValueError("factor rows must match the grid")


@dataclass(frozen=True)
class WignerGrid:
    q_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray


def squeezed_vacuum(w: float, grid: PositionGrid) -> WaveFunction:
    """Real Gaussian with position variance w^2/2 (w=1 is the vacuum)."""
    if w <= 0:
        raise ValueError("width must be positive")
    tail = 0.5 * (erfc(abs(grid.q_min) / w) + erfc(grid.q_max / w))
    if grid.q_min >= 0 or grid.q_max <= 0 or tail > _EDGE_MASS_LIMIT:
        raise GridTooSmallError(
            f"grid [{grid.q_min}, {grid.q_max}) leaves {tail:.2e} probability outside "
            f"for width {w}"
        )
    q = grid.points
    samples = np.exp(-(q ** 2) / (2.0 * w ** 2)).astype(complex)
    samples /= np.sqrt(np.sum(np.abs(samples) ** 2) * grid.dq)
    return WaveFunction(grid, samples)


def width_db(w: float) -> float:
    return 20.0 * np.log10(w)


def width_from_db(db: float) -> float:
    return float(10.0 ** (db / 20.0))


def momentum_displace(psi: WaveFunction, p0: float) -> WaveFunction:
    return WaveFunction(psi.grid, psi.samples * np.exp(1j * p0 * psi.grid.points))


def position_shift(psi: WaveFunction, a: float) -> WaveFunction:
    """Exact spectral translation by a; the state must stay inside the grid."""
    n = psi.grid.n_points
    dq = psi.grid.dq
    p = 2.0 * np.pi * np.fft.fftfreq(n, d=dq)
    shifted = np.fft.ifft(np.fft.fft(psi.samples) * np.exp(-1j * p * a))
    band = max(2, n // 256)
    edge_mass = float(
        (np.sum(np.abs(shifted[:band]) ** 2) + np.sum(np.abs(shifted[-band:]) ** 2)) * dq
    )
    if edge_mass > 1e-6:
        warnings.warn(
            f"shift by {a} puts probability {edge_mass:.2e} at the grid edge",
            stacklevel=2,
        )
    return WaveFunction(psi.grid, shifted)


def hermite_functions(grid: PositionGrid, n_max: int) -> np.ndarray:
    """Orthonormal oscillator eigenfunctions, one per column, up to n_max."""
    q = grid.points
    phi = np.zeros((grid.n_points, n_max + 1))
    phi[:, 0] = np.pi ** -0.25 * np.exp(-(q ** 2) / 2.0)
    if n_max >= 1:
        phi[:, 1] = np.sqrt(2.0) * q * phi[:, 0]
    for k in range(1, n_max):
        phi[:, k + 1] = np.sqrt(2.0 / (k + 1)) * q * phi[:, k] - np.sqrt(
            k / (k + 1)
        ) * phi[:, k - 1]
    return phi


def to_fock(psi: WaveFunction, n_max: int) -> FockVector:
    phi = hermite_functions(psi.grid, n_max)
    coeffs = phi.T @ psi.samples * psi.grid.dq
    if abs(coeffs[-1]) ** 2 >= 1e-8:
        raise InsufficientCutoffError(
            f"cutoff {n_max} leaves weight {abs(coeffs[-1])**2:.2e} on the top level"
        )
    coeffs = coeffs / np.linalg.norm(coeffs)
    return FockVector(n_max, coeffs)


def from_fock(f: FockVector, grid: PositionGrid) -> WaveFunction:
    phi = hermite_functions(grid, f.cutoff)
    samples = phi @ f.coeffs
    samples = samples / np.sqrt(np.sum(np.abs(samples) ** 2) * grid.dq)
    return WaveFunction(grid, samples)


class LadderOps(NamedTuple):
    a: np.ndarray
    adag: np.ndarray
    q: np.ndarray
    p: np.ndarray


def ladder_ops(n_max: int) -> LadderOps:
    if n_max < 1:
        raise ValueError("need at least two levels")
    root = np.sqrt(np.arange(1, n_max + 1, dtype=float))
    a = np.diag(root, k=1).astype(complex)
    adag = a.conj().T
    q = (a + adag) / np.sqrt(2.0)
    p = 1j * (adag - a) / np.sqrt(2.0)
    return LadderOps(a, adag, q, p)


def pure_density(psi: WaveFunction) -> GridDensityMatrix:
    col = psi.samples.reshape(-1, 1)
    return GridDensityMatrix(psi.grid, col @ col.conj().T, factors=col)


def density_from_factors(grid: PositionGrid, factors: np.ndarray) -> GridDensityMatrix:
    """Build rho = factors @ factors^dagger, rescaling to unit trace."""
    norm_sq = float(np.sum(np.abs(factors) ** 2) * grid.dq)
    factors = factors / np.sqrt(norm_sq)
    return GridDensityMatrix(grid, factors @ factors.conj().T, factors=factors)


def wigner(rho: GridDensityMatrix) -> WignerGrid:
    """Discrete transform of <q+y| rho |q-y>; marginals match diag(rho) exactly."""
    n = rho.grid.n_points
    dq = rho.grid.dq
    idx = np.arange(n)
    j_signed = ((idx + n // 2) % n) - n // 2
    rows = idx[:, None] + j_signed[None, :]
    cols = idx[:, None] - j_signed[None, :]
    valid = (rows >= 0) & (rows < n) & (cols >= 0) & (cols < n)
    gathered = np.where(valid, rho.entries[rows.clip(0, n - 1), cols.clip(0, n - 1)], 0.0)
    values = (dq / np.pi) * np.fft.fftshift(np.real(np.fft.fft(gathered, axis=1)), axes=1)
    p_axis = np.fft.fftshift(np.pi * np.fft.fftfreq(n, d=dq))
    return WignerGrid(rho.grid.points.copy(), p_axis, values)


def fidelity_pure(rho: GridDensityMatrix, psi: WaveFunction) -> float:
    if not rho.grid.matches(psi.grid):
        raise GridMismatchError("state and density matrix live on different grids")
    dq = rho.grid.dq
    if rho.factors is not None:
        overlaps = psi.samples.conj() @ rho.factors * dq
        value = float(np.sum(np.abs(overlaps) ** 2))
    else:
        value = float(np.real(psi.samples.conj() @ rho.entries @ psi.samples) * dq ** 2)
    if value > 1.0 + 1e-9:
        raise ValueError(f"fidelity {value} outside [0, 1]")
    return min(max(value, 0.0), 1.0)


def purity(rho: GridDensityMatrix) -> float:
    dq = rho.grid.dq
    if rho.factors is not None:
        gram = rho.factors.conj().T @ rho.factors * dq
        return float(np.real(np.sum(gram * gram.T)))
    return float(np.real(np.sum(rho.entries * rho.entries.T)) * dq ** 2)


def fidelity_mixed(rho_a: GridDensityMatrix, rho_b: GridDensityMatrix) -> float:
    """Uhlmann fidelity, computed in the joint column space of the two factors.

    Requires both operands to carry factors; states produced by this package
    always do.
    """
    if not rho_a.grid.matches(rho_b.grid):
        raise GridMismatchError("density matrices live on different grids")
    if rho_a.factors is None or rho_b.factors is None:
        raise ValueError("mixed-state fidelity needs factored density matrices")
    dq = rho_a.grid.dq
    stacked = np.hstack([rho_a.factors, rho_b.factors])
    basis, _ = np.linalg.qr(stacked)
    ga = basis.conj().T @ rho_a.factors
    gb = basis.conj().T @ rho_b.factors
    small_a = (ga @ ga.conj().T) * dq
    small_b = (gb @ gb.conj().T) * dq
    vals_a, vecs_a = np.linalg.eigh(small_a)
    vals_a = np.clip(vals_a, 0.0, None)
    sqrt_a = (vecs_a * np.sqrt(vals_a)) @ vecs_a.conj().T
    inner = sqrt_a @ small_b @ sqrt_a
    eigs = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    value = float(np.sum(np.sqrt(eigs)) ** 2)
    return min(max(value, 0.0), 1.0)
