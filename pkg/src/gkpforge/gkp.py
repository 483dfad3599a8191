"""Comb states with Gaussian peaks under a Gaussian envelope, and fitting.

A comb is parameterized by peak width delta, envelope decay kappa, and a
registration offset phi measured in half-spacings: peaks sit at
q = (2s + phi) * sqrt(pi), so the spacing between same-logical peaks is
2*sqrt(pi) and phi -> phi + 1 selects the complementary sublattice.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import erfc

from .errors import GridTooSmallError
from .oscillator import GridDensityMatrix, PositionGrid, WaveFunction, fidelity_pure

_SPACING_HALF = np.sqrt(np.pi)
_EDGE_MASS_LIMIT = 1e-3
_ENVELOPE_FLOOR = 1e-12


@dataclass(frozen=True)
class GkpParams:
    delta: float
    kappa: float
    phi: float = 0.0

    def __post_init__(self):
        if self.delta <= 0 or self.kappa <= 0:
            raise ValueError("peak width and envelope decay must be positive")
        object.__setattr__(self, "phi", float(self.phi) % 2.0)

    @property
    def delta_db(self) -> float:
        return -20.0 * np.log10(self.delta)

    @property
    def kappa_db(self) -> float:
        return -20.0 * np.log10(self.kappa)


@dataclass(frozen=True)
class LogicalAmplitudes:
    phi_v: float = 0.0
    omega_v: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.phi_v <= np.pi:
            raise ValueError("phi_v must lie in [0, pi]")
        if not 0.0 <= self.omega_v < 2.0 * np.pi:
            raise ValueError("omega_v must lie in [0, 2*pi)")


def gkp_state(params: GkpParams, grid: PositionGrid, check_grid: bool = True) -> WaveFunction:
    """Normalized peak train; peaks below the envelope floor are dropped."""
    if check_grid:
        span = min(abs(grid.q_min), grid.q_max)
        tail = erfc(params.kappa * span)
        if tail > _EDGE_MASS_LIMIT:
            raise GridTooSmallError(
                f"envelope 1/kappa = {1/params.kappa:.2f} leaves {tail:.2e} "
                f"probability outside the grid"
            )
    # peaks centered further than a few widths outside the grid contribute
    # nothing on-grid, so the sum only needs the grid's own reach
    margin = 6.0 * params.delta
    s_lo = int(np.floor((grid.q_min - margin) / (2.0 * _SPACING_HALF) - params.phi / 2.0))
    s_hi = int(np.ceil((grid.q_max + margin) / (2.0 * _SPACING_HALF) - params.phi / 2.0))
    q = grid.points
    samples = np.zeros(grid.n_points)
    for s in range(s_lo, s_hi + 1):
        center = (2 * s + params.phi) * _SPACING_HALF
        weight = np.exp(-((params.kappa * center) ** 2) / 2.0)
        if weight < _ENVELOPE_FLOOR:
            continue
        samples += weight * np.exp(-((q - center) ** 2) / (2.0 * params.delta ** 2))
    samples = samples.astype(complex)
    samples /= np.sqrt(np.sum(np.abs(samples) ** 2) * grid.dq)
    return WaveFunction(grid, samples)


def logical_state(
    amps: LogicalAmplitudes,
    params: GkpParams,
    grid: PositionGrid,
    check_grid: bool = True,
) -> WaveFunction:
    zero = gkp_state(params, grid, check_grid)
    one_params = GkpParams(params.delta, params.kappa, params.phi + 1.0)
    one = gkp_state(one_params, grid, check_grid=False)
    samples = (
        np.cos(amps.phi_v / 2.0) * zero.samples
        + np.sin(amps.phi_v / 2.0) * np.exp(1j * amps.omega_v) * one.samples
    )
    samples /= np.sqrt(np.sum(np.abs(samples) ** 2) * grid.dq)
    return WaveFunction(grid, samples)


@dataclass(frozen=True)
class FitReport:
    """Best comb parameters for a state, with the achieved fidelity.

    converged False means the simplex refinement failed to improve on the
    coarse scan by at least 1e-6; the reported point is still the best found.
    """

    params: GkpParams
    fidelity: float
    converged: bool
    refine_gain: float

    def to_json(self) -> str:
        payload = {
            "delta": self.params.delta,
            "kappa": self.params.kappa,
            "phi": self.params.phi,
            "fidelity": self.fidelity,
            "delta_dB": self.params.delta_db,
            "kappa_dB": self.params.kappa_db,
            "converged": self.converged,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


_COARSE_STEPS = 25
_COARSE_OFFSETS = (0.0, -0.02, 0.02, -0.05, 0.05, -0.1, 0.1)


def fit_gkp(rho: GridDensityMatrix, amps: LogicalAmplitudes) -> FitReport:
    """Maximize fidelity over (delta, kappa, offset) for fixed logical content.

    Deterministic: a fixed log-spaced coarse scan picks the simplex seed and
    ties break toward the earlier grid point.
    """
    grid = rho.grid

    def objective(x: np.ndarray) -> float:
        delta, kappa = np.exp(x[0]), np.exp(x[1])
        if not (1e-3 < delta < 10.0 and 1e-3 < kappa < 10.0):
            return 1.0
        candidate = logical_state(amps, GkpParams(delta, kappa, x[2]), grid, check_grid=False)
        return -fidelity_pure(rho, candidate)

    deltas = np.log(np.geomspace(0.05, 1.0, _COARSE_STEPS))
    kappas = np.log(np.geomspace(0.05, 1.0, _COARSE_STEPS))
    best_val = np.inf
    best_x = None
    for off in _COARSE_OFFSETS:
        for ld in deltas:
            for lk in kappas:
                val = objective(np.array([ld, lk, off]))
                if val < best_val - 1e-15:
                    best_val = val
                    best_x = np.array([ld, lk, off])

    result = minimize(
        objective,
        best_x,
        method="Nelder-Mead",
        options={"xatol": 1e-6, "fatol": 1e-10, "maxiter": 400},
    )
    refined = result.x if result.fun <= best_val else best_x
    refined_val = min(result.fun, best_val)
    gain = float(best_val - refined_val)
    params = GkpParams(float(np.exp(refined[0])), float(np.exp(refined[1])), float(refined[2]))
    return FitReport(
        params=params,
        fidelity=float(-refined_val),
        converged=bool(gain >= 1e-6),
        refine_gain=gain,
    )
