"""Backend selection for the master-equation right-hand side.

The compiled extension is used when it imported cleanly; otherwise the
vectorized numpy module serves the identical contract.  Setting the
environment variable GKPFORGE_PURE_PYTHON to a non-empty value other than
"0" forces the numpy path even when the extension is available.
"""

from __future__ import annotations

import os

import numpy as np

from . import _rhs_numpy
from ._rhs_numpy import RhsContext, make_context

__all__ = ["RhsContext", "make_context", "RhsEvaluator", "active_backend"]

_ext = None
if os.environ.get("GKPFORGE_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _rhs_kernel as _ext  # type: ignore[attr-defined]
    except ImportError:
        _ext = None


def active_backend() -> str:
    return "compiled" if _ext is not None else "numpy"


class RhsEvaluator:
    """Callable producing the time derivative for a fixed run configuration.

    Holds the precomputed context plus, on the compiled path, reusable
    scratch storage so repeated calls inside an integrator allocate nothing.
    """

    def __init__(self, ctx: RhsContext, force_numpy: bool = False):
        self.ctx = ctx
        self._use_ext = _ext is not None and not force_numpy
        if self._use_ext:
            self._scratch = np.zeros((2, ctx.fock_dim, ctx.fock_dim), dtype=complex)

    @property
    def backend(self) -> str:
        return "compiled" if self._use_ext else "numpy"

    def __call__(self, rho: np.ndarray, alpha: complex, out: np.ndarray | None = None) -> np.ndarray:
        ctx = self.ctx
        if self._use_ext:
            if out is None:
                out = np.empty_like(rho)
            _ext.rhs(
                rho,
                out,
                self._scratch,
                ctx.block_scale,
                complex(alpha),
                ctx.include_number,
                ctx.kappa_l,
                ctx.kappa_phi,
                ctx.gamma_l,
                ctx.gamma_phi,
                ctx.hamming,
                ctx.zero_bits,
                ctx.bit_masks,
                ctx.sqrt_n,
            )
            return out
        result = _rhs_numpy.rhs(rho, complex(alpha), ctx)
        if out is not None:
            out[...] = result
            return out
        return result
