"""Timing comparison of the compiled and numpy right-hand-side backends.

Builds a representative master-equation context, verifies both backends
agree on a random Hermitian input, then times repeated evaluations.

Usage: python3 benchmarks/bench_rhs.py [--qubits 3] [--cutoff 80] [--repeats 200]
"""

import argparse
import timeit

import numpy as np

from gkpforge.kernels import RhsEvaluator, active_backend, make_context


def random_density(n_blocks: int, fock_dim: int, seed: int = 7) -> np.ndarray:
    rng = np.random.default_rng(seed)
    d = n_blocks * fock_dim
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = m @ m.conj().T
    rho /= np.trace(rho).real
    return np.ascontiguousarray(rho.reshape(n_blocks, fock_dim, n_blocks, fock_dim))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, default=3)
    parser.add_argument("--cutoff", type=int, default=80)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    ctx = make_context(
        n_qubits=args.qubits,
        fock_dim=args.cutoff + 1,
        chi=1.0,
        kappa_l=0.01,
        kappa_phi=0.01,
        gamma_l=0.01,
        gamma_phi=0.01,
    )
    rho = random_density(ctx.n_blocks, ctx.fock_dim)
    alpha = 30.0 + 0.0j

    numpy_eval = RhsEvaluator(ctx, force_numpy=True)
    fast_eval = RhsEvaluator(ctx)
    if fast_eval.backend == "numpy":
        print("compiled extension unavailable; timing the numpy backend alone")

    ref = numpy_eval(rho, alpha)
    if fast_eval.backend == "compiled":
        diff = np.max(np.abs(fast_eval(rho, alpha) - ref))
        print(f"backend agreement: max |diff| = {diff:.3e}")
        if not diff < 1e-12:
            print("FAIL: backends disagree")
            return 1

    out = np.empty_like(rho)
    rows = [("numpy", numpy_eval)]
    if fast_eval.backend == "compiled":
        rows.append(("compiled", fast_eval))

    print(f"\nN={args.qubits} qubits, cutoff={args.cutoff}, "
          f"{args.repeats} evaluations each (import default: {active_backend()})")
    times = {}
    for name, evaluator in rows:
        total = timeit.timeit(lambda: evaluator(rho, alpha, out), number=args.repeats)
        times[name] = total / args.repeats
        print(f"  {name:>8}: {times[name] * 1e3:8.3f} ms per call")
    if len(times) == 2:
        print(f"  speedup : {times['numpy'] / times['compiled']:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
