"""Timing comparison of the numba kernels against the numpy fallback.

Two hot paths are measured on the teleportation chain Hamiltonian:
sector-restricted COO extraction (what sector_matrix spends its time on)
and whole-register Pauli-term application (the matvec behind propagation
and iterative eigensolvers).  Correctness is cross-checked on every run.

Usage: python benchmarks/kernel_benchmark.py [--L 8..10] [--repeats 3]
"""

import argparse
import time

import numpy as np

from agtsim import _kernels
from agtsim.sectors import sector_decompose, sector_index_map, sector_with_k
from agtsim.spectral import chain_pair


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _sector_assembly(kernel, terms, states, index_of):
    def run():
        total = 0
        for flip, sign in terms:
            rows, _, _ = kernel(states, index_of, flip, sign)
            total += rows.shape[0]
        return total

    return run


def _term_sweep(kernel, terms, vec):
    def run():
        acc = np.zeros_like(vec)
        for flip, sign, weight in terms:
            acc += kernel(vec, flip, sign, weight)
        return acc

    return run


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--L", default="8..10", help="chain-length range 'a..b'")
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats, best-of")
    args = parser.parse_args()
    lo, hi = (int(p) for p in args.L.split("..")) if ".." in args.L else (int(args.L),) * 2

    if _kernels.numba is None:
        print("numba not installed: timing the numpy fallback only")
        pairs = (("numpy", _kernels._sector_term_coo_numpy, _kernels._apply_term_numpy),)
    else:
        pairs = (
            ("numpy", _kernels._sector_term_coo_numpy, _kernels._apply_term_numpy),
            ("numba", _kernels._sector_term_coo_numba, _kernels._apply_term_numba),
        )
        # First call pays the JIT compile; keep it out of the timings.
        warm = np.arange(8, dtype=np.int64)
        _kernels._sector_term_coo_numba(warm, np.arange(8, dtype=np.int64), 1, 2)
        _kernels._apply_term_numba(np.ones(8, dtype=complex), 1, 2, 1.0)

    rng = np.random.default_rng(11)
    print(f"{'L':>2} {'n':>3} {'sector dim':>10} {'task':>8} "
          + "".join(f"{name + ' [s]':>12}" for name, *_ in pairs)
          + ("{:>9} {:>10}".format("speedup", "max diff") if len(pairs) == 2 else ""))
    for L in range(lo, hi + 1):
        n = 2 * L + 1
        pair = chain_pair(L, 0.5)
        ham = pair.ini + pair.fin
        sector = sector_with_k(sector_decompose(n), 0.5)
        index_of = sector_index_map(sector)
        coo_terms = [t.masks()[:2] for t in ham.terms]
        vec = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
        vec /= np.linalg.norm(vec)
        sweep_terms = [(*t.masks()[:2], t.weight()) for t in ham.terms]

        for task, build, data in (
            ("assembly", _sector_assembly, (coo_terms, sector.states, index_of)),
            ("matvec", _term_sweep, (sweep_terms, vec)),
        ):
            times, outs = [], []
            for _, coo_kernel, apply_kernel in pairs:
                kernel = coo_kernel if task == "assembly" else apply_kernel
                best, out = _time(build(kernel, *data), args.repeats)
                times.append(best)
                outs.append(out)
            line = f"{L:>2} {n:>3} {sector.dimension:>10} {task:>8}" + "".join(
                f"{t:>12.4f}" for t in times
            )
            if len(pairs) == 2:
                diff = (
                    abs(outs[0] - outs[1])
                    if task == "assembly"
                    else float(np.max(np.abs(outs[0] - outs[1])))
                )
                line += f"{times[0] / times[1]:>9.2f} {diff:>10.2e}"
            print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
