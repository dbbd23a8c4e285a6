"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times the two hot kernels (successor image, constrained BFS) and the
whole validity check on the expanded gcd machine, under both backends.
Run:  python benchmarks/bench_backends.py
"""

import pathlib
import time

import numpy as np

from rlv import _kernels, efsm
from rlv.semantics import holds_valid

MODELS = pathlib.Path(__file__).resolve().parent.parent / "models"
REPEAT = 20


def timed(fn, repeat=REPEAT):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000.0


def main():
    model = efsm.parse_model((MODELS / "gcd.rlv").read_text())
    system, _ = efsm.expand(model)
    formula = efsm.parse_formula(
        "c = c0 && x0 > 0 && y0 > 0 =>> c = c2 && x = y && x = gcd(x0, y0)", system)
    indptr, indices = system._csr
    mask = formula.lhs.mask
    blocked = formula.rhs.mask

    print(f"gcd expansion: {system.n} states, {system.num_transitions} transitions")
    print("warming up numba (compilation not timed) ...")
    _kernels.warm_up()
    _kernels.successors(indptr, indices, mask, backend="numba")
    _kernels.bfs_avoiding(indptr, indices, mask, blocked, backend="numba")

    rows = []
    results = {}
    for backend in ("numba", "numpy"):
        t_post = timed(lambda: _kernels.successors(indptr, indices, mask, backend=backend))
        t_bfs = timed(lambda: _kernels.bfs_avoiding(indptr, indices, mask, blocked,
                                                    backend=backend))
        prev = _kernels.set_backend(backend)
        try:
            t_valid = timed(lambda: holds_valid(system, formula))
            results[backend] = holds_valid(system, formula)
        finally:
            _kernels.set_backend(prev)
        rows.append((backend, t_post, t_bfs, t_valid))

    assert results["numba"].status == results["numpy"].status
    sux = {b: np.array_equal(
        _kernels.successors(indptr, indices, mask, backend=b),
        _kernels.successors(indptr, indices, mask, backend="numpy"))
        for b in ("numba", "numpy")}
    assert all(sux.values())

    print(f"\n{'backend':<8} {'post (ms)':>10} {'bfs (ms)':>10} {'check-valid (ms)':>17}")
    for backend, t_post, t_bfs, t_valid in rows:
        print(f"{backend:<8} {t_post:>10.3f} {t_bfs:>10.3f} {t_valid:>17.3f}")
    nb, npy = rows[0], rows[1]
    print(f"\nbfs speedup numba/numpy: {npy[2] / nb[2]:.2f}x "
          f"(verdicts agree: {results['numba'].status})")


if __name__ == "__main__":
    main()
