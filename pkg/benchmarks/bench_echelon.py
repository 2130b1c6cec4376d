"""Benchmark: compiled elimination kernel vs the numpy fallback.

Times reduced row echelon forms over F_2, F_3 and F_13 on random dense
matrices and on a structured case shaped like the coverage computation
(tall image matrix over F_3).  Results of the two backends are asserted
identical before timing is reported.
"""

import time

import numpy as np

from ptower.fp_linalg import _echelon_cy, _echelon_py

CASES = [
    ("F_2 random 1500x2000", 2, (1500, 2000)),
    ("F_3 random 1500x2000", 3, (1500, 2000)),
    ("F_13 random 800x1000", 13, (800, 1000)),
    ("F_3 tall image 6000x2500", 3, (6000, 2500)),
]


def run(backend, mat, p):
    t0 = time.perf_counter()
    red, piv = backend.row_reduce(mat, p)
    return time.perf_counter() - t0, red, piv


def main():
    rng = np.random.default_rng(0)
    print(f"{'case':32s} {'cython':>10s} {'python':>10s} {'speedup':>8s}")
    for name, p, shape in CASES:
        mat = rng.integers(0, p, size=shape)
        t_cy, red_cy, piv_cy = run(_echelon_cy, mat.copy(), p)
        t_py, red_py, piv_py = run(_echelon_py, mat.copy(), p)
        assert piv_cy == piv_py
        assert np.array_equal(
            np.asarray(red_cy, dtype=np.int64), np.asarray(red_py, dtype=np.int64)
        )
        print(f"{name:32s} {t_cy:9.3f}s {t_py:9.3f}s {t_py / t_cy:7.2f}x")


if __name__ == "__main__":
    main()
