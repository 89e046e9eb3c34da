"""Compare the compiled subset-scan kernel with the pure-Python fallback.

Run with ``python3 benchmarks/bench_scan.py``.  Both kernels are timed on
the same random graphs and their outputs are checked to agree.
"""

import argparse
import random
import timeit

from wallx import _scan_py

try:
    from wallx import _kernels
except ImportError:
    _kernels = None


def random_instance(nv, extra, rng):
    edges = [(rng.randrange(v), v) for v in range(1, nv)]
    for _ in range(extra):
        u, v = rng.sample(range(nv), 2)
        edges.append((min(u, v), max(u, v)))
    adj = [0] * nv
    for u, v in edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    wb = [rng.randint(-20, 20) for _ in range(nv)]
    we = [rng.randint(-3, 3) for _ in range(nv)]
    return nv, adj, edges, wb, we, 6


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vertices", type=int, nargs="+", default=[6, 8, 10, 12])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    print(f"{'vertices':>8} {'python (ms)':>12} {'compiled (ms)':>14} {'speedup':>8}")
    for nv in args.vertices:
        inst = random_instance(nv, nv, rng)
        t_py = min(timeit.repeat(lambda: _scan_py.connected_betas(*inst), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{nv:>8} {t_py * 1e3:>12.2f} {'n/a':>14} {'n/a':>8}")
            continue
        if _kernels.connected_betas(*inst) != _scan_py.connected_betas(*inst):
            raise SystemExit(f"kernels disagree on {nv} vertices")
        t_c = min(timeit.repeat(lambda: _kernels.connected_betas(*inst), number=1, repeat=args.repeat))
        print(f"{nv:>8} {t_py * 1e3:>12.2f} {t_c * 1e3:>14.2f} {t_py / t_c:>8.1f}")


if __name__ == "__main__":
    main()
