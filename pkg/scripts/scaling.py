"""Per-sweep wall time of the regularized solver as the sample count grows."""
import argparse
import time

import numpy as np

from hyperntf.factorization import init_factors, sample_vectors, sweep
from hyperntf.hypergraph import build_knn_hypergraph


def sweep_time(M, dims, rank, knn, lam, sweeps):
    x = np.random.default_rng(M).random(tuple(dims) + (M,))
    graph = build_knn_hypergraph(sample_vectors(x), knn)
    model = init_factors(x.shape, rank, 0)
    start = time.perf_counter()
    for _ in range(sweeps):
        sweep(x, model, graph, lam)
    return (time.perf_counter() - start) / sweeps


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="200,400,800,1600,3200")
    ap.add_argument("--dims", default="8,8")
    ap.add_argument("--rank", type=int, default=5)
    ap.add_argument("--knn", type=int, default=3)
    ap.add_argument("--lam", type=float, default=4.0)
    ap.add_argument("--sweeps", type=int, default=20)
    args = ap.parse_args()
    dims = [int(v) for v in args.dims.split(",")]
    prev = None
    for M in (int(v) for v in args.sizes.split(",")):
        t = min(sweep_time(M, dims, args.rank, args.knn, args.lam, args.sweeps) for _ in range(3))
        ratio = f"  x{t / prev:.2f}" if prev else ""
        print(f"M={M:6d}  {t * 1e3:8.2f} ms/sweep{ratio}")
        prev = t


if __name__ == "__main__":
    main()
