"""Grid over the regularization weight and neighbor count, scored by k-means ACC/NMI.

Usage::

    python scripts/sweep_lambda_knn.py --out sweep.csv
    python scripts/sweep_lambda_knn.py --input data.tnsr --labels labels.txt --rank 20
"""
import argparse
import time

import numpy as np

from hyperntf import io
from hyperntf.evaluation import evaluate_clustering
from hyperntf.factorization import SolverConfig, hyperntf_solve
from hyperntf.synthetic import class_tensor


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input")
    ap.add_argument("--labels")
    ap.add_argument("--rank", type=int, default=3)
    ap.add_argument("--lambdas", default=",".join(str(2.0 ** p) for p in range(1, 11)))
    ap.add_argument("--knns", default="3,5,7")
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--max-iter", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args()

    if args.input:
        x = io.load_tensor(args.input, nonnegative=True)
        labels = io.load_labels(args.labels)
    else:
        # noisier variant of the clustering fixture
        x, labels = class_tensor(seed=args.seed, noise=0.6)
    K = int(np.unique(labels).size)

    rows = []
    for k in (int(v) for v in args.knns.split(",")):
        for lam in (float(v) for v in args.lambdas.split(",")):
            cfg = SolverConfig(rank=args.rank, lam=lam, knn=k, max_iter=args.max_iter, seed=args.seed)
            t0 = time.perf_counter()
            model, trace = hyperntf_solve(x, cfg)
            rep = evaluate_clustering(model.z, labels, K, runs=args.runs, base_seed=args.seed)
            rows.append([lam, k, rep.acc_mean, rep.acc_std, rep.nmi_mean, rep.nmi_std,
                         trace.iterations, trace.rse[-1], time.perf_counter() - t0])
            print(f"lambda={lam:7.1f} k={k}  ACC {rep.acc_mean:.3f}+-{rep.acc_std:.3f}  "
                  f"NMI {rep.nmi_mean:.3f}  iters {trace.iterations:4d}  RSE {trace.rse[-1]:.3f}")
    header = ["lambda", "knn", "acc_mean", "acc_std", "nmi_mean", "nmi_std", "iterations", "rse", "seconds"]
    io.save_csv_matrix(args.out, np.array(rows), header)
    print("wrote", args.out)


if __name__ == "__main__":
    main()
