"""Objective and RSE traces for several regularization weights on the
clustering fixture, plus the stopping point under each stopping rule."""
import argparse

import numpy as np

from hyperntf import io
from hyperntf.factorization import SolverConfig, hyperntf_solve
from hyperntf.synthetic import class_tensor


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambdas", default="0,4,64")
    ap.add_argument("--max-iter", type=int, default=500)
    ap.add_argument("--out", default="convergence.csv")
    args = ap.parse_args()
    x, _ = class_tensor()

    rows = []
    for lam in (float(v) for v in args.lambdas.split(",")):
        full = hyperntf_solve(x, SolverConfig(rank=3, lam=lam, knn=3, max_iter=args.max_iter,
                                              tol_obj=1e-300, tol_rse=1e-300))[1]
        obj = np.array(full.objective)
        rises = int(np.sum(np.diff(obj) > 0))
        rel = hyperntf_solve(x, SolverConfig(rank=3, lam=lam, knn=3, max_iter=args.max_iter))[1]
        ab = hyperntf_solve(x, SolverConfig(rank=3, lam=lam, knn=3, max_iter=args.max_iter, tol_obj=0.1,
                                            objective_criterion="absolute"))[1]
        print(f"lambda={lam:g}: objective {obj[0]:.4g} -> {obj[-1]:.4g}, {rises} rising sweeps; "
              f"relative rule stops at {rel.iterations} ({rel.termination}), "
              f"absolute 0.1 rule at {ab.iterations} ({ab.termination}); KKT {full.kkt_residual:.2e}")
        it = np.arange(1, obj.size + 1)
        rows.append(np.column_stack([np.full(obj.size, lam), it, obj, full.rse]))
    io.save_csv_matrix(args.out, np.vstack(rows), ["lambda", "iter", "objective", "rse"])
    print("wrote", args.out)


if __name__ == "__main__":
    main()
