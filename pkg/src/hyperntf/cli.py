"""Batch front end: ``hyperntf <task> [--config FILE] [flags]``.

Tasks: factorize, unfold, cluster-eval, gen-manifold, convert. Exit codes:
0 success, 2 configuration error, 3 data/format error, 4 numeric failure.

Each run writes ``report.txt`` (key/value pairs in the fixed order
``REPORT_KEYS``) next to its CSV artifacts. Wall-clock time goes to
``timing.txt`` so the report and CSVs depend only on the configuration and
reruns are byte-identical.
"""
import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import io
from .config import FIELD_TO_KEY, KEYS, TASKS, build_config, parse_value, read_config
from .embedding import (
    gen_manifold,
    graph_spectral_embed,
    hypergraph_spectral_embed,
    lle_embed,
    neighborhood_preservation,
    DEFAULT_KNN,
    PointCloud,
)
from .errors import ConfigError, DataError, InvalidArgumentError, NumericFailureError
from .evaluation import evaluate_clustering
from .factorization import SolverConfig, hyperntf_solve, hosvd, ntd_solve, ntf_solve

log = logging.getLogger("hyperntf")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

CONFIG_KEYS = list(KEYS)
RESULT_KEYS = [
    "data_shape",
    "iterations",
    "final_objective",
    "final_rse",
    "termination",
    "kkt_residual",
    "acc_mean",
    "acc_std",
    "nmi_mean",
    "nmi_std",
    "acc_runs",
    "nmi_runs",
    "neighborhood_preservation",
    "eigenvalues",
    "artifacts",
]
REPORT_KEYS = CONFIG_KEYS + RESULT_KEYS


@dataclass
class RunReport:
    config: object
    results: dict = field(default_factory=dict)
    wall_time: float = 0.0
    artifacts: dict = field(default_factory=dict)
    trace: object = None

    def lines(self):
        values = {}
        for name, key in FIELD_TO_KEY.items():
            values[key] = getattr(self.config, name)
        values.update(self.results)
        values["artifacts"] = sorted(self.artifacts) or None
        return [f"{key}: {_fmt(values.get(key))}" for key in REPORT_KEYS]

    def text(self):
        return "\n".join(self.lines()) + "\n"


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return io.FLOAT_FMT % v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def parse_report(text):
    """Inverse of :meth:`RunReport.text` (values stay strings)."""
    out = {}
    for line in text.splitlines():
        key, _, val = line.partition(": ")
        out[key] = val
    return out


def _solver_config(cfg):
    return SolverConfig(
        rank=cfg.rank if cfg.rank is not None else 1,
        lam=cfg.lam if cfg.method == "hyperntf" else 0.0,
        knn=cfg.knn if cfg.knn is not None else 3,
        max_iter=cfg.max_iter,
        tol_rse=cfg.tol_rse,
        tol_obj=cfg.tol_obj,
        epsilon_guard=cfg.epsilon_guard,
        seed=cfg.seed,
        weight_scheme=cfg.weight_scheme,
        objective_criterion=cfg.objective_criterion,
        unit_hypergraph_coef=cfg.unit_hypergraph_coef,
    )


def _load_dataset(cfg, need_labels):
    """Tensor (sample mode last) and optional labels for factor tasks."""
    labels = None
    paths = cfg.input
    if len(paths) == 2 and io.is_idx(paths[0], io.IDX_IMAGES):
        x, labels = io.import_idx(paths[0], paths[1], limit=cfg.limit, seed=cfg.seed)
    else:
        x = io.load_tensor(paths[0], nonnegative=cfg.method != "hosvd", sample_shape=cfg.sample_shape)
        if cfg.limit is not None and cfg.limit < x.shape[-1]:
            idx = np.sort(np.random.default_rng(cfg.seed).choice(x.shape[-1], cfg.limit, replace=False))
            x = x[..., idx]
    if cfg.labels:
        labels = io.load_labels(cfg.labels)
        if cfg.limit is not None and labels.shape[0] > x.shape[-1]:
            raise ConfigError("limit with a separate label file is only supported for IDX inputs")
    if need_labels:
        if labels is None:
            raise ConfigError("labels are required for cluster-eval")
        if labels.shape[0] != x.shape[-1]:
            raise DataError(f"{labels.shape[0]} labels for {x.shape[-1]} samples")
    if x.ndim < 2:
        raise DataError("input must have order >= 2 with samples along the last mode")
    return x, labels


def _tucker_ranks(cfg, dims):
    if cfg.ranks is not None:
        if len(cfg.ranks) != len(dims):
            raise ConfigError(f"ranks has {len(cfg.ranks)} entries, data has {len(dims)} modes")
        return cfg.ranks
    return tuple(min(cfg.rank, d) for d in dims)


def _factorize(cfg, x, report):
    if cfg.method in ("hyperntf", "ntf"):
        scfg = _solver_config(cfg)
        M = x.shape[-1]
        if cfg.method == "hyperntf" and scfg.lam > 0 and not 1 <= scfg.knn <= M - 1:
            raise ConfigError(f"knn={scfg.knn} must lie in 1..{M - 1} for {M} samples")
        solve = hyperntf_solve if cfg.method == "hyperntf" else ntf_solve
        model, trace = solve(x, scfg)
        z = model.z
    elif cfg.method == "ntd":
        tmodel, trace = ntd_solve(x, _tucker_ranks(cfg, x.shape), _solver_config(cfg))
        z = tmodel.embedding
    else:
        z = hosvd(x, _tucker_ranks(cfg, x.shape)).embedding
        trace = None
    if trace is not None:
        report.trace = trace
        report.results.update(
            iterations=trace.iterations,
            final_objective=trace.objective[-1],
            final_rse=trace.rse[-1],
            termination=trace.termination,
            kkt_residual=trace.kkt_residual if cfg.method in ("hyperntf", "ntf") else None,
        )
    return z


def _point_cloud(cfg):
    if cfg.kind is not None:
        return gen_manifold(cfg.kind, cfg.num_samples, cfg.seed, cfg.noise_sd)
    header, rows = io.read_csv_matrix(cfg.input[0])
    color = np.arange(rows.shape[0], dtype=np.float64)
    if header and header[-1] == "color":
        color, rows = rows[:, -1], rows[:, :-1]
    return PointCloud(points=rows, color=color)


def run_experiment(cfg):
    """Execute one configured task; returns the report and artifact contents.

    Nothing is written here; see :func:`save_outputs`.
    """
    start = time.perf_counter()
    report = RunReport(config=cfg)
    csvs = {}
    if cfg.task in ("factorize", "cluster-eval"):
        x, labels = _load_dataset(cfg, need_labels=cfg.task == "cluster-eval")
        report.results["data_shape"] = list(x.shape)
        z = _factorize(cfg, x, report)
        csvs["z.csv"] = ([f"z{j + 1}" for j in range(z.shape[1])], z)
        if cfg.task == "cluster-eval":
            K = cfg.clusters or int(np.unique(labels).size)
            rep = evaluate_clustering(z, labels, K, runs=cfg.runs, base_seed=cfg.seed)
            report.results.update(
                acc_mean=rep.acc_mean,
                acc_std=rep.acc_std,
                nmi_mean=rep.nmi_mean,
                nmi_std=rep.nmi_std,
                acc_runs=rep.acc,
                nmi_runs=rep.nmi,
            )
    elif cfg.task == "gen-manifold":
        pc = _point_cloud(cfg)
        report.results["data_shape"] = list(pc.points.shape)
        csvs["manifold.csv"] = (["x", "y", "z", "color"], np.column_stack([pc.points, pc.color]))
    elif cfg.task == "unfold":
        pc = _point_cloud(cfg)
        M = pc.points.shape[0]
        k = cfg.knn if cfg.knn is not None else DEFAULT_KNN.get(cfg.kind, 10)
        if not 1 <= k <= M - 1:
            raise ConfigError(f"knn={k} must lie in 1..{M - 1}")
        if cfg.embed_dim > M - 2:
            raise ConfigError(f"embed_dim must be <= {M - 2}")
        if cfg.method == "hypergraph-le":
            emb = hypergraph_spectral_embed(pc, k, cfg.embed_dim, cfg.weight_scheme)
        elif cfg.method == "graph-le":
            emb = graph_spectral_embed(pc, k, cfg.embed_dim)
        else:
            emb = lle_embed(pc, k, cfg.embed_dim)
        report.results.update(
            data_shape=list(pc.points.shape),
            neighborhood_preservation=neighborhood_preservation(pc, emb, k),
            eigenvalues=list(emb.eigenvalues),
        )
        header = [f"e{j + 1}" for j in range(emb.coords.shape[1])] + ["color"]
        csvs["embedding.csv"] = (header, np.column_stack([emb.coords, pc.color]))
    else:
        raise ConfigError(f"run_experiment does not handle task {cfg.task!r}")
    report.wall_time = time.perf_counter() - start
    return report, csvs


def save_outputs(report, embeddings, trace, out_dir):
    """Write CSV artifacts, the trace, the report and timing into ``out_dir``.

    Parameters
    ----------
    report : RunReport
    embeddings : dict
        File name -> (header list, matrix).
    trace : SolveTrace or None
        Written as ``trace.csv`` with columns iter, objective, rse.
    out_dir : str

    Returns
    -------
    list of str
        Paths written, report last but one and ``timing.txt`` last.
    """
    os.makedirs(out_dir, exist_ok=True)
    files = dict(embeddings)
    if trace is not None:
        rows = np.column_stack(
            [np.arange(1, trace.iterations + 1), trace.objective, trace.rse]
        )
        files["trace.csv"] = (["iter", "objective", "rse"], rows)
    report.artifacts = {name: os.path.join(out_dir, name) for name in files}
    # render everything before touching the disk
    rendered = {name: io.format_csv(mat, header) for name, (header, mat) in files.items()}
    rendered["report.txt"] = report.text()
    paths = []
    for name, text in rendered.items():
        path = os.path.join(out_dir, name)
        try:
            io.atomic_write(path, text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        paths.append(path)
    timing = os.path.join(out_dir, "timing.txt")
    io.atomic_write(timing, f"wall_time_seconds: {report.wall_time:.6f}\n")
    paths.append(timing)
    return paths


def convert(cfg):
    """CSV <-> TNSR conversion chosen by the output extension."""
    src, dst = cfg.input[0], cfg.output
    if dst.lower().endswith(".csv"):
        t = io.load_tensor(src, sample_shape=cfg.sample_shape)
        io.save_csv_matrix(dst, io.tensor_to_csv_rows(t))
    else:
        io.save_tensor(dst, io.load_tensor(src, sample_shape=cfg.sample_shape))
    return dst


FLAGS = {
    "input": dict(nargs="+", help="input path(s); an IDX image/label pair is accepted"),
    "labels": dict(help="label file (IDX or one integer per line)"),
    "method": dict(help="hyperntf|ntf|ntd|hosvd or hypergraph-le|graph-le|lle"),
    "rank": dict(help="CP rank J"),
    "ranks": dict(help="Tucker ranks, comma separated"),
    "lambda": dict(help="hypergraph regularization weight"),
    "knn": dict(help="number of nearest neighbors"),
    "max_iter": dict(help="maximum number of sweeps"),
    "tol_obj": dict(help="objective-change tolerance"),
    "tol_rse": dict(help="relative-error tolerance"),
    "seed": dict(help="random seed"),
    "runs": dict(help="k-means repetitions"),
    "output": dict(help="output directory (output file for convert)"),
    "clusters": dict(help="number of clusters (default: distinct labels)"),
    "kind": dict(help="manifold: punctured_sphere|gaussian|twin_peaks|toroidal_helix"),
    "num_samples": dict(help="points to generate"),
    "noise_sd": dict(help="Gaussian noise standard deviation"),
    "embed_dim": dict(help="embedding dimension"),
    "sample_shape": dict(help="reshape CSV rows to this sample shape, e.g. 32,32"),
    "limit": dict(help="subsample this many items"),
    "weight_scheme": dict(help="hyperedge weights: unit|heat"),
    "objective_criterion": dict(help="relative|absolute objective-change rule"),
    "unit_hypergraph_coef": dict(help="drop lambda from the hypergraph terms of the Z update (true/false)"),
    "epsilon_guard": dict(help="lower clamp for update denominators"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="hyperntf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task)
        p.add_argument("--config", help="key/value config document")
        for key, opts in FLAGS.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, **opts)
    return parser


def config_from_args(args):
    file_values = read_config(args.config) if args.config else {}
    overrides = {"task": args.task}
    for key in FLAGS:
        raw = getattr(args, key)
        if raw is None:
            continue
        if key == "input":
            raw = ",".join(raw)
        name, val = parse_value(key, raw)
        overrides[name] = val
    if "task" in file_values and file_values["task"] != args.task:
        raise ConfigError(f"config task {file_values['task']!r} does not match subcommand {args.task!r}")
    return build_config(file_values, overrides)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    task = args.task
    try:
        cfg = config_from_args(args)
        if task == "convert":
            print(convert(cfg))
            return EXIT_OK
        report, csvs = run_experiment(cfg)
        paths = save_outputs(report, csvs, report.trace, cfg.output)
        for p in paths:
            print(p)
        return EXIT_OK
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"hyperntf {task}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"hyperntf {task}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericFailureError as exc:
        print(f"hyperntf {task}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
