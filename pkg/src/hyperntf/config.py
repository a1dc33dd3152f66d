"""Experiment configuration: a flat key/value document plus CLI overrides.

File syntax is one ``key = value`` per line; ``#`` starts a comment; lists
are comma separated. Unknown keys are rejected.
"""
from dataclasses import dataclass, fields

from .embedding import MANIFOLDS
from .errors import ConfigError
from .hypergraph import WEIGHT_SCHEMES

TASKS = ("factorize", "unfold", "cluster-eval", "gen-manifold", "convert")
FACTOR_METHODS = ("hyperntf", "ntf", "ntd", "hosvd")
EMBED_METHODS = ("hypergraph-le", "graph-le", "lle")


@dataclass
class ExperimentConfig:
    task: str = None
    input: tuple = ()
    labels: str = None
    method: str = None
    rank: int = None
    ranks: tuple = None
    lam: float = 0.0
    knn: int = None
    max_iter: int = 500
    tol_obj: float = 1e-6
    tol_rse: float = 1e-4
    seed: int = 0
    runs: int = 10
    output: str = None
    clusters: int = None
    kind: str = None
    num_samples: int = 1000
    noise_sd: float = 0.0
    embed_dim: int = 2
    sample_shape: tuple = None
    limit: int = None
    weight_scheme: str = "unit"
    objective_criterion: str = "relative"
    unit_hypergraph_coef: bool = False
    epsilon_guard: float = 1e-12

    def validate(self):
        """Check every field for its task; raises :class:`ConfigError`."""
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        if not self.output:
            raise ConfigError("output is required")
        _positive_int(self, "max_iter")
        _positive_int(self, "runs")
        _positive_int(self, "num_samples")
        _positive_int(self, "embed_dim")
        for name in ("tol_obj", "tol_rse", "epsilon_guard"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        if not self.lam >= 0:
            raise ConfigError("lambda must be >= 0")
        if not self.noise_sd >= 0:
            raise ConfigError("noise_sd must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.weight_scheme not in WEIGHT_SCHEMES:
            raise ConfigError(f"weight_scheme must be one of {WEIGHT_SCHEMES}")
        if self.objective_criterion not in ("relative", "absolute"):
            raise ConfigError("objective_criterion must be 'relative' or 'absolute'")
        for name in ("knn", "rank", "clusters", "limit"):
            if getattr(self, name) is not None:
                _positive_int(self, name)
        for name in ("ranks", "sample_shape"):
            val = getattr(self, name)
            if val is not None and (not val or any(int(v) < 1 for v in val)):
                raise ConfigError(f"{name} entries must be positive integers")

        if self.task in ("factorize", "cluster-eval"):
            if self.method not in FACTOR_METHODS:
                raise ConfigError(f"method must be one of {FACTOR_METHODS} for {self.task}")
            if not self.input:
                raise ConfigError(f"{self.task} needs an input path")
            if self.method in ("hyperntf", "ntf") and self.rank is None:
                raise ConfigError(f"{self.method} needs rank")
            if self.method in ("ntd", "hosvd") and self.rank is None and self.ranks is None:
                raise ConfigError(f"{self.method} needs rank or ranks")
            if self.method == "hyperntf" and self.knn is None:
                raise ConfigError("hyperntf needs knn")
            if self.task == "cluster-eval" and not self.labels and len(self.input) < 2:
                raise ConfigError("cluster-eval needs labels (or an IDX image/label pair as input)")
        elif self.task in ("unfold", "gen-manifold"):
            if self.task == "unfold" and self.method not in EMBED_METHODS:
                raise ConfigError(f"method must be one of {EMBED_METHODS} for unfold")
            if not self.input and self.kind is None:
                raise ConfigError(f"{self.task} needs either an input path or a manifold kind")
            if self.kind is not None and self.kind not in MANIFOLDS:
                raise ConfigError(f"kind must be one of {MANIFOLDS}")
            if self.kind is not None and self.num_samples < 4:
                raise ConfigError("num_samples must be >= 4")
        elif self.task == "convert":
            if len(self.input) != 1:
                raise ConfigError("convert needs exactly one input path")
        return self


def _positive_int(cfg, name):
    val = getattr(cfg, name)
    if not isinstance(val, int) or isinstance(val, bool) or val < 1:
        raise ConfigError(f"{name} must be a positive integer, got {val!r}")


def _to_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_tuple(text):
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _str_tuple(text):
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


# document key -> (field name, parser)
KEYS = {
    "task": ("task", str),
    "input": ("input", _str_tuple),
    "labels": ("labels", str),
    "method": ("method", str),
    "rank": ("rank", int),
    "ranks": ("ranks", _int_tuple),
    "lambda": ("lam", float),
    "knn": ("knn", int),
    "max_iter": ("max_iter", int),
    "tol_obj": ("tol_obj", float),
    "tol_rse": ("tol_rse", float),
    "seed": ("seed", int),
    "runs": ("runs", int),
    "output": ("output", str),
    "clusters": ("clusters", int),
    "kind": ("kind", str),
    "num_samples": ("num_samples", int),
    "noise_sd": ("noise_sd", float),
    "embed_dim": ("embed_dim", int),
    "sample_shape": ("sample_shape", _int_tuple),
    "limit": ("limit", int),
    "weight_scheme": ("weight_scheme", str),
    "objective_criterion": ("objective_criterion", str),
    "unit_hypergraph_coef": ("unit_hypergraph_coef", _to_bool),
    "epsilon_guard": ("epsilon_guard", float),
}

FIELD_TO_KEY = {f: k for k, (f, _) in KEYS.items()}


def parse_value(key, text):
    if key not in KEYS:
        raise ConfigError(f"unknown config key {key!r}")
    name, parser = KEYS[key]
    try:
        return name, parser(text.strip() if isinstance(text, str) else text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from None


def read_config(path):
    """Parse a key/value document into a dict of ExperimentConfig field values."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, text = line.partition("=")
        key = key.strip()
        name, val = parse_value(key, text)
        if name in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[name] = val
    return values


def build_config(file_values=None, overrides=None):
    """Merge file values with overrides (later wins) and validate."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config fields {sorted(unknown)}")
    return ExperimentConfig(**merged).validate()
