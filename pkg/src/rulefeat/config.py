"""Benchmark run configuration.

Config files are flat key/value text: one entry per line, first token is
the key, the rest are values; '#' starts a comment. `dataset` and
`strategy` lines accumulate. Example:

    seed 42
    out_dir out
    bins 10
    z_min 1.96
    c_grid 0.001 0.01 0.1 1 10 100 1000
    trees_grid 100 200 300 400 500
    dataset wdbc builtin
    dataset heart csv data/heart.csv data/heart.schema
    strategy rm1d-l2lr
    strategy rf

The master seed is mandatory; nothing in a run may fall back to
wall-clock entropy.
"""

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .datasets import BUILTIN_NAMES
from .errors import ConfigError

CLASSIFIERS = ("l2lr", "l1lr", "svmlin", "svmrbf")
MINER_FAMILIES = ("global", "rm1d", "rmdt", "rmar")

STRATEGY_NAMES = tuple(
    [f"{family}-{clf}" for family in MINER_FAMILIES for clf in CLASSIFIERS] + ["rf"]
)

DEFAULT_C_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0)
DEFAULT_TREES_GRID = (100, 200, 300, 400, 500)


@dataclass(frozen=True)
class DatasetRef:
    name: str
    source: str  # "builtin" | "csv"
    data_path: str = ""
    schema_path: str = ""


@dataclass(frozen=True)
class RunConfig:
    seed: int
    out_dir: str
    datasets: tuple
    strategies: tuple
    bins: int = 10
    z_min: float = 1.96
    max_dimension: int = 1
    z_denominator: str = "mixed"
    test_fraction: float = 0.3
    n_splits: int = 5
    inner_folds: int = 5
    c_grid: tuple = DEFAULT_C_GRID
    trees_grid: tuple = DEFAULT_TREES_GRID
    rf_min_leaf: float = 1.0
    rmar_max_items: int = 3
    mine_once_per_split: bool = False
    missing_token: str = "?"

    def strategy_families(self) -> dict:
        """Strategies grouped by the state they share (miner family)."""
        groups: dict = {}
        for s in self.strategies:
            family = "global" if s == "rf" else s.split("-")[0]
            groups.setdefault(family, []).append(s)
        return groups


def _parse_lines(text: str, source: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        yield lineno, parts[0], parts[1:]


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values: dict = {}
    datasets: list = []
    strategies: list = []
    scalar_keys = {
        "seed": int,
        "out_dir": str,
        "bins": int,
        "z_min": float,
        "max_dimension": int,
        "z_denominator": str,
        "test_fraction": float,
        "n_splits": int,
        "inner_folds": int,
        "rf_min_leaf": float,
        "rmar_max_items": int,
        "mine_once_per_split": lambda v: v.lower() in ("1", "true", "yes"),
        "missing_token": str,
    }
    for lineno, key, args in _parse_lines(text, source):
        if key == "dataset":
            if not args:
                raise ConfigError(f"{source}:{lineno}: dataset line needs a name")
            name, rest = args[0], args[1:]
            kind = rest[0] if rest else "builtin"
            if kind == "builtin":
                if name not in BUILTIN_NAMES:
                    raise ConfigError(
                        f"{source}:{lineno}: unknown builtin dataset {name!r}"
                        f" (choices: {', '.join(BUILTIN_NAMES)})"
                    )
                datasets.append(DatasetRef(name=name, source="builtin"))
            elif kind == "csv":
                if len(rest) != 3:
                    raise ConfigError(
                        f"{source}:{lineno}: csv dataset needs data and schema paths"
                    )
                datasets.append(
                    DatasetRef(name=name, source="csv", data_path=rest[1], schema_path=rest[2])
                )
            else:
                raise ConfigError(f"{source}:{lineno}: unknown dataset source {kind!r}")
        elif key == "strategy":
            if len(args) != 1:
                raise ConfigError(f"{source}:{lineno}: strategy line needs one name")
            if args[0] not in STRATEGY_NAMES:
                raise ConfigError(
                    f"{source}:{lineno}: unknown strategy {args[0]!r}"
                    f" (choices: {', '.join(STRATEGY_NAMES)})"
                )
            strategies.append(args[0])
        elif key == "c_grid":
            values["c_grid"] = tuple(float(v) for v in args)
        elif key == "trees_grid":
            values["trees_grid"] = tuple(int(v) for v in args)
        elif key in scalar_keys:
            if len(args) != 1:
                raise ConfigError(f"{source}:{lineno}: {key} needs exactly one value")
            try:
                values[key] = scalar_keys[key](args[0])
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: bad value for {key}: {args[0]!r}") from None
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
    if "seed" not in values:
        raise ConfigError(f"{source}: missing mandatory key 'seed'")
    if "out_dir" not in values:
        raise ConfigError(f"{source}: missing mandatory key 'out_dir'")
    if not datasets:
        raise ConfigError(f"{source}: no datasets configured")
    if not strategies:
        raise ConfigError(f"{source}: no strategies configured")
    if not values.get("c_grid", DEFAULT_C_GRID) or not values.get(
        "trees_grid", DEFAULT_TREES_GRID
    ):
        raise ConfigError(f"{source}: hyperparameter grids must be non-empty")
    cfg = RunConfig(
        datasets=tuple(datasets), strategies=tuple(strategies), **values
    )
    if not (0.0 < cfg.test_fraction < 1.0):
        raise ConfigError(f"{source}: test_fraction must lie strictly between 0 and 1")
    for ref in cfg.datasets:
        if ref.source == "csv":
            for path in (ref.data_path, ref.schema_path):
                if not Path(path).exists():
                    raise ConfigError(f"{source}: dataset {ref.name!r}: missing file {path}")
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=str(path))


def config_hash(text: str) -> str:
    """Stable digest of the raw config text, recorded in run manifests."""
    return hashlib.sha256(text.encode()).hexdigest()
