"""Data simulation and the p(T=1 | x) versus n trend experiment."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError
from .exact import posterior_over_t
from .gibbs import ChainConfig, estimate_posterior_t
from .partitions import DEFAULT_ENUMERATION_CAP

CSV_HEADER = ("n", "replicate", "seed", "engine", "p_t1", "p_t2", "t_mode", "xbar", "mc_se")
ENGINES = ("exact", "gibbs", "auto")


@dataclass(frozen=True)
class DataModel:
    """``standard-normal`` or a ``gaussian-mixture`` with unit-variance components."""

    kind: str = "standard-normal"
    weights: tuple = ()
    means: tuple = ()

    def __post_init__(self):
        if self.kind == "standard-normal":
            return
        if self.kind != "gaussian-mixture":
            raise ConfigError(f"unknown data model {self.kind!r}")
        if len(self.weights) == 0 or len(self.weights) != len(self.means):
            raise ConfigError("mixture needs matching, nonempty weights and means")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ConfigError(f"mixture weights must be nonnegative and sum to 1, got {self.weights}")


def simulate_data(model: DataModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. observations from ``model``."""
    if n < 1:
        raise ConfigError(f"n must be positive, got {n}")
    if model.kind == "standard-normal":
        return rng.standard_normal(n)
    comp = rng.choice(len(model.weights), size=n, p=np.asarray(model.weights, float))
    return np.asarray(model.means, dtype=float)[comp] + rng.standard_normal(n)


CONFIG_KEYS = ("n-grid", "replicates", "alpha", "seed", "engine", "sweeps", "burn-in", "thin",
               "chains", "init", "model", "weights", "means", "workers", "cap")


@dataclass(frozen=True)
class ExperimentConfig:
    n_grid: tuple = (10, 100, 1000)
    replicates: int = 20
    alpha: float = 1.0
    seed: int = 0
    engine: str = "auto"
    chain: ChainConfig = field(default_factory=ChainConfig)
    data_model: DataModel = field(default_factory=DataModel)
    workers: int = 1
    cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self):
        grid = tuple(int(v) for v in self.n_grid)
        if not grid or any(v < 1 for v in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"n_grid must be positive and strictly increasing, got {self.n_grid}")
        object.__setattr__(self, "n_grid", grid)
        if self.replicates < 1:
            raise ConfigError("replicates must be positive")
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.engine == "exact" and max(grid) > self.cap:
            raise ConfigError(f"exact engine cannot handle n={max(grid)} above cap {self.cap}")
        if self.workers < 1:
            raise ConfigError("workers must be positive")

    def engine_for(self, n: int) -> str:
        if self.engine == "auto":
            return "exact" if n <= self.cap else "gibbs"
        return self.engine

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "ExperimentConfig":
        """Build a config from string key/values (config files, CLI flags)."""
        v = {k.strip().replace("_", "-"): str(val).strip() for k, val in values.items()}
        unknown = set(v) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

        def floats(s):
            return tuple(float(p) for p in s.split(",") if p.strip())

        try:
            chain = ChainConfig(
                n_sweeps=int(v.get("sweeps", ChainConfig.n_sweeps)),
                burn_in=int(v.get("burn-in", ChainConfig.burn_in)),
                thin=int(v.get("thin", ChainConfig.thin)),
                n_chains=int(v.get("chains", ChainConfig.n_chains)),
                init=v.get("init", ChainConfig.init),
            )
            model = DataModel(v.get("model", "standard-normal"),
                              floats(v.get("weights", "")), floats(v.get("means", "")))
            return cls(
                n_grid=tuple(int(p) for p in v.get("n-grid", "10,100,1000").split(",") if p.strip()),
                replicates=int(v.get("replicates", 20)),
                alpha=float(v.get("alpha", 1.0)),
                seed=int(v.get("seed", 0)),
                engine=v.get("engine", "auto"),
                chain=chain,
                data_model=model,
                workers=int(v.get("workers", 1)),
                cap=int(v.get("cap", DEFAULT_ENUMERATION_CAP)),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None


def read_config_file(path) -> dict:
    """Parse flat ``key = value`` text; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    return values


@dataclass(frozen=True)
class TrendRow:
    n: int
    replicate: int
    seed: int
    engine: str
    p_t1: float
    p_t2: float
    t_mode: int
    xbar: float
    mc_se: float

    def as_tuple(self):
        return (self.n, self.replicate, self.seed, self.engine, self.p_t1, self.p_t2,
                self.t_mode, self.xbar, self.mc_se)


def replicate_seed(seed: int, n: int, replicate: int) -> np.random.SeedSequence:
    """Substream for one (n, replicate) cell, independent of execution order."""
    return np.random.SeedSequence([seed, n, replicate])


def run_replicate(cfg: ExperimentConfig, n: int, replicate: int) -> TrendRow:
    ss = replicate_seed(cfg.seed, n, replicate)
    row_seed = int(ss.generate_state(1, np.uint64)[0])
    data_ss, chain_ss = ss.spawn(2)
    xs = simulate_data(cfg.data_model, n, np.random.default_rng(data_ss))
    engine = cfg.engine_for(n)
    if engine == "exact":
        post = posterior_over_t(xs, cfg.alpha, cap=cfg.cap)
        se = 0.0
    else:
        post = estimate_posterior_t(xs, cfg.alpha, cfg.chain, seed_seq=chain_ss)
        se = float(post.std_errors[0])
    return TrendRow(n, replicate, row_seed, engine, post.p(1), post.p(2), post.mode(),
                    float(xs.mean()), se)


def trend_experiment(cfg: ExperimentConfig) -> List[TrendRow]:
    """One row per (n, replicate), sorted by ``(n, replicate)``."""
    cells = [(n, r) for n in cfg.n_grid for r in range(cfg.replicates)]
    if cfg.workers == 1:
        rows = [run_replicate(cfg, n, r) for n, r in cells]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(lambda c: run_replicate(cfg, *c), cells))
    return sorted(rows, key=lambda r: (r.n, r.replicate))


def rows_to_csv(rows: Sequence[TrendRow], fh=None) -> str:
    """Write rows with the fixed header; returns the text when ``fh`` is None."""
    out = io.StringIO() if fh is None else fh
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row.as_tuple()])
    return out.getvalue() if fh is None else ""


def median_p1_by_n(rows: Sequence[TrendRow]) -> dict:
    out = {}
    for n in sorted({r.n for r in rows}):
        out[n] = float(np.median([r.p_t1 for r in rows if r.n == n]))
    return out


def read_data(path_or_text, is_text: bool = False) -> np.ndarray:
    """Read one real per line; blank lines are ignored."""
    if is_text:
        lines = path_or_text.splitlines()
    else:
        with open(path_or_text, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    vals = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            vals.append(float(line))
        except ValueError:
            raise ConfigError(f"line {lineno}: not a real number: {line!r}") from None
    if not vals:
        raise ConfigError("data file contains no values")
    return np.asarray(vals)


def format_data(xs) -> str:
    return "".join(np.format_float_positional(float(x), unique=True, trim="-") + "\n" for x in xs)
