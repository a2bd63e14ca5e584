"""Configuration-driven Monte-Carlo experiments and their command-line entry point.

A config is a TOML file with flat dotted keys, for example::

    experiment.kind = "ser_sweep"
    experiment.trials = 2000
    generator.n = 400
    thresholds.phi = 0.99
    noise.epsilon_grid = [0.05, 0.1]

Every run writes one CSV per sweep plus ``manifest.toml``, which is itself a
valid config and reproduces the CSVs byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Callable, Iterable

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import analysis
from .generator import (GeneratorSpec, InfeasibleSpec, PatternBasis, construct_subspace_model,
                        contract_and_degree_distributions, corrupt, sample_external_error)
from .model import NetworkModel, NoiseSpec, Thresholds
from .recall import DEFAULT_T_INNER, DEFAULT_T_OUTER, Limits, sequential_peeling

log = logging.getLogger(__name__)

KINDS = ("ser_sweep", "iteration_sweep", "pci_grid", "de_compare", "no_external_noise",
         "stopping_set_demo", "larger_alphabet")
SER_HEADER = ("epsilon", "upsilon", "nu", "trials", "ser_mean", "per_mean",
              "mean_iterations", "failure_rate")
DEFAULT_EPSILONS = tuple(round(0.025 * k, 3) for k in range(1, 11))


class ConfigError(ValueError):
    pass


def artifact_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# -- configuration -----------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "ser_sweep"
    generator: GeneratorSpec = field(default_factory=GeneratorSpec)
    psi: float = 0.3
    phi: float = 0.99
    epsilon_grid: tuple[float, ...] = DEFAULT_EPSILONS
    upsilon_grid: tuple[float, ...] = (0.0,)
    nu_grid: tuple[float, ...] = (0.0,)
    S: int = 1
    trials: int = 2000
    t_max: int = DEFAULT_T_INNER
    T_max: int = DEFAULT_T_OUTER
    seed: int = 0
    workers: int = 1
    out: str = "results"
    i_values: tuple[int, ...] = (1, 2, 3, 4)
    pci_trials: int = 200
    stopping_count: int = 20
    stopping_restarts: int = 50

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        for name in ("epsilon_grid", "upsilon_grid", "nu_grid"):
            grid = tuple(float(v) for v in getattr(self, name))
            object.__setattr__(self, name, grid)
            if not grid:
                raise ConfigError(f"{name} must be non-empty")
        object.__setattr__(self, "i_values", tuple(int(i) for i in self.i_values))
        if any(not 0.0 <= e <= 1.0 for e in self.epsilon_grid):
            raise ConfigError("epsilon values must lie in [0, 1]")
        if any(not 0.0 <= u < 1.0 for u in self.upsilon_grid + self.nu_grid):
            raise ConfigError("upsilon and nu values must lie in [0, 1)")
        if self.psi <= 0 or self.phi <= 0:
            raise ConfigError("thresholds must be positive")
        for name in ("trials", "t_max", "T_max", "workers", "S", "pci_trials",
                     "stopping_count", "stopping_restarts"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not self.i_values or min(self.i_values) < 1:
            raise ConfigError("i_values must be positive")

    @property
    def thresholds(self) -> Thresholds:
        return Thresholds(self.psi, self.phi)

    @property
    def limits(self) -> Limits:
        return Limits(self.t_max, self.T_max)


# flat key -> (dataclass field, converter)
_KEYS: dict[str, tuple[str, Callable[[Any], Any]]] = {
    "experiment.kind": ("kind", str),
    "experiment.trials": ("trials", int),
    "experiment.seed": ("seed", int),
    "experiment.workers": ("workers", int),
    "experiment.out": ("out", str),
    "thresholds.psi": ("psi", float),
    "thresholds.phi": ("phi", float),
    "noise.epsilon_grid": ("epsilon_grid", tuple),
    "noise.upsilon_grid": ("upsilon_grid", tuple),
    "noise.nu_grid": ("nu_grid", tuple),
    "noise.S": ("S", int),
    "recall.t_max": ("t_max", int),
    "recall.T_max": ("T_max", int),
    "pci.i_values": ("i_values", tuple),
    "pci.trials": ("pci_trials", int),
    "stopping.count": ("stopping_count", int),
    "stopping.restarts": ("stopping_restarts", int),
}
_GEN_FIELDS = {f.name: f for f in dataclasses.fields(GeneratorSpec)}
_MANIFEST_KEYS = {"manifest.model_sha256", "manifest.version"}


def _flatten(table: dict, prefix: str = "") -> dict[str, Any]:
    flat = {}
    for key, value in table.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


_GEN_TYPES = {"n": int, "L": int, "mean_cluster_size": float, "mean_constraints": int,
              "ratio": float, "Q": int, "mean_membership": float, "density": float,
              "parity_degree": int, "min_dependents": int, "locality": int,
              "coefficients": lambda v: tuple(int(c) for c in v),
              "weight_values": lambda v: tuple(float(w) for w in v),
              "psi": float, "seed": int}


def config_from_mapping(flat: dict[str, Any]) -> tuple[ExperimentConfig, dict[str, Any]]:
    """Build a config from flat dotted keys; returns it with any manifest-only entries."""
    kwargs: dict[str, Any] = {}
    gen: dict[str, Any] = {}
    extra: dict[str, Any] = {}
    for key, value in flat.items():
        if key in _KEYS:
            name, conv = _KEYS[key]
            try:
                kwargs[name] = conv(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: {exc}") from exc
        elif key.startswith("generator.") and key[10:] in _GEN_FIELDS:
            try:
                gen[key[10:]] = _GEN_TYPES[key[10:]](value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: {exc}") from exc
        elif key in _MANIFEST_KEYS:
            extra[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        if gen:
            kwargs["generator"] = GeneratorSpec(**gen)
        return ExperimentConfig(**kwargs), extra
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> tuple[ExperimentConfig, dict[str, Any]]:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_mapping(_flatten(data))


def _toml_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot write {v!r} to a config")


def config_to_flat(cfg: ExperimentConfig) -> dict[str, Any]:
    flat = {key: getattr(cfg, name) for key, (name, _) in _KEYS.items()}
    for name in _GEN_FIELDS:
        value = getattr(cfg.generator, name)
        if value is not None:
            flat[f"generator.{name}"] = value
    return flat


def dumps_config(cfg: ExperimentConfig, extra: dict[str, Any] | None = None) -> str:
    flat = config_to_flat(cfg)
    flat.update(extra or {})
    return "".join(f"{k} = {_toml_value(v)}\n" for k, v in sorted(flat.items()))


# -- seeding and workers -----------------------------------------------------------

def trial_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


_STATE: dict[str, Any] = {}


def _init_worker(model_text: str, generator: np.ndarray, coefficients: tuple[int, ...]) -> None:
    _STATE["model"] = NetworkModel.loads(model_text)
    _STATE["basis"] = PatternBasis(generator, coefficients)


def _map(fn, tasks: list, cfg: ExperimentConfig, model: NetworkModel, basis: PatternBasis) -> list:
    """Run ``fn`` over tasks, in process or on a pool; results keep task order."""
    if cfg.workers == 1 or len(tasks) <= 1:
        _STATE["model"], _STATE["basis"] = model, basis
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=cfg.workers, initializer=_init_worker,
                             initargs=(model.dumps(), basis.generator, basis.coefficients)) as pool:
        return list(pool.map(fn, tasks))


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, -(-trials // (4 * workers)))
    return [(a, min(trials, a + size)) for a in range(0, trials, size)]


# -- trial bodies --------------------------------------------------------------------

@dataclass(frozen=True)
class _SerTask:
    point: int
    inputs: int
    lo: int
    hi: int
    epsilon: float
    upsilon: float
    nu: float
    S: int
    psi: float
    phi: float
    t_max: int
    T_max: int
    seed: int
    flip_mode: bool = False


def _ser_chunk(task: _SerTask) -> tuple[int, int, int, int, int]:
    """Sums of (symbol errors, pattern errors, iterations, failures) over the chunk, plus its size."""
    model, basis = _STATE["model"], _STATE["basis"]
    noise = NoiseSpec(task.upsilon, task.nu, task.epsilon, task.S)
    thresholds = Thresholds(task.psi, task.phi)
    limits = Limits(task.t_max, task.T_max)
    sym = per = its = fails = 0
    for t in range(task.lo, task.hi):
        # inputs are keyed apart from the recall noise so that grid points
        # sharing an input distribution see the same patterns and errors
        rng = trial_rng(task.seed, 0, task.inputs, t)
        x = basis.sample(rng)
        if task.flip_mode:
            # no external error: each neuron starts off by +-1 with probability upsilon
            z = sample_external_error(model.n, NoiseSpec(epsilon=task.upsilon), rng)
        else:
            z = sample_external_error(model.n, noise, rng)
        y = corrupt(x, z, model.Q)
        out = sequential_peeling(model, y, thresholds, noise, limits,
                                 trial_rng(task.seed, 1, task.point, t), pattern=x)
        sym += out.symbol_errors
        per += int(out.pattern_error)
        its += out.outer_iterations
        fails += int(out.declared_failure)
    return sym, per, its, fails, task.hi - task.lo


def _ser_row(eps, ups, nu, n, trials, sums) -> tuple:
    sym, per, its, fails = sums
    return (eps, ups, nu, trials, sym / (n * trials), per / trials, its / trials, fails / trials)


def _ser_sweep(cfg: ExperimentConfig, model, basis, *, S: int, flip_mode: bool = False,
               epsilons: Iterable[float] | None = None) -> list[tuple]:
    points = [(e, u, v) for e in (epsilons or cfg.epsilon_grid)
              for u in cfg.upsilon_grid for v in cfg.nu_grid]
    points = sorted(set(points))
    input_of = (lambda p: p[:2]) if flip_mode else (lambda p: p[:1])
    inputs = {key: k for k, key in enumerate(sorted({input_of(p) for p in points}))}
    tasks = [
        _SerTask(g, inputs[input_of((e, u, v))], lo, hi, e, u, v, S, cfg.psi, cfg.phi,
                 cfg.t_max, cfg.T_max, cfg.seed, flip_mode)
        for g, (e, u, v) in enumerate(points)
        for lo, hi in _chunks(cfg.trials, cfg.workers)
    ]
    results = _map(_ser_chunk, tasks, cfg, model, basis)
    sums = {g: [0, 0, 0, 0, 0] for g in range(len(points))}
    for task, res in zip(tasks, results):
        acc = sums[task.point]
        for k in range(5):
            acc[k] += res[k]
    rows = []
    for g, (e, u, v) in enumerate(points):
        acc = sums[g]
        if acc[4] != cfg.trials:
            raise RuntimeError(f"grid point {g} ran {acc[4]} trials, expected {cfg.trials}")
        rows.append(_ser_row(e, u, v, model.n, cfg.trials, acc[:4]))
    return rows


@dataclass(frozen=True)
class _PciTask:
    point: int
    upsilon: float
    nu: float
    i: int
    trials: int
    psi: float
    phi: float
    t_max: int
    seed: int


def _pci_point(task: _PciTask) -> tuple[float, int]:
    model, basis = _STATE["model"], _STATE["basis"]
    rng = trial_rng(task.seed, task.point)
    patterns = basis.sample(rng, 64)
    noise = NoiseSpec(task.upsilon, task.nu)
    return analysis.estimate_pci(model, task.i, noise, Thresholds(task.psi, task.phi), task.trials,
                                 rng, patterns=patterns, t_max=task.t_max)


def _pci_table(cfg: ExperimentConfig, model, basis, noise_points, i_values) -> analysis.PciTable:
    points = sorted({(u, v, i) for u, v in noise_points for i in i_values}, key=lambda p: (p[2], p[0], p[1]))
    tasks = [_PciTask(g, u, v, i, cfg.pci_trials, cfg.psi, cfg.phi, cfg.t_max, cfg.seed)
             for g, (u, v, i) in enumerate(points)]
    table = analysis.PciTable()
    for (u, v, i), (p, total) in zip(points, _map(_pci_point, tasks, cfg, model, basis)):
        table.add(u, v, i, total, p)
    return table


# -- stopping sets ----------------------------------------------------------------------

def construct_stopping_set(model: NetworkModel, pattern: np.ndarray, rng: np.random.Generator,
                           max_size: int = 40) -> np.ndarray | None:
    """Greedy error placement where every corrupted cluster holds at least two errors.

    Starts from a random pair inside one cluster and, while some cluster holds
    exactly one error, adds the member of that cluster that creates the fewest
    new single-error clusters. Returns the error vector (signs point into the
    alphabet) or None when the set outgrows ``max_size``.
    """
    adj = contract_and_degree_distributions(model).adjacency.astype(bool)
    members = [c.member_ids for c in model.clusters]
    l0 = int(rng.integers(model.L))
    bad = np.zeros(model.n, dtype=bool)
    bad[rng.choice(members[l0], size=2, replace=False)] = True
    while True:
        counts = adj[:, bad].sum(axis=1)
        singles = np.flatnonzero(counts == 1)
        if singles.size == 0:
            break
        if bad.sum() >= max_size:
            return None
        l = int(rng.choice(singles))
        cands = members[l][~bad[members[l]]]
        if cands.size == 0:
            return None
        # clusters that would hold exactly one error after adding each candidate
        new_singles = (adj[:, cands] & (counts == 0)[:, None]).sum(axis=0)
        best = cands[new_singles == new_singles.min()]
        bad[int(rng.choice(best))] = True
    z = np.zeros(model.n, dtype=np.int64)
    idx = np.flatnonzero(bad)
    signs = np.where(rng.random(idx.size) < 0.5, -1, 1)
    signs[pattern[idx] == 0] = 1
    signs[pattern[idx] == model.Q - 1] = -1
    z[idx] = signs
    return z


@dataclass(frozen=True)
class _StopTask:
    point: int
    index: int
    upsilon: float
    nu: float
    restarts: int
    psi: float
    phi: float
    t_max: int
    T_max: int
    seed: int
    pattern: tuple[int, ...]
    error: tuple[int, ...]


def _stop_point(task: _StopTask) -> tuple[int, int, int, int]:
    """(symbol errors, pattern error, iterations, failure) of the first successful restart, or the last."""
    model = _STATE["model"]
    x = np.array(task.pattern, dtype=np.int64)
    y = corrupt(x, np.array(task.error, dtype=np.int64), model.Q)
    noise = NoiseSpec(task.upsilon, task.nu)
    limits = Limits(task.t_max, task.T_max)
    out = None
    for r in range(task.restarts):
        rng = trial_rng(task.seed, 1, task.point, task.index, r)
        out = sequential_peeling(model, y, Thresholds(task.psi, task.phi), noise, limits, rng, pattern=x)
        if not out.pattern_error:
            break
    return out.symbol_errors, int(out.pattern_error), out.outer_iterations, int(out.declared_failure)


def build_stopping_sets(cfg: ExperimentConfig, model, basis) -> list[tuple[np.ndarray, np.ndarray, int]]:
    """``count`` stopping sets that trap noiseless peeling; returns (pattern, error, attempts)."""
    found = []
    attempt = 0
    noiseless = NoiseSpec()
    while len(found) < cfg.stopping_count:
        if attempt > 1000 * cfg.stopping_count:
            raise RuntimeError("could not construct enough stopping sets")
        rng = trial_rng(cfg.seed, 0, attempt)
        attempt += 1
        x = basis.sample(rng)
        z = construct_stopping_set(model, x, rng)
        if z is None:
            continue
        out = sequential_peeling(model, corrupt(x, z, model.Q), cfg.thresholds, noiseless,
                                 cfg.limits, rng, pattern=x)
        if out.pattern_error:
            found.append((x, z, attempt))
    return found


# -- output ----------------------------------------------------------------------------

def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def rows_to_csv(header: Iterable[str], rows: Iterable[Iterable[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


# -- driver -------------------------------------------------------------------------------

def build_model(cfg: ExperimentConfig) -> tuple[NetworkModel, PatternBasis]:
    return construct_subspace_model(cfg.generator)


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path | None = None,
                   expected_hash: str | None = None) -> dict[str, Path]:
    """Run one experiment and write its CSVs and manifest; returns the written paths."""
    out = Path(out_dir if out_dir is not None else cfg.out)
    model, basis = build_model(cfg)
    digest = model.digest()
    if expected_hash is not None and expected_hash != digest:
        raise ConfigError(f"model hash {digest} does not match the manifest ({expected_hash})")
    files: dict[str, str] = {}
    kind = cfg.kind
    if kind in ("ser_sweep", "iteration_sweep", "larger_alphabet"):
        S = cfg.S if kind != "larger_alphabet" or cfg.S > 1 else 3
        files["sweep.csv"] = rows_to_csv(SER_HEADER, _ser_sweep(cfg, model, basis, S=S))
    elif kind == "no_external_noise":
        if any(cfg.phi >= u for u in cfg.upsilon_grid):
            log.warning("no_external_noise is meant for phi < upsilon; phi=%s", cfg.phi)
        files["sweep.csv"] = rows_to_csv(
            SER_HEADER, _ser_sweep(cfg, model, basis, S=1, flip_mode=True, epsilons=(0.0,)))
    elif kind == "pci_grid":
        noise_points = [(u, v) for u in cfg.upsilon_grid for v in cfg.nu_grid]
        files["pci.csv"] = _pci_table(cfg, model, basis, noise_points, cfg.i_values).to_csv()
    elif kind == "de_compare":
        files.update(_de_compare(cfg, model, basis))
    elif kind == "stopping_set_demo":
        files.update(_stopping_demo(cfg, model, basis))
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        _write(out / name, text)
    model.save(out / "model.txt")
    _write(out / "manifest.toml", dumps_config(
        cfg, {"manifest.model_sha256": digest, "manifest.version": artifact_version()}))
    return {name: out / name for name in [*files, "model.txt", "manifest.toml"]}


def _de_compare(cfg, model, basis) -> dict[str, str]:
    graph = contract_and_degree_distributions(model)
    noise_points = sorted({(u, v) for u in cfg.upsilon_grid for v in cfg.nu_grid})
    i_values = tuple(range(1, max(cfg.i_values) + 1))
    table = _pci_table(cfg, model, basis, noise_points, i_values)
    rows = []
    for u, v in noise_points:
        pc = table.pc_list(u, v)
        eps_star = analysis.de_threshold(graph.lam, graph.rho, pc)
        for e in sorted(cfg.epsilon_grid):
            res = analysis.de_trajectory(e, graph.lam, graph.rho, pc)
            rows.append((e, u, v, res.final, int(res.success), eps_star))
    return {
        "sweep.csv": rows_to_csv(SER_HEADER, _ser_sweep(cfg, model, basis, S=cfg.S)),
        "pci.csv": table.to_csv(),
        "de_bound.csv": rows_to_csv(("epsilon", "upsilon", "nu", "z_final", "success", "epsilon_star"), rows),
    }


def _stopping_demo(cfg, model, basis) -> dict[str, str]:
    sets = build_stopping_sets(cfg, model, basis)
    placements = [(k, attempt, int(np.count_nonzero(z)),
                   " ".join(f"{i}:{z[i]:+d}" for i in np.flatnonzero(z)))
                  for k, (_, z, attempt) in enumerate(sets)]
    rows = []
    noise_points = sorted({(u, v) for u in cfg.upsilon_grid for v in cfg.nu_grid} | {(0.0, 0.0)})
    for g, (u, v) in enumerate(noise_points):
        restarts = 1 if u == 0.0 and v == 0.0 else cfg.stopping_restarts
        tasks = [_StopTask(g, k, u, v, restarts, cfg.psi, cfg.phi, cfg.t_max, cfg.T_max,
                           cfg.seed, tuple(int(a) for a in x), tuple(int(a) for a in z))
                 for k, (x, z, _) in enumerate(sets)]
        res = _map(_stop_point, tasks, cfg, model, basis)
        sums = [sum(r[k] for r in res) for k in range(4)]
        err_rate = float(np.mean([np.count_nonzero(z) for _, z, _ in sets])) / model.n
        rows.append(_ser_row(err_rate, u, v, model.n, len(sets), sums))
    return {
        "sweep.csv": rows_to_csv(SER_HEADER, rows),
        "stopping_sets.csv": rows_to_csv(("set", "attempt", "size", "errors"), placements),
    }


# -- command line -------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="noisymem", description="Run a noisy associative-memory experiment.")
    p.add_argument("--config", help="TOML config with flat dotted keys (a manifest works too)")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--workers", type=int, help="worker processes (overrides the config)")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--experiment", choices=KINDS, help="experiment kind (overrides the config)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            cfg, extra = load_config(args.config)
        else:
            cfg, extra = ExperimentConfig(), {}
        overrides = {k: v for k, v in (("seed", args.seed), ("workers", args.workers),
                                       ("out", args.out), ("kind", args.experiment)) if v is not None}
        cfg = dataclasses.replace(cfg, **overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        paths = run_experiment(cfg, expected_hash=extra.get("manifest.model_sha256"))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except InfeasibleSpec as exc:
        print(f"infeasible generator spec: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    for path in paths.values():
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
