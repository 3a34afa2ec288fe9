"""Experiment configuration, drivers, CSV metrics and summaries."""
from __future__ import annotations

import csv
import io
import math
import os
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

from .belief import FactoredBelief
from .bounds import constrained_greedy_action, greedy_value_constrained
from .mcts import MctsParams, _best_root_action, _run as _run_uct
from .model import (CASES, InstanceSampler, MonitoringModel, instance_key, parse_key_values,
                    sorted_actions)
from .search import exhaustive, q_value, rtbss, warmup as _warm_search

ALGORITHMS = ("exhaustive", "rtbss-u", "rtbss-k", "greedy", "pomcp")
ROLLOUTS = ("uniform", "greedy")
MAX_HORIZON = 8

# Bump when the column set or its meaning changes.
CSV_SCHEMA_VERSION = 1
CSV_HEADER = (
    "case", "instance_index", "horizon", "algorithm", "simulations", "best_action", "value",
    "nodes_expanded", "bound_evaluations", "elapsed_ms", "agrees_with_optimal",
    "performance_loss",
)
TIMING_COLUMNS = ("elapsed_ms",)


class ConfigError(ValueError):
    pass


class MalformedCsv(ValueError):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    case: str = "case1"
    horizons: tuple[int, ...] = (2, 3, 4)
    num_instances: int = 100
    algorithms: tuple[str, ...] = ("exhaustive", "rtbss-u", "rtbss-k")
    pomcp_simulations: tuple[int, ...] = (10, 100, 1000, 10000)
    seed: int = 0
    output_path: str = "results.csv"
    first_instance: int = 0
    exploration_constant: float = 1.0
    rollout: str = "uniform"

    def __post_init__(self):
        if self.case not in CASES:
            raise ConfigError(f"case must be one of {CASES}, got {self.case!r}")
        if not self.horizons or any(not 1 <= h <= MAX_HORIZON for h in self.horizons):
            raise ConfigError(f"horizons must be nonempty and within 1..{MAX_HORIZON}")
        if self.num_instances < 1:
            raise ConfigError("num_instances must be at least 1")
        if self.first_instance < 0:
            raise ConfigError("first_instance must be nonnegative")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad or not self.algorithms:
            raise ConfigError(f"algorithms must be a nonempty subset of {ALGORITHMS}; bad: {bad}")
        if "pomcp" in self.algorithms and (
                not self.pomcp_simulations or min(self.pomcp_simulations) < 1):
            raise ConfigError("pomcp_simulations must be positive integers")
        if self.exploration_constant < 0:
            raise ConfigError("exploration_constant must be nonnegative")
        if self.rollout not in ROLLOUTS:
            raise ConfigError(f"rollout must be one of {ROLLOUTS}")

    @classmethod
    def from_mapping(cls, kv: dict[str, str]) -> "ExperimentConfig":
        parsers = {
            "case": str.strip,
            "horizons": _int_list,
            "num_instances": int,
            "algorithms": _str_list,
            "pomcp_simulations": _int_list,
            "seed": int,
            "output_path": str.strip,
            "first_instance": int,
            "exploration_constant": float,
            "rollout": str.strip,
        }
        unknown = sorted(set(kv) - set(parsers))
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        values = {}
        for key, text in kv.items():
            try:
                values[key] = parsers[key](text)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
        return cls(**values)

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            kv = parse_key_values(text)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cls.from_mapping(kv)

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.loads(fh.read())

    def with_overrides(self, overrides: dict[str, str]) -> "ExperimentConfig":
        base = {f.name: _unparse(getattr(self, f.name)) for f in fields(self)}
        base.update(overrides)
        return ExperimentConfig.from_mapping(base)

    @property
    def sampler(self) -> InstanceSampler:
        return InstanceSampler(self.seed, self.case)


def _unparse(v) -> str:
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return str(v)


config_keys = tuple(f.name for f in fields(ExperimentConfig))


@dataclass(frozen=True)
class MetricsRow:
    case: str
    instance_index: int
    horizon: int
    algorithm: str
    simulations: int
    best_action: int
    value: float
    nodes_expanded: int
    bound_evaluations: int
    elapsed_ms: float
    agrees_with_optimal: bool
    performance_loss: float

    def __post_init__(self):
        if self.performance_loss < 0:
            raise ValueError("performance_loss must be nonnegative")
        if self.agrees_with_optimal and self.performance_loss != 0.0:
            raise ValueError("agreeing rows must have zero performance loss")

    @property
    def sort_key(self):
        return (self.instance_index, self.horizon, ALGORITHMS.index(self.algorithm),
                self.simulations)

    def cells(self) -> list[str]:
        out = []
        for name in CSV_HEADER:
            v = getattr(self, name)
            if isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, float):
                out.append(format(v, ".17g"))
            else:
                out.append(str(v))
        return out


def performance_loss(b: FactoredBelief, h: int, recommended: int, model: MonitoringModel) -> float:
    """Q_h(b, optimal) - Q_h(b, recommended), both computed exactly."""
    opt = exhaustive(b, h, model)
    if recommended == opt.best_action:
        return 0.0
    return opt.value - q_value(b, recommended, h, model)


def _loss(reference, action: int) -> float:
    return 0.0 if action == reference.best_action else reference.value - reference.q_values[action]


def _row(cfg, index, h, algorithm, sims, action, value, nodes, bevals, elapsed, reference):
    return MetricsRow(cfg.case, index, h, algorithm, sims, int(action), float(value), int(nodes),
                      int(bevals), elapsed * 1e3, action == reference.best_action,
                      _loss(reference, action))


def run_cell(cfg: ExperimentConfig, index: int, h: int) -> list[MetricsRow]:
    """All requested algorithms on one (instance, horizon) cell.

    The exhaustive solution is always computed first; it is the reference for
    agreement and loss even when exhaustive rows are not requested.
    """
    model, b = cfg.sampler.sample(index)
    ref = exhaustive(b, h, model)
    rows = []
    for alg in cfg.algorithms:
        if alg == "exhaustive":
            s = ref.stats
            rows.append(_row(cfg, index, h, alg, 0, ref.best_action, ref.value,
                             s.nodes_expanded, s.bound_evaluations, s.elapsed, ref))
        elif alg in ("rtbss-u", "rtbss-k"):
            res = rtbss(b, h, "universal" if alg == "rtbss-u" else "k_step", model)
            s = res.stats
            rows.append(_row(cfg, index, h, alg, 0, res.best_action, res.value,
                             s.nodes_expanded, s.bound_evaluations, s.elapsed, ref))
        elif alg == "greedy":
            t0 = time.perf_counter()
            a = constrained_greedy_action(b, model)
            elapsed = time.perf_counter() - t0
            rows.append(_row(cfg, index, h, alg, 0, a, greedy_value_constrained(b, h, model),
                             0, 0, elapsed, ref))
        elif alg == "pomcp":
            for sims in cfg.pomcp_simulations:
                params = MctsParams(sims, cfg.exploration_constant,
                                    seed=instance_key(cfg.seed ^ (h << 32), index),
                                    greedy_rollout=cfg.rollout == "greedy")
                t0 = time.perf_counter()
                out = _run_uct(b, h, params, model)
                elapsed = time.perf_counter() - t0
                a_visits, a_value = out[4][0], out[5][0]
                acts = sorted_actions(b.location, model)
                a = _best_root_action(acts, a_visits, a_value)
                j = acts.index(a)
                rows.append(_row(cfg, index, h, alg, sims, a, a_value[j] / a_visits[j],
                                 len(out[1]) - 1, 0, elapsed, ref))
    return rows


def warmup() -> None:
    """Compile every kernel an experiment touches so no timing includes JIT work."""
    from .model import uniform_model

    _warm_search()
    model = uniform_model(2, 2)
    b = FactoredBelief(0, (0.3, 0.5, 0.6, 0.9))
    constrained_greedy_action(b, model)
    greedy_value_constrained(b, 2, model)
    for greedy in (False, True):
        _run_uct(b, 2, MctsParams(3, greedy_rollout=greedy), model)


def _cell_task(args):
    cfg, index, h = args
    return run_cell(cfg, index, h)


def _check_writable(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise ConfigError(f"output directory does not exist: {parent}")
    if os.path.exists(path):
        if os.path.isdir(path) or not os.access(path, os.W_OK):
            raise ConfigError(f"output path is not writable: {path}")
    elif not os.access(parent, os.W_OK):
        raise ConfigError(f"output directory is not writable: {parent}")


def collect(cfg: ExperimentConfig, jobs: int = 1) -> list[MetricsRow]:
    cells = [(cfg, i, h)
             for i in range(cfg.first_instance, cfg.first_instance + cfg.num_instances)
             for h in cfg.horizons]
    rows: list[MetricsRow] = []
    if jobs <= 1:
        warmup()
        for c in cells:
            rows.extend(_cell_task(c))
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=warmup) as pool:
            for part in pool.map(_cell_task, cells, chunksize=max(1, len(cells) // (4 * jobs))):
                rows.extend(part)
    rows.sort(key=lambda r: r.sort_key)
    return rows


def write_csv(rows: list[MetricsRow], path_or_file) -> None:
    def dump(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(r.cells())

    if isinstance(path_or_file, (str, os.PathLike)):
        with open(path_or_file, "w", newline="") as fh:
            dump(fh)
    else:
        dump(path_or_file)


def run(cfg: ExperimentConfig, jobs: int = 1) -> list[MetricsRow]:
    """Run every cell of ``cfg`` and write the sorted rows to ``cfg.output_path``."""
    _check_writable(cfg.output_path)
    rows = collect(cfg, jobs)
    write_csv(rows, cfg.output_path)
    return rows


# -- reading and summarizing -------------------------------------------------

_INT_COLS = ("instance_index", "horizon", "simulations", "best_action", "nodes_expanded",
             "bound_evaluations")
_FLOAT_COLS = ("value", "elapsed_ms", "performance_loss")


def _parse_row(rec: list[str], lineno: int) -> MetricsRow:
    if len(rec) != len(CSV_HEADER):
        raise MalformedCsv(f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(rec)}")
    d = dict(zip(CSV_HEADER, rec))
    try:
        for k in _INT_COLS:
            d[k] = int(d[k])
        for k in _FLOAT_COLS:
            d[k] = float(d[k])
            if not math.isfinite(d[k]):
                raise ValueError(f"{k} is not finite")
        if d["agrees_with_optimal"] not in ("true", "false"):
            raise ValueError("agrees_with_optimal must be true or false")
        d["agrees_with_optimal"] = d["agrees_with_optimal"] == "true"
        if d["algorithm"] not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {d['algorithm']!r}")
        return MetricsRow(**d)
    except ValueError as exc:
        raise MalformedCsv(f"line {lineno}: {exc}") from None


def read_csv(path_or_text: str, *, text: bool = False) -> list[MetricsRow]:
    fh = io.StringIO(path_or_text) if text else open(path_or_text, newline="")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv("line 1: missing header") from None
        if tuple(header) != CSV_HEADER:
            raise MalformedCsv(f"line 1: unexpected header {header}")
        return [_parse_row(rec, reader.line_num) for rec in reader]


SUMMARY_COLUMNS = ("count", "mean_performance_loss", "max_performance_loss", "agreement_pct",
                   "mean_nodes_expanded", "mean_elapsed_ms")


@dataclass(frozen=True)
class SummaryRow:
    key: tuple
    count: int
    mean_performance_loss: float
    max_performance_loss: float
    agreement_pct: float
    mean_nodes_expanded: float
    mean_elapsed_ms: float


def summarize(rows: list[MetricsRow], group_by: tuple[str, ...]) -> list[SummaryRow]:
    bad = [g for g in group_by if g not in CSV_HEADER]
    if bad:
        raise ValueError(f"unknown group-by fields {bad}; choose from {CSV_HEADER}")
    groups = defaultdict(list)
    for r in rows:
        groups[tuple(getattr(r, g) for g in group_by)].append(r)
    out = []
    for key in sorted(groups):
        g = groups[key]
        n = len(g)
        out.append(SummaryRow(
            key, n,
            math.fsum(r.performance_loss for r in g) / n,
            max(r.performance_loss for r in g),
            100.0 * sum(r.agrees_with_optimal for r in g) / n,
            math.fsum(r.nodes_expanded for r in g) / n,
            math.fsum(r.elapsed_ms for r in g) / n,
        ))
    return out


def write_summary(summary: list[SummaryRow], group_by: tuple[str, ...], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(list(group_by) + list(SUMMARY_COLUMNS))
    for s in summary:
        vals = [s.count] + [format(getattr(s, c), ".17g") for c in SUMMARY_COLUMNS[1:]]
        w.writerow([str(k) for k in s.key] + [str(v) for v in vals])


def node_pairs(rows: list[MetricsRow], first: str = "rtbss-u", second: str = "rtbss-k"):
    """Per-(instance, horizon) node counts of two algorithms, for the scatter plot."""
    by_cell = defaultdict(dict)
    for r in rows:
        if r.algorithm in (first, second):
            by_cell[(r.instance_index, r.horizon)][r.algorithm] = r.nodes_expanded
    return [(i, h, d[first], d[second]) for (i, h), d in sorted(by_cell.items())
            if first in d and second in d]


def mean_elapsed_by_horizon(rows: list[MetricsRow]) -> dict[str, dict[int, float]]:
    acc = defaultdict(lambda: defaultdict(list))
    for r in rows:
        acc[r.algorithm][r.horizon].append(r.elapsed_ms)
    return {a: {h: math.fsum(v) / len(v) for h, v in sorted(d.items())} for a, d in acc.items()}


def crossover_horizon(rows: list[MetricsRow], algorithm: str = "rtbss-k",
                      baseline: str = "exhaustive"):
    """Smallest horizon from which ``algorithm`` is faster than ``baseline`` on average.

    ``None`` when it never overtakes or the rows lack one of the two algorithms.
    """
    means = mean_elapsed_by_horizon(rows)
    if algorithm not in means or baseline not in means:
        return None
    hs = sorted(set(means[algorithm]) & set(means[baseline]))
    cross = None
    for h in reversed(hs):
        if means[algorithm][h] < means[baseline][h]:
            cross = h
        else:
            break
    return cross


def crossover_report(rows: list[MetricsRow]) -> list[str]:
    lines = []
    for alg in ("rtbss-u", "rtbss-k"):
        if any(r.algorithm == alg for r in rows) and any(r.algorithm == "exhaustive" for r in rows):
            h = crossover_horizon(rows, alg)
            where = f"T >= {h}" if h is not None else "never (within the horizons run)"
            lines.append(f"crossover: {alg} faster than exhaustive for {where}")
    return lines


def strip_timing(rows: list[MetricsRow]) -> list[MetricsRow]:
    return [replace(r, elapsed_ms=0.0) for r in rows]
