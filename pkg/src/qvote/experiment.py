"""Batch experiment runner: parameter sweeps, seeded trials and CSV output."""

from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .algorithms import classical_trials, quantum_trials
from .bounds import bounds_report
from .profiles import ProfileFamilySpec, family_for
from .voting import Rule

log = logging.getLogger(__name__)

ALGORITHMS = ("quantum", "classical-with", "classical-without")
DEFAULT_N = 1 << 20
DEFAULT_MOVS = (256, 512, 1024, 2048, 4096)
FULL_SCALE_TRIALS = 100_000
BOUNDS_EPSILONS = (0.25, 0.1, 0.01)
# Trials per random stream. Fixed so results never depend on the worker count.
BLOCK_TRIALS = 1000
WILSON_Z = 1.959963984540054

CSV_COLUMNS = ("rule", "m", "n", "mov", "K", "s", "algorithm", "trials", "correct",
               "pr_correct", "ci_half_width", "runtime_units", "wall_ms")


class ConfigError(ValueError):
    pass


def parse_algorithms(value: str | Iterable[str]) -> tuple[str, ...]:
    items = value.split(",") if isinstance(value, str) else list(value)
    out = []
    for item in (i.strip().lower() for i in items):
        if item in ("classical", "classical-with", "with"):
            item = "classical-with"
        elif item in ("classical-without", "without"):
            item = "classical-without"
        if item not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {item!r}")
        if item not in out:
            out.append(item)
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    rule: Rule
    m: int
    mov_list: tuple[float, ...]
    n: float = DEFAULT_N
    k_list: tuple[int, ...] = (1, 3, 5)
    s_range: tuple[int, ...] = tuple(range(4, 17))
    trials: int = 10_000
    algorithms: tuple[str, ...] = ("quantum", "classical-with")
    base_seed: int = 0
    output: Path | None = None
    workers: int = 1
    record_timing: bool = True

    def __post_init__(self):
        try:
            object.__setattr__(self, "rule", Rule.parse(self.rule))
        except ValueError as err:
            raise ConfigError(str(err)) from None
        object.__setattr__(self, "algorithms", parse_algorithms(self.algorithms))
        for name in ("mov_list", "k_list", "s_range"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.m not in (2, 4):
            raise ConfigError(f"m must be 2 or 4, got {self.m}")
        if not self.n > 0:
            raise ConfigError("n must be positive")
        for name in ("mov_list", "k_list", "s_range", "algorithms"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        if any(not 2 <= s <= 20 for s in self.s_range):
            raise ConfigError("every s must lie in 2..20")
        if any(k < 1 for k in self.k_list):
            raise ConfigError("every K must be at least 1")
        if any(mov < 0 for mov in self.mov_list):
            raise ConfigError("MoV values must be nonnegative")
        if self.trials < 100:
            raise ConfigError("trials must be at least 100")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")


@dataclass(frozen=True)
class Cell:
    rule: Rule
    m: int
    n: float
    mov: float
    K: int
    s: int
    algorithm: str

    @property
    def runtime_units(self) -> int:
        return self.K * (1 << self.s)

    def key(self) -> tuple:
        return (self.rule.value, self.m, _num(self.n), _num(self.mov), self.K, self.s,
                self.algorithm)

    def seed_key(self) -> int:
        text = "|".join(str(part) for part in self.key())
        return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class ExperimentRecord:
    rule: str
    m: int
    n: float
    mov: float
    K: int
    s: int
    algorithm: str
    trials: int
    correct: int
    pr_correct: float
    ci_half_width: float
    runtime_units: int
    wall_ms: float = field(default=0.0, compare=False)

    @property
    def feasible(self) -> bool:
        return self.trials > 0

    def key(self) -> tuple:
        return (self.rule, self.m, _num(self.n), _num(self.mov), self.K, self.s,
                self.algorithm)


def _num(x: float):
    return int(x) if float(x).is_integer() else float(x)


def wilson_half_width(correct: int, trials: int, z: float = WILSON_Z) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return math.nan
    p = correct / trials
    spread = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return spread / (1 + z * z / trials)


def cells(config: ExperimentConfig) -> list[Cell]:
    """Grid cells in output order."""
    return [Cell(config.rule, config.m, config.n, mov, K, s, alg)
            for mov in config.mov_list
            for K in config.k_list
            for s in config.s_range
            for alg in config.algorithms]


def block_rng(base_seed: int, cell: Cell, block: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=base_seed, spawn_key=(cell.seed_key(), block))
    return np.random.default_rng(seq)


def _profile(cell: Cell) -> np.ndarray:
    spec = ProfileFamilySpec(family_for(cell.rule, cell.m), cell.n, cell.m, cell.mov)
    return spec.histogram()


def _check_cell(cell: Cell) -> np.ndarray:
    """The cell's profile, or ValueError if the cell cannot be run."""
    hist = _profile(cell)
    if cell.algorithm == "classical-without":
        if not np.array_equal(np.rint(hist), hist):
            raise ValueError("profile has fractional weights; cannot sample without replacement")
        if cell.runtime_units > hist.sum():
            raise ValueError(f"T={cell.runtime_units} exceeds the number of voters")
    return hist


def _run_block(cell: Cell, base_seed: int, block: int, size: int) -> int:
    hist = _profile(cell)
    rng = block_rng(base_seed, cell, block)
    if cell.algorithm == "quantum":
        announced = quantum_trials(hist, cell.rule, cell.K, cell.s, size, rng)
    else:
        replacement = cell.algorithm == "classical-with"
        announced = classical_trials(hist, cell.rule, cell.runtime_units, replacement,
                                     size, rng)
    return int(np.count_nonzero(announced == 0))


def _blocks(trials: int) -> list[tuple[int, int]]:
    full, rest = divmod(trials, BLOCK_TRIALS)
    out = [(b, BLOCK_TRIALS) for b in range(full)]
    if rest:
        out.append((full, rest))
    return out


def _record(cell: Cell, trials: int, correct: int, wall_ms: float) -> ExperimentRecord:
    pr = correct / trials if trials else math.nan
    return ExperimentRecord(cell.rule.value, cell.m, _num(cell.n), _num(cell.mov), cell.K,
                            cell.s, cell.algorithm, trials, correct, pr,
                            wilson_half_width(correct, trials), cell.runtime_units, wall_ms)


def iter_experiment(config: ExperimentConfig, skip: Iterable[tuple] = (),
                    executor=None) -> Iterator[ExperimentRecord]:
    """Yield one record per cell, in grid order, as soon as it is done.

    Cells whose key is in ``skip`` are not run. A cell that cannot be run
    yields a record with ``trials == 0``.
    """
    skip = set(skip)
    for cell in cells(config):
        if cell.key() in skip:
            continue
        try:
            _check_cell(cell)
        except ValueError as err:
            log.warning("skipping cell %s: %s", cell.key(), err)
            yield _record(cell, 0, 0, 0.0)
            continue
        start = time.perf_counter()
        blocks = _blocks(config.trials)
        args = ([cell] * len(blocks), [config.base_seed] * len(blocks),
                [b for b, _ in blocks], [size for _, size in blocks])
        if executor is None:
            correct = sum(map(_run_block, *args))
        else:
            correct = sum(executor.map(_run_block, *args))
        wall_ms = (time.perf_counter() - start) * 1e3 if config.record_timing else 0.0
        record = _record(cell, config.trials, correct, wall_ms)
        log.info("%s pr_correct=%.4f", cell.key(), record.pr_correct)
        yield record


def run_experiment(config: ExperimentConfig, skip: Iterable[tuple] = ()) -> list[ExperimentRecord]:
    """Run every cell and, if ``config.output`` is set, write them as CSV."""
    sink = CsvSink(config.output) if config.output is not None else None
    records = []
    executor = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        for record in iter_experiment(config, skip, executor):
            records.append(record)
            if sink is not None:
                sink.write(record)
    finally:
        if executor is not None:
            executor.shutdown()
        if sink is not None:
            sink.close()
    return records


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(_num(value)) if math.isfinite(value) else str(value)
    return str(value)


def _row(record: ExperimentRecord) -> list[str]:
    return [_fmt(getattr(record, f.name)) for f in fields(ExperimentRecord)]


class CsvSink:
    """Append records to a CSV file, flushing after every row."""

    def __init__(self, path, append: bool = False):
        self.path = Path(path)
        fresh = not (append and self.path.exists() and self.path.stat().st_size > 0)
        self._fh = open(self.path, "w" if fresh else "a", encoding="utf-8", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        if fresh:
            self._writer.writerow(CSV_COLUMNS)
            self._fh.flush()

    def write(self, record: ExperimentRecord) -> None:
        self._writer.writerow(_row(record))
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()


def emit_csv(records: list[ExperimentRecord], path) -> None:
    if not records:
        raise ValueError("no records to write")
    sink = CsvSink(path)
    try:
        for record in records:
            sink.write(record)
    finally:
        sink.close()


def _parse_number(text: str) -> float:
    value = float(text)
    return int(value) if value.is_integer() and "." not in text and "e" not in text else value


def read_csv(path) -> list[ExperimentRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header: {header}")
        out = []
        for row in reader:
            v = dict(zip(CSV_COLUMNS, row))
            out.append(ExperimentRecord(
                rule=v["rule"], m=int(v["m"]), n=_parse_number(v["n"]),
                mov=_parse_number(v["mov"]), K=int(v["K"]), s=int(v["s"]),
                algorithm=v["algorithm"], trials=int(v["trials"]), correct=int(v["correct"]),
                pr_correct=float(v["pr_correct"]), ci_half_width=float(v["ci_half_width"]),
                runtime_units=int(v["runtime_units"]), wall_ms=float(v["wall_ms"])))
        return out


BOUNDS_COLUMNS = ("n", "m", "mov", "epsilon", "sigma", "K", "classical_lb_exact",
                  "classical_lb_loose", "speedup_ratio", "delta_low", "delta_high",
                  "quantum_tail")


def report_bounds(config: ExperimentConfig, epsilons=BOUNDS_EPSILONS) -> str:
    """CSV summary of the theoretical parameters for every MoV in the grid."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BOUNDS_COLUMNS)
    for mov in config.mov_list:
        for eps in epsilons:
            rep = bounds_report(config.n, config.m, mov, eps)
            low, high = rep.delta_window or (math.nan, math.nan)
            writer.writerow([_fmt(x) for x in (
                float(config.n), config.m, float(mov), eps, rep.sigma_s, rep.k_rounds,
                rep.classical_lb_samples, rep.classical_lb_loose, rep.speedup_ratio,
                low, high, rep.quantum_tail)])
    return buf.getvalue()


def full_scale(config: ExperimentConfig) -> ExperimentConfig:
    return replace(config, trials=FULL_SCALE_TRIALS)
