"""Monte-Carlo sweeps of one session parameter, written as CSV rows."""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from confqkd.codes import binary_entropy
from confqkd.errors import ConfigError
from confqkd.protocol import Completed, SessionConfig, run_session
from confqkd.qubit import Depolarizing

HEADER = ("param", "trials", "mean_q1", "mean_q2", "formula_rate", "measured_rate", "abort_fraction")


def _depolarize_both(cfg: SessionConfig, p: float) -> SessionConfig:
    return replace(cfg, channel_bob=Depolarizing(p), channel_charlie=Depolarizing(p))


AXES: dict[str, Callable[[SessionConfig, float], SessionConfig]] = {
    "depolarizing_p": _depolarize_both,
    "bob_depolarizing_p": lambda cfg, p: replace(cfg, channel_bob=Depolarizing(p)),
    "charlie_depolarizing_p": lambda cfg, p: replace(cfg, channel_charlie=Depolarizing(p)),
    "num_pulses": lambda cfg, v: replace(cfg, num_pulses=int(round(v))),
    "target_failure": lambda cfg, v: replace(cfg, target_failure=v),
}


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    steps: int

    @classmethod
    def parse(cls, text: str) -> "Axis":
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"axis must look like NAME:MIN:MAX:STEPS, got {text!r}")
        name, lo, hi, steps = parts
        if name not in AXES:
            raise ConfigError(f"unknown sweep parameter {name!r}; choose from {', '.join(AXES)}")
        try:
            axis = cls(name, float(lo), float(hi), int(steps))
        except ValueError as exc:
            raise ConfigError(f"cannot parse axis {text!r}") from exc
        if axis.steps < 1:
            raise ConfigError("axis steps must be >= 1")
        return axis

    def values(self) -> list[float]:
        if self.steps == 1:
            return [self.lo]
        return [float(v) for v in np.linspace(self.lo, self.hi, self.steps)]


@dataclass(frozen=True)
class TrialResult:
    q1: float | None
    q2: float | None
    completed: bool
    key_bits: int
    kept_bits: int


@dataclass(frozen=True)
class SweepRow:
    param: float
    trials: int
    mean_q1: float
    mean_q2: float
    formula_rate: float
    measured_rate: float
    abort_fraction: float

    def cells(self) -> list[str]:
        return [f"{self.param:.6f}", str(self.trials)] + [
            f"{x:.6f}" for x in (self.mean_q1, self.mean_q2, self.formula_rate, self.measured_rate, self.abort_fraction)
        ]


def trial_seed(seed: int, point: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, point, trial]).generate_state(1, np.uint64)[0])


def _run_trial(cfg: SessionConfig) -> TrialResult:
    outcome, _ = run_session(cfg)
    if isinstance(outcome, Completed):
        return TrialResult(outcome.q1, outcome.q2, True, outcome.key_length, outcome.kept_bits)
    return TrialResult(outcome.q1, outcome.q2, False, 0, outcome.kept_bits)


def _entropy(q: float) -> float:
    return binary_entropy(min(max(q, 0.0), 0.5))


def summarize(param: float, results: Sequence[TrialResult]) -> SweepRow:
    q1s = [r.q1 for r in results if r.q1 is not None]
    q2s = [r.q2 for r in results if r.q2 is not None]
    mean_q1 = float(np.mean(q1s)) if q1s else float("nan")
    mean_q2 = float(np.mean(q2s)) if q2s else float("nan")
    formula = 1.0 - _entropy(mean_q1) - _entropy(mean_q2) if q1s and q2s else float("nan")
    measured = float(np.mean([r.key_bits / r.kept_bits if r.kept_bits else 0.0 for r in results]))
    aborts = sum(not r.completed for r in results) / len(results)
    return SweepRow(param, len(results), mean_q1, mean_q2, formula, measured, aborts)


def default_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def run_sweep(base: SessionConfig, axis: Axis, trials: int, seed: int, jobs: int = 1) -> list[SweepRow]:
    """One row per axis value, in axis order regardless of completion order."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    points = axis.values()
    configs = []
    for i, value in enumerate(points):
        cfg = AXES[axis.name](base, value)
        cfg.validate()
        configs.extend(replace(cfg, seed=trial_seed(seed, i, t), seeds=None) for t in range(trials))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_trial, configs, chunksize=max(1, len(configs) // (4 * jobs))))
    else:
        results = [_run_trial(c) for c in configs]
    return [summarize(v, results[i * trials:(i + 1) * trials]) for i, v in enumerate(points)]


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    writer.writerows(r.cells() for r in rows)
    return buf.getvalue()
