"""Evaluation quantities: speedup curves, improvement, trial stats, fits.

These back the three desk-scale experiments (strategy scaling, workload
prediction from class size, operator proportions) and the bundled
reference duration tables for the three benchmark subjects.
"""

import json
import statistics
from dataclasses import dataclass
from importlib import resources

from .mutation import OPERATOR_IDS


@dataclass
class TrialSet:
    label: str
    durations: list

    def __post_init__(self):
        if not self.durations:
            raise ValueError("a trial set needs at least one duration")


@dataclass
class ScalingCurve:
    strategy: str
    points: list  # [(worker count, duration)]

    def __post_init__(self):
        workers = [p for p, _ in self.points]
        if len(set(workers)) != len(workers) or workers != sorted(workers):
            raise ValueError("worker counts must be distinct and ascending")


@dataclass
class FitResult:
    slope: float
    intercept: float
    r_squared: float


def speedup(curve: ScalingCurve) -> list:
    """S_P = D_1 / D_P for every point on the curve."""
    baseline = {p: d for p, d in curve.points}.get(1)
    if baseline is None:
        raise ValueError("speedup needs the single-worker baseline (P=1)")
    if any(d <= 0 for _, d in curve.points):
        raise ValueError("durations must be positive")
    return [(p, baseline / d) for p, d in curve.points]


def percent_improvement(baseline: float, treatment: float) -> float:
    """1 - treatment/baseline: the fraction of the baseline duration saved."""
    if baseline <= 0:
        raise ValueError("baseline duration must be positive")
    return 1.0 - treatment / baseline


def trial_stats(trials: TrialSet) -> tuple:
    """(mean, sample standard deviation); needs >= 2 trials."""
    if len(trials.durations) < 2:
        raise ValueError("sample standard deviation needs at least 2 trials")
    return (statistics.mean(trials.durations),
            statistics.stdev(trials.durations))


def linear_fit(points: list) -> FitResult:
    """Ordinary least squares y = slope*x + intercept.

    r^2 = 1 - SS_res/SS_tot, with the convention r^2 = 0 when SS_tot = 0
    (all y equal: the fit explains nothing there is to explain).
    """
    if len(points) < 2:
        raise ValueError("need at least two points")
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    if sxx == 0:
        raise ValueError("all x values are equal; cannot fit")
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    if ss_tot == 0:
        return FitResult(slope=slope, intercept=intercept, r_squared=0.0)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    return FitResult(slope=slope, intercept=intercept,
                     r_squared=1.0 - ss_res / ss_tot)


def operator_histogram(result) -> dict:
    """Mutants per operator for a combined result; all 7 keys, zero-filled."""
    histogram = {op: 0 for op in OPERATOR_IDS}
    histogram.update(result.per_operator_counts)
    return histogram


def coefficient_of_variation(values: list) -> float:
    if len(values) < 2:
        raise ValueError("need at least 2 values")
    mean = statistics.mean(values)
    if mean == 0:
        return 0.0
    return statistics.stdev(values) / mean


def load_reference_durations() -> dict:
    """Bundled reference duration tables (milliseconds).

    Three tables (by-operator @16, by-class @16, unmodified parallel
    baseline), each with three per-project trials and the mean/stddev
    cells as reported for the benchmark subjects.
    """
    ref = resources.files("mutagrid.data").joinpath("reference_durations.json")
    with ref.open(encoding="utf-8") as fh:
        return json.load(fh)


def reference_summary() -> dict:
    """Recomputed stats and improvements for the reference durations."""
    tables = load_reference_durations()
    summary = {}
    for table_name, rows in tables.items():
        summary[table_name] = {}
        for project, row in rows.items():
            mean, stddev = trial_stats(TrialSet(project, row["trials"]))
            summary[table_name][project] = {
                "trials": row["trials"], "mean": mean, "stddev": stddev,
                "reported_mean": row["reported_mean"],
                "reported_stddev": row["reported_stddev"]}
    baseline = tables["unmodified_parallel_baseline"]
    by_class = tables["by_class_16_nodes"]
    summary["improvement_by_class_vs_baseline"] = {
        project: percent_improvement(baseline[project]["reported_mean"],
                                     by_class[project]["reported_mean"])
        for project in baseline}
    return summary
