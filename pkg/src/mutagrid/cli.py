"""Command-line entry point.

Subcommands: run (analysis), simulate (run with mode=simulated), bench
(experiment sweeps), worker (daemon), report (pretty-print a combined
result).  Configuration precedence: flags > job file > defaults.  The CLI
is a thin shell over the library; everything it does is reachable through
library calls with identical results.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys

from . import corpus as corpus_mod
from . import metrics, mutation, partitioning
from .cluster import master as master_mod
from .cluster import worker as worker_mod
from .cluster.sim import ClusterSpec, simulate_job
from .costmodel import DEFAULT_COST_MODEL, CostModel
from .minilang import MiniLangError, parse_program, run_all_tests
from .minilang.interp import DEFAULT_STEP_LIMIT, PASSED

EXIT_OK = 0
EXIT_USAGE = 2          # argparse convention
EXIT_PARSE_FAILURE = 3
EXIT_BASELINE_FAILED = 4
EXIT_CLUSTER_FAILURE = 5

log = logging.getLogger("mutagrid")

_JOB_KEYS = {
    "program_path", "corpus", "classes", "tests", "operators", "strategy",
    "target_partitions", "step_limit", "seed", "mode", "workers",
    "worker_endpoints", "cost_model", "skip_redundant_phases", "out_dir",
}


class JobConfigError(Exception):
    pass


def load_job_config(path: str | None, args) -> dict:
    job = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            job = json.load(fh)
        unknown = set(job) - _JOB_KEYS
        if unknown:
            raise JobConfigError(f"unknown job file keys: {sorted(unknown)}")
    # flags override the job file
    overrides = {
        "program_path": args.program, "strategy": args.strategy,
        "workers": args.workers, "mode": args.mode, "out_dir": args.out,
        "seed": args.seed, "step_limit": args.step_limit,
        "target_partitions": args.target_partitions,
    }
    for key, value in overrides.items():
        if value is not None:
            job[key] = value
    if getattr(args, "skip_redundant_phases", False):
        job["skip_redundant_phases"] = True
    job.setdefault("mode", "simulated")
    job.setdefault("strategy", "by-operator")
    job.setdefault("workers", 1)
    job.setdefault("out_dir", "out")
    job.setdefault("skip_redundant_phases", False)
    if job["mode"] not in ("simulated", "real"):
        raise JobConfigError(f"unknown mode {job['mode']!r}")
    return job


def _load_program(job):
    if job.get("program_path"):
        with open(job["program_path"], encoding="utf-8") as fh:
            text = fh.read()
        return parse_program(text), None
    spec_data = dict(job.get("corpus") or {})
    if "seed" not in spec_data:
        spec_data["seed"] = job.get("seed", corpus_mod.DEFAULT_CORPUS_SEED)
    spec = corpus_mod.CorpusSpec.from_json(spec_data)
    program, manifest = corpus_mod.generate_corpus(spec)
    return program, manifest


def _task_parameters(job, program) -> partitioning.TaskParameters:
    step_limit = job.get("step_limit")
    if step_limit is None:
        step_limit = (corpus_mod.DEFAULT_JOB_STEP_LIMIT
                      if job.get("program_path") is None else DEFAULT_STEP_LIMIT)
    return partitioning.TaskParameters.for_program(
        program, classes=job.get("classes"), tests=job.get("tests"),
        operators=job.get("operators"), step_limit=step_limit)


def _strategy(job) -> partitioning.DistributionStrategy:
    kind = job["strategy"]
    target = job.get("target_partitions")
    if kind == partitioning.BY_MUTANT_EQUAL and target is None:
        target = job["workers"]
    return partitioning.DistributionStrategy(kind=kind, target_partitions=target)


def _cost_model(job) -> CostModel:
    if job.get("cost_model"):
        return CostModel.from_json(job["cost_model"])
    return DEFAULT_COST_MODEL


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _json_text(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def cmd_run(args) -> int:
    try:
        job = load_job_config(args.job, args)
    except (JobConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        program, manifest = _load_program(job)
    except MiniLangError as exc:
        print(f"error: program does not parse: "
              f"{exc.located(open(job['program_path']).read()) if job.get('program_path') else exc}",
              file=sys.stderr)
        return EXIT_PARSE_FAILURE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        params = _task_parameters(job, program)
        strategy = _strategy(job)
    except (ValueError, MiniLangError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    # the analysis cannot continue unless the original program is green
    baseline = run_all_tests(program, params.tests, params.step_limit)
    failing = [(program.test_name_by_id[tid], outcome.status)
               for tid, outcome in baseline if outcome.status != PASSED]
    if failing:
        print("error: baseline test suite fails; mutation analysis aborted",
              file=sys.stderr)
        for name, status in failing[:20]:
            print(f"  {name}: {status}", file=sys.stderr)
        return EXIT_BASELINE_FAILED

    out_dir = job["out_dir"]
    if manifest is not None:
        _write(out_dir, "corpus_manifest.json", _json_text(manifest))

    if job["mode"] == "simulated":
        spec = ClusterSpec(workers=job["workers"], mode="simulated",
                           cost_model=_cost_model(job))
        combined, trace = simulate_job(
            program, params, strategy, spec,
            skip_redundant_phases=job["skip_redundant_phases"])
        _write(out_dir, "trace.json", _json_text(trace.to_json()))
        _write(out_dir, "trace.csv", trace.to_csv())
    else:
        endpoints = job.get("worker_endpoints")
        try:
            if endpoints:
                spec = ClusterSpec(workers=len(endpoints), mode="real",
                                   worker_endpoints=endpoints)
                combined = master_mod.run_real_job(
                    program, params, strategy, spec,
                    skip_redundant_phases=job["skip_redundant_phases"])
            else:
                cache_root = os.path.join(out_dir, "worker-cache")
                with master_mod.spawn_local_workers(job["workers"],
                                                    cache_root) as (eps, _):
                    spec = ClusterSpec(workers=len(eps), mode="real",
                                       worker_endpoints=eps)
                    combined = master_mod.run_real_job(
                        program, params, strategy, spec,
                        skip_redundant_phases=job["skip_redundant_phases"],
                        shutdown_workers=True)
        except master_mod.RealClusterError as exc:
            print(f"error: cluster failure: {exc}", file=sys.stderr)
            return EXIT_CLUSTER_FAILURE

    _write(out_dir, "combined.json", _json_text(combined.to_json()))
    score = combined.score
    print(f"mutants: {score.killed + score.live}  killed: {score.killed}  "
          f"survived: {score.live}")
    ratio = score.ratio_killed_to_total
    kl = score.ratio_killed_to_live
    print(f"score k/(k+l): {ratio:.4f}" if ratio is not None else "score: n/a")
    print(f"score k/l:     {kl:.4f}" if kl is not None else "score k/l:     undefined (no survivors)")
    print(f"total duration: {combined.total_duration}")
    print(f"results written to {out_dir}/")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        job = load_job_config(args.job, args)
    except (JobConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        program, manifest = _load_program(job)
        params = _task_parameters(job, program)
    except MiniLangError as exc:
        print(f"error: program does not parse: {exc}", file=sys.stderr)
        return EXIT_PARSE_FAILURE

    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    worker_counts = [int(w) for w in args.worker_counts.split(",")]
    cost_model = _cost_model(job)
    out_dir = job["out_dir"]
    cache = {}

    scaling_rows = []
    by_class_combined = None
    histogram_source = None
    for kind in strategies:
        for workers in worker_counts:
            target = workers if kind == partitioning.BY_MUTANT_EQUAL else None
            strategy = partitioning.DistributionStrategy(
                kind=kind, target_partitions=target)
            spec = ClusterSpec(workers=workers, mode="simulated",
                               cost_model=cost_model)
            combined, _ = simulate_job(
                program, params, strategy, spec,
                skip_redundant_phases=job["skip_redundant_phases"],
                execution_cache=cache)
            scaling_rows.append((kind, workers, combined.total_duration))
            histogram_source = combined
            if kind == partitioning.BY_CLASS:
                by_class_combined = combined

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["strategy", "workers", "duration"])
    writer.writerows(scaling_rows)
    _write(out_dir, "scaling.csv", out.getvalue())

    # experiment 2: per-class size, yield and phase durations (by-class run)
    if by_class_combined is None:
        strategy = partitioning.DistributionStrategy(kind=partitioning.BY_CLASS)
        by_class_combined, _ = simulate_job(
            program, params, strategy,
            ClusterSpec(workers=max(worker_counts), mode="simulated",
                        cost_model=cost_model),
            skip_redundant_phases=job["skip_redundant_phases"],
            execution_cache=cache)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["class", "mutable_lines", "mutants",
                     "scan", "dependency_analysis", "generation", "execution"])
    class_rows = []
    for partial in by_class_combined.partials:
        cls = params.classes[partial.partition_id]
        durations = partial.phase_durations
        class_rows.append((cls, mutation.mutable_lines(program, cls),
                           len(partial.statuses), durations["scan"],
                           durations["dependency-analysis"],
                           durations["generation"], durations["execution"]))
    writer.writerows(class_rows)
    _write(out_dir, "classes.csv", out.getvalue())

    fit = metrics.linear_fit([(row[1], row[2]) for row in class_rows])
    exec_fit = metrics.linear_fit([(row[1], row[6]) for row in class_rows])
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["relation", "slope", "intercept", "r_squared"])
    writer.writerow(["mutants_vs_mutable_lines", fit.slope, fit.intercept,
                     fit.r_squared])
    writer.writerow(["execution_vs_mutable_lines", exec_fit.slope,
                     exec_fit.intercept, exec_fit.r_squared])
    _write(out_dir, "fit.csv", out.getvalue())

    # experiment 3: mutants per operator
    histogram = metrics.operator_histogram(histogram_source)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["operator", "mutants"])
    for op in mutation.OPERATOR_IDS:
        writer.writerow([op, histogram[op]])
    _write(out_dir, "histogram.csv", out.getvalue())

    _write(out_dir, "trials.json", _json_text(metrics.reference_summary()))
    if manifest is not None:
        _write(out_dir, "corpus_manifest.json", _json_text(manifest))
    print(f"bench outputs written to {out_dir}/ "
          f"({len(scaling_rows)} scaling rows)")
    return EXIT_OK


def cmd_worker(args) -> int:
    return worker_mod.worker_serve(args.listen, args.cache,
                                   args.heartbeat_interval)


def cmd_report(args) -> int:
    with open(args.combined, encoding="utf-8") as fh:
        data = json.load(fh)
    score = data["score"]
    total = score["killed"] + score["live"]
    print(f"mutants:  {total}")
    print(f"killed:   {score['killed']}")
    print(f"survived: {score['live']}")
    if score["ratio_killed_to_total"] is not None:
        print(f"score k/(k+l): {score['ratio_killed_to_total']:.4f}")
    kl = score["ratio_killed_to_live"]
    print(f"score k/l:     {kl:.4f}" if kl is not None
          else "score k/l:     undefined (no survivors)")
    print(f"total duration: {data['total_duration']}")
    print(f"partitions: {len(data['partials'])}")
    print("per-operator mutants:")
    for op, count in sorted(data["per_operator_counts"].items()):
        print(f"  {op:24s} {count}")
    survivors = [s for s in data["statuses"] if s["verdict"] == "survived"]
    if survivors:
        print(f"surviving mutants: {', '.join(str(s['mutant_id']) for s in survivors[:25])}"
              + (" ..." if len(survivors) > 25 else ""))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mutagrid",
        description="Distributed mutation analysis for the mini language")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--job", help="job file (JSON)")
        p.add_argument("--program", help="path to a .mini program")
        p.add_argument("--strategy",
                       choices=partitioning.STRATEGY_KINDS, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--step-limit", type=int, default=None,
                       dest="step_limit")
        p.add_argument("--target-partitions", type=int, default=None,
                       dest="target_partitions")
        p.add_argument("--skip-redundant-phases", action="store_true",
                       dest="skip_redundant_phases")

    p_run = sub.add_parser("run", help="run one mutation analysis job")
    common(p_run)
    p_run.add_argument("--mode", choices=("simulated", "real"), default=None)
    p_run.set_defaults(fn=cmd_run)

    p_sim = sub.add_parser("simulate", help="run with mode=simulated")
    common(p_sim)
    p_sim.set_defaults(fn=cmd_run, mode="simulated")

    p_bench = sub.add_parser("bench", help="strategy/cluster-size sweeps")
    common(p_bench)
    p_bench.add_argument("--strategies",
                         default="by-operator,by-class,by-mutant-equal")
    p_bench.add_argument("--worker-counts", default="1,2,4,8,12,16",
                         dest="worker_counts")
    p_bench.set_defaults(fn=cmd_bench, mode="simulated")

    p_worker = sub.add_parser("worker", help="serve subtasks for a master")
    p_worker.add_argument("--listen", default="127.0.0.1:0",
                          help="host:port (port 0 picks one)")
    p_worker.add_argument("--cache", required=True,
                          help="artifact cache directory")
    p_worker.add_argument("--heartbeat-interval", type=float, default=1.0,
                          dest="heartbeat_interval")
    p_worker.set_defaults(fn=cmd_worker)

    p_report = sub.add_parser("report", help="pretty-print a combined.json")
    p_report.add_argument("combined")
    p_report.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("MUTAGRID_LOG", "WARNING").upper(),
        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
