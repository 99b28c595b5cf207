"""Benchmark the compiled interpreter core against the pure-Python one.

Measures the baseline suite and a batch of mutant executions on a seeded
corpus, then prints steps/second per backend and the speedup.

    python benchmarks/backend_bench.py [--classes 12] [--mutants 300]
"""

import argparse
import time

from mutagrid import mutation
from mutagrid.corpus import CorpusSpec, generate_corpus
from mutagrid.minilang import available_backends, run_all_tests


def time_backend(program, mutants, backend, step_limit):
    t0 = time.perf_counter()
    outcomes = run_all_tests(program, backend=backend)
    baseline_steps = sum(o.steps for _, o in outcomes)
    t1 = time.perf_counter()
    exec_steps = 0
    for mutant in mutants:
        status = mutation.execute_mutant(program, mutant,
                                         step_limit=step_limit,
                                         backend=backend)
        exec_steps += status.execution_steps
    t2 = time.perf_counter()
    return {"baseline_s": t1 - t0, "baseline_steps": baseline_steps,
            "mutants_s": t2 - t1, "mutant_steps": exec_steps}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--classes", type=int, default=12)
    parser.add_argument("--mutants", type=int, default=300)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--step-limit", type=int, default=20_000)
    args = parser.parse_args()

    program, manifest = generate_corpus(
        CorpusSpec(seed=args.seed, class_count=args.classes, tests_per_class=4))
    catalog = mutation.mutant_catalog(program)
    stride = max(1, len(catalog) // args.mutants)
    mutants = catalog[::stride][:args.mutants]
    print(f"corpus: {args.classes} classes, {len(program.tests)} tests, "
          f"{len(catalog)} mutants total, timing {len(mutants)} mutants")

    results = {}
    for backend in available_backends():
        results[backend] = time_backend(program, mutants, backend,
                                        args.step_limit)
        r = results[backend]
        total_steps = r["baseline_steps"] + r["mutant_steps"]
        total_s = r["baseline_s"] + r["mutants_s"]
        print(f"{backend:9s} baseline {r['baseline_s']*1e3:8.1f} ms   "
              f"mutants {r['mutants_s']*1e3:9.1f} ms   "
              f"{total_steps / total_s / 1e6:8.2f} M steps/s")

    if {"python", "compiled"} <= set(results):
        py = results["python"]
        cy = results["compiled"]
        ratio = (py["baseline_s"] + py["mutants_s"]) / (cy["baseline_s"] + cy["mutants_s"])
        print(f"compiled core speedup over pure Python: {ratio:.1f}x")
    else:
        print("compiled core not built; only the pure-Python backend was timed")


if __name__ == "__main__":
    main()
