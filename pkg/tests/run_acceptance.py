# tests/run_acceptance.py (batch run of the acceptance checks)
"""
Runs every acceptance check at full size and writes results/acceptance.csv,
one row per check: name, value, bound, passed, runtime_sec, error.
"""

import dataclasses
import time
from pathlib import Path

import networkx as nx
import numpy as np
import pandas as pd

from seqdelib.analytics import (
    DICTATORSHIP_BOUND,
    STATIONARY_UPPER_BOUND,
    aggregate_runs,
    pareto_efficient,
    worst_case_distortion,
)
from seqdelib.bargaining import BargainScheme, nash_bargain
from seqdelib.deliberation import run_deliberation
from seqdelib.experiments import (
    SimulationConfig,
    run_dictatorship_experiment,
    run_kstar_experiment,
    run_paper_simulation,
    run_second_moment_experiment,
    run_stationary_experiment,
    run_unanimity_experiment,
)
from seqdelib.population import Agent
from seqdelib.spaces import DecisionSpace, median3

RESULTS_PATH = Path("results/acceptance.csv")
SEED = 2017


def check_median_equivalence():
    rng = np.random.default_rng(SEED)
    mismatches = 0
    spaces = [DecisionSpace.line(51), DecisionSpace.line(201)] + [DecisionSpace.hypercube(k) for k in range(1, 6)]
    for space in spaces:
        for a, b, t in rng.integers(space.size, size=(1000, 3)):
            x, y, threat = (space.alternatives[i] for i in (a, b, t))
            bliss = (float(x.coordinate), float(y.coordinate)) if space.kind == "line" else (x, y)
            u, v = Agent(0, bliss[0]), Agent(1, bliss[1])
            mismatches += nash_bargain(space, u, v, threat) != median3(space, x, y, threat)
    return mismatches, "== 0", mismatches == 0


def check_nash_headline(reports):
    nash = reports["nash"]
    value = f"mean={nash.mean:.4f} q3={nash.q3:.4f}"
    return value, "mean in [1.10, 1.21], q3 <= 1.30", 1.10 <= nash.mean <= 1.21 and nash.q3 <= 1.30


def check_selfish(reports):
    selfish, nash = reports["selfish"], reports["nash"]
    drift = abs(selfish.per_step_mean[-1] - selfish.per_step_mean[0])
    passed = selfish.mean > nash.mean and selfish.mean > STATIONARY_UPPER_BOUND and drift < 0.03
    return f"mean={selfish.mean:.4f} drift={drift:.4f}", f"> nash, > {STATIONARY_UPPER_BOUND}, drift < 0.03", passed


def check_unselfish(reports):
    gap = abs(reports["unselfish"].mean - reports["nash"].mean)
    return round(gap, 4), "< 0.06", gap < 0.06


def check_convergence(reports):
    value = reports["nash"].per_step_mean[1]
    return round(value, 4), "< 1.2", value < 1.2


def check_theory():
    f_star, value = worst_case_distortion()
    rows = [run_stationary_experiment(f, np.random.default_rng(SEED)) for f in (0.1, 0.2929, 0.5)]
    gap = max(abs(r.empirical - r.theoretical) for r in rows)
    passed = 1.2070 <= value <= 1.2072 and 0.2928 <= f_star <= 0.2930 and gap < 0.02
    return f"f*={f_star:.5f} D={value:.5f} chain_gap={gap:.4f}", "D in [1.2070, 1.2072], gap < 0.02", passed


def check_dictatorship():
    rng = np.random.default_rng(SEED)
    line = run_dictatorship_experiment(10_000, rng)
    star = run_kstar_experiment(50, 1000, rng)
    passed = line <= DICTATORSHIP_BOUND + 0.02 and abs(star.dictator - star.expected_dictator) < 0.05
    return f"line={line:.4f} kstar={star.dictator:.4f}", "line <= 2.02, kstar within 0.05 of 1.96", passed


def check_second_moment():
    result = run_second_moment_experiment(0.01, 10_000, np.random.default_rng(SEED))
    passed = result.dictator >= 50 and result.deliberation <= 5
    return f"dictator={result.dictator:.2f} deliberation={result.deliberation:.3f}", ">= 50, <= 5", passed


def check_unanimity():
    deliberation, dictator = run_unanimity_experiment(0.1, 5000, np.random.default_rng(SEED))
    return (f"deliberation={deliberation:.4f} dictator={dictator:.4f}", "<= 1.15, >= 1.6",
            deliberation <= 1.15 and dictator >= 1.6)


def check_properties():
    rng = np.random.default_rng(SEED)
    violations = 0
    for space in (DecisionSpace.line(50), DecisionSpace.hypercube(6), DecisionSpace.star(20),
                  DecisionSpace.graph(nx.petersen_graph().edges())):
        x, y, z = rng.integers(space.size, size=(3, 10_000))
        d = space.distance_matrix
        violations += int((d[x, z] > d[x, y] + d[y, z] + 1e-12).sum())

    for space in (DecisionSpace.line(50), DecisionSpace.hypercube(5)):
        agents = [Agent(i, space.alternatives[a]) for i, a in enumerate(rng.integers(space.size, size=50))]
        trace = run_deliberation(space, agents, BargainScheme(), 200, rng)
        violations += sum(s.threat != p.outcome for p, s in zip(trace.steps, trace.steps[1:]))
        violations += sum(not pareto_efficient(space, agents, o) for o in trace.outcomes)

    matrix = 1.0 + rng.random((100, 11))
    violations += aggregate_runs(matrix) != aggregate_runs(matrix[::-1])
    return violations, "== 0", violations == 0


def run_check(name, func, *args):
    print(f"→ {name}")
    start = time.time()
    try:
        value, bound, passed = func(*args)
        error = ""
    except Exception as e:
        print(f"  ❌ Error: {e}")
        value, bound, passed, error = "", "", False, str(e)
    runtime = time.time() - start
    print(f"  {'✅' if passed else '❌'} {value} ({runtime:.1f}s)")
    return {
        "check": name,
        "value": value,
        "bound": bound,
        "passed": bool(passed),
        "runtime_sec": round(runtime, 2),
        "error": error,
    }


def main():
    print("Running full-size simulations (3 schemes x 1000 runs)...")
    base = SimulationConfig(master_seed=SEED)
    reports = {s: run_paper_simulation(dataclasses.replace(base, scheme=s)) for s in ("nash", "selfish", "unselfish")}

    checks = [
        ("nash_equals_median3", check_median_equivalence),
        ("nash_headline", check_nash_headline, reports),
        ("selfish_above_bound", check_selfish, reports),
        ("unselfish_close_to_nash", check_unselfish, reports),
        ("nash_convergence", check_convergence, reports),
        ("stationary_theory", check_theory),
        ("dictatorship_bound", check_dictatorship),
        ("second_moment", check_second_moment),
        ("epsilon_unanimity", check_unanimity),
        ("property_suites", check_properties),
    ]
    rows = [run_check(*c) for c in checks]

    df = pd.DataFrame(rows)
    RESULTS_PATH.parent.mkdir(exist_ok=True)
    df.to_csv(RESULTS_PATH, index=False)
    print(f"\n✅ Saved to {RESULTS_PATH}")
    print(f"{int(df['passed'].sum())}/{len(df)} checks passed")


if __name__ == "__main__":
    main()
