"""Acceptance criteria, one test per criterion.

Every test prints a single ``CRITERION n: PASS|FAIL ...`` line (also
repeated in the terminal summary) and then asserts the same condition.
Simulations use the reference configuration: K = 20, delta = 0.1, best arm 17,
Bernoulli rewards, T = 100000, 100 runs, seed 42.
"""

import math
import time

import pytest

import test_properties
from conftest import ACCEPTANCE_LINES
from osfib.bounds import bound_doubling, bound_indep, log_term
from osfib.lowerbound import bwp_accuracy, bwp_sweep, check_reverse_chernoff, make_family
from osfib.runner import ExperimentConfig, run_experiment
from osfib.verify import suite_chernoff, suite_lp, suite_monitor, suite_stirling

K, HORIZON, RUNS, SEED, DELTA, BEST = 20, 100_000, 100, 42, 0.1, 17

_cache = {}


def experiment(algo, instance="uniform-gap", best=BEST):
    """Final-round summary row and wall time, computed once per session."""
    key = (algo, instance, best)
    if key not in _cache:
        cfg = ExperimentConfig(
            algo=algo, instance=instance, k=K, horizon=HORIZON, runs=RUNS, delta=DELTA, lam=0.1, best=best, seed=SEED
        )
        start = time.perf_counter()
        _, summary = run_experiment(cfg)
        _cache[key] = (summary[-1], time.perf_counter() - start)
    return _cache[key]


def report(capsys, number, ok, detail):
    line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_criterion_01_gap_free_bound(capsys):
    row, seconds = experiment("elim")
    bound = bound_indep(HORIZON, K)
    ok = row.mean <= bound and seconds <= 120
    report(capsys, 1, ok, f"elim mean regret {row.mean:.2f} <= {bound:.2f}; simulation {seconds:.1f}s <= 120s")


def test_criterion_02_gap_dependent_bound(capsys):
    row, _ = experiment("elim")
    bound = 8 * log_term(K, HORIZON) / DELTA + 2 + DELTA
    ok = row.ci_high <= bound
    report(capsys, 2, ok, f"elim mean + 99% half-width {row.ci_high:.2f} <= {bound:.2f}")


def test_criterion_03_doubling_bound(capsys):
    row, _ = experiment("elim-doubling")
    bound = bound_doubling(HORIZON, K)
    ok = row.mean <= bound
    report(capsys, 3, ok, f"elim-doubling mean regret {row.mean:.2f} <= {bound:.2f}")


def test_criterion_04_ordering(capsys):
    ucbn, _ = experiment("ucbn")
    elim, _ = experiment("elim")
    exp3, _ = experiment("exp3rtb")
    ok = ucbn.mean < elim.mean < exp3.mean and elim.ci_high < exp3.ci_low
    report(
        capsys,
        4,
        ok,
        f"ucbn {ucbn.mean:.2f} < elim {elim.mean:.2f} [{elim.ci_low:.2f}, {elim.ci_high:.2f}]"
        f" < exp3rtb baseline {exp3.mean:.2f} [{exp3.ci_low:.2f}, {exp3.ci_high:.2f}]",
    )


def test_criterion_05_best_position(capsys):
    early, _ = experiment("elim", "random-mean", 3)
    late, _ = experiment("elim", "random-mean", 17)
    ok = early.mean <= late.mean
    report(capsys, 5, ok, f"random-mean elim regret best=3 {early.mean:.2f} <= best=17 {late.mean:.2f}")


def test_criterion_06_allocation_oracle(capsys):
    start = time.perf_counter()
    rows = suite_lp(count=200, seed=0)
    seconds = time.perf_counter() - start
    worked = [r for r in rows if r.check_name.startswith("lp_worked")]
    random_rows = [r for r in rows if r.check_name == "lp_oracle_dominance"]
    ok = len(random_rows) == 200 and len(worked) == 4 and all(r.passed for r in rows) and seconds <= 60
    values = ", ".join(f"{r.lhs:g}" for r in worked)
    report(
        capsys,
        6,
        ok,
        f"{sum(r.passed for r in random_rows)}/200 dominance checks; worked values {values}; {seconds:.1f}s <= 60s",
    )


def test_criterion_07_monitors(capsys):
    rows = {r.check_name: r for r in suite_monitor(k=10, horizon=1000, runs=1000, seed=SEED)}
    not_m = rows["not_M_T_frequency"]
    not_s = rows["not_Ns_T_frequency"]
    implied = rows["procedure_break_implies_bad_sampling"]
    ok = not_m.passed and not_s.passed and implied.passed
    report(
        capsys,
        7,
        ok,
        f"freq(not M_T) {not_m.lhs:g} <= {not_m.rhs:g}; freq(not N_T^s) {not_s.lhs:g} <= {not_s.rhs:g};"
        f" unexplained procedure breaks {implied.lhs:g}",
    )


def test_criterion_08_reverse_chernoff(capsys):
    start = time.perf_counter()
    rows = suite_chernoff()
    seconds = time.perf_counter() - start
    spot = check_reverse_chernoff(30, 0.5)
    grid = [r for r in rows if r.check_name == "reverse_chernoff_ge"]
    spot_ok = spot.exact_tail.numerator * 2**30 == 2804012 * spot.exact_tail.denominator
    spot_ok = spot_ok and spot.bound == pytest.approx(math.exp(-33.75)) and spot.holds
    ok = bool(grid) and all(r.passed for r in rows) and spot_ok and seconds <= 10
    report(
        capsys,
        8,
        ok,
        f"{len(grid)} grid points hold; n=30 delta=0.5 tail {spot.exact_tail} >= {spot.bound:.3g}; {seconds:.2f}s <= 10s",
    )


def test_criterion_09_stirling(capsys):
    rows = suite_stirling(max_n=200)
    expected = sum(n - 1 for n in range(2, 201))
    ok = len(rows) == expected and all(r.passed for r in rows)
    report(capsys, 9, ok, f"{sum(r.passed for r in rows)}/{expected} pairs (n <= 200) hold")


PROPERTIES = [
    test_properties.test_elim_active_sets_nested_and_play_nondecreasing,
    test_properties.test_cumulative_regret_nondecreasing,
    test_properties.test_exp3_probabilities_normalized,
    test_properties.test_importance_estimates_unbiased,
    test_properties.test_censored_revenue_matches_full,
    test_properties.test_elim_keeps_best_arm_when_sampling_is_exact,
]


def test_criterion_10_structural_properties(capsys):
    before = sum(test_properties.CASES.values())
    failures = []
    for prop in PROPERTIES:
        try:
            prop()
        except Exception as exc:  # report every property before failing
            failures.append(f"{prop.__name__}: {type(exc).__name__}")
    cases = sum(test_properties.CASES.values()) - before
    ok = not failures and cases >= 10_000
    detail = f"{cases} randomized cases across {len(PROPERTIES)} properties"
    report(capsys, 10, ok, detail + (f"; failed: {failures}" if failures else ""))


def test_criterion_11_prediction_anchors(capsys):
    ftl = bwp_accuracy(make_family(20, 0.2), 10_000, 200, seed=SEED)
    k = 5
    const = bwp_accuracy(make_family(k, 0.2), 1000, 400, predictor=lambda totals: 1, seed=SEED)
    const_ok = abs(const.aggregate - 1 / k) <= 3 * const.aggregate_stderr + 1e-12
    sweep = bwp_sweep(make_family(20, 0.2), [10, 100, 1000, 10_000], 100, seed=SEED)
    curve = ", ".join(f"T={r.T}: {r.aggregate:.3f}" for r in sweep)
    with capsys.disabled():
        print(f"\nreported (not asserted) FTL accuracy vs T at K=20, eps=0.2: {curve}")
    ok = ftl.aggregate >= 0.99 and const_ok
    report(
        capsys,
        11,
        ok,
        f"FTL accuracy T=1e4 eps=0.2 {ftl.aggregate:.4f} >= 0.99; constant predictor {const.aggregate:.4f}"
        f" vs 1/K = {1 / k:.4f}; lower-bound constants not asserted",
    )
