"""Numerical check suites behind the ``verify`` command.

Each suite returns :class:`CheckRow` records ``(check_name, params, lhs, rhs,
passed)``; a check passes when ``lhs <= rhs`` unless stated otherwise in its
name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from osfib.bounds import (
    LpInstance,
    bound_dep,
    bound_doubling,
    bound_indep,
    c_constant,
    lp_bruteforce,
    lp_closed_form,
    monitor_batch,
)
from osfib.environments import make_uniform_gap_instance
from osfib.lowerbound import check_reverse_chernoff, check_stirling_corollary, chernoff_grid

CHECK_HEADER = ("check_name", "params", "lhs", "rhs", "pass")


@dataclass(frozen=True)
class CheckRow:
    check_name: str
    params: str
    lhs: float
    rhs: float
    passed: bool


def random_lp_instances(count: int = 200, seed: int = 0, max_arms: int = 6) -> List[LpInstance]:
    """Random programs within the enumeration guard.

    Gaps are uniform on (0.05, 1), sorted descending; ``C`` is uniform on
    [0.5, 10] and redrawn until every cap is at most 10^4.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(1, max_arms + 1))
        gaps = sorted(rng.uniform(0.05, 1.0, size=n - 1).tolist(), reverse=True) + [0.0]
        c = float(rng.uniform(0.5, 10.0))
        smallest = min(gaps[:-1], default=1.0)
        if math.floor(c / smallest**2) + 1 <= 10_000:
            out.append(LpInstance(tuple(gaps), c))
    return out


def suite_lp(count: int = 200, seed: int = 0) -> List[CheckRow]:
    rows = []
    for gaps, expected in (((0.5, 0.0), 2.5), ((0.5, 0.25, 0.0), 5.5)):
        inst = LpInstance(gaps, 1.0)
        brute, closed = lp_bruteforce(inst).value, lp_closed_form(inst)
        params = f"gaps={list(gaps)};C=1"
        rows.append(CheckRow("lp_worked_bruteforce_eq", params, brute, expected, math.isclose(brute, expected)))
        rows.append(CheckRow("lp_worked_closed_form_eq", params, closed, expected, math.isclose(closed, expected)))
    for i, inst in enumerate(random_lp_instances(count, seed)):
        brute, closed = lp_bruteforce(inst).value, lp_closed_form(inst)
        params = f"case={i};gaps={[round(g, 6) for g in inst.gaps]};C={inst.c:.6g}"
        rows.append(CheckRow("lp_oracle_dominance", params, brute, closed, brute <= closed * (1 + 1e-12) + 1e-12))
    return rows


def suite_bounds() -> List[CheckRow]:
    rows = []
    for horizon, k in ((1, 1), (4, 2), (100_000, 20), (200_000, 20)):
        c = c_constant(k, horizon)
        for j in (2, 3, 5):
            gaps = [0.1 * (j - i) for i in range(j)]
            gaps[-1] = 0.0
            lhs = bound_dep(gaps, horizon, k)
            rhs = lp_closed_form(LpInstance(tuple(gaps), c)) + 2 if c > 0 else lhs
            rows.append(
                CheckRow("eq1_matches_closed_form_plus_2", f"T={horizon};K={k};gaps={gaps}", lhs, rhs, math.isclose(lhs, rhs))
            )
    for j in range(21):
        lo, hi = bound_doubling(2**j, 20), bound_doubling(2 ** (j + 1), 20)
        rows.append(CheckRow("doubling_bound_monotone", f"T=2^{j};K=20", lo, hi, lo <= hi))
    for horizon in (1, 10, 1000, 100_000):
        lhs, rhs = bound_indep(horizon, 20), bound_doubling(horizon, 20)
        rows.append(CheckRow("indep_le_doubling", f"T={horizon};K=20", lhs, rhs, lhs <= rhs))
    return rows


def suite_monitor(k: int = 10, horizon: int = 1000, runs: int = 1000, seed: int = 0) -> List[CheckRow]:
    inst = make_uniform_gap_instance(k, 8, 0.6, 0.1)
    log = monitor_batch(inst, horizon, runs, seed)
    params = f"K={k};T={horizon};runs={runs};best=8;delta=0.1;seed={seed}"
    not_m = float(np.mean(~log.all_rounds_nice))
    not_s = float(np.mean(~log.nice_sampling[:, -1]))
    se = math.sqrt(not_s * (1 - not_s) / runs)
    explained = log.transitions_explained()
    return [
        CheckRow("not_M_T_frequency", params, not_m, 2 / horizon, not_m <= 2 / horizon),
        CheckRow("not_Ns_T_frequency", params, not_s, 2 / horizon**2 + 3 * se, not_s <= 2 / horizon**2 + 3 * se),
        CheckRow("procedure_break_implies_bad_sampling", params, float(np.sum(~explained)), 0.0, bool(explained.all())),
    ]


def suite_chernoff() -> List[CheckRow]:
    rows = []
    for res in chernoff_grid():
        if res.precondition_met:
            rows.append(
                CheckRow("reverse_chernoff_ge", f"n={res.n};delta={res.delta}", res.bound, float(res.exact_tail), res.holds)
            )
    spot = check_reverse_chernoff(30, 0.5)
    rows.append(
        CheckRow(
            "reverse_chernoff_spot_exact",
            "n=30;delta=0.5",
            float(spot.exact_tail),
            2804012 / 2**30,
            spot.exact_tail.numerator * 2**30 == 2804012 * spot.exact_tail.denominator,
        )
    )
    return rows


def suite_stirling(max_n: int = 200) -> List[CheckRow]:
    rows = []
    for n in range(2, max_n + 1):
        for l in range(1, n):
            lhs, rhs, holds = check_stirling_corollary(n, l)
            rows.append(CheckRow("stirling_corollary_ge", f"n={n};l={l}", rhs, float(lhs), holds))
    return rows


SUITES: Dict[str, Callable[[], List[CheckRow]]] = {
    "bounds": suite_bounds,
    "lp": suite_lp,
    "monitor": suite_monitor,
    "chernoff": suite_chernoff,
    "stirling": suite_stirling,
}
