"""Verification harness for the coupling and duality identities.

Two kinds of checks live here:

* deterministic, zero-tolerance checks — replaying a rainbow path and
  confirming that each projected process (voter / coalescence / ranking)
  moves exactly by its own local rule at every accepted swap, and the
  per-state identity between the indicator-product observable and the
  leader record of the inverse state;
* statistical equality-in-law checks — two independent Monte Carlo
  samplers for the two sides of each duality, compared by a two-sample
  chi-square test (pooled so every expected bin count is >= 5).

``run_suite`` bundles the statistical checks with a Bonferroni-corrected
significance level and a rerun-once-with-4x-samples policy for flaky
failures, and emits a JSON report.
"""

import json
import time
from dataclasses import dataclass, field, asdict
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from . import lattice, samplers
from .lattice import BoundaryMode, ColoredComposition, ColorCutoffs, Configuration
from .rng import ClockStream

PROJECTION_KINDS = ("voter", "coalescence", "ranking")


@dataclass(frozen=True)
class EqualityTestReport:
    """Outcome of one equality check, deterministic or statistical."""

    name: str
    statistic: float          # chi-square value, or count of violations
    statistic_kind: str       # "chi-square" | "violations"
    p_value: float
    significance: float
    sample_sizes: Tuple[int, ...]
    effect_size: float        # total-variation distance between empirical laws
    passed: bool
    detail: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.statistic_kind == "violations":
            expected = self.statistic == 0.0
        else:
            expected = self.p_value >= self.significance
        if self.passed != expected:
            raise ValueError("verdict inconsistent with statistic/threshold")


# ---------------------------------------------------------------------------
# deterministic path checks


def _apply_local_rule(kind: str, proj: np.ndarray, i: int) -> Optional[np.ndarray]:
    """Projected state after one swap at window bond (i, i+1); None = illegal."""
    out = proj.copy()
    if kind == "voter":
        out[i] = proj[i + 1]
        return out
    if kind == "coalescence":
        if proj[i] == 1 and proj[i + 1] == 0:
            return None
        out[i] = proj[i] | proj[i + 1]
        out[i + 1] = 0
        return out
    if kind == "ranking":
        if proj[i] < proj[i + 1]:
            return None
        out[i], out[i + 1] = proj[i + 1], proj[i] + 1
        return out
    raise ValueError(f"unknown projection kind: {kind}")


def _project(kind: str, window_lo: int, types: np.ndarray) -> np.ndarray:
    cfg = Configuration.from_types(window_lo, types,
                                   boundary=BoundaryMode.RAINBOW_STEP)
    if kind == "voter":
        return lattice.project_voter(cfg)
    if kind == "coalescence":
        return lattice.project_coalescence(cfg)
    return lattice.project_ranking(cfg)


def check_projection_path(window: Tuple[int, int], log: samplers.EventLog,
                          kind: str) -> EqualityTestReport:
    """Replay a rainbow path; verify the projection obeys its local rule.

    After every accepted swap the projected configuration must equal the
    previous projection advanced by the target process's own update at
    that bond.  The first mismatching event index is reported.
    """
    if kind not in PROJECTION_KINDS:
        raise ValueError(f"unknown projection kind: {kind}")
    lo, hi = window
    types = np.arange(-lo, -hi - 1, -1, dtype=np.int64)
    proj = _project(kind, lo, types)
    violation = None
    for idx, (tm, b) in enumerate(zip(log.times, log.bonds)):
        i = int(b) - lo
        if types[i] <= types[i + 1]:
            violation = {"event": idx, "bond": int(b), "time": float(tm),
                         "reason": "swap at non-decreasing pair"}
            break
        expected = _apply_local_rule(kind, proj, i)
        types[i], types[i + 1] = types[i + 1], types[i]
        actual = _project(kind, lo, types)
        if expected is None or not np.array_equal(expected, actual):
            violation = {"event": idx, "bond": int(b), "time": float(tm),
                         "reason": "projection moved off the local rule"}
            break
        proj = actual
    n_checked = len(log) if violation is None else violation["event"] + 1
    passed = violation is None
    return EqualityTestReport(
        name=f"projection-path-{kind}",
        statistic=0.0 if passed else 1.0,
        statistic_kind="violations",
        p_value=1.0 if passed else 0.0,
        significance=0.0,
        sample_sizes=(n_checked,),
        effect_size=0.0,
        passed=passed,
        detail={"first_violation": violation},
    )


def check_observable_identity(
        samples: Sequence[Tuple[Configuration, ColoredComposition]],
) -> EqualityTestReport:
    """Per-state identity: indicator observable == leader-record match.

    For each (state, composition) pair, the product observable of the
    state must equal the indicator that the leader record of the inverse
    state, at cutoffs {part_i + 1}, lists the composition's colors sorted
    by part.
    """
    violation = None
    for idx, (config, kappa) in enumerate(samples):
        lhs = lattice.observable_O(config, kappa)
        order = sorted(range(len(kappa)), key=lambda j: kappa.parts[j])
        cutoffs = ColorCutoffs(tuple(kappa.parts[j] + 1 for j in order))
        target = tuple(kappa.colors[j] for j in order)
        try:
            record = lattice.compute_M_C(config.inverse(), cutoffs)
            rhs = int(tuple(record.positions) == target)
        except lattice.EmptyLevel:
            rhs = 0
        if lhs != rhs:
            violation = {"sample": idx, "lhs": lhs, "rhs": rhs,
                         "kappa": {"parts": kappa.parts, "colors": kappa.colors}}
            break
    passed = violation is None
    n = len(samples) if passed else violation["sample"] + 1
    return EqualityTestReport(
        name="observable-identity",
        statistic=0.0 if passed else 1.0,
        statistic_kind="violations",
        p_value=1.0 if passed else 0.0,
        significance=0.0,
        sample_sizes=(n,),
        effect_size=0.0,
        passed=passed,
        detail={"first_violation": violation},
    )


# ---------------------------------------------------------------------------
# two-sample chi-square machinery


def _two_sample_chisquare(counts_a: Dict, counts_b: Dict,
                          min_expected: float = 5.0) -> Tuple[float, float, int, float]:
    """Two-sample chi-square with bins pooled to expected count >= 5.

    Returns (statistic, p_value, dof, total-variation distance).
    """
    n_a = sum(counts_a.values())
    n_b = sum(counts_b.values())
    keys = sorted(set(counts_a) | set(counts_b))
    a = np.array([counts_a.get(k, 0) for k in keys], dtype=float)
    b = np.array([counts_b.get(k, 0) for k in keys], dtype=float)
    tv = 0.5 * np.abs(a / n_a - b / n_b).sum()
    # pool smallest-total bins until every pooled expected count is >= 5
    order = np.argsort(a + b)
    a, b = a[order], b[order]
    pooled_a: List[float] = []
    pooled_b: List[float] = []
    acc_a = acc_b = 0.0
    for ai, bi in zip(a, b):
        acc_a += ai
        acc_b += bi
        tot = acc_a + acc_b
        if min(tot * n_a, tot * n_b) / (n_a + n_b) >= min_expected:
            pooled_a.append(acc_a)
            pooled_b.append(acc_b)
            acc_a = acc_b = 0.0
    if acc_a + acc_b > 0:
        if pooled_a:
            pooled_a[-1] += acc_a
            pooled_b[-1] += acc_b
        else:
            pooled_a, pooled_b = [acc_a], [acc_b]
    a = np.array(pooled_a)
    b = np.array(pooled_b)
    if len(a) < 2:
        return 0.0, 1.0, 0, float(tv)
    tot = a + b
    stat = float((((a * n_b - b * n_a) ** 2) / (tot * n_a * n_b)).sum())
    dof = len(a) - 1
    return stat, float(stats.chi2.sf(stat, dof)), dof, float(tv)


def _report(name: str, counts_a: Dict, counts_b: Dict, n_a: int, n_b: int,
            significance: float, detail: Optional[Dict] = None) -> EqualityTestReport:
    stat, p, dof, tv = _two_sample_chisquare(counts_a, counts_b)
    info = {"dof": dof}
    if detail:
        info.update(detail)
    return EqualityTestReport(
        name=name, statistic=stat, statistic_kind="chi-square", p_value=p,
        significance=significance, sample_sizes=(n_a, n_b), effect_size=tv,
        passed=p >= significance, detail=info)


def _tally(values) -> Dict:
    out: Dict = {}
    for v in values:
        out[v] = out.get(v, 0) + 1
    return out


# ---------------------------------------------------------------------------
# statistical duality checks


def test_dual_distribution(cutoffs: ColorCutoffs, t: float, reps: int,
                           seed: int = 0, significance: float = 1e-3,
                           ) -> EqualityTestReport:
    """Law of the leader record M_C(t) vs the n-particle dual sampler.

    Side A samples the full rainbow window and reads off the leader
    record; side B runs n colored particles from (-c_1, ..., -c_n).  The
    two laws are compared by a pooled two-sample chi-square test.
    """
    w = samplers.required_halfwidth(t, depth=max(abs(c) for c in cutoffs.cutoffs) + 1)
    window = (-w, w)
    side_a = []
    for r in range(reps):
        cfg, _ = samplers.simulate_tasep(window, t, ClockStream(seed, 2 * r))
        side_a.append(tuple(lattice.compute_M_C(cfg, cutoffs).positions))
    start = samplers.NParticleState(tuple(-c for c in cutoffs.cutoffs))
    side_b = []
    for r in range(reps):
        final = samplers.simulate_nparticle(start, t, ClockStream(seed, 2 * r + 1))
        side_b.append(final.positions)
    return _report(f"dual-distribution-C={cutoffs.cutoffs}-t={t}",
                   _tally(side_a), _tally(side_b), reps, reps, significance)


def test_color_position_symmetry(t: float, reps: int, seed: int = 0,
                                 sites: Sequence[int] = (-2, -1, 0, 1, 2),
                                 significance: float = 1e-3,
                                 ) -> EqualityTestReport:
    """Law of (-type at x)_x vs (position of type -x)_x on a finite site set."""
    depth = max(abs(s) for s in sites) + 1
    w = samplers.required_halfwidth(t, depth=depth)
    window = (-w, w)
    side_a = []
    side_b = []
    for r in range(reps):
        cfg, _ = samplers.simulate_tasep(window, t, ClockStream(seed, 2 * r))
        side_a.append(tuple(-cfg.type_at(x) for x in sites))
        cfg, _ = samplers.simulate_tasep(window, t, ClockStream(seed, 2 * r + 1))
        inv = cfg.inverse()
        side_b.append(tuple(inv.type_at(-x) for x in sites))
    return _report(f"color-position-symmetry-t={t}", _tally(side_a),
                   _tally(side_b), reps, reps, significance)


def test_voter_leader_duality(y: int, r2: int, r1: int, t: float, reps: int,
                              seed: int = 0, significance: float = 1e-3,
                              ) -> EqualityTestReport:
    """Voter cluster event vs the leader event it is dual to.

    Voter side (opinions nu_0(x) = -x): nu(r2) = nu(r1) = y and
    nu(r2 - 1) != y.  Rainbow side: the rightmost particle among types
    >= -r1 has type -r2 and position -y.
    """
    if r2 > r1:
        raise ValueError("need r2 <= r1")
    depth = max(abs(y), abs(r1), abs(r2)) + 2
    w = samplers.required_halfwidth(t, depth=depth)
    window = (-w, w)
    hits_a = []
    hits_b = []
    for r in range(reps):
        nu = samplers.simulate_voter(window, t, ClockStream(seed, 2 * r))
        lo = window[0]
        hits_a.append(int(nu[r2 - lo] == y and nu[r1 - lo] == y
                          and nu[r2 - 1 - lo] != y))
        cfg, _ = samplers.simulate_tasep(window, t, ClockStream(seed, 2 * r + 1))
        pos, typ = lattice.leader(cfg, -r1)
        hits_b.append(int(pos == -y and typ == -r2))
    return _report(f"voter-leader-duality-(y,r2,r1)=({y},{r2},{r1})-t={t}",
                   _tally(hits_a), _tally(hits_b), reps, reps, significance,
                   detail={"p_voter": float(np.mean(hits_a)),
                           "p_leader": float(np.mean(hits_b))})


def test_ranking_leader_duality(k: int, s: int, t: float, reps: int,
                                seed: int = 0, significance: float = 1e-3,
                                ) -> EqualityTestReport:
    """Rank-pattern event vs the two-leader event it is dual to.

    Ranking side: among sites in [-k-s, 0], rank 1 appears exactly at
    -k-s, rank 2 exactly at -s, and nowhere else in that range.  Leader
    side: the rightmost particle among types >= 0 has type k+s and the
    second rightmost has type s.
    """
    if k <= 0 or s < 0:
        raise ValueError("need k > 0 and s >= 0")
    depth = k + s + 2
    w = samplers.required_halfwidth(t, depth=depth)
    window = (-w, w)
    lo = window[0]
    hits_a = []
    hits_b = []
    for r in range(reps):
        cfg, _ = samplers.simulate_tasep(window, t, ClockStream(seed, 2 * r))
        ranks = lattice.project_ranking(cfg)
        ok = True
        for x in range(-k - s, 1):
            rank = ranks[x - lo]
            want1 = (x == -k - s)
            want2 = (x == -s)
            if (rank == 1) != want1 or (rank == 2) != want2:
                ok = False
                break
        hits_a.append(int(ok))
        cfg, _ = samplers.simulate_tasep(window, t, ClockStream(seed, 2 * r + 1))
        _, typ1 = lattice.leader(cfg, 0, 1)
        _, typ2 = lattice.leader(cfg, 0, 2)
        hits_b.append(int(typ1 == k + s and typ2 == s))
    return _report(f"ranking-leader-duality-(k,s)=({k},{s})-t={t}",
                   _tally(hits_a), _tally(hits_b), reps, reps, significance,
                   detail={"p_ranking": float(np.mean(hits_a)),
                           "p_leader": float(np.mean(hits_b))})


# ---------------------------------------------------------------------------
# suite runner


def run_suite(seed: int = 0, t: float = 1.0, reps: int = 20000,
              significance: float = 1e-3,
              out_path: Optional[str] = None) -> List[EqualityTestReport]:
    """Run the statistical duality checks under one Bonferroni budget.

    The per-test significance is the overall level divided by the number
    of tests; any failing test is rerun once with 4x the samples and a
    fresh seed before its failure stands.
    """
    cases: List[Tuple[str, Callable[[int, int], EqualityTestReport]]] = [
        ("dual", lambda sd, n: test_dual_distribution(
            ColorCutoffs((0, 1)), t, n, seed=sd, significance=alpha)),
        ("cps", lambda sd, n: test_color_position_symmetry(
            t, n, seed=sd, significance=alpha)),
        ("voter", lambda sd, n: test_voter_leader_duality(
            0, 0, 0, t, n, seed=sd, significance=alpha)),
        ("ranking", lambda sd, n: test_ranking_leader_duality(
            1, 0, t, n, seed=sd, significance=alpha)),
    ]
    alpha = significance / len(cases)
    reports = []
    for i, (label, fn) in enumerate(cases):
        rep = fn(seed + i, reps)
        if not rep.passed:
            rerun = fn(seed + i + 7919, 4 * reps)
            detail = dict(rerun.detail)
            detail["rerun_after_failure"] = {"first_p_value": rep.p_value}
            rep = EqualityTestReport(
                name=rerun.name, statistic=rerun.statistic,
                statistic_kind=rerun.statistic_kind, p_value=rerun.p_value,
                significance=rerun.significance,
                sample_sizes=rerun.sample_sizes, effect_size=rerun.effect_size,
                passed=rerun.passed, detail=detail)
        reports.append(rep)
    if out_path is not None:
        payload = {"significance": significance, "tests": [asdict(r) for r in reports],
                   "passed": all(r.passed for r in reports)}
        with open(out_path, "w") as fh:
            json.dump(payload, fh, indent=2, default=str)
    return reports
