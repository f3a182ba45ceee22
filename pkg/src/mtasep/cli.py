"""Command-line interface: simulation, quadrature, density tables, suites.

Subcommands
-----------
simulate     Monte Carlo estimate of a scalar observable; JSONL output.
integral     one contour-integral probability; JSON output.
density      tabulate a limit density on a grid; CSV output.
verify       run the duality suite; JSON report, exit 1 on failure.
convergence  finite-t values against their limit-law predictions; CSV.
report       aggregate result files into one summary JSON.

Reproducibility: replica r always draws from the stream (seed, r), and
work is partitioned by replica index, so outputs are byte-identical for a
given (config, seed, version) at any parallelism degree.  Wall-clock
fields are zeroed unless --timing is given, for the same reason.  The
default worker count comes from MTASEP_PARALLELISM.
"""

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__, contours, harness, lattice, limits, samplers
from .errors import MtasepError, NotConverged
from .lattice import ColorCutoffs
from .rng import ClockStream

SCHEMA_VERSION = 1

_CONFIG_FIELDS = ("command", "process", "formula", "law", "suite", "t",
                  "k1", "k2", "k3", "x", "a", "grid", "tgrid", "cutoffs",
                  "reps", "seed", "delta", "tol", "out", "events_out",
                  "parallelism", "timing", "inputs")


@dataclasses.dataclass
class RunConfig:
    """Everything that determines a run's output, in one JSON-able record."""

    command: str
    process: Optional[str] = None
    formula: Optional[str] = None
    law: Optional[str] = None
    suite: Optional[str] = None
    t: Optional[float] = None
    k1: Optional[int] = None
    k2: Optional[int] = None
    k3: Optional[int] = None
    x: Optional[float] = None
    a: Optional[float] = None
    grid: Optional[str] = None
    tgrid: Optional[str] = None
    cutoffs: Optional[str] = None
    reps: int = 10000
    seed: int = 0
    delta: float = 1e-6
    tol: float = 1e-8
    out: Optional[str] = None
    events_out: Optional[str] = None
    parallelism: int = 0
    timing: bool = False
    inputs: Optional[List[str]] = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> Dict:
        # execution details (worker count, output paths) do not determine
        # the numbers, so the echoed config omits them to keep outputs
        # byte-identical across parallelism degrees
        out = dataclasses.asdict(self)
        for k in ("parallelism", "out", "events_out"):
            out.pop(k, None)
        return out

    @classmethod
    def from_sources(cls, args: argparse.Namespace) -> "RunConfig":
        """Build from an optional JSON config file with CLI flags on top."""
        values: Dict = {}
        path = getattr(args, "config", None)
        if path:
            with open(path) as fh:
                loaded = json.load(fh)
            if loaded.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
                raise ValueError("config file has an unsupported schema version")
            values.update({k: v for k, v in loaded.items() if k in _CONFIG_FIELDS})
        for k in _CONFIG_FIELDS:
            v = getattr(args, k, None)
            if v is not None:
                values[k] = v
        cfg = cls(**values)
        if cfg.parallelism <= 0:
            cfg.parallelism = int(os.environ.get("MTASEP_PARALLELISM", "1"))
        return cfg


def _result_record(config: RunConfig, payload: Dict, elapsed: float) -> Dict:
    return {
        "config": config.to_dict(),
        "result": payload,
        "wall_time": elapsed if config.timing else 0.0,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S") if config.timing else None,
    }


def _emit(config: RunConfig, text: str) -> None:
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# simulate


def _replica_chunk(payload) -> List[float]:
    """Evaluate the observable for replicas [lo, hi); top-level for pickling."""
    kind, params, seed, lo, hi = payload
    out = []
    for r in range(lo, hi):
        clocks = ClockStream(seed, r)
        if kind == "leader-type-ge":
            w = samplers.required_halfwidth(params["t"], depth=abs(params["k1"]) + 2)
            cfg, _ = samplers.simulate_tasep((-w, w), params["t"], clocks)
            _, typ = lattice.leader(cfg, params["k1"])
            out.append(float(typ >= params["k2"]))
        elif kind == "leader-changes":
            counts = samplers.leader_changes_fast([params["t"]], clocks)
            out.append(float(counts[0]))
        elif kind == "voter-e0":
            w = samplers.required_halfwidth(params["t"], depth=2)
            nu = samplers.simulate_voter((-w, w), params["t"], clocks)
            out.append(float(samplers.voter_E0(nu, -w)))
        elif kind == "coalescence-e0":
            w = samplers.required_halfwidth(params["t"], depth=2)
            occ = samplers.simulate_coalescence((-w, w), params["t"], clocks)
            out.append(float(samplers.coalescence_E0(occ, -w)))
        else:
            raise ValueError(f"unknown observable: {kind}")
    return out


def _run_replicas(kind: str, params: Dict, seed: int, reps: int,
                  parallelism: int) -> np.ndarray:
    chunk = max(1, math.ceil(reps / max(parallelism, 1) / 4))
    jobs = [(kind, params, seed, lo, min(lo + chunk, reps))
            for lo in range(0, reps, chunk)]
    if parallelism <= 1:
        parts = [_replica_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            parts = list(pool.map(_replica_chunk, jobs))
    return np.concatenate([np.asarray(p) for p in parts])


def _cmd_simulate(config: RunConfig) -> int:
    t0 = time.time()
    if config.t is None:
        raise ValueError("simulate requires --t")
    kind = config.process
    params = {"t": config.t, "k1": config.k1 or 0, "k2": config.k2 or 0}
    values = _run_replicas(kind, params, config.seed, config.reps,
                           config.parallelism)
    est = samplers.mc_estimate(values, config.seed,
                               time.time() - t0 if config.timing else 0.0)
    payload = {"observable": kind, "mean": est.mean, "stderr": est.stderr,
               "reps": est.reps}
    record = _result_record(config, payload, time.time() - t0)
    _emit(config, json.dumps(record, sort_keys=True) + "\n")
    if config.events_out:
        w = samplers.required_halfwidth(config.t, depth=abs(config.k1 or 0) + 2)
        _, log = samplers.simulate_tasep((-w, w), config.t,
                                         ClockStream(config.seed, 0))
        _write_events_jsonl(config.events_out, (-w, w), log)
    return 0


def _write_events_jsonl(path: str, window, log: samplers.EventLog) -> None:
    """One {t, bond, types: [left, right]} object per line."""
    lo, hi = window
    types = list(range(-lo, -hi - 1, -1))
    with open(path, "w") as fh:
        fh.write(json.dumps({"horizon": log.horizon, "window": [lo, hi]}) + "\n")
        for tm, b in zip(log.times, log.bonds):
            i = int(b) - lo
            fh.write(json.dumps({"t": float(tm), "bond": int(b),
                                 "types": [types[i], types[i + 1]]}) + "\n")
            types[i], types[i + 1] = types[i + 1], types[i]


# ---------------------------------------------------------------------------
# integral


def _cmd_integral(config: RunConfig) -> int:
    t0 = time.time()
    t = config.t if config.t is not None else 1.0
    name = config.formula
    if name == "leader_type_ge":
        res = contours.prob_leader_type_ge(config.k1 or 0, config.k2 or 0, t)
    elif name == "leader_type_ge_at":
        res = contours.prob_leader_type_ge_at(config.k1 or 0, config.k2 or 0,
                                              int(config.x or 0), t)
    elif name == "two_leaders_gt":
        res = contours.prob_two_leaders_gt(config.k1 or 0, config.k2 or 0,
                                           config.k3 or 0, t)
    elif name == "two_leaders_between":
        res = contours.prob_two_leaders_between(config.k1 or 0, config.k2 or 0,
                                                config.k3 or 0, t)
    elif name == "adjacent_inverted":
        res = contours.prob_adjacent_inverted(t)
    elif name == "M_C":
        cut = tuple(int(c) for c in (config.cutoffs or "0").split(","))
        rec = tuple(int(c) for c in (config.grid or "0").split(","))
        res = contours.prob_M_C(ColorCutoffs(cut), lattice.LeaderRecord(rec), t)
    else:
        raise ValueError(f"unknown formula: {name}")
    payload = {"formula": name, "value": res.value, "est_error": res.est_error,
               "nodes_per_dim": res.nodes_per_dim, "converged": res.converged}
    record = _result_record(config, payload, time.time() - t0)
    _emit(config, json.dumps(record, sort_keys=True) + "\n")
    return 0 if res.converged else 1


# ---------------------------------------------------------------------------
# density


def _parse_grid(spec: str) -> np.ndarray:
    lo, hi, step = (float(p) for p in spec.split(":"))
    n = int(round((hi - lo) / step))
    return lo + step * np.arange(n + 1)


def _cmd_density(config: RunConfig) -> int:
    grid = _parse_grid(config.grid or "0:4:0.1")
    lines = []
    if config.law == "leader_type":
        lines.append("a,density")
        for a in grid:
            lines.append(f"{_fmt(a)},{_fmt(limits.density_leader(a))}")
    elif config.law == "conditional_type":
        x = config.x if config.x is not None else 0.0
        lines.append("a,density")
        for a in grid:
            lines.append(f"{_fmt(a)},{_fmt(limits.conditional_type_density(a, x))}")
    elif config.law == "two_leader":
        lines.append("a2,a3,density")
        for a2 in grid:
            for a3 in grid:
                lines.append(f"{_fmt(a2)},{_fmt(a3)},"
                             f"{_fmt(limits.joint_two_leader_density(a2, a3))}")
    else:
        raise ValueError(f"unknown law: {config.law}")
    _emit(config, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# verify / convergence / report


def _cmd_verify(config: RunConfig) -> int:
    if config.suite != "dualities":
        raise ValueError(f"unknown suite: {config.suite}")
    t = config.t if config.t is not None else 1.0
    reports = harness.run_suite(seed=config.seed, t=t, reps=config.reps,
                                out_path=None)
    payload = {"suite": "dualities",
               "tests": [dataclasses.asdict(r) for r in reports],
               "passed": all(r.passed for r in reports)}
    record = _result_record(config, payload, 0.0)
    _emit(config, json.dumps(record, sort_keys=True, default=str) + "\n")
    return 0 if payload["passed"] else 1


def _cmd_convergence(config: RunConfig) -> int:
    a = config.a if config.a is not None else 1.0
    ts = [float(v) for v in (config.tgrid or "25,100,400").split(",")]
    lines = ["t,finite_value,limit_value"]
    if config.law == "leader_type":
        limit = float(limits.survival_leader(a))
        for t in ts:
            k2 = math.ceil(a * math.sqrt(t))
            val = contours.prob_leader_type_ge(0, k2, t).value
            lines.append(f"{_fmt(t)},{_fmt(val)},{_fmt(limit)}")
    elif config.law == "leader_changes":
        limit = limits.leader_changes_constant()
        for t in ts:
            val = t * contours.prob_adjacent_inverted(t).value
            lines.append(f"{_fmt(t)},{_fmt(val)},{_fmt(limit)}")
    else:
        raise ValueError(f"unknown law: {config.law}")
    _emit(config, "\n".join(lines) + "\n")
    return 0


def _cmd_report(config: RunConfig) -> int:
    records = []
    for path in config.inputs or []:
        with open(path) as fh:
            records.append(json.loads(fh.readline()))
    versions = {r.get("version") for r in records}
    if len(versions) > 1:
        raise ValueError(f"refusing to aggregate mixed versions: {sorted(versions)}")
    summary = {"version": versions.pop() if versions else __version__,
               "n_inputs": len(records),
               "commands": [r["config"]["command"] for r in records],
               "results": [r["result"] for r in records]}
    record = _result_record(config, summary, 0.0)
    _emit(config, json.dumps(record, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtasep",
        description="multi-type TASEP laboratory: simulation, quadrature, limits")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--parallelism", type=int)
        p.add_argument("--timing", action="store_true", default=None,
                       help="include wall-clock fields (breaks byte-identity)")

    p = sub.add_parser("simulate", help="Monte Carlo estimate of an observable")
    common(p)
    p.add_argument("--process", required=True,
                   choices=["leader-type-ge", "leader-changes", "voter-e0",
                            "coalescence-e0"])
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--reps", type=int)
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)
    p.add_argument("--events-out", dest="events_out",
                   help="also write one sample path as JSONL events")

    p = sub.add_parser("integral", help="contour-integral probability")
    common(p)
    p.add_argument("--formula", required=True)
    p.add_argument("--t", type=float)
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)
    p.add_argument("--k3", type=int)
    p.add_argument("--x", type=float)
    p.add_argument("--cutoffs", help="comma-separated cutoffs for M_C")
    p.add_argument("--grid", help="comma-separated record for M_C")

    p = sub.add_parser("density", help="tabulate a limit density as CSV")
    common(p)
    p.add_argument("--law", required=True,
                   choices=["leader_type", "conditional_type", "two_leader"])
    p.add_argument("--grid", help="lo:hi:step")
    p.add_argument("--x", type=float)

    p = sub.add_parser("verify", help="run a verification suite")
    common(p)
    p.add_argument("--suite", required=True)
    p.add_argument("--reps", type=int)
    p.add_argument("--t", type=float)

    p = sub.add_parser("convergence", help="finite-t values vs limit laws")
    common(p)
    p.add_argument("--law", required=True,
                   choices=["leader_type", "leader_changes"])
    p.add_argument("--a", type=float)
    p.add_argument("--tgrid", help="comma-separated times")

    p = sub.add_parser("report", help="aggregate result files")
    common(p)
    p.add_argument("inputs", nargs="*", help="result files to aggregate")
    return parser


_COMMANDS = {
    "simulate": _cmd_simulate,
    "integral": _cmd_integral,
    "density": _cmd_density,
    "verify": _cmd_verify,
    "convergence": _cmd_convergence,
    "report": _cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        config = RunConfig.from_sources(args)
        return _COMMANDS[config.command](config)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NotConverged, MtasepError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
