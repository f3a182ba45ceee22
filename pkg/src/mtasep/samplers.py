"""Continuous-time Monte Carlo samplers.

Graphical-construction simulators for the windowed rainbow TASEP, the
n-particle colored TASEP, the native voter model, and the native
coalescence process, together with path observables (leader-change
counting, border-position extraction) and Monte Carlo aggregation.

Windowing error is controlled by a Poisson tail bound: information
crossing any single bond does so at the rings of that bond's rate-1
clock, so an influence path covering W bonds within horizon t requires
at least W rings of a Poisson(t) count along it.  Choosing

    W >= t + c * sqrt(t * ln(1/delta)) + |deepest queried cutoff|

per side makes P(Poisson(t) >= W) <= delta (Chernoff, c = 2 covers the
sub-Gaussian regime W - t <= t).  ``required_halfwidth`` implements the
bound and every windowed simulator enforces it.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import WindowTooSmall
from .lattice import BoundaryMode, Configuration
from .rng import ClockStream

Observer = Callable[[float, int, Tuple[int, int]], None]


@dataclass(frozen=True)
class EventLog:
    """Accepted swap events of one path, in time order.

    ``bonds[i]`` is the left site x of the swapped bond (x, x+1).  Times
    are strictly increasing (real-time ties, possible only through
    floating representation, are broken by smaller bond index at
    generation time).
    """

    times: np.ndarray
    bonds: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        bonds = np.asarray(self.bonds, dtype=np.int64)
        if times.shape != bonds.shape or times.ndim != 1:
            raise ValueError("times and bonds must be 1-d arrays of equal length")
        if times.size and (np.any(np.diff(times) < 0) or times[-1] > self.horizon):
            raise ValueError("event times must be nondecreasing and <= horizon")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "bonds", bonds)

    def __len__(self) -> int:
        return self.times.size

    def to_jsonl(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(json.dumps({"horizon": self.horizon}) + "\n")
            for tm, b in zip(self.times, self.bonds):
                fh.write(json.dumps([float(tm), int(b)]) + "\n")

    @classmethod
    def from_jsonl(cls, path: str) -> "EventLog":
        with open(path) as fh:
            head = json.loads(fh.readline())
            times, bonds = [], []
            for line in fh:
                tm, b = json.loads(line)
                times.append(tm)
                bonds.append(b)
        return cls(np.array(times, dtype=float), np.array(bonds, dtype=np.int64),
                   float(head["horizon"]))


@dataclass(frozen=True)
class NParticleState:
    """Positions of n colored particles; color i sits at positions[i-1]."""

    positions: Tuple[int, ...]

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        if len(set(pos)) != len(pos):
            raise ValueError("particle positions must be pairwise distinct")
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo mean with standard error over independent replicas."""

    mean: float
    stderr: float
    reps: int
    seed: int
    elapsed: float

    def __post_init__(self):
        if self.reps < 2:
            raise ValueError("an MCEstimate needs at least 2 replicas")


def mc_estimate(samples: Sequence[float], seed: int, elapsed: float) -> MCEstimate:
    """Aggregate replica samples (numpy pairwise summation for mean/var)."""
    arr = np.asarray(samples, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least 2 samples")
    return MCEstimate(mean=float(arr.mean()),
                      stderr=float(arr.std(ddof=1) / math.sqrt(arr.size)),
                      reps=int(arr.size), seed=int(seed), elapsed=float(elapsed))


def required_halfwidth(t: float, delta: float = 1e-6, c: float = 2.0,
                       depth: int = 0) -> int:
    """Window half-width making the truncation error at most delta per side."""
    if t < 0 or not (0 < delta < 1):
        raise ValueError("need t >= 0 and delta in (0, 1)")
    return int(math.ceil(t + c * math.sqrt(max(t, 1.0) * math.log(1.0 / delta))
                         + abs(depth)))


def _check_window(window: Tuple[int, int], t: float, delta: float,
                  depth: int) -> None:
    lo, hi = window
    if hi <= lo:
        raise ValueError("window must satisfy lo < hi")
    need = required_halfwidth(t, delta=delta, depth=depth)
    if -lo < need or hi < need:
        raise WindowTooSmall(
            f"window [{lo}, {hi}] too small for horizon t={t}, delta={delta}: "
            f"need half-width >= {need} on each side")


def simulate_tasep(window: Tuple[int, int], t: float, clocks: ClockStream,
                   observers: Optional[List[Observer]] = None,
                   delta: float = 1e-6, depth: int = 0,
                   ) -> Tuple[Configuration, EventLog]:
    """Windowed rainbow dynamics from the step state type(x) = -x.

    Per-bond rate-1 exponential clocks (streams keyed by
    (seed, stream_id, bond)); a ring at bond (x, x+1) swaps the two values
    iff they are in strictly decreasing order.  Observers are called with
    (time, bond, pre-swap (left type, right type)) for every accepted
    event in time order.
    """
    _check_window(window, t, delta, depth)
    lo, hi = window
    types = np.arange(-lo, -hi - 1, -1, dtype=np.int64)
    initial = types.copy()
    n_ev, times, bonds = _kernels.clock_tasep(
        types, float(t), np.uint64(clocks.seed), np.uint64(clocks.stream_id),
        np.int64(2 ** 62))
    bonds = bonds + lo  # kernel indexes bonds from the left window edge
    log = EventLog(times, bonds, float(t))
    if observers:
        replay = initial.copy()
        for tm, b in zip(times, bonds):
            i = b - lo
            pre = (int(replay[i]), int(replay[i + 1]))
            for obs in observers:
                obs(float(tm), int(b), pre)
            replay[i], replay[i + 1] = replay[i + 1], replay[i]
        if not np.array_equal(replay, types):
            raise AssertionError("event replay does not reproduce the final state")
    cfg = Configuration(window_lo=lo, window_hi=hi, cells=tuple(int(v) for v in types),
                        boundary=BoundaryMode.RAINBOW_STEP)
    return cfg, log


def simulate_nparticle(start: NParticleState, t: float,
                       clocks: ClockStream) -> NParticleState:
    """n colored particles on the full line; exact, no truncation.

    Color i jumps right at rate 1; a jump onto a strictly lower color
    swaps the two, a weakly higher color blocks.  Encoding holes as 0 and
    color i as the integer i reduces this to the value-swap rule
    "swap iff left > right", shared with the rainbow kernel.  The grid is
    regrown and the path re-run (same stream, hence the identical event
    sequence) in the astronomically unlikely case a particle reaches the
    edge.
    """
    pos = np.array(start.positions, dtype=np.int64)
    lo = int(pos.min()) - 1
    margin = int(math.ceil(t + 12.0 * math.sqrt(max(t, 1.0)))) + 16
    while True:
        hi = int(pos.max()) + margin
        grid = np.zeros(hi - lo + 1, dtype=np.int64)
        for i, p in enumerate(pos):
            grid[p - lo] = i + 1
        _, overflow = _kernels.gillespie_values(
            grid, float(t), np.uint64(clocks.seed), np.uint64(clocks.stream_id),
            np.array([float(t)]))
        if not overflow:
            break
        margin *= 2
    out = [0] * len(pos)
    for idx in np.flatnonzero(grid):
        out[int(grid[idx]) - 1] = int(idx) + lo
    return NParticleState(tuple(out))


def simulate_voter(window: Tuple[int, int], t: float, clocks: ClockStream,
                   delta: float = 1e-6) -> np.ndarray:
    """Native voter dynamics from opinions nu(x) = -x.

    nu(x) <- nu(x+1) at rate 1 per bond.  Returns the opinion array
    indexed from window[0].
    """
    _check_window(window, t, delta, 0)
    lo, hi = window
    opinions = np.arange(-lo, -hi - 1, -1, dtype=np.int64)
    _kernels.voter_kernel(opinions, float(t), np.uint64(clocks.seed),
                          np.uint64(clocks.stream_id))
    return opinions


def simulate_coalescence(window: Tuple[int, int], t: float, clocks: ClockStream,
                         delta: float = 1e-6,
                         initial: Optional[np.ndarray] = None) -> np.ndarray:
    """Native coalescence dynamics from the fully packed state.

    Particles jump left at rate 1 and merge on collision (01 -> 10,
    11 -> 10); the left window edge absorbs.  Returns the {0,1}
    occupation array indexed from window[0].
    """
    _check_window(window, t, delta, 0)
    lo, hi = window
    if initial is None:
        occ = np.ones(hi - lo + 1, dtype=np.int64)
    else:
        occ = np.asarray(initial, dtype=np.int64).copy()
        if occ.shape != (hi - lo + 1,) or not np.isin(occ, (0, 1)).all():
            raise ValueError("initial occupation must be a {0,1} array over the window")
    _kernels.coalescence_kernel(occ, float(t), np.uint64(clocks.seed),
                                np.uint64(clocks.stream_id))
    return occ


def voter_E0(opinions: np.ndarray, window_lo: int) -> int:
    """Leftmost i <= 0 sharing the opinion of site 0 contiguously up to 0."""
    i0 = -window_lo
    if i0 < 0 or i0 >= opinions.size:
        raise ValueError("state must cover site 0")
    y = opinions[i0]
    i = i0
    while i > 0 and opinions[i - 1] == y:
        i -= 1
    if i == 0:
        raise ValueError("opinion block of site 0 reaches the window edge")
    return i + window_lo


def coalescence_E0(occ: np.ndarray, window_lo: int) -> int:
    """Rightmost nonpositive occupied site."""
    i0 = -window_lo
    if i0 < 0 or i0 >= occ.size:
        raise ValueError("state must cover site 0")
    for i in range(i0, -1, -1):
        if occ[i] == 1:
            return i + window_lo
    raise ValueError("no occupied nonpositive site inside the window")


class LeaderChangeCounter:
    """Observer counting type changes of the k-leader along a TASEP path.

    A swap counts iff, after it, the rightmost position whose type is
    >= -k holds a different type than before; swaps that move the leader
    without changing which type leads do not count.
    """

    def __init__(self, window: Tuple[int, int], k: int):
        if k > window[1]:
            raise ValueError("cutoff must lie inside the window")
        self.lo, self.hi = window
        self.k = int(k)
        self.types = np.arange(-self.lo, -self.hi - 1, -1, dtype=np.int64)
        self.count = 0
        self._leader_type = self._current_leader_type()

    def _current_leader_type(self) -> int:
        for i in range(self.types.size - 1, -1, -1):
            if self.types[i] >= -self.k:
                return int(self.types[i])
        raise ValueError("no k-leader inside the window")

    def __call__(self, time: float, bond: int, pre: Tuple[int, int]) -> None:
        i = bond - self.lo
        self.types[i], self.types[i + 1] = pre[1], pre[0]
        new = self._current_leader_type()
        if new != self._leader_type:
            self.count += 1
            self._leader_type = new


def count_leader_changes(window: Tuple[int, int], log: EventLog, k: int) -> int:
    """S(t) for a recorded path: replay the event log under a counter."""
    counter = LeaderChangeCounter(window, k)
    lo = window[0]
    types = counter.types.copy()
    for tm, b in zip(log.times, log.bonds):
        i = b - lo
        counter(float(tm), int(b), (int(types[i]), int(types[i + 1])))
        types[i], types[i + 1] = types[i + 1], types[i]
    return counter.count


def leader_changes_fast(checkpoints: Sequence[float], clocks: ClockStream,
                        delta: float = 1e-6) -> np.ndarray:
    """One replica of S(t) at each checkpoint, for the 0-leader, cheaply.

    The sites with type >= 0 form an autonomous colored subsystem of the
    step state (every lower type acts as an indistinguishable hole), so
    the 0-leader's type changes are exactly the value changes of the
    rightmost particle among n = required_halfwidth(t) colored particles
    started fully packed at 0, -1, ..., -(n-1).
    """
    cks = np.asarray(sorted(float(c) for c in checkpoints))
    if cks.size == 0 or cks[0] < 0:
        raise ValueError("need nonnegative checkpoint times")
    t = float(cks[-1])
    n = required_halfwidth(t, delta=delta)
    margin = required_halfwidth(t, delta=delta) + 8
    while True:
        grid = np.zeros(n + margin, dtype=np.int64)
        grid[:n] = np.arange(n, 0, -1)  # color i at position -(i-1): descending values
        counts, overflow = _kernels.gillespie_values(
            grid, t, np.uint64(clocks.seed), np.uint64(clocks.stream_id), cks)
        if not overflow:
            return counts
        margin *= 2
