"""Brute-force exact transition probabilities for n colored particles.

Uniformization of the n-particle colored TASEP (color i jumps right at
rate 1, blocked by weakly higher colors, swapping with strictly lower
ones): with uniformization rate Lambda = n every state has total exit
rate <= n, so

    P(start -> target, t) = sum_{m>=0} e^{-Lambda t} (Lambda t)^m / m!
                            * (P_jump)^m [start, target],

where P_jump assigns probability 1/n to each admissible action and the
remainder to staying put.  The series is truncated at the smallest M
with Poisson(Lambda t) tail <= eps; states are enumerated lazily while
pushing the distribution vector, so no reachable mass within M jumps is
ever dropped and the truncation error is exactly the tail.

This oracle is independent of the contour-integral machinery and of the
Monte Carlo samplers; it exists to certify both.
"""

import hashlib
import json
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from scipy import stats

from .errors import BudgetInfeasible
from .samplers import NParticleState

_MAX_N = 4
_MAX_T = 4.0


@dataclass(frozen=True)
class CertifiedProbability:
    """A probability together with a rigorous absolute error bound."""

    value: float
    error_bound: float


def _admissible_actions(positions: Tuple[int, ...]) -> List[Tuple[int, ...]]:
    """Successor states: one per admissible action of the current state."""
    occ = {p: i for i, p in enumerate(positions)}
    out = []
    for i, p in enumerate(positions):
        j = occ.get(p + 1)
        if j is None:
            nxt = list(positions)
            nxt[i] = p + 1
            out.append(tuple(nxt))
        elif j < i:  # strictly lower color ahead: swap
            nxt = list(positions)
            nxt[i], nxt[j] = p + 1, p
            out.append(tuple(nxt))
    return out


class TruncatedChain:
    """Lazily enumerated jump kernel of the uniformized chain.

    ``rows`` maps a state to its successor list; the uniformized kernel
    moves to each successor with probability 1/n and stays otherwise.
    """

    def __init__(self, n: int):
        self.n = n
        self.uniformization_rate = float(n)
        self.rows: Dict[Tuple[int, ...], List[Tuple[int, ...]]] = {}

    def successors(self, state: Tuple[int, ...]) -> List[Tuple[int, ...]]:
        row = self.rows.get(state)
        if row is None:
            row = _admissible_actions(state)
            self.rows[state] = row
        return row

    def push(self, vec: Dict[Tuple[int, ...], float]) -> Dict[Tuple[int, ...], float]:
        """One application of the uniformized jump kernel."""
        out: Dict[Tuple[int, ...], float] = {}
        inv_n = 1.0 / self.n
        for state, mass in vec.items():
            succ = self.successors(state)
            stay = mass * (1.0 - len(succ) * inv_n)
            if stay:
                out[state] = out.get(state, 0.0) + stay
            step = mass * inv_n
            for nxt in succ:
                out[nxt] = out.get(nxt, 0.0) + step
        return out


def _series_length(rate_t: float, eps: float, cap: int) -> int:
    """Smallest M with P(Poisson(rate_t) > M) <= eps."""
    m = max(int(rate_t), 1)
    while stats.poisson.sf(m, rate_t) > eps:
        m += 1
        if m > cap:
            raise BudgetInfeasible(
                f"uniformized series needs more than {cap} terms for "
                f"rate*t={rate_t}, eps={eps}")
    return m


def _cache_key(start: Tuple[int, ...], t: float, eps: float) -> str:
    blob = json.dumps([list(start), float(t), float(eps)]).encode()
    return hashlib.sha256(blob).hexdigest()[:32]


def transition_distribution(start: NParticleState, t: float, eps: float = 1e-9,
                            cap: int = 2000, cache_dir: Optional[str] = None,
                            ) -> Tuple[Dict[Tuple[int, ...], float], float]:
    """Full time-t distribution from ``start`` with certified loss <= eps.

    Returns (distribution over final position tuples, certified loss):
    the probabilities sum to at least 1 - loss and every entry is within
    loss of the exact value.
    """
    if start.n > _MAX_N:
        raise ValueError(f"oracle limited to n <= {_MAX_N} particles")
    if not 0.0 <= t <= _MAX_T:
        raise ValueError(f"oracle limited to 0 <= t <= {_MAX_T}")
    if cache_dir is not None:
        path = os.path.join(cache_dir, _cache_key(start.positions, t, eps) + ".json")
        if os.path.exists(path):
            with open(path) as fh:
                payload = json.load(fh)
            dist = {tuple(k): v for k, v in payload["entries"]}
            return dist, payload["loss"]
    chain = TruncatedChain(start.n)
    rate_t = chain.uniformization_rate * t
    M = _series_length(rate_t, eps, cap) if rate_t > 0 else 0
    weights = stats.poisson.pmf(range(M + 1), rate_t)
    loss = float(stats.poisson.sf(M, rate_t))
    vec: Dict[Tuple[int, ...], float] = {start.positions: 1.0}
    dist: Dict[Tuple[int, ...], float] = {}
    for m in range(M + 1):
        w = float(weights[m])
        for state, mass in vec.items():
            if mass:
                dist[state] = dist.get(state, 0.0) + w * mass
        if m < M:
            vec = chain.push(vec)
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        payload = {"entries": [[list(k), v] for k, v in sorted(dist.items())],
                   "loss": loss}
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(payload, fh)
        os.replace(tmp, path)
    return dist, loss


def transition_probability(start: NParticleState, target: NParticleState,
                           t: float, eps: float = 1e-9, cap: int = 2000,
                           cache_dir: Optional[str] = None) -> CertifiedProbability:
    """P(state at time t = target | start), certified to absolute error eps."""
    if start.n != target.n:
        raise ValueError("start and target must have the same particle count")
    dist, loss = transition_distribution(start, t, eps=eps, cap=cap,
                                         cache_dir=cache_dir)
    return CertifiedProbability(value=dist.get(target.positions, 0.0),
                                error_bound=loss)
