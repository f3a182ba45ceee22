"""Exact finite-time probabilities via contour integrals.

All probabilities here are n-fold integrals of analytic integrands over
circles.  On circles the trapezoid rule converges geometrically, so every
routine doubles the node count until two successive levels agree and
reports the difference as the error estimate.

Conventions:

* A contour is a positively oriented circle ``center + radius * e^{i θ}``.
* ``integrate`` includes the ``(2 π i)^{-n}`` prefactor, i.e. it returns
  the sum of residues enclosed by the product contour.
* Circles of multi-variable integrands are staggered slightly in radius so
  the rational prefactors are never evaluated on their diagonals.
* Large-time integrands are evaluated in log space with underflow clipped
  to zero, and contours are re-centered near the relevant saddle points so
  the quadrature stays well conditioned as t grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonProbability, NotConverged
from .lattice import ColorCutoffs, LeaderRecord
from .rational import eval_phi, eval_psi

_MAX_NODES = {1: 4096, 2: 1024, 3: 256}


@dataclass(frozen=True)
class ContourSpec:
    """Positively oriented circle in the complex plane."""

    center: complex
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def nodes(self, n: int, dtype=np.complex128):
        theta = 2.0 * np.pi * np.arange(n) / n
        return (np.asarray(self.center, dtype=dtype)
                + np.asarray(self.radius, dtype=dtype)
                * np.exp(np.asarray(1j * theta, dtype=dtype)))


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    est_error: float
    nodes_per_dim: int
    converged: bool

    def require(self) -> float:
        if not self.converged:
            raise NotConverged(
                f"quadrature did not converge (err~{self.est_error:.2e})",
                result=self)
        return self.value


def staggered(radius: float, n: int, spread: float = 0.04) -> list:
    """n radii near ``radius``, pairwise distinct."""
    return [radius * (1.0 + spread * d) for d in range(n)]


def integrate(fn: Callable, contours: Sequence[ContourSpec], *,
              start_nodes: int = 64, max_nodes: int = None,
              rtol: float = 1e-10, atol: float = 1e-10,
              extended: bool = False) -> QuadratureResult:
    """Tensor-product trapezoid value of (2 pi i)^{-n} * ∮...∮ fn(W) dW.

    ``fn`` receives a (n, M) array of points and returns (M,) values.
    Returns the real part; the imaginary part is folded into the error
    estimate.
    """
    n = len(contours)
    if max_nodes is None:
        max_nodes = _MAX_NODES.get(n, 128)
    dtype = np.clongdouble if extended else np.complex128

    chunk = 1 << 18

    def level(N):
        axes = [c.nodes(N, dtype) for c in contours]
        grids = np.meshgrid(*axes, indexing="ij")
        W = np.stack([g.ravel() for g in grids])
        total = dtype(0.0)
        for a in range(0, W.shape[1], chunk):
            Wc = W[:, a:a + chunk]
            weights = np.ones(Wc.shape[1], dtype=dtype)
            for d in range(n):
                weights = weights * (Wc[d] - dtype(contours[d].center))
            total += np.sum(fn(Wc) * weights)
        return complex(total / (N ** n))

    N = start_nodes
    prev = level(N)
    while True:
        N *= 2
        cur = level(N)
        err = abs(cur - prev) + abs(cur.imag)
        if err <= atol + rtol * abs(cur):
            return QuadratureResult(cur.real, err, N, True)
        if N >= max_nodes:
            return QuadratureResult(cur.real, err, N, False)
        prev = cur


def _clipped_exp(log_values):
    out = np.exp(np.where(log_values.real < -700.0, -745.0, log_values))
    return np.where(log_values.real < -700.0, 0.0, out)


def prob_M_C(cutoffs, record, t: float, *, nu=None, radius: float = 1.25,
             extended: bool = False, **quad_kw) -> QuadratureResult:
    """Probability that the record vector equals ``record`` at time t.

    ``cutoffs`` is the increasing tuple of color cutoffs; the initial
    condition is the fully packed step state, whose record is
    nu = (-c_1, ..., -c_n), unless ``nu`` overrides it.
    """
    if isinstance(cutoffs, ColorCutoffs):
        cutoffs = cutoffs.cutoffs
    if isinstance(record, LeaderRecord):
        record = record.positions
    mu = tuple(int(k) for k in record)
    n = len(mu)
    if len(cutoffs) != n:
        raise ValueError("cutoffs and record must have equal length")
    if nu is None:
        nu = tuple(-c for c in cutoffs)
    nu = tuple(int(v) for v in nu)
    if radius <= 1.0:
        raise ValueError("contour radius must exceed 1")
    contours = [ContourSpec(0.0, r) for r in staggered(radius, n)]

    def fn(W):
        val = eval_phi(mu, W, extended=extended) \
            * eval_psi(nu, W, extended=extended)
        for i in range(n):
            for j in range(i + 1, n):
                val = val * (1.0 - W[i] / W[j])
        for j in range(n):
            val = val * np.exp(t * W[j]) / (1.0 + W[j]) ** (n - j)
        return val

    return integrate(fn, contours, extended=extended, **quad_kw)


def prob_leader_type_ge(k1: int, k2: int, t: float,
                        **quad_kw) -> QuadratureResult:
    """P(the k1-leader has type >= k2), for k2 > k1.

    Single contour around 0 and -1.  For large t the contour is a circle
    through the neighborhood of the saddle of w^2/(1+w) near the origin:
    center -1/2, radius 1/2 + min(0.7, 2/sqrt(t)).
    """
    if k2 <= k1:
        raise ValueError("need k2 > k1")
    s = min(0.7, 2.0 / math.sqrt(max(t, 1.0)))
    contour = ContourSpec(-0.5, 0.5 + s)
    m = k1 - k2 - 1

    def fn(W):
        w = W[0]
        logf = (t * w * w / (1.0 + w) + m * np.log(1.0 + w)
                + np.log(w + 2.0) - np.log(w))
        return _clipped_exp(logf)

    return integrate(fn, [contour], **quad_kw)


def prob_leader_type_ge_at(k1: int, k2: int, x: int, t: float,
                           **quad_kw) -> QuadratureResult:
    """P(the k1-leader has type >= k2 and sits at position x).

    Requires k2 > k1 and x >= k1.  The w1 circle encloses only -1; the w2
    circle encloses -1 and 0.
    """
    if k2 <= k1 or x < k1:
        raise ValueError("need k2 > k1 and x >= k1")
    # |1+w1| = 0.9 and |1+w2| >= 1 keep the (1+w)^{-x} factors bounded
    c1 = ContourSpec(-1.0, 0.9)
    c2 = ContourSpec(-0.5, 1.5)

    def fn(W):
        w1, w2 = W
        return ((w1 - w2) / (w1 * w2)
                * (1.0 + w1) ** (-k1 - x - 1)
                * (1.0 + w2) ** (-k2 - x - 1)
                * np.exp(t * (w1 + w2)))

    return integrate(fn, [c1, c2], **quad_kw)


def _two_leader_phase(t, v2, v3):
    return t * (1.0 / (v2 * v3) + v2 + v3 - 3.0)


def prob_two_leaders_gt(k1: int, k2: int, k3: int, t: float,
                        radius: float = 2.0, **quad_kw) -> QuadratureResult:
    """P(k1-leader has type >= k3 and the second k1-leader type >= k2),
    for k3 > k2 > k1."""
    if not k3 > k2 > k1:
        raise ValueError("need k3 > k2 > k1")
    r2, r3 = staggered(radius, 2)
    contours = [ContourSpec(0.0, r2), ContourSpec(0.0, r3)]

    def fn(W):
        v2, v3 = W
        rat = ((v3 - v2) * (v2 * v3 ** 2 - 1.0) * (v2 ** 2 * v3 - 1.0)
               * v2 ** (k1 - k2) * v3 ** (k1 - k3)
               / (v2 ** 2 * v3 * (v2 * v3 - 1.0)
                  * (v2 - 1.0) * (v3 - 1.0) ** 3))
        return rat * _clipped_exp(_two_leader_phase(t, v2, v3))

    return integrate(fn, contours, **quad_kw)


def prob_two_leaders_between(k1: int, k2: int, k3: int, t: float,
                             radius: float = 2.0,
                             **quad_kw) -> QuadratureResult:
    """P(k1-leader type in [k2, k3) and the second k1-leader type >= k3),
    for k3 > k2 > k1."""
    if not k3 > k2 > k1:
        raise ValueError("need k3 > k2 > k1")
    r2, r3 = staggered(radius, 2)
    contours = [ContourSpec(0.0, r2), ContourSpec(0.0, r3)]

    def fn(W):
        v2, v3 = W
        poly = (v2 * v3 ** 2 - 1.0) * (v2 ** 2 * v3 - 1.0)
        # two summed terms of the record decomposition; they live on the
        # same contours after the final deformation but are not related by
        # a bare k2 <-> k3 swap
        t1 = poly * v2 ** (k1 - k2) * v3 ** (k1 - k3) \
            / (v2 * v3 * (v2 - 1.0) * (v3 - 1.0) ** 2 * (v2 * v3 - 1.0))
        t2 = poly * v2 ** (k1 - k2 - 1) * v3 ** (k1 - k3 + 1) \
            / (v3 ** 2 * (v2 - 1.0) ** 2 * (v3 - 1.0) * (v2 * v3 - 1.0))
        return (t2 - t1) * _clipped_exp(_two_leader_phase(t, v2, v3))

    return integrate(fn, contours, **quad_kw)


def prob_adjacent_inverted(t: float, radius: float = None,
                           **quad_kw) -> QuadratureResult:
    """P(at time t the second 0-leader sits immediately left of the
    0-leader and carries the larger type).

    The contours may be deformed to any radius > 1 without crossing poles;
    for large t a radius 1 + 2/sqrt(t) keeps the exponential factor tame.
    """
    if radius is None:
        radius = 1.0 + min(1.0, 2.0 / math.sqrt(max(t, 1.0)))
    if radius <= 1.0:
        raise ValueError("contour radius must exceed 1")
    r2, r3 = staggered(radius, 2, spread=0.02)
    contours = [ContourSpec(0.0, r2), ContourSpec(0.0, r3)]

    def fn(W):
        v2, v3 = W
        rat = ((v3 - v2) * (v2 * v3 ** 2 - 1.0) * (v2 ** 2 * v3 - 1.0)
               / (v2 * v3 ** 2 * (v2 - 1.0) * (v3 - 1.0)
                  * (v2 * v3 - 1.0) ** 2))
        return rat * _clipped_exp(_two_leader_phase(t, v2, v3))

    return integrate(fn, contours, **quad_kw)


def as_probability(value: float, tol: float = 1e-8) -> float:
    """Clamp a numerically computed probability, rejecting real violations."""
    if not (-tol <= value <= 1.0 + tol):
        raise NonProbability(f"value {value} is not a probability")
    return min(max(value, 0.0), 1.0)
