"""Closed-form large-time limit laws for leader observables.

All laws concern the rainbow step dynamics, diffusive scaling a = type /
sqrt(t) (and x = (position - t) / sqrt(t)):

* single-leader survival / density: 1 - erf(a/2), (1/sqrt(pi)) e^{-a^2/4};
* type conditioned on the leader sitting at a typical position;
* joint density G(a2, a3) of the scaled types of the first and second
  leaders, with distinct branches on a2 > a3 and a2 < a3 (G is genuinely
  discontinuous across the diagonal: the a2 < a3 branch vanishes there);
* the logarithmic growth constant 3*sqrt(3)/(4*pi) of the expected number
  of leader changes.

The two-leader branches were derived by exact evaluation (Gaussian
moments plus Sokhotski-Plemelj) of the double-contour integrals Y and
Yhat below, and are cross-checked against those numeric oracles by the
test suite.
"""

import math
from typing import Callable

import numpy as np
from scipy.special import erf, erfc, erfcx

from .errors import NotConverged

_SQRT_PI = math.sqrt(math.pi)
_SQRT3 = math.sqrt(3.0)


def survival_leader(a):
    """P(scaled leader type >= a), a >= 0: 1 - erf(a/2)."""
    return 1.0 - erf(np.asarray(a, dtype=float) / 2.0)


def density_leader(a):
    """Density of the scaled leader type: (1/sqrt(pi)) e^{-a^2/4} on a >= 0."""
    a = np.asarray(a, dtype=float)
    return np.where(a >= 0.0, np.exp(-a * a / 4.0) / _SQRT_PI, 0.0)


def joint_position_type_survival(x, a):
    """P(scaled type >= a | leader at scaled position x), a >= 0.

    Equals (erfc((x+a)/sqrt(2)) + erfcx(-x/sqrt(2)) e^{-(x+a)^2/2}) / 2;
    the erfcx form keeps the product stable for large |x|.
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    z = (x + a) / math.sqrt(2.0)
    return 0.5 * (erfc(z) + erfcx(-x / math.sqrt(2.0)) * np.exp(-(x + a) ** 2 / 2.0))


def conditional_type_density(a, x):
    """Density in a of the scaled type given the leader's scaled position x.

    -d/da of ``joint_position_type_survival``:
    (1/sqrt(2 pi)) e^{-(x+a)^2/2} (1 + sqrt(pi/2) erfcx(-x/sqrt(2)) (x+a)).
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    gauss = np.exp(-(x + a) ** 2 / 2.0) / math.sqrt(2.0 * math.pi)
    out = gauss * (1.0 + math.sqrt(math.pi / 2.0) * erfcx(-x / math.sqrt(2.0)) * (x + a))
    return np.where(a >= 0.0, out, 0.0)


def _branch_first_larger(a2, a3):
    """G on a2 > a3 (first leader's type larger)."""
    erf_sum = erf(_SQRT3 * (a2 + a3) / 6.0)
    term1 = (1.0 - erf_sum) * (a3 - a2) * np.exp(-(a2 - a3) ** 2 / 4.0) / (4.0 * _SQRT_PI)
    term2 = _SQRT3 * (6.0 - a3 * a3) * np.exp(-(a2 * a2 - a2 * a3 + a3 * a3) / 3.0) / (8.0 * math.pi)
    poly = a3 ** 3 - 2.0 * a3 * a3 * a2 - 4.0 * a3 + 4.0 * a2
    term3 = -(1.0 + erf(_SQRT3 * (a3 - 2.0 * a2) / 6.0)) * poly * np.exp(-a3 * a3 / 4.0) / (16.0 * _SQRT_PI)
    return term1 + term2 + term3


def _branch_second_larger(a2, a3):
    """G on a2 < a3 (second leader's type larger); vanishes at a2 = a3."""
    t1 = -a2 * np.exp(-a2 * a2 / 4.0) * (erf(_SQRT3 * (a2 - 2.0 * a3) / 6.0) + 1.0)
    t2 = (a2 - a3) * np.exp(-(a2 - a3) ** 2 / 4.0) * (erf(_SQRT3 * (a2 + a3) / 6.0) - 1.0)
    t3 = -a3 * np.exp(-a3 * a3 / 4.0) * (erf(_SQRT3 * (2.0 * a2 - a3) / 6.0) - 1.0)
    return (t1 + t2 + t3) / (4.0 * _SQRT_PI)


def joint_two_leader_density(a2, a3):
    """Joint limit density G(a2, a3) of the scaled first/second leader types.

    Supported on a2, a3 >= 0; branch a2 > a3 when the first leader carries
    the larger type, branch a2 <= a3 otherwise.
    """
    a2 = np.asarray(a2, dtype=float)
    a3 = np.asarray(a3, dtype=float)
    val = np.where(a2 > a3, _branch_first_larger(a2, a3), _branch_second_larger(a2, a3))
    return np.where((a2 >= 0.0) & (a3 >= 0.0), val, 0.0)


def leader_changes_constant() -> float:
    """Logarithmic growth rate of the expected number of leader changes."""
    return 3.0 * _SQRT3 / (4.0 * math.pi)


# ---------------------------------------------------------------------------
# numeric double-contour oracles


def _contour_grid(eps: float, half_width: float, n: int):
    """Nodes/weights on the line Im = +eps, sinh-concentrated near 0."""
    ymax = np.arcsinh(half_width / eps)
    y = np.linspace(-ymax, ymax, n)
    u = eps * np.sinh(y)
    w = eps * np.cosh(y) * (y[1] - y[0])
    w = w.copy()
    w[0] *= 0.5
    w[-1] *= 0.5
    return u + 1j * eps, w


def _double_contour(ratfn: Callable, a2: float, a3: float, eps: float,
                    half_width: float, n: int) -> float:
    x, w = _contour_grid(eps, half_width, n)
    g3 = w * np.exp(-x ** 2 + 1j * a3 * x)
    total = 0.0 + 0.0j
    for lo in range(0, n, 512):
        x2 = x[lo:lo + 512, None]
        w2 = (w[lo:lo + 512] * np.exp(-x[lo:lo + 512] ** 2
                                      + 1j * a2 * x[lo:lo + 512]))
        rows = ratfn(x2, x[None, :]) * np.exp(-x2 * x[None, :])
        total += w2 @ (rows @ g3)
    return float((total / (2j * math.pi) ** 2).real)


def _oracle(ratfn: Callable, a2: float, a3: float, eps: float, tol: float) -> float:
    # The integrands are even, so the value on Im = +eps with phase
    # e^{+i a.x} equals the one on Im = -eps with phase e^{-i a.x}.
    prev = None
    for n in (600, 1200, 2400, 4800, 9600, 19200):
        cur = _double_contour(ratfn, a2, a3, eps, 8.0, n)
        if prev is not None and abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise NotConverged(f"double-contour oracle did not reach tol={tol}",
                       result=cur)


def oracle_Y(a2: float, a3: float, eps: float = 1e-2, tol: float = 1e-7) -> float:
    """Joint survival of the two scaled leader types (second >= a2, first >= a3).

    Requires a3 >= a2 for the probabilistic interpretation; d/da2 d/da3 of
    this oracle at (a2, a3) is G(a3, a2) on the a3 > a2 side.
    """
    def rat(x2, x3):
        return ((x3 - x2) * (x2 + 2 * x3) * (2 * x2 + x3)
                / ((x2 + x3) * x2 * x3 ** 3))
    return _oracle(rat, a2, a3, eps, tol)


def oracle_Yhat(a2: float, a3: float, eps: float = 1e-2, tol: float = 1e-7) -> float:
    """P(first leader's scaled type in [a2, a3), second's >= a3), a3 >= a2.

    d/da2 d/da3 of this oracle at (a2, a3) is G(a2, a3) on the a2 < a3 side.
    """
    def rat(x2, x3):
        return ((x3 - x2) * (x2 + 2 * x3) * (2 * x2 + x3)
                / ((x2 + x3) * x2 ** 2 * x3 ** 2))
    return _oracle(rat, a2, a3, eps, tol)


def leader_changes_rate_integral(eps: float = 1e-2, tol: float = 1e-8) -> float:
    """The closed 2-D contour integral whose value is 3*sqrt(3)/(4*pi).

    This is the instantaneous leader-change rate constant: t * P(leader
    change configuration at time t) converges to it.
    """
    def rat(x2, x3):
        return ((x3 - x2) * (x2 + 2 * x3) ** 2 * (2 * x2 + x3)
                / ((x2 + x3) ** 2 * x2 * x3))
    return _oracle(rat, 0.0, 0.0, eps, tol)
