"""Two recursively-defined families of rational functions.

``eval_phi`` and ``eval_psi`` evaluate the families phi_mu and psi_nu that
enter the finite-time record-probability integrand.  Both are indexed by
integer n-tuples with pairwise distinct entries:

* phi is 1 / prod (1+w_i)^{mu_i} when mu is increasing, and is extended to
  general mu by resolving descents:  if mu_i > mu_{i+1} and mu' is mu with
  those two entries swapped,

      phi_mu(w) = w_{i+1} (1+w_i) / (w_i - w_{i+1})
                  * (phi_mu'(w) - phi_mu'(s_i w)),

  where s_i exchanges the arguments w_i and w_{i+1}.

* psi is prod (1+w_i)^{nu_i} when nu is decreasing, extended by resolving
  ascents:  if nu_i < nu_{i+1},

      psi_nu(w) = [w_i (1+w_{i+1}) psi_nu'(w)
                   - w_{i+1} (1+w_i) psi_nu'(s_i w)] / (w_i - w_{i+1}).

Both extensions are independent of the order in which the swaps are
resolved; the ``pivot`` argument exposes the choice so that tests can
verify this path independence numerically.

Evaluation is vectorized: ``W`` has one row per variable and any number of
columns of evaluation points.  Intermediate functions are memoized per
call, keyed by the index tuple and the argument permutation, so the cost
is one array per distinct intermediate rather than per recursion path.
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentsTooClose


def _prepare(index, W, extended):
    index = tuple(int(m) for m in index)
    if len(set(index)) != len(index):
        raise ValueError("index tuple must have pairwise distinct entries")
    dtype = np.clongdouble if extended else np.complex128
    W = np.atleast_1d(np.asarray(W, dtype=dtype))
    if W.ndim == 1:
        W = W[:, None]
        squeeze = True
    else:
        squeeze = False
    if W.shape[0] != len(index):
        raise ValueError("need one row of points per index entry")
    return index, W, squeeze


def _check_separation(di, dj):
    scale = max(1.0, float(np.max(np.abs(di))), float(np.max(np.abs(dj))))
    if np.min(np.abs(di - dj)) < 1e-9 * scale:
        raise ArgumentsTooClose(
            "evaluation points nearly coincide across swapped variables; "
            "stagger the contour radii")


def eval_phi(mu, W, pivot: str = "first", extended: bool = False):
    """Evaluate phi_mu at the points W (one row per variable)."""
    mu, W, squeeze = _prepare(mu, W, extended)
    n = len(mu)
    memo = {}

    def rec(idx, perm):
        key = (idx, perm)
        if key in memo:
            return memo[key]
        descents = [i for i in range(n - 1) if idx[i] > idx[i + 1]]
        if not descents:
            val = np.ones_like(W[0])
            for i in range(n):
                val = val / (1.0 + W[perm[i]]) ** idx[i]
        else:
            i = descents[0] if pivot == "first" else descents[-1]
            idx2 = idx[:i] + (idx[i + 1], idx[i]) + idx[i + 2:]
            perm_s = perm[:i] + (perm[i + 1], perm[i]) + perm[i + 2:]
            wi, wj = W[perm[i]], W[perm[i + 1]]
            _check_separation(wi, wj)
            val = (wj * (1.0 + wi) / (wi - wj)
                   * (rec(idx2, perm) - rec(idx2, perm_s)))
        memo[key] = val
        return val

    out = rec(mu, tuple(range(n)))
    return out[..., 0] if squeeze else out


def eval_psi(nu, W, pivot: str = "first", extended: bool = False):
    """Evaluate psi_nu at the points W (one row per variable)."""
    nu, W, squeeze = _prepare(nu, W, extended)
    n = len(nu)
    memo = {}

    def rec(idx, perm):
        key = (idx, perm)
        if key in memo:
            return memo[key]
        ascents = [i for i in range(n - 1) if idx[i] < idx[i + 1]]
        if not ascents:
            val = np.ones_like(W[0])
            for i in range(n):
                val = val * (1.0 + W[perm[i]]) ** idx[i]
        else:
            i = ascents[0] if pivot == "first" else ascents[-1]
            idx2 = idx[:i] + (idx[i + 1], idx[i]) + idx[i + 2:]
            perm_s = perm[:i] + (perm[i + 1], perm[i]) + perm[i + 2:]
            wi, wj = W[perm[i]], W[perm[i + 1]]
            _check_separation(wi, wj)
            val = (wi * (1.0 + wj) * rec(idx2, perm)
                   - wj * (1.0 + wi) * rec(idx2, perm_s)) / (wi - wj)
        memo[key] = val
        return val

    out = rec(nu, tuple(range(n)))
    return out[..., 0] if squeeze else out
