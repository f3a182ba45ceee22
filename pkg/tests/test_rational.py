import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtasep.errors import ArgumentsTooClose
from mtasep.rational import eval_phi, eval_psi


def points(n, m, seed):
    rng = np.random.default_rng(seed)
    # complex points away from -1, 0 and from each other
    while True:
        W = rng.normal(1.5, 1.0, (n, m)) + 1j * rng.normal(0, 1.0, (n, m))
        ok = np.all(np.abs(W) > 0.2) and np.all(np.abs(1 + W) > 0.2)
        for i, j in itertools.combinations(range(n), 2):
            ok = ok and np.all(np.abs(W[i] - W[j]) > 0.2)
        if ok:
            return W


def test_phi_base_cases():
    W = points(3, 7, 0)
    expect = 1 / ((1 + W[0]) ** -2 * (1 + W[1]) ** 0 * (1 + W[2]) ** 3)
    np.testing.assert_allclose(eval_phi((-2, 0, 3), W), expect, rtol=1e-12)


def test_psi_base_cases():
    W = points(3, 7, 1)
    expect = (1 + W[0]) ** 4 * (1 + W[1]) ** 1 * (1 + W[2]) ** -2
    np.testing.assert_allclose(eval_psi((4, 1, -2), W), expect, rtol=1e-12)


def test_phi_one_inversion_closed_form():
    W = points(2, 9, 2)
    np.testing.assert_allclose(eval_phi((1, 0), W), W[1] / (1 + W[1]),
                               rtol=1e-12)


def test_psi_one_inversion_closed_form():
    W = points(2, 9, 3)
    np.testing.assert_allclose(eval_psi((0, 1), W), (1 + W[0]) * (1 + W[1]),
                               rtol=1e-12)


def test_scalar_input():
    val = eval_phi((1, 0), np.array([2.0 + 0j, 0.5 + 0.5j]))
    assert val.shape == ()
    w2 = 0.5 + 0.5j
    assert abs(val - w2 / (1 + w2)) < 1e-12


@pytest.mark.parametrize("fn", [eval_phi, eval_psi])
def test_pivot_path_independence(fn):
    W = points(3, 11, 4)
    for idx in itertools.permutations((-1, 2, 5)):
        a = fn(idx, W, pivot="first")
        b = fn(idx, W, pivot="last")
        np.testing.assert_allclose(a, b, rtol=1e-10)


@given(st.permutations([-2, 0, 1, 4]), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_phi_exchange_relation(idx, seed):
    # resolving any one descent directly reproduces the recursion
    idx = tuple(idx)
    W = points(4, 5, seed)
    Ws = {i: np.vstack([W[:i], W[i + 1], W[i], W[i + 2:]])
          for i in range(3)}
    for i in range(3):
        if idx[i] > idx[i + 1]:
            idx2 = idx[:i] + (idx[i + 1], idx[i]) + idx[i + 2:]
            lhs = eval_phi(idx, W)
            rhs = (W[i + 1] * (1 + W[i]) / (W[i] - W[i + 1])
                   * (eval_phi(idx2, W) - eval_phi(idx2, Ws[i])))
            np.testing.assert_allclose(lhs, rhs, rtol=1e-9)


@given(st.permutations([-2, 0, 1, 4]), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_psi_exchange_relation(idx, seed):
    idx = tuple(idx)
    W = points(4, 5, seed)
    Ws = {i: np.vstack([W[:i], W[i + 1], W[i], W[i + 2:]])
          for i in range(3)}
    for i in range(3):
        if idx[i] < idx[i + 1]:
            idx2 = idx[:i] + (idx[i + 1], idx[i]) + idx[i + 2:]
            lhs = eval_psi(idx, W)
            rhs = (W[i] * (1 + W[i + 1]) * eval_psi(idx2, W)
                   - W[i + 1] * (1 + W[i]) * eval_psi(idx2, Ws[i])) \
                / (W[i] - W[i + 1])
            np.testing.assert_allclose(lhs, rhs, rtol=1e-9)


def test_duplicate_index_rejected():
    with pytest.raises(ValueError):
        eval_phi((1, 1), points(2, 3, 5))


def test_arguments_too_close():
    W = np.array([[2.0 + 1j], [2.0 + 1j + 1e-13]])
    with pytest.raises(ArgumentsTooClose):
        eval_phi((1, 0), W)


def test_extended_precision_dtype():
    W = points(2, 4, 6)
    out = eval_phi((3, -1), W, extended=True)
    assert out.dtype == np.clongdouble
    np.testing.assert_allclose(out.astype(np.complex128),
                               eval_phi((3, -1), W), rtol=1e-12)
