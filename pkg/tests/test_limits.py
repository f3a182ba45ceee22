"""Tests for the closed-form limit laws and their contour-integral oracles."""

import math

import numpy as np
import pytest
from scipy.special import erf

from mtasep import contours, limits


def mixed_fd(f, a2, a3, h):
    return (f(a2 + h, a3 + h) - f(a2 + h, a3 - h)
            - f(a2 - h, a3 + h) + f(a2 - h, a3 - h)) / (4.0 * h * h)


def mixed_fd_rich(f, a2, a3, h=0.08):
    return (4.0 * mixed_fd(f, a2, a3, h / 2) - mixed_fd(f, a2, a3, h)) / 3.0


class TestLeaderLaw:
    def test_survival_at_zero(self):
        assert limits.survival_leader(0.0) == 1.0

    def test_density_normalized(self):
        a = np.linspace(0.0, 14.0, 20001)
        total = np.trapezoid(limits.density_leader(a), a)
        assert abs(total - 1.0) < 1e-10

    def test_density_is_minus_derivative_of_survival(self):
        h = 1e-5
        for a in (0.5, 1.0, 2.0):
            fd = -(limits.survival_leader(a + h)
                   - limits.survival_leader(a - h)) / (2.0 * h)
            assert abs(fd - limits.density_leader(a)) < 1e-6

    def test_density_zero_for_negative_types(self):
        assert limits.density_leader(-0.5) == 0.0


class TestConditionalTypeLaw:
    def test_survival_at_zero_type_is_one(self):
        for x in (-3.0, -1.0, 0.0, 1.0, 3.0):
            assert abs(limits.joint_position_type_survival(x, 0.0) - 1.0) < 1e-12

    def test_conditional_density_normalized(self):
        a = np.linspace(0.0, 16.0, 40001)
        for x in (-1.0, 0.0, 1.0):
            total = np.trapezoid(limits.conditional_type_density(a, x), a)
            assert abs(total - 1.0) < 1e-6

    def test_density_matches_derivative_of_survival(self):
        # Richardson-extrapolated central differences: truncation O(h^4)
        # and roundoff ~1e-13 at h = 1e-3, comfortably below 1e-8
        def diff(x, a, h):
            return -(limits.joint_position_type_survival(x, a + h)
                     - limits.joint_position_type_survival(x, a - h)) / (2 * h)
        h = 1e-3
        for x in (-1.5, -0.5, 0.0, 0.7, 2.0):
            for a in (0.1, 0.5, 1.0, 2.5):
                fd = (4.0 * diff(x, a, h / 2) - diff(x, a, h)) / 3.0
                assert abs(fd - limits.conditional_type_density(a, x)) < 1e-8

    def test_nonnegative(self):
        a, x = np.meshgrid(np.linspace(0, 8, 81), np.linspace(-4, 4, 41))
        assert np.all(limits.conditional_type_density(a, x) >= 0.0)


class TestTwoLeaderDensity:
    @staticmethod
    def _mass_by_branch():
        # integrate each branch over its own triangle with grids aligned
        # to the diagonal, where the density jumps
        a2 = np.linspace(0.0, 12.0, 1201)
        lower = np.empty_like(a2)
        upper = np.empty_like(a2)
        for i, v in enumerate(a2):
            a3 = np.linspace(0.0, v, 601)
            lower[i] = np.trapezoid(limits.joint_two_leader_density(v, a3), a3)
            a3 = np.linspace(v, 12.0, 601)
            upper[i] = np.trapezoid(limits.joint_two_leader_density(v, a3), a3)
        return np.trapezoid(lower, a2), np.trapezoid(upper, a2)

    def test_normalized(self):
        frac_lower, frac_upper = self._mass_by_branch()
        assert abs(frac_lower + frac_upper - 1.0) < 1e-3

    def test_first_leader_larger_half_the_time(self):
        frac_lower, _ = self._mass_by_branch()
        assert abs(frac_lower - 0.5) < 1e-3

    def test_marginal_is_single_leader_density(self):
        a3 = np.linspace(0.0, 14.0, 7001)
        for a2 in (0.3, 0.8, 1.5, 2.5):
            marg = np.trapezoid(limits.joint_two_leader_density(a2, a3), a3)
            assert abs(marg - limits.density_leader(a2)) < 1e-3

    def test_nonnegative_on_support(self):
        a = np.linspace(0.0, 10.0, 201)
        A2, A3 = np.meshgrid(a, a, indexing="ij")
        assert np.all(limits.joint_two_leader_density(A2, A3) >= -1e-15)

    def test_zero_off_support(self):
        assert limits.joint_two_leader_density(-0.5, 1.0) == 0.0
        assert limits.joint_two_leader_density(1.0, -0.5) == 0.0


class TestOracles:
    def test_first_branch_matches_oracle_derivative(self):
        # density at (a2, a3) with a2 > a3 equals the mixed derivative of
        # the joint survival Y evaluated with the smaller cutoff first
        f = lambda u, v: limits.oracle_Y(u, v, eps=3e-2)
        fd = mixed_fd_rich(f, 1.0, 2.0)
        closed = limits.joint_two_leader_density(2.0, 1.0)
        assert abs(fd - closed) / closed < 1e-4

    def test_second_branch_matches_oracle_derivative(self):
        f = lambda u, v: limits.oracle_Yhat(u, v, eps=3e-2)
        fd = mixed_fd_rich(f, 1.0, 2.0)
        closed = limits.joint_two_leader_density(1.0, 2.0)
        assert abs(fd - closed) / closed < 1e-4

    def test_oracle_Y_eps_independent(self):
        a = limits.oracle_Y(0.5, 1.5, eps=3e-2)
        b = limits.oracle_Y(0.5, 1.5, eps=1.5e-2)
        assert abs(a - b) < 1e-8

    def test_oracle_values_are_probabilities(self):
        y = limits.oracle_Y(0.5, 1.5, eps=3e-2)
        yh = limits.oracle_Yhat(0.5, 1.5, eps=3e-2)
        assert 0.0 < y < 1.0
        assert 0.0 < yh < 1.0
        # both events imply second-leader type >= the smaller cutoff
        assert y + yh < 1.0

    def test_seam_discrepancy_reported_against_oracles(self):
        # The two branches do NOT agree on the diagonal: the a2 < a3
        # branch vanishes there while the a2 > a3 branch does not.  Each
        # branch is confirmed against its own integral oracle next to the
        # seam, so the jump is a property of the law, not of this code.
        for a in (0.5, 1.0, 2.0):
            below = limits.joint_two_leader_density(a + 1e-9, a)
            above = limits.joint_two_leader_density(a, a + 1e-9)
            assert abs(above) < 1e-6
            assert below > 0.05
        fy = lambda u, v: limits.oracle_Y(u, v, eps=3e-2)
        fyh = lambda u, v: limits.oracle_Yhat(u, v, eps=3e-2)
        a = 1.0
        d_below = mixed_fd_rich(fy, a - 0.12, a + 0.12)
        d_above = mixed_fd_rich(fyh, a - 0.12, a + 0.12)
        assert abs(d_below - limits.joint_two_leader_density(a + 0.12, a - 0.12)) < 1e-4
        assert abs(d_above - limits.joint_two_leader_density(a - 0.12, a + 0.12)) < 1e-4
        assert abs(d_below - d_above) > 0.05


class TestLeaderChangesConstant:
    def test_value(self):
        c = limits.leader_changes_constant()
        assert 0.4134 < c < 0.4136
        assert c == pytest.approx(3.0 * math.sqrt(3.0) / (4.0 * math.pi), rel=1e-15)

    def test_matches_proof_integral(self):
        v = limits.leader_changes_rate_integral()
        assert abs(v - limits.leader_changes_constant()) < 1e-6

    def test_matches_finite_time_rate(self):
        p = contours.prob_adjacent_inverted(100.0)
        assert abs(100.0 * p.value - limits.leader_changes_constant()) \
            < 0.1 * limits.leader_changes_constant()


class TestErfAccuracy:
    def test_erf_against_series(self):
        # 20-term Maclaurin series, accurate far beyond 1e-14 for |z| <= 2
        def erf_series(z):
            s = 0.0
            for n in range(20):
                s += (-1) ** n * z ** (2 * n + 1) / (math.factorial(n) * (2 * n + 1))
            return 2.0 / math.sqrt(math.pi) * s
        for z in (0.1, 0.5, 1.0, 1.5, 2.0):
            # alternating series: truncation bounded by the first omitted term
            tail = 2.0 / math.sqrt(math.pi) * z ** 41 / (math.factorial(20) * 41)
            assert abs(erf(z) - erf_series(z)) < 1e-14 + tail
