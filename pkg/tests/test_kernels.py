import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cdiso.errors import DegenerateModelError, InvalidParametersError
from cdiso.kernels import (CurvatureParams, c_delta, jacobian, jacobian_support, s_delta,
                           sigma, tau)

from oracles import sigma_mp, taylor_cosh, taylor_sinh, tau_mp

# curvatures whose default diameter is representable
CURVATURES = st.floats(-3, 3).filter(lambda k: k <= 0 or k > 1e-300)


class TestCurvatureParams:
    def test_bonnet_myers_default(self):
        p = CurvatureParams(1.0, 2.0)
        assert p.D == pytest.approx(math.pi)
        assert CurvatureParams(2.0, 3.0).D == pytest.approx(math.pi)

    def test_nonpositive_curvature_defaults_to_infinite_diameter(self):
        assert math.isinf(CurvatureParams(0.0, 2.0).D)
        assert math.isinf(CurvatureParams(-1.0, 3.0).D)

    def test_positive_curvature_rejects_infinite_diameter(self):
        with pytest.raises(InvalidParametersError):
            CurvatureParams(1.0, 2.0, math.inf)

    @pytest.mark.parametrize("K,N,D", [(0, 0.5, 1), (0, 2, 0), (0, 2, -1), (math.nan, 2, 1)])
    def test_invalid(self, K, N, D):
        with pytest.raises(InvalidParametersError):
            CurvatureParams(K, N, D)

    def test_degenerate(self):
        with pytest.raises(DegenerateModelError):
            CurvatureParams(1.0, 1.0)
        assert CurvatureParams(1.0, 1.0, 1.0).degenerate
        assert not CurvatureParams(0.0, 1.0, 1.0).degenerate

    def test_delta(self):
        assert CurvatureParams(2.0, 3.0, 1.0).delta == 1.0
        with pytest.raises(InvalidParametersError):
            CurvatureParams(0.0, 1.0, 1.0).delta


class TestSC:
    def test_flat(self):
        assert s_delta(0, 2.0) == 2.0
        assert c_delta(0, 7.3) == 1.0

    def test_positive(self):
        assert s_delta(1, math.pi / 2) == pytest.approx(1.0, abs=1e-15)
        assert c_delta(1, 0) == 1.0

    def test_negative_against_series(self):
        assert s_delta(-1, 1.0) == pytest.approx(taylor_sinh(1.0), rel=1e-14)
        assert c_delta(-1, 1.0) == pytest.approx(taylor_cosh(1.0), rel=1e-14)
        assert s_delta(-1, 1.0) == pytest.approx(1.175201, abs=1e-6)
        assert c_delta(-1, 1.0) == pytest.approx(1.543080, abs=1e-6)

    def test_vectorized(self):
        t = np.linspace(0, 1, 5)
        np.testing.assert_allclose(s_delta(4.0, t), np.sin(2 * t) / 2)
        np.testing.assert_allclose(c_delta(-4.0, t), np.cosh(2 * t))

    @given(st.floats(-3, 3), st.sampled_from([1e-6, 1e-8, 1e-10]))
    def test_continuous_in_delta(self, t, eps):
        for f in (s_delta, c_delta):
            assert abs(f(eps, t) - f(0.0, t)) < 10 * eps * (1 + t ** 4)
            assert abs(f(-eps, t) - f(0.0, t)) < 10 * eps * (1 + t ** 4)


class TestSigma:
    def test_flat_branch(self):
        assert sigma(0.0, 3.0, 0.3, 5.0) == 0.3

    def test_infinite_branch(self):
        assert sigma(1.0, 1.0, 0.5, 2 * math.pi) == math.inf
        assert sigma(1.0, 1.0, 0.5, math.pi) == math.inf  # K theta^2 = N pi^2 exactly

    def test_sin_branch(self):
        assert sigma(1.0, 1.0, 0.5, math.pi / 2) == pytest.approx(math.sqrt(0.5), rel=1e-15)
        assert sigma(1.0, 1.0, 0.5, math.pi / 2) == pytest.approx(
            sigma_mp(1.0, 1.0, 0.5, math.pi / 2), rel=1e-14)

    def test_sinh_branch(self):
        assert sigma(-2.0, 3.0, 0.25, 1.3) == pytest.approx(sigma_mp(-2.0, 3.0, 0.25, 1.3),
                                                            rel=1e-13)

    def test_n_zero_negative_curvature_is_linear(self):
        assert sigma(-1.0, 0.0, 0.4, 2.0) == 0.4

    @given(st.floats(-5, 5), st.floats(0.5, 6), st.floats(0, 1), st.floats(0, 3))
    def test_matches_high_precision(self, K, N, t, theta):
        got = sigma(K, N, t, theta)
        ref = sigma_mp(K, N, t, theta)
        if math.isinf(ref):
            assert math.isinf(got)
        elif abs(K * theta ** 2) >= 1e-14:
            # near the blow-up the ratio is ill-conditioned; relative accuracy scales with it
            cond = 1.0 + abs(ref)
            assert got == pytest.approx(ref, rel=1e-9 * cond, abs=1e-12)

    @given(st.floats(-5, 5), st.floats(0.5, 6), st.floats(0, 3))
    def test_endpoint_values(self, K, N, theta):
        if not math.isinf(sigma(K, N, 1.0, theta)):
            assert sigma(K, N, 0.0, theta) == pytest.approx(0.0, abs=1e-15)
            assert sigma(K, N, 1.0, theta) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("eps", [1e-3, 1e-4, 1e-5, 1e-6])
    def test_continuity_across_zero(self, eps):
        for N in (1.0, 2.0, 3.5):
            for t in (0.25, 0.5, 0.75):
                mid = sigma(0.0, N, t, 1.0)
                assert abs(sigma(eps, N, t, 1.0) - mid) < eps
                assert abs(sigma(-eps, N, t, 1.0) - mid) < eps

    def test_broadcast(self):
        out = sigma(1.0, 2.0, np.array([0.25, 0.5]), np.array([1.0, 5.0]))
        assert out.shape == (2,)
        assert math.isinf(out[1])


class TestTau:
    def test_t_one(self):
        assert tau(1.0, 3.0, 1.0, 1.0) == pytest.approx(1.0)

    def test_flat_simplifies_to_t(self):
        assert tau(0.0, 4.0, 0.2, 3.0) == pytest.approx(0.2, rel=1e-14)

    def test_value(self):
        expected = math.sqrt(0.5) * math.sqrt(math.sqrt(0.5))
        assert tau(1.0, 2.0, 0.5, math.pi / 2) == pytest.approx(expected, rel=1e-14)
        assert tau(1.0, 2.0, 0.5, math.pi / 2) == pytest.approx(0.594603, abs=1e-6)

    def test_infinity_propagates(self):
        assert tau(1.0, 2.0, 0.5, 4.0) == math.inf

    def test_rejects_small_n(self):
        with pytest.raises(InvalidParametersError):
            tau(0.0, 0.5, 0.5, 1.0)

    @given(st.floats(-4, 4), st.floats(1.5, 6), st.floats(0.01, 1), st.floats(0.01, 2))
    def test_matches_high_precision(self, K, N, t, theta):
        ref = tau_mp(K, N, t, theta)
        got = tau(K, N, t, theta)
        if math.isinf(ref):
            assert math.isinf(got)
        elif abs(K * theta ** 2) >= 1e-14:
            assert got == pytest.approx(ref, rel=1e-9 * (1 + abs(ref)))


class TestJacobian:
    def test_n1_positive_curvature_point_mass(self):
        p = CurvatureParams(1.0, 1.0, 1.0)
        assert jacobian(0.0, p, 0.0) == 1.0
        assert jacobian(0.0, p, 0.1) == 0.0
        assert jacobian_support(0.0, p).degenerate

    def test_n1_half_line(self):
        p = CurvatureParams(0.0, 1.0, 10.0)
        assert jacobian(1.0, p, 3.0) == 1.0
        assert jacobian(1.0, p, -3.0) == 0.0
        assert jacobian(-1.0, p, -3.0) == 1.0
        assert jacobian(0.0, p, -3.0) == 1.0

    def test_cosine_support(self):
        p = CurvatureParams(1.0, 2.0, math.pi)
        s = jacobian_support(0.0, p)
        assert s.xi_minus == pytest.approx(-math.pi / 2)
        assert s.xi_plus == pytest.approx(math.pi / 2)
        assert jacobian(0.0, p, 0.0) == 1.0

    def test_truncated_outside_first_roots(self):
        p = CurvatureParams(1.0, 2.0, math.pi)
        # cos t is negative then positive again past 3 pi / 2; truncation keeps it 0
        assert jacobian(0.0, p, 2.0) == 0.0
        assert jacobian(0.0, p, 5.0) == 0.0

    @pytest.mark.parametrize("K", [1e-37, 1e-20, 1e-12])
    def test_tiny_positive_curvature_matches_flat_root(self, K):
        # as K -> 0+ the positive root of 1 + H t with H = -1 is t = 1
        s = jacobian_support(-1.0, CurvatureParams(K, 2.0))
        assert s.xi_plus == pytest.approx(1.0, rel=1e-9)
        assert s.xi_minus < -1e5
        s = jacobian_support(1.0, CurvatureParams(K, 2.0))
        assert s.xi_minus == pytest.approx(-1.0, rel=1e-9)

    def test_subnormal_curvature_rejected(self):
        with pytest.raises(InvalidParametersError, match="overflows"):
            CurvatureParams(1e-308, 4.0)

    @given(CURVATURES, st.floats(1.2, 5), st.floats(-20, 20))
    def test_support_roots_are_roots(self, K, N, H):
        p = CurvatureParams(K, N)
        s = jacobian_support(H, p)
        d = p.delta
        for r in (s.xi_minus, s.xi_plus):
            if math.isfinite(r):
                base = c_delta(d, r) + H / (N - 1) * s_delta(d, r)
                # rounding of the argument sqrt(delta)*r grows with |r|
                scale = (1 + abs(H) / (N - 1)) * (1 + abs(r))
                assert abs(base) < 1e-9 * scale
        assert s.xi_minus <= 0 < s.xi_plus or (s.xi_minus < 0 <= s.xi_plus)

    @given(CURVATURES, st.floats(1.2, 5), st.floats(-20, 20), st.floats(-10, 10))
    def test_nonnegative_and_zero_outside(self, K, N, H, t):
        p = CurvatureParams(K, N) if K > 0 else CurvatureParams(K, N, 5.0)
        s = jacobian_support(H, p)
        val = jacobian(H, p, t)
        assert val >= 0
        if t < s.xi_minus or t > s.xi_plus:
            assert val == 0.0
        elif s.xi_minus < t < s.xi_plus:
            assert val > 0 or math.isclose(t, s.xi_minus, abs_tol=1e-9) or \
                math.isclose(t, s.xi_plus, abs_tol=1e-9)

    def test_closed_forms(self):
        # delta = 0: (1 + H t)_+ ^ (N-1)
        p = CurvatureParams(0.0, 3.0, 5.0)
        assert jacobian(2.0, p, 0.5) == pytest.approx((1 + 1.0 * 0.5) ** 2)
        assert jacobian_support(2.0, p).xi_minus == pytest.approx(-1.0)
        # delta < 0: cosh - sinh has no root, cosh + 2 sinh has one at atanh(-1/2)
        q = CurvatureParams(-1.0, 2.0, 5.0)
        assert math.isinf(jacobian_support(-1.0, q).xi_plus)
        assert jacobian_support(2.0, q).xi_minus == pytest.approx(math.atanh(-0.5))
