import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cdiso.density1d import constant_density, sample_synthetic_density, tabulated_density
from cdiso.errors import BudgetExceededError, InvalidParametersError
from cdiso.kernels import CurvatureParams
from cdiso.model import suspension_density
from cdiso.profile import (FAMILIES, ProfileTable, brute_force_profile, cheeger_search,
                           density_cheeger, density_profile, density_profile_many)
from cdiso.sets1d import IntervalUnion, measure, perimeter

from oracles import sphere_profile

SUSP2 = suspension_density(2.0)
UNIFORM = constant_density(0.0, 1.0)
SYNTH_PARAMS = [CurvatureParams(K, N, D) for K in (-1.0, 0.0, 1.0) for N in (1.5, 3.5)
                for D in (1.0, math.pi)]


class TestDensityProfile:
    def test_sphere_half(self):
        p = density_profile(SUSP2, 0.5)
        assert p.value == pytest.approx(0.5, abs=1e-12)
        assert p.minimizer.intervals[0] == pytest.approx((0.0, math.pi / 2))

    @pytest.mark.parametrize("v", [0.05, 0.2, 0.37, 0.8])
    def test_cap_oracle(self, v):
        assert density_profile(SUSP2, v).value == pytest.approx(sphere_profile(v), abs=1e-10)

    def test_uniform(self):
        p = density_profile(UNIFORM, 0.3)
        assert p.value == pytest.approx(1.0)
        assert p.minimizer.intervals[0] == pytest.approx((0.0, 0.3))
        assert p.family_tag == "left"

    def test_endpoints(self):
        assert density_profile(SUSP2, 0.0).value == 0.0
        assert density_profile(SUSP2, 0.0).minimizer.is_empty
        full = density_profile(SUSP2, 1.0)
        assert full.value == 0.0
        assert full.minimizer.intervals == ((0.0, math.pi),)

    def test_rejects_bad_v(self):
        with pytest.raises(InvalidParametersError):
            density_profile(SUSP2, 1.5)

    def test_interior_family_on_bimodal_table(self):
        # mass piled at both ends: cutting a middle interval is cheaper than a half-line
        mu = tabulated_density([0, 0.45, 0.55, 1], [10, 0.01, 0.01, 10])
        p = density_profile(mu, 0.5)
        assert p.family_tag in FAMILIES
        assert p.value <= brute_force_profile(mu, 0.5, grid_n=64) + 1e-9

    @settings(max_examples=25)
    @given(st.integers(0, 10_000), st.floats(0.01, 0.99), st.sampled_from(SYNTH_PARAMS))
    def test_minimizer_invariants(self, seed, v, params):
        mu = sample_synthetic_density(params, seed)
        p = density_profile(mu, v)
        assert measure(mu, p.minimizer) == pytest.approx(v, abs=1e-6)
        assert perimeter(mu, p.minimizer) == pytest.approx(p.value, abs=1e-9)
        assert p.family_tag in FAMILIES

    @settings(max_examples=25)
    @given(st.integers(0, 10_000), st.floats(0.01, 0.99), st.sampled_from(SYNTH_PARAMS))
    def test_symmetry(self, seed, v, params):
        mu = sample_synthetic_density(params, seed)
        a, b = density_profile_many(mu, [v, 1 - v])
        assert abs(a.value - b.value) < 1e-6

    @settings(max_examples=10)
    @given(st.integers(0, 10_000), st.floats(0.02, 0.98), st.sampled_from(SYNTH_PARAMS))
    def test_matches_brute_force(self, seed, v, params):
        mu = sample_synthetic_density(params, seed)
        bf = brute_force_profile(mu, v, grid_n=48, max_intervals=2)
        assert abs(density_profile(mu, v).value - bf) <= 1e-3

    def test_many_matches_single(self):
        mu = sample_synthetic_density(CurvatureParams(-1.0, 3.5, 2.0), 5)
        vs = [0.1, 0.5, 0.9]
        many = density_profile_many(mu, vs)
        for v, p in zip(vs, many):
            assert p.value == density_profile(mu, v).value


class TestBruteForce:
    def test_sphere(self):
        assert brute_force_profile(SUSP2, 0.5, grid_n=64, max_intervals=2) == pytest.approx(
            0.5, abs=1e-3)

    def test_uniform(self):
        assert brute_force_profile(UNIFORM, 0.5, grid_n=32, max_intervals=2) == pytest.approx(
            1.0, abs=1e-3)

    def test_trivial(self):
        assert brute_force_profile(UNIFORM, 1.0) == 0.0

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            brute_force_profile(UNIFORM, 0.5, grid_n=64, max_intervals=3, max_candidates=10_000)

    def test_small_grid_rejected(self):
        with pytest.raises(InvalidParametersError):
            brute_force_profile(UNIFORM, 0.5, grid_n=8)

    def test_never_below_exact_profile(self):
        # the oracle searches a subset of all unions, so it bounds the profile from above
        for v in (0.15, 0.5, 0.72):
            assert brute_force_profile(SUSP2, v, grid_n=32) >= sphere_profile(v) - 1e-12


class TestCheeger:
    def test_sphere(self):
        assert density_cheeger(SUSP2) == pytest.approx(1.0, abs=1e-9)

    def test_uniform(self):
        assert density_cheeger(UNIFORM) == pytest.approx(2.0, abs=1e-9)

    def test_bounded_by_half_member(self):
        mu = sample_synthetic_density(CurvatureParams(0.0, 2.0, 1.0), 3)
        assert density_cheeger(mu) <= 2 * density_profile(mu, 0.5).value + 1e-12

    def test_matches_grid_infimum(self):
        mu = sample_synthetic_density(CurvatureParams(1.0, 3.5, 2.0), 9)
        vs = np.linspace(0.005, 0.5, 200)
        grid = min(p.value / p.v for p in density_profile_many(mu, vs))
        assert density_cheeger(mu) <= grid + 1e-9
        assert density_cheeger(mu) >= grid - 1e-4

    def test_result_fields(self):
        res = cheeger_search(UNIFORM)
        assert res.v == pytest.approx(0.5)
        assert res.point.value == pytest.approx(1.0)


class TestProfileTable:
    def test_sorted_and_csv(self):
        pts = density_profile_many(UNIFORM, [0.7, 0.3])
        table = ProfileTable(pts, {"density": "uniform"})
        assert list(table.v) == [0.3, 0.7]
        lines = table.to_csv().splitlines()
        assert lines[0] == '# density: "uniform"'
        assert lines[1] == "v,value,family_tag,endpoints"
        assert lines[2].startswith("0.3,1.0,left,")

    def test_doc(self):
        doc = ProfileTable(density_profile_many(UNIFORM, [0.5])).to_doc()
        assert doc["rows"][0]["value"] == pytest.approx(1.0)
