import json
import math
import warnings

import numpy as np
import pytest

from cdiso.density1d import Density1D, constant_density
from cdiso.errors import MalformedFixtureError, ValidationFailedError
from cdiso.kernels import CurvatureParams
from cdiso.localization import (Disintegration, IndicatorSpec, IntegrandSpec, Needle,
                                aggregate_perimeter_bound, build_suspension_fixture,
                                disintegration_from_doc, disintegration_to_doc,
                                read_disintegration, validate_disintegration,
                                write_disintegration)
from cdiso.model import SearchOptions, cap_radius, suspension_density
from cdiso.sets1d import IntervalUnion, perimeter

S2 = CurvatureParams(1.0, 2.0, math.pi)
S3 = CurvatureParams(2.0, 3.0, math.pi)
COARSE = SearchOptions(n_phi=17, n_a=17)


def cap(N, v):
    return IntervalUnion(((0.0, cap_radius(N, v)),))


class TestFixture:
    def test_total_mass(self):
        d, spec = build_suspension_fixture(2.0, 10, IntervalUnion(((0.0, math.pi / 2),)))
        assert len(d.needles) == 10
        assert d.total_mass == pytest.approx(1.0, abs=1e-12)
        assert spec.v == pytest.approx(0.5, abs=1e-12)

    def test_validates(self):
        d, spec = build_suspension_fixture(3.0, 5, cap(3.0, 0.3))
        assert validate_disintegration(d, S3, spec).passed

    def test_trace_outside(self):
        with pytest.raises(MalformedFixtureError):
            build_suspension_fixture(2.0, 3, IntervalUnion(((0.0, 4.0),)))


class TestValidate:
    def test_cd_failure_reported(self):
        bad = Density1D((0.1, 1.0), lambda t: t ** 2)
        good = suspension_density(2.0)
        d = Disintegration([Needle(0, 0.5, good), Needle(1, 0.5, bad)])
        spec = IndicatorSpec(0.5, (IntervalUnion(((0.0, math.pi / 2),)),
                                   IntervalUnion(((bad.quantile(0.5), 1.0),))))
        rep = validate_disintegration(d, S2, spec)
        assert not rep.passed
        assert [f["needle"] for f in rep.failures] == [1]
        assert rep.failures[0]["check"] == "cd"

    def test_zero_mean_failure_has_index(self):
        mu = suspension_density(2.0)
        d = Disintegration([Needle(q, 1 / 3, mu) for q in range(3)])
        traces = (cap(2.0, 0.5), IntervalUnion(((0.0, 1.0),)), cap(2.0, 0.5))
        rep = validate_disintegration(d, S2, IndicatorSpec(0.5, traces))
        assert [(f["needle"], f["check"]) for f in rep.failures] == [(1, "zero-mean")]

    def test_mass_failure(self):
        mu = suspension_density(2.0)
        d = Disintegration([Needle(0, 0.7, mu)])
        rep = validate_disintegration(d, S2, IndicatorSpec(0.5, (cap(2.0, 0.5),)))
        assert any(f["check"] == "mass" for f in rep.failures)

    def test_general_integrand(self):
        mu = suspension_density(2.0)
        d = Disintegration([Needle(0, 1.0, mu)])
        centered = IntegrandSpec(lambda q, t: t - math.pi / 2)
        shifted = IntegrandSpec(lambda q, t: t)
        assert validate_disintegration(d, S2, centered).passed
        assert not validate_disintegration(d, S2, shifted).passed

    def test_malformed(self):
        mu = suspension_density(2.0)
        d = Disintegration([Needle(0, 1.0, mu)])
        with pytest.raises(MalformedFixtureError):
            validate_disintegration(d, S2, IndicatorSpec(0.5, ()))
        with pytest.raises(MalformedFixtureError):
            validate_disintegration(Disintegration([Needle(0, -1.0, mu)]), S2,
                                    IndicatorSpec(0.5, (cap(2.0, 0.5),)))
        with pytest.raises(MalformedFixtureError):
            validate_disintegration(d, S2, {"v": 0.5})

    def test_nonzero_z_mass_is_a_warning(self):
        mu = suspension_density(2.0)
        d = Disintegration([Needle(0, 0.9, mu)], z_mass=0.1)
        rep = validate_disintegration(d, S2, IndicatorSpec(0.5, (cap(2.0, 0.5),)))
        assert rep.passed
        assert rep.warnings


class TestAggregate:
    @pytest.mark.parametrize("v", [0.2, 0.3, 0.5])
    def test_equality_case(self, v):
        d, spec = build_suspension_fixture(3.0, 6, cap(3.0, v))
        res = aggregate_perimeter_bound(d, S3, spec, opts=COARSE)
        r = cap_radius(3.0, v)
        assert res.lower_bound == pytest.approx(2 / math.pi * math.sin(r) ** 2, abs=1e-9)
        assert abs(res.lower_bound - res.model_value) <= 1e-3
        assert res.passed

    def test_two_interval_trace_strictly_larger(self):
        E = IntervalUnion(((0.0, 0.8), (2.0, 2.4)))
        d, spec = build_suspension_fixture(3.0, 4, E)
        res = aggregate_perimeter_bound(d, S3, spec, opts=COARSE)
        assert res.lower_bound >= res.model_value - 1e-3
        single = perimeter(suspension_density(3.0), cap(3.0, spec.v))
        assert res.lower_bound > single

    def test_zero_volume(self):
        d, spec = build_suspension_fixture(2.0, 3, IntervalUnion())
        res = aggregate_perimeter_bound(d, S2, spec)
        assert res.lower_bound >= 0.0 == res.model_value

    def test_linearity_and_order(self):
        mus = [suspension_density(2.0), suspension_density(2.0).restrict(0.0, 3.0)]
        d = Disintegration([Needle(5, 0.25, mus[1]), Needle(2, 0.75, mus[0])])
        traces = (IntervalUnion(((0.0, mus[0].quantile(0.4)),)),
                  IntervalUnion(((0.0, mus[1].quantile(0.4)),)))
        spec = IndicatorSpec(0.4, traces)
        res = aggregate_perimeter_bound(d, S2, spec, model_value=0.0)
        assert [n.q for n in d.needles] == [2, 5]
        expected = 0.0
        for n, p in zip(d.needles, res.per_needle):
            expected += n.weight * p
        assert res.lower_bound == expected

    def test_validation_failure_propagates(self):
        mu = suspension_density(2.0)
        d = Disintegration([Needle(0, 1.0, mu)])
        with pytest.raises(ValidationFailedError):
            aggregate_perimeter_bound(d, S2, IndicatorSpec(0.3, (cap(2.0, 0.5),)),
                                      model_value=0.0)

    def test_z_mass_warns(self):
        mu = suspension_density(2.0)
        d = Disintegration([Needle(0, 0.9, mu)], z_mass=0.1)
        with pytest.warns(UserWarning):
            aggregate_perimeter_bound(d, S2, IndicatorSpec(0.5, (cap(2.0, 0.5),)),
                                      model_value=0.5)

    def test_indicator_only(self):
        d, _ = build_suspension_fixture(2.0, 2, cap(2.0, 0.5))
        with pytest.raises(MalformedFixtureError):
            aggregate_perimeter_bound(d, S2, IntegrandSpec(lambda q, t: t))


class TestFileFormat:
    def test_roundtrip(self, tmp_path):
        d, spec = build_suspension_fixture(3.0, 4, cap(3.0, 0.3))
        path = tmp_path / "fixture.json"
        write_disintegration(str(path), d, spec, S3)
        doc = json.loads(path.read_text())
        assert set(doc) >= {"label", "z_mass", "needles", "v"}
        assert set(doc["needles"][0]) >= {"weight", "density", "e_trace"}
        d2, spec2 = read_disintegration(str(path))
        assert spec2.v == spec.v
        assert [n.weight for n in d2.needles] == [n.weight for n in d.needles]
        assert validate_disintegration(d2, S3, spec2).passed

    def test_v_defaults_to_first_trace(self):
        d, spec = build_suspension_fixture(2.0, 2, cap(2.0, 0.25))
        doc = disintegration_to_doc(d, spec)
        del doc["v"]
        _, spec2 = disintegration_from_doc(doc)
        assert spec2.v == pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("doc", [{}, {"needles": []}, {"needles": [{"weight": 1}]},
                                     {"needles": [{"weight": "x", "density": {}}]}])
    def test_malformed(self, doc):
        with pytest.raises(MalformedFixtureError):
            disintegration_from_doc(doc)

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(MalformedFixtureError):
            read_disintegration(str(path))
