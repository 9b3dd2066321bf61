"""Needle disintegrations: validation and the perimeter aggregation bound.

A disintegration is an input (a fixture or a file), never constructed
here. Each needle carries a weight, a 1D density in arclength coordinates
and the trace of the set E on that needle. Aggregation adds the weighted
needle perimeters in ascending needle index, so the sum is reproducible.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .density1d import Density1D, check_cd_density, density_from_doc
from .errors import CdisoError, MalformedFixtureError, ValidationFailedError
from .kernels import CurvatureParams
from .model import SearchOptions, DEFAULT_OPTIONS, model_profile, suspension_density
from .sets1d import IntervalUnion, measure, perimeter

MASS_TOL = 1e-9


@dataclass(frozen=True)
class Needle:
    q: int
    weight: float
    density: Density1D
    trace_map: Callable[[np.ndarray], Any] | None = None


@dataclass
class Disintegration:
    needles: list[Needle]
    z_mass: float = 0.0
    label: str = ""

    def __post_init__(self):
        self.needles = sorted(self.needles, key=lambda n: n.q)

    @property
    def total_mass(self) -> float:
        return math.fsum(n.weight for n in self.needles) + self.z_mass


@dataclass(frozen=True)
class IndicatorSpec:
    """f = chi_E - v, given by the trace of E on each needle (aligned with needle order)."""

    v: float
    traces: tuple[IntervalUnion, ...]


@dataclass(frozen=True)
class IntegrandSpec:
    """A general zero-mean f, evaluated per needle as ``f(q, t)``."""

    f: Callable[[int, np.ndarray], np.ndarray]


@dataclass
class ValidationReport:
    failures: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    total_mass: float = 1.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {"pass": self.passed, "total_mass": self.total_mass,
                "failures": self.failures, "warnings": self.warnings}


@dataclass
class AggregateResult:
    lower_bound: float
    per_needle: list[float]
    model_value: float
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"pass": self.passed, "lower_bound": self.lower_bound,
                "model_value": self.model_value, "per_needle": self.per_needle,
                "violations": self.violations, "warnings": self.warnings}


def _check_structure(d: Disintegration, f_spec) -> None:
    qs = [n.q for n in d.needles]
    if len(set(qs)) != len(qs):
        raise MalformedFixtureError("needle indices must be distinct")
    for n in d.needles:
        if not (n.weight >= 0 and math.isfinite(n.weight)):
            raise MalformedFixtureError(f"needle {n.q}: weight must be finite and >= 0")
    if not (d.z_mass >= 0 and math.isfinite(d.z_mass)):
        raise MalformedFixtureError("z_mass must be finite and >= 0")
    if isinstance(f_spec, IndicatorSpec):
        if not 0 <= f_spec.v <= 1:
            raise MalformedFixtureError("v must lie in [0, 1]")
        if len(f_spec.traces) != len(d.needles):
            raise MalformedFixtureError(
                f"{len(f_spec.traces)} traces for {len(d.needles)} needles")
        for n, E in zip(d.needles, f_spec.traces):
            if not isinstance(E, IntervalUnion):
                raise MalformedFixtureError(f"needle {n.q}: trace is not an interval union")
            if len(E) and (E.intervals[0][0] < n.density.alpha - 1e-12
                           or E.intervals[-1][1] > n.density.beta + 1e-12):
                raise MalformedFixtureError(f"needle {n.q}: trace leaves the needle domain")
    elif not isinstance(f_spec, IntegrandSpec):
        raise MalformedFixtureError("f_spec must be an IndicatorSpec or IntegrandSpec")


def validate_disintegration(d: Disintegration, params: CurvatureParams, f_spec, *,
                            tol: float = 1e-6, cd_grid: int = 100,
                            cd_tol: float = 1e-8) -> ValidationReport:
    """Per needle: the CD(K,N) inequality and the zero-mean balance of f."""
    _check_structure(d, f_spec)
    report = ValidationReport(total_mass=d.total_mass)
    if abs(report.total_mass - 1.0) > MASS_TOL:
        report.failures.append({"needle": None, "check": "mass",
                                "value": report.total_mass})
    if d.z_mass > 0:
        report.warnings.append(f"nonzero z_mass {d.z_mass!r}")
    for k, n in enumerate(d.needles):
        try:
            cd = check_cd_density(n.density, params, grid_n=cd_grid, tol=cd_tol)
        except CdisoError as exc:
            report.failures.append({"needle": n.q, "check": "cd", "error": exc.code,
                                    "message": str(exc)})
        else:
            if not cd.passed:
                report.failures.append({"needle": n.q, "check": "cd",
                                        "worst_violation": cd.worst_violation,
                                        "witness": list(cd.witness)})
        if isinstance(f_spec, IndicatorSpec):
            mean = measure(n.density, f_spec.traces[k]) - f_spec.v
        else:
            mean = n.density.expectation(lambda t, q=n.q: f_spec.f(q, t))
        if abs(mean) > tol:
            report.failures.append({"needle": n.q, "check": "zero-mean", "mean": mean})
    return report


def aggregate_perimeter_bound(d: Disintegration, params: CurvatureParams, f_spec: IndicatorSpec,
                              *, tol: float = 1e-3, model_value: float | None = None,
                              opts: SearchOptions = DEFAULT_OPTIONS,
                              validate_tol: float = 1e-6) -> AggregateResult:
    """Sum of weight_q * P_q(E_q) over needles, with each P_q checked against I_{K,N,D}(v)."""
    if not isinstance(f_spec, IndicatorSpec):
        raise MalformedFixtureError("aggregation is defined for indicator f only")
    report = validate_disintegration(d, params, f_spec, tol=validate_tol)
    if not report.passed:
        raise ValidationFailedError(f"disintegration failed validation: {report.failures}")
    if d.z_mass > 0:
        warnings.warn(f"disintegration {d.label!r} has nonzero z_mass {d.z_mass!r}",
                      stacklevel=2)
    if model_value is None:
        model_value, _ = model_profile(params, f_spec.v, opts)
    per = [perimeter(n.density, E) for n, E in zip(d.needles, f_spec.traces)]
    lower = 0.0
    for n, p in zip(d.needles, per):
        lower += n.weight * p
    violations = [{"needle": n.q, "perimeter": p, "slack": p - model_value}
                  for n, p in zip(d.needles, per) if p < model_value - tol]
    return AggregateResult(lower, per, float(model_value), violations, report.warnings)


def build_suspension_fixture(N: float, n_needles: int, E_trace: IntervalUnion
                             ) -> tuple[Disintegration, IndicatorSpec]:
    """n equal-weight meridian needles, each the suspension density with trace E."""
    if n_needles < 1:
        raise MalformedFixtureError("need at least one needle")
    if len(E_trace) and (E_trace.intervals[0][0] < 0 or E_trace.intervals[-1][1] > math.pi):
        raise MalformedFixtureError("trace must lie in [0, pi]")
    mu = suspension_density(N)
    needles = [Needle(q, 1.0 / n_needles, mu) for q in range(n_needles)]
    d = Disintegration(needles, 0.0, f"suspension(N={N:g}, n={n_needles})")
    return d, IndicatorSpec(measure(mu, E_trace), (E_trace,) * n_needles)


# --- file format ------------------------------------------------------------------

def disintegration_to_doc(d: Disintegration, f_spec: IndicatorSpec | None = None,
                          params: CurvatureParams | None = None) -> dict:
    doc: dict = {"label": d.label, "z_mass": d.z_mass, "needles": []}
    for k, n in enumerate(d.needles):
        row = {"q": n.q, "weight": n.weight, "density": n.density.to_doc()}
        if f_spec is not None:
            row["e_trace"] = [list(p) for p in f_spec.traces[k]]
        doc["needles"].append(row)
    if f_spec is not None:
        doc["v"] = f_spec.v
    if params is not None:
        doc["params"] = params.as_dict()
    return doc


def disintegration_from_doc(doc: dict, v: float | None = None
                            ) -> tuple[Disintegration, IndicatorSpec]:
    """Parse ``{label, z_mass, needles: [{weight, density, e_trace}], v?}``.

    Without an explicit v the first needle's trace mass is used.
    """
    if not isinstance(doc, dict) or not isinstance(doc.get("needles"), list):
        raise MalformedFixtureError("disintegration document needs a 'needles' list")
    needles, traces = [], []
    try:
        for k, row in enumerate(doc["needles"]):
            mu = density_from_doc(row["density"])
            needles.append(Needle(int(row.get("q", k)), float(row["weight"]), mu))
            traces.append(IntervalUnion.from_doc(row.get("e_trace", [])))
        z = float(doc.get("z_mass", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFixtureError(f"malformed needle entry: {exc}") from None
    if not needles:
        raise MalformedFixtureError("disintegration has no needles")
    order = sorted(range(len(needles)), key=lambda i: needles[i].q)
    needles = [needles[i] for i in order]
    traces = [traces[i] for i in order]
    if v is None:
        v = doc.get("v")
    if v is None:
        v = measure(needles[0].density, traces[0])
    d = Disintegration(needles, z, str(doc.get("label", "")))
    return d, IndicatorSpec(float(v), tuple(traces))


def read_disintegration(path: str, v: float | None = None):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedFixtureError(f"{path}: not a JSON document ({exc})") from None
    return disintegration_from_doc(doc, v)


def write_disintegration(path: str, d: Disintegration, f_spec: IndicatorSpec | None = None,
                         params: CurvatureParams | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(disintegration_to_doc(d, f_spec, params), fh, indent=1, sort_keys=True)
        fh.write("\n")
