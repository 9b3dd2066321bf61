"""The seven acceptance criteria, shared by the CLI and the test-suite."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .density1d import check_cd_density, constant_density, sample_synthetic_density
from .kernels import CurvatureParams, sigma, tau
from .localization import aggregate_perimeter_bound, build_suspension_fixture
from .model import (cap_radius, model_cheeger, model_profile, model_profile_table,
                    suspension_density)
from .profile import brute_force_profile, density_cheeger, density_profile_many
from .sets1d import (IntervalUnion, minkowski_content, minkowski_difference_quotient,
                     perimeter, relaxation_perimeter_oracle)

V_GRID = tuple(round(0.1 * k, 10) for k in range(1, 10))
SYNTH_K = (-1.0, 0.0, 1.0)
SYNTH_N = (1.5, 2.0, 3.5)
SYNTH_D = (1.0, 2.0, math.pi)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number}. {self.name} ({self.seconds:.1f}s) {self.detail}"


def _timed(number: int, name: str, fn) -> CriterionResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - t0)


def criterion_sphere(max_seconds: float = 60.0) -> CriterionResult:
    def run():
        t0 = time.perf_counter()
        table = model_profile_table(CurvatureParams(1.0, 2.0, math.pi), V_GRID)
        dt = time.perf_counter() - t0
        rel = [abs(float(val) / math.sqrt(v * (1 - v)) - 1) for v, val in zip(table.v, table.values)]
        return max(rel) <= 1e-3 and dt <= max_seconds, {
            "max_rel_err": max(rel), "runtime_s": round(dt, 2)}
    return _timed(1, "sphere profile sqrt(v(1-v))", run)


def criterion_cheeger() -> CriterionResult:
    def run():
        hm = model_cheeger(CurvatureParams(1.0, 2.0, math.pi))
        hu = density_cheeger(constant_density(0.0, 1.0))
        return abs(hm - 1) <= 1e-3 and abs(hu - 2) <= 1e-6, {
            "model_cheeger": hm, "uniform_cheeger": hu}
    return _timed(2, "model and uniform Cheeger constants", run)


def random_three_interval_unions(count: int, seed: int, lo: float, hi: float,
                                 min_gap: float = 0.01) -> list[IntervalUnion]:
    """Unions of three intervals with endpoints and gaps at least min_gap apart."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        pts = np.sort(rng.uniform(lo + min_gap, hi - min_gap, 6))
        if np.min(np.diff(pts)) < min_gap:
            continue
        out.append(IntervalUnion(tuple((float(pts[2 * i]), float(pts[2 * i + 1]))
                                       for i in range(3))))
    return out


def criterion_perimeter(count: int = 50, seed: int = 7) -> CriterionResult:
    def run():
        mu = suspension_density(2.0)
        n = 100  # m(n) = n^2 = 10^4 ramps per unit length
        oracle_err = content_err = quotient_err = 0.0
        for E in random_three_interval_unions(count, seed, 0.0, math.pi):
            p = perimeter(mu, E)
            oracle_err = max(oracle_err, abs(relaxation_perimeter_oracle(mu, E, n) - p))
            content_err = max(content_err, abs(minkowski_content(mu, E) - p))
            quotient_err = max(quotient_err,
                               abs(minkowski_difference_quotient(mu, E, 1e-7) - p))
        return oracle_err <= 1e-2 and content_err <= 1e-9, {
            "max_oracle_err": oracle_err, "max_content_err": content_err,
            "max_quotient_err(eps=1e-7)": quotient_err}
    return _timed(3, "perimeter representation", run)


def synthetic_cases(count: int = 200):
    """(params, seed) pairs cycling over the K x N x D grid."""
    combos = [CurvatureParams(K, N, D) for K, N, D in product(SYNTH_K, SYNTH_N, SYNTH_D)]
    return [(combos[s % len(combos)], s) for s in range(count)]


def criterion_main_theorem(count: int = 200, max_seconds: float = 600.0,
                           tol: float = 1e-3) -> CriterionResult:
    def run():
        t0 = time.perf_counter()
        models: dict = {}
        worst, violations = math.inf, []
        for params, seed in synthetic_cases(count):
            key = (params.K, params.N, params.D)
            if key not in models:
                models[key] = model_profile_table(params, V_GRID).values
            mu = sample_synthetic_density(params, seed)
            vals = np.array([p.value for p in density_profile_many(mu, V_GRID)])
            slack = vals - models[key]
            worst = min(worst, float(slack.min()))
            if slack.min() < -tol:
                violations.append({"seed": seed, "params": key, "slack": float(slack.min())})
        dt = time.perf_counter() - t0
        return not violations and dt <= max_seconds, {
            "densities": count, "worst_slack": worst, "violations": violations[:5],
            "runtime_s": round(dt, 1)}
    return _timed(4, "1D main theorem on synthetic densities", run)


def criterion_families(count: int = 30, seed: int = 11) -> CriterionResult:
    def run():
        rng = np.random.default_rng(seed)
        cases = synthetic_cases(27)
        worst = 0.0
        for k in range(count):
            params, _ = cases[k % len(cases)]
            mu = sample_synthetic_density(params, 1000 + k)
            v = float(rng.uniform(0.05, 0.95))
            dp = density_profile_many(mu, [v])[0].value
            bf = brute_force_profile(mu, v, grid_n=64, max_intervals=2)
            worst = max(worst, abs(dp - bf))
        return worst <= 1e-3, {"pairs": count, "max_abs_diff": worst}
    return _timed(5, "minimizer families vs brute force", run)


def criterion_needles() -> CriterionResult:
    def run():
        N = 3.0
        params = CurvatureParams(N - 1, N, math.pi)
        errs = {}
        for v in (0.2, 0.5):
            d, spec = build_suspension_fixture(N, 8, IntervalUnion(((0.0, cap_radius(N, v)),)))
            agg = aggregate_perimeter_bound(d, params, spec)
            model, _ = model_profile(params, v)
            errs[v] = abs(agg.lower_bound - model)
        r_err = abs(cap_radius(2.0, 0.25) - math.pi / 3)
        sym_err = max(abs(cap_radius(Nn, 1 - v) - (math.pi - cap_radius(Nn, v)))
                      for Nn in (2.0, 3.0, 3.5) for v in (0.1, 0.25, 0.4))
        ok = max(errs.values()) <= 1e-3 and r_err <= 1e-10 and sym_err <= 1e-10
        return ok, {"aggregate_err": errs, "cap_pi_over_3_err": r_err, "cap_symmetry_err": sym_err}
    return _timed(6, "needle aggregation equality case", run)


def criterion_structure() -> CriterionResult:
    def run():
        detail = {}
        # symmetry: model profile and the profiles of individual densities
        sym = 0.0
        for P in (CurvatureParams(1.0, 2.0, math.pi), CurvatureParams(-1.0, 3.5, 2.0)):
            vals = model_profile_table(P, V_GRID).values
            sym = max(sym, float(np.max(np.abs(vals - vals[::-1]))))
        for params, s in synthetic_cases(12):
            vals = np.array([p.value for p in
                             density_profile_many(sample_synthetic_density(params, s), V_GRID)])
            sym = max(sym, float(np.max(np.abs(vals - vals[::-1]))))
        detail["symmetry"] = sym
        # monotonicity in D
        tables = [model_profile_table(CurvatureParams(0.0, 2.0, D), V_GRID).values
                  for D in (1.0, 2.0, 4.0)]
        mono = min(float(np.min(tables[i] - tables[j])) for i in range(3)
                   for j in range(i + 1, 3))
        detail["monotonicity_min_gap"] = mono
        # sigma / tau continuity across K = 0
        eps, cont = 1e-6, 0.0
        for N in (1.5, 2.0, 3.5):
            for t in (0.25, 0.5, 0.75):
                for fn in (sigma, tau):
                    mid = float(fn(0.0, N, t, 1.0))
                    cont = max(cont, abs(float(fn(eps, N, t, 1.0)) - mid),
                               abs(float(fn(-eps, N, t, 1.0)) - mid))
        shrink = []
        for e in (1e-2, 1e-4, 1e-6):
            shrink.append(abs(float(sigma(e, 2.0, 0.5, 1.0)) - float(sigma(-e, 2.0, 0.5, 1.0))))
        decreasing = all(a > b for a, b in zip(shrink, shrink[1:]))
        detail["sigma_tau_jump"] = cont
        detail["jump_decreases"] = decreasing
        # CD equality slack of the suspension
        eq = 0.0
        for N in (2.0, 3.0, 3.5):
            rep = check_cd_density(suspension_density(N), CurvatureParams(N - 1, N))
            eq = max(eq, abs(rep.worst_violation), abs(rep.max_slack))
        detail["cd_equality_slack"] = eq
        ok = sym <= 1e-4 and mono >= -1e-4 and cont <= 1e-6 and decreasing and eq <= 1e-8
        return ok, detail
    return _timed(7, "structural properties", run)


CRITERIA = (criterion_sphere, criterion_cheeger, criterion_perimeter, criterion_main_theorem,
            criterion_families, criterion_needles, criterion_structure)


def run_all(selected=None, echo=None) -> list[CriterionResult]:
    results = []
    for k, fn in enumerate(CRITERIA, start=1):
        if selected and k not in selected:
            continue
        res = fn()
        if echo:
            echo(res.line())
        results.append(res)
    return results
