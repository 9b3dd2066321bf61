"""Model isoperimetric profile I_{K,N,D} and model Cheeger constant h_{K,N,D}.

Both are infima over the two-parameter family of normalized Jacobian
densities J_{H,K,N} on [-a, D-a]. The unbounded H is compactified through
H = (N-1) tan(phi), phi in [-pi/2, pi/2]; the end points phi = +-pi/2 are
the one-sided limit profiles and are admissible. The search is a coarse
(phi, a) grid followed by bounded Nelder-Mead from the best grid points.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import __version__
from .density1d import (Density1D, check_cd_density, model_density_phi, H_from_phi)
from .errors import (DegenerateModelError, InvalidParametersError, ZeroMassError)
from .kernels import CurvatureParams
from .profile import (ProfilePoint, ProfileTable, brute_force_profile, cheeger_search,
                      density_profile, density_profile_many)
from .sets1d import IntervalUnion

HALF_PI = math.pi / 2
THREADS_ENV = "CDISO_THREADS"


def thread_count() -> int:
    """Worker threads for grid evaluation, from the CDISO_THREADS environment variable."""
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SearchOptions:
    """Grid sizes and tolerances of the (phi, a) search."""

    n_phi: int = 33
    n_a: int = 33
    xtol: float = 1e-6
    ftol: float = 1e-10
    n_starts: int = 3
    max_evals: int = 400

    def as_dict(self) -> dict:
        return {"n_phi": self.n_phi, "n_a": self.n_a, "xtol": self.xtol, "ftol": self.ftol,
                "n_starts": self.n_starts, "max_evals": self.max_evals}


DEFAULT_OPTIONS = SearchOptions()


@dataclass(frozen=True)
class ModelMinimizer:
    H_star: float
    a_star: float
    point: ProfilePoint
    phi_star: float
    on_boundary: bool = False

    def as_dict(self) -> dict:
        H = self.H_star if math.isfinite(self.H_star) else ("inf" if self.H_star > 0 else "-inf")
        return {"H_star": H, "a_star": self.a_star, "phi_star": self.phi_star,
                "on_boundary": self.on_boundary, "point": self.point.as_dict()}


def _check_v(v: float) -> float:
    v = float(v)
    if not 0 <= v <= 1:
        raise InvalidParametersError(f"v must lie in [0, 1], got {v}")
    return v


def _trivial(v: float) -> ModelMinimizer:
    return ModelMinimizer(0.0, 0.0, ProfilePoint(v, 0.0, IntervalUnion(), "left"), 0.0)


def _phi_values(params: CurvatureParams, n_phi: int) -> np.ndarray:
    if params.N == 1:
        # J is an indicator; only the sign of H matters
        return np.array([-1.0, 0.0, 1.0])
    return np.linspace(-HALF_PI, HALF_PI, n_phi)


def _density(params: CurvatureParams, phi: float, a: float) -> Density1D | None:
    try:
        return model_density_phi(phi, params, a)
    except ZeroMassError:
        return None


def _minimizer(params: CurvatureParams, phi: float, a: float, point: ProfilePoint) -> ModelMinimizer:
    if params.N == 1:
        return ModelMinimizer(float(np.sign(phi)), a, point, phi, False)
    return ModelMinimizer(H_from_phi(phi, params.N), a, point, phi,
                          abs(abs(phi) - HALF_PI) < 1e-9)


def _coarse_grid(params, opts, evaluate, width):
    """Evaluate on the (phi, a) grid; returns rows (value-vector, phi, a)."""
    phis = _phi_values(params, opts.n_phi)
    avals = np.linspace(0.0, params.D, opts.n_a)
    grid = np.full((len(phis), len(avals), width), np.inf)

    def cell(ij):
        mu = _density(params, float(phis[ij[0]]), float(avals[ij[1]]))
        return None if mu is None else evaluate(mu)

    cells = [(i, j) for i in range(len(phis)) for j in range(len(avals))]
    n = thread_count()
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            out = list(pool.map(cell, cells))
    else:
        out = [cell(c) for c in cells]
    # results are placed by index, so the reduction does not depend on scheduling
    for (i, j), val in zip(cells, out):
        if val is not None:
            grid[i, j] = val
    return phis, avals, grid


def _starts(phis, avals, values, n_starts):
    """Best grid points, ties broken lexicographically on (phi, a)."""
    order = sorted(((values[i, j], phis[i], avals[j]) for i in range(len(phis))
                    for j in range(len(avals)) if np.isfinite(values[i, j])))
    return [(p, a) for _, p, a in order[:n_starts]]


def _refine(params, opts, scalar_obj, starts, phis, avals):
    """Bounded Nelder-Mead in (phi, a) from each start; best (value, phi, a)."""
    best = None
    dphi = (phis[1] - phis[0]) if len(phis) > 1 else 0.1
    da = avals[1] - avals[0]
    nm = {"xatol": opts.xtol, "fatol": opts.ftol, "maxfev": opts.max_evals}
    for phi0, a0 in starts:
        sa = da if a0 + da <= params.D else -da
        if params.N == 1:
            # only the sign of H matters; search over a alone
            res = minimize(lambda x: scalar_obj(phi0, x[0]), [a0], method="Nelder-Mead",
                           bounds=[(0.0, params.D)],
                           options={**nm, "initial_simplex": [[a0], [a0 + sa]]})
            cand = (float(res.fun), phi0, float(res.x[0]))
        else:
            sp = dphi if phi0 + dphi <= HALF_PI else -dphi
            simplex = [[phi0, a0], [phi0 + sp, a0], [phi0, a0 + sa]]
            res = minimize(lambda x: scalar_obj(x[0], x[1]), [phi0, a0], method="Nelder-Mead",
                           bounds=[(-HALF_PI, HALF_PI), (0.0, params.D)],
                           options={**nm, "initial_simplex": simplex})
            cand = (float(res.fun), float(res.x[0]), float(res.x[1]))
        if best is None or cand[0] < best[0]:
            best = cand
    return best


def _prepare(params: CurvatureParams):
    if params.degenerate:
        raise DegenerateModelError("N=1 with K>0: every model density is a point mass")


def model_profile_table(params: CurvatureParams, v_grid, opts: SearchOptions = DEFAULT_OPTIONS
                        ) -> ProfileTable:
    """I_{K,N,D} on a v-grid; the coarse (phi, a) grid is shared by all v."""
    _prepare(params)
    vs = np.array([_check_v(v) for v in np.atleast_1d(v_grid)], dtype=float)
    meta = {"K": params.K, "N": params.N, "D": _real(params.D), "options": opts.as_dict(),
            "artifact_version": __version__, "quantity": "model_profile"}
    if params.K <= 0 and math.isinf(params.D):
        pts = [ProfilePoint(float(v), 0.0, IntervalUnion(), "left") for v in vs]
        return ProfileTable(pts, meta, [_trivial(float(v)) for v in vs])

    inner = [float(v) for v in vs if 0 < v < 1]
    # v and 1-v give the same objective; search on the lower half only
    keys = sorted({min(v, 1 - v) for v in inner})
    results: dict[float, tuple[float, float, float]] = {}
    if keys:
        key_arr = np.array(keys)
        phis, avals, grid = _coarse_grid(
            params, opts, lambda mu: [p.value for p in density_profile_many(mu, key_arr)],
            len(keys))
        for k, v in enumerate(keys):
            results[v] = _search_one(params, opts, v, phis, avals, grid[:, :, k])
    pts, mins = [], []
    for v in vs:
        v = float(v)
        if v <= 0 or v >= 1:
            pts.append(ProfilePoint(v, 0.0, IntervalUnion() if v <= 0 else IntervalUnion(), "left"))
            mins.append(_trivial(v))
            continue
        val, phi, a = results[min(v, 1 - v)]
        mu = model_density_phi(phi, params, a)
        point = density_profile(mu, v)
        pts.append(point)
        mins.append(_minimizer(params, phi, a, point))
    return ProfileTable(pts, meta, mins)


def _search_one(params, opts, v, phis, avals, values):
    def obj(phi, a):
        mu = _density(params, float(phi), float(a))
        if mu is None:
            return math.inf
        return density_profile(mu, v).value

    starts = _starts(phis, avals, values, opts.n_starts)
    i, j = np.unravel_index(np.argmin(values), values.shape)
    best = (float(values[i, j]), float(phis[i]), float(avals[j]))
    ref = _refine(params, opts, obj, starts, phis, avals)
    if ref is not None and ref[0] < best[0]:
        best = ref
    return best


def model_profile(params: CurvatureParams, v: float, opts: SearchOptions = DEFAULT_OPTIONS
                  ) -> tuple[float, ModelMinimizer]:
    """I_{K,N,D}(v) and the (H*, a*) density attaining it (within tolerance)."""
    v = _check_v(v)
    _prepare(params)
    if v == 0 or v == 1 or (params.K <= 0 and math.isinf(params.D)):
        return 0.0, _trivial(v)
    table = model_profile_table(params, [v], opts)
    return float(table.points[0].value), table.minimizers[0]


@dataclass(frozen=True)
class ModelCheeger:
    value: float
    H_star: float
    a_star: float
    v_star: float
    phi_star: float


def model_cheeger_search(params: CurvatureParams, opts: SearchOptions = DEFAULT_OPTIONS,
                         n_v: int = 32) -> ModelCheeger:
    """h_{K,N,D} = inf over (H, a) of the Cheeger constant of the model density."""
    _prepare(params)
    if params.K <= 0 and math.isinf(params.D):
        return ModelCheeger(0.0, 0.0, 0.0, 0.5, 0.0)

    def quick(mu):
        return [cheeger_search(mu, n_grid=n_v, refine=False).value]

    phis, avals, grid = _coarse_grid(params, opts, quick, 1)
    values = grid[:, :, 0]

    def obj(phi, a):
        mu = _density(params, float(phi), float(a))
        return math.inf if mu is None else quick(mu)[0]

    i, j = np.unravel_index(np.argmin(values), values.shape)
    best = (float(values[i, j]), float(phis[i]), float(avals[j]))
    ref = _refine(params, opts, obj, _starts(phis, avals, values, opts.n_starts), phis, avals)
    if ref is not None and ref[0] < best[0]:
        best = ref
    _, phi, a = best
    res = cheeger_search(model_density_phi(phi, params, a), n_grid=n_v, refine=True)
    H = float(np.sign(phi)) if params.N == 1 else H_from_phi(phi, params.N)
    return ModelCheeger(res.value, H, a, res.v, phi)


def model_cheeger(params: CurvatureParams, opts: SearchOptions = DEFAULT_OPTIONS) -> float:
    return model_cheeger_search(params, opts).value


# --- spherical suspension -------------------------------------------------------

def suspension_density(N: float) -> Density1D:
    """c_N sin^(N-1) on [0, pi]; c_N = 1 / int_0^pi sin^(N-1) by quadrature."""
    if N < 2:
        raise InvalidParametersError("suspension density needs N >= 2")
    p = N - 1
    mu = Density1D((0.0, math.pi), lambda t: np.power(np.maximum(np.sin(t), 0.0), p),
                   label=f"suspension(N={N:g})")
    object.__setattr__(mu, "_doc_model", {"H": math.inf, "K": N - 1.0, "N": float(N),
                                          "a": 0.0, "D": math.pi})
    return mu


def suspension_constant(N: float) -> float:
    return 1.0 / suspension_density(N).Z


def cap_radius(N: float, v: float, xtol: float = 1e-12) -> float:
    """r in (0, pi) with int_0^r c_N sin^(N-1) = v, by bisection."""
    if not 0 < v < 1:
        raise InvalidParametersError("cap_radius needs v in (0, 1)")
    mu = suspension_density(N)
    lo, hi = 0.0, math.pi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mu.cdf(mid) < v:
            lo = mid
        else:
            hi = mid
        if hi - lo <= xtol:
            break
    return 0.5 * (lo + hi)


# --- one-dimensional main theorem ---------------------------------------------

@dataclass
class MainTheoremReport:
    rows: list = field(default_factory=list)
    worst_slack: float = math.inf
    violations: list = field(default_factory=list)
    tol: float = 1e-3

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"pass": self.passed, "worst_slack": self.worst_slack, "tol": self.tol,
                "violations": self.violations, "rows": self.rows}


def verify_main_theorem_1d(mu: Density1D, params: CurvatureParams, v_grid, *, tol: float = 1e-3,
                           brute: bool = True, brute_grid: int = 32, brute_intervals: int = 2,
                           opts: SearchOptions = DEFAULT_OPTIONS,
                           model_values=None) -> MainTheoremReport:
    """Check I_mu(v) >= I_{K,N,D}(v) - tol on a v-grid (profile and brute-force routes).

    ``model_values`` may carry precomputed I_{K,N,D} values aligned with v_grid.
    """
    cd = check_cd_density(mu, params)
    if not cd.passed:
        raise InvalidParametersError(
            f"density is not CD({params.K:g},{params.N:g}): worst slack {cd.worst_violation:.3g}")
    vs = [float(v) for v in v_grid]
    if model_values is None:
        model_values = model_profile_table(params, vs, opts).values
    report = MainTheoremReport(tol=tol)
    pts = density_profile_many(mu, vs)
    for v, p, m in zip(vs, pts, model_values):
        row = {"v": v, "profile": p.value, "model": float(m), "slack": p.value - float(m)}
        if brute:
            b = brute_force_profile(mu, v, grid_n=brute_grid, max_intervals=brute_intervals)
            row["brute"] = b
            row["brute_slack"] = b - float(m)
        report.rows.append(row)
        worst = min(row["slack"], row.get("brute_slack", math.inf))
        report.worst_slack = min(report.worst_slack, worst)
        if worst < -tol:
            report.violations.append(row)
    return report


def _real(x: float):
    return x if math.isfinite(x) else "inf"
