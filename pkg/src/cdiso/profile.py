"""Isoperimetric profile and Cheeger constant of a single density.

The profile at mass v is minimized over four candidate families: a left
interval [alpha, r], a right interval [l, beta], an interior interval
[x, y], and the complement of an interior interval. Families 3 and 4 are
swept in the mass coordinate u = F(x) (256 positions), screened with an
interpolated quantile table, and refined exactly by golden-section search
wherever they come within ``refine_margin`` of the best half-line.

:func:`brute_force_profile` is the independent check on this ansatz.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._optim import golden_min
from .density1d import Density1D
from .errors import BudgetExceededError, InvalidParametersError
from .sets1d import IntervalUnion, perimeter

FAMILIES = ("left", "right", "interior", "two-sided-complement", "brute")

N_SWEEP = 256
REFINE_MARGIN = 1e-2


@dataclass(frozen=True)
class ProfilePoint:
    v: float
    value: float
    minimizer: IntervalUnion
    family_tag: str

    def as_dict(self) -> dict:
        return {"v": self.v, "value": self.value, "family_tag": self.family_tag,
                "minimizer": [list(p) for p in self.minimizer]}


def _hq(mu: Density1D, x):
    """h at x, zero on the domain ends (they are not boundary points)."""
    x = np.asarray(x, dtype=float)
    return np.where((x > mu.alpha) & (x < mu.beta), mu.h(x), 0.0)


def _set_for(mu: Density1D, family: str, x: float, y: float) -> IntervalUnion:
    if family == "left":
        return IntervalUnion(((mu.alpha, x),))
    if family == "right":
        return IntervalUnion(((x, mu.beta),))
    if family == "interior":
        return IntervalUnion(((x, y),))
    pieces = []
    if x > mu.alpha:
        pieces.append((mu.alpha, x))
    if y < mu.beta:
        pieces.append((y, mu.beta))
    return IntervalUnion(tuple(pieces))


def _refine_pair(mu: Density1D, gap: float, u_lo: float, u_hi: float):
    """min over u in [u_lo, u_hi] of h(F^-1(u)) + h(F^-1(u + gap)), exact."""
    def cost(u):
        xy = mu.quantile(np.array([u, min(u + gap, 1.0)]))
        return float(_hq(mu, xy).sum())

    u, c = golden_min(cost, u_lo, u_hi, tol=1e-10)
    x, y = mu.quantile(np.array([u, min(u + gap, 1.0)]))
    return c, float(x), float(y)


def density_profile_many(mu: Density1D, vs, *, n_sweep: int = N_SWEEP,
                         refine_margin: float = REFINE_MARGIN) -> list[ProfilePoint]:
    """:func:`density_profile` at every v in ``vs`` (shared work is vectorized)."""
    vs = np.atleast_1d(np.asarray(vs, dtype=float))
    if np.any((vs < 0) | (vs > 1)) or not np.all(np.isfinite(vs)):
        raise InvalidParametersError("v must lie in [0, 1]")
    out: list[ProfilePoint | None] = [None] * len(vs)
    inner = np.flatnonzero((vs > 0) & (vs < 1))
    for i in np.flatnonzero(vs <= 0):
        out[i] = ProfilePoint(0.0, 0.0, IntervalUnion(), "left")
    for i in np.flatnonzero(vs >= 1):
        out[i] = ProfilePoint(1.0, 0.0, IntervalUnion(((mu.alpha, mu.beta),)), "left")
    if inner.size == 0:
        return out
    v = vs[inner]
    r = mu.quantile(v)
    l = mu.quantile(1.0 - v)
    left, right = _hq(mu, r), _hq(mu, l)

    u_tab, x_tab, _ = mu.quantile_table
    q_tab = _hq(mu, x_tab)
    lin = np.linspace(0.0, 1.0, n_sweep)

    def screen(gap):
        # end positions reproduce the half-line families and are skipped
        U = lin[None, 1:-1] * (1.0 - gap)[:, None]
        cost = np.interp(U, u_tab, q_tab) + np.interp(U + gap[:, None], u_tab, q_tab)
        j = np.argmin(cost, axis=1)
        return cost[np.arange(len(gap)), j], j + 1

    s_int, j_int = screen(v)
    s_cmp, j_cmp = screen(1.0 - v)

    for k, i in enumerate(inner):
        vk = float(v[k])
        cands = [(float(left[k]), "left", float(r[k]), 0.0),
                 (float(right[k]), "right", float(l[k]), 0.0)]
        best = min(c[0] for c in cands)
        for fam, s, j, gap in (("interior", s_int[k], j_int[k], vk),
                               ("two-sided-complement", s_cmp[k], j_cmp[k], 1.0 - vk)):
            if s > best * (1.0 + refine_margin) + 1e-9:
                continue
            step = (1.0 - gap) / (n_sweep - 1)
            c, x, y = _refine_pair(mu, gap, max(0.0, (j - 1) * step),
                                   min(1.0 - gap, (j + 1) * step))
            cands.append((c, fam, x, y))
            best = min(best, c)
        val, fam, x, y = cands[0]
        for c in cands[1:]:
            if c[0] < val - 1e-12 * max(1.0, val):
                val, fam, x, y = c
        E = _set_for(mu, fam, x, y)
        out[i] = ProfilePoint(vk, perimeter(mu, E), E, fam)
    return out


def density_profile(mu: Density1D, v: float, **opts) -> ProfilePoint:
    """Isoperimetric profile I_mu(v) with its minimizing interval union."""
    return density_profile_many(mu, [v], **opts)[0]


def brute_force_profile(mu: Density1D, v: float, grid_n: int = 64, max_intervals: int = 2,
                        max_candidates: int = 2_000_000) -> float:
    """Exhaustive minimum perimeter over unions of <= max_intervals intervals.

    All endpoints but one sit on a uniform ``grid_n`` mesh of the domain;
    the remaining one (each position in turn) is solved from the mass
    constraint mu(E) = v.
    """
    if grid_n < 16:
        raise InvalidParametersError("grid_n must be >= 16")
    if not 1 <= max_intervals <= 3:
        raise InvalidParametersError("max_intervals must be in 1..3")
    if not 0 <= v <= 1:
        raise InvalidParametersError("v must lie in [0, 1]")
    if v == 0 or v == 1:
        return 0.0
    budget = sum(math.comb(grid_n, 2 * k - 1) * 2 * k for k in range(1, max_intervals + 1))
    if budget > max_candidates:
        raise BudgetExceededError(f"{budget} candidates exceed the cap {max_candidates}")
    mesh = np.linspace(mu.alpha, mu.beta, grid_n)
    Fm = mu.cdf(mesh)
    hm = _hq(mu, mesh)
    best = math.inf
    for k in range(1, max_intervals + 1):
        idx = np.array(list(combinations(range(grid_n), 2 * k - 1)), dtype=np.intp)
        for free in range(2 * k):
            fixed = np.insert(idx, free, -1, axis=1)  # -1 marks the free slot
            F = np.where(fixed >= 0, Fm[np.maximum(fixed, 0)], np.nan)
            owner = free // 2
            mass = np.zeros(len(idx))
            for j in range(k):
                if j != owner:
                    mass += F[:, 2 * j + 1] - F[:, 2 * j]
            need = v - mass
            if free % 2 == 0:
                target = F[:, free + 1] - need
                floor = F[:, free - 1] if free > 0 else np.full(len(idx), -np.inf)
                ok = (need > 0) & (target > floor) & (target >= 0)
            else:
                target = F[:, free - 1] + need
                ceil = F[:, free + 1] if free + 1 < 2 * k else np.full(len(idx), np.inf)
                ok = (need > 0) & (target < ceil) & (target <= 1)
            if not np.any(ok):
                continue
            x = mu.quantile(np.clip(target[ok], 0.0, 1.0))
            per = _hq(mu, x)
            others = np.where(fixed[ok] >= 0, hm[np.maximum(fixed[ok], 0)], 0.0).sum(axis=1)
            best = min(best, float((per + others).min()))
    return best


@dataclass(frozen=True)
class CheegerResult:
    value: float
    v: float
    point: ProfilePoint


def cheeger_search(mu: Density1D, *, n_grid: int = 48, v_min: float = 1e-3,
                   refine: bool = True) -> CheegerResult:
    """inf over v in (0, 1/2] of I_mu(v)/v: log-spaced grid, then golden refinement."""
    vs = np.unique(np.concatenate([np.geomspace(v_min, 0.5, n_grid), [0.5]]))
    pts = density_profile_many(mu, vs)
    ratios = np.array([p.value / p.v for p in pts])
    j = int(np.argmin(ratios))
    best = CheegerResult(float(ratios[j]), float(vs[j]), pts[j])
    if not refine:
        return best
    lo = vs[max(j - 1, 0)]
    hi = vs[min(j + 1, len(vs) - 1)]
    cache = {}

    def ratio(vv):
        p = density_profile(mu, vv)
        cache[vv] = p
        return p.value / vv

    vbest, rbest = golden_min(ratio, float(lo), float(hi), tol=1e-7)
    if rbest < best.value:
        best = CheegerResult(float(rbest), float(vbest), cache[vbest])
    return best


def density_cheeger(mu: Density1D, **opts) -> float:
    """Cheeger constant of the density: inf of P(E)/mu(E) over 0 < mu(E) <= 1/2."""
    return cheeger_search(mu, **opts).value


@dataclass
class ProfileTable:
    """Sampled profile v -> I(v); rows sorted by v.

    ``minimizers`` (model tables only) holds the (H*, a*) record per row.
    """

    points: list[ProfilePoint]
    meta: dict = field(default_factory=dict)
    minimizers: list | None = None

    def __post_init__(self):
        order = sorted(range(len(self.points)), key=lambda i: self.points[i].v)
        self.points = [self.points[i] for i in order]
        if self.minimizers is not None:
            self.minimizers = [self.minimizers[i] for i in order]

    @property
    def v(self) -> np.ndarray:
        return np.array([p.v for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key in sorted(self.meta):
            buf.write(f"# {key}: {json.dumps(self.meta[key], sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        if self.minimizers is not None:
            w.writerow(["v", "value", "H_star", "a_star", "family_tag"])
            for p, m in zip(self.points, self.minimizers):
                w.writerow([repr(p.v), repr(p.value), repr(m.H_star), repr(m.a_star), p.family_tag])
        else:
            w.writerow(["v", "value", "family_tag", "endpoints"])
            for p in self.points:
                w.writerow([repr(p.v), repr(p.value), p.family_tag, str(p.minimizer)])
        return buf.getvalue()

    def to_doc(self) -> dict:
        rows = []
        for i, p in enumerate(self.points):
            row = p.as_dict()
            if self.minimizers is not None:
                m = self.minimizers[i]
                row.update(H_star=_json_real(m.H_star), a_star=m.a_star, phi_star=m.phi_star)
            rows.append(row)
        return {"meta": self.meta, "rows": rows}


def _json_real(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")
