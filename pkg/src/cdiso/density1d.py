"""One-dimensional probability densities h on [alpha, beta] and the CD(K,N) check.

A :class:`Density1D` is a closed-form (or interpolated) unnormalized weight
plus a normalization computed once at construction. Integrals go through a
composite Gauss-Legendre rule on a mesh that is geometrically graded toward
both ends of the base interval, so weights vanishing like (t - alpha)**p with
0 < p < 1 are still integrated to ~1e-13.

Several densities may share one cumulative table (``_Cumulative``): every
window [-a, D-a] of a model Jacobian is a view onto a single master curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np

from .errors import (DegenerateModelError, DomainTooLongError,
                     GenerationFailedError, InvalidParametersError,
                     NonNormalizedError, ZeroMassError)
from .kernels import CurvatureParams, phase_roots, sigma

KINDS = ("continuous", "constant", "tabulated")

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)
_GL_T = 0.5 * (_GL_X + 1.0)
_GL_W2 = 0.5 * _GL_W

_N_UNIFORM = 32
_GRADE_RATIO = 0.25
_GRADE_LEVELS = 24

BISECT_MAX_ITER = 60
BISECT_XTOL = 1e-12

# Views carrying less than this share of the master mass get their own table.
_MIN_VIEW_MASS = 1e-3

Weight = Callable[[np.ndarray], np.ndarray]


class _Cumulative:
    """Running integral G(x) = int_lo^x w(t) dt of a nonnegative weight on [lo, hi]."""

    def __init__(self, w: Weight, lo: float, hi: float, breakpoints=()):
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise InvalidParametersError(f"bad integration interval [{lo}, {hi}]")
        self.w = w
        self.lo, self.hi = float(lo), float(hi)
        width = (hi - lo) / _N_UNIFORM
        grade = width * _GRADE_RATIO ** np.arange(1, _GRADE_LEVELS + 1)
        edges = np.concatenate([
            np.linspace(lo, hi, _N_UNIFORM + 1), lo + grade, hi - grade,
            [b for b in breakpoints if lo < b < hi],
        ])
        edges = np.unique(edges)
        self.edges = edges
        left = edges[:-1, None]
        span = np.diff(edges)[:, None]
        vals = w(left + span * _GL_T[None, :])
        panel = (span[:, 0] * (vals @ _GL_W2))
        self.cum = np.concatenate([[0.0], np.cumsum(panel)])
        self.total = float(self.cum[-1])

    def __call__(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        p = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.edges) - 2)
        left = self.edges[p]
        span = x - left
        nodes = left[..., None] + span[..., None] * _GL_T
        part = span * (self.w(nodes) @ _GL_W2)
        return self.cum[p] + part

    def invert(self, target, lo=None, hi=None):
        """Solve G(x) = target on [lo, hi] (vectorized safeguarded Newton/bisection)."""
        target = np.asarray(target, dtype=float)
        a = np.full(target.shape, self.lo if lo is None else lo, dtype=float)
        b = np.full(target.shape, self.hi if hi is None else hi, dtype=float)
        # bracket by panel: cum is nondecreasing
        k = np.clip(np.searchsorted(self.cum, target, side="left") - 1, 0, len(self.edges) - 2)
        a = np.maximum(a, self.edges[k])
        b = np.minimum(b, self.edges[k + 1])
        ga = self.cum[k]
        gb = self.cum[k + 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(gb > ga, (target - ga) / (gb - ga), 0.5)
        x = a + np.clip(frac, 0.0, 1.0) * (b - a)
        scale = max(self.hi - self.lo, 1.0)
        for _ in range(BISECT_MAX_ITER):
            g = self(x) - target
            a = np.where(g <= 0, x, a)
            b = np.where(g >= 0, x, b)
            done = (b - a <= BISECT_XTOL * scale) | (np.abs(g) <= 1e-15 * max(self.total, 1e-300))
            if np.all(done):
                break
            d = np.asarray(self.w(x), dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                xn = x - g / d
            bad = ~np.isfinite(xn) | (xn <= a) | (xn >= b)
            x = np.where(done, x, np.where(bad, 0.5 * (a + b), xn))
        return x


@dataclass(frozen=True, eq=False)
class Density1D:
    """Probability density h/Z on the closed interval ``domain``; zero outside.

    ``weight`` is the unnormalized evaluator; it is only ever called on
    points of the base interval of the underlying cumulative table.
    """

    domain: tuple[float, float]
    weight: Weight
    kind: str = "continuous"
    breakpoints: tuple = ()
    label: str = ""
    _cum: _Cumulative | None = field(default=None, repr=False)

    def __post_init__(self):
        lo, hi = (float(self.domain[0]), float(self.domain[1]))
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
            raise ZeroMassError(f"degenerate or unbounded domain [{lo}, {hi}]")
        if self.kind not in KINDS:
            raise InvalidParametersError(f"unknown density kind {self.kind!r}")
        object.__setattr__(self, "domain", (lo, hi))
        cum = self._cum
        if cum is None or cum.lo > lo or cum.hi < hi:
            cum = _Cumulative(self.weight, lo, hi, self.breakpoints)
        g_lo, g_hi = (float(v) for v in cum(np.array([lo, hi])))
        Z = g_hi - g_lo
        if cum.total > 0 and Z < _MIN_VIEW_MASS * cum.total and (cum.lo, cum.hi) != (lo, hi):
            cum = _Cumulative(self.weight, lo, hi, self.breakpoints)
            g_lo, Z = 0.0, cum.total
        if not (Z > 0 and math.isfinite(Z)):
            raise ZeroMassError(f"weight has no mass on [{lo}, {hi}]")
        object.__setattr__(self, "_cum", cum)
        object.__setattr__(self, "_g_lo", g_lo)
        object.__setattr__(self, "Z", Z)

    @property
    def alpha(self) -> float:
        return self.domain[0]

    @property
    def beta(self) -> float:
        return self.domain[1]

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    def h(self, t):
        """Normalized density; 0 outside the domain."""
        t_ = np.asarray(t, dtype=float)
        inside = (t_ >= self.alpha) & (t_ <= self.beta)
        vals = self.weight(np.clip(t_, self.alpha, self.beta)) / self.Z
        out = np.where(inside, vals, 0.0)
        return float(out) if np.ndim(t) == 0 else out

    __call__ = h

    def cdf(self, x):
        x_ = np.clip(np.asarray(x, dtype=float), self.alpha, self.beta)
        out = np.clip((self._cum(x_) - self._g_lo) / self.Z, 0.0, 1.0)
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, u):
        """Smallest-bracket inverse of the cdf (monotone root-finding)."""
        u_ = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        x = self._cum.invert(self._g_lo + u_ * self.Z, self.alpha, self.beta)
        x = np.where(u_ <= 0, self.alpha, np.where(u_ >= 1, self.beta, x))
        return float(x) if np.ndim(u) == 0 else x

    def integral(self, x, y) -> float:
        """Mass of [x, y] intersected with the domain."""
        lo, hi = max(x, self.alpha), min(y, self.beta)
        if hi <= lo:
            return 0.0
        g = self._cum(np.array([lo, hi]))
        return float((g[1] - g[0]) / self.Z)

    def expectation(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        """int f h/Z over the domain, on the density's own quadrature mesh."""
        edges = self._cum.edges
        edges = np.unique(np.clip(edges, self.alpha, self.beta))
        left = edges[:-1, None]
        span = np.diff(edges)[:, None]
        nodes = left + span * _GL_T[None, :]
        vals = fn(nodes) * self.weight(nodes)
        return float((span[:, 0] * (vals @ _GL_W2)).sum() / self.Z)

    def restrict(self, lo: float, hi: float, label: str = "") -> "Density1D":
        """The renormalized restriction to [lo, hi] (must lie inside the domain)."""
        lo, hi = max(lo, self.alpha), min(hi, self.beta)
        out = Density1D((lo, hi), self.weight, self.kind, self.breakpoints,
                        label or self.label, self._cum)
        model = getattr(self, "_doc_model", None)
        if model is not None:
            object.__setattr__(out, "_doc_model", model)
        return out

    @cached_property
    def quantile_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(u, x, h) with u = F(x) on an x-grid graded toward both ends; for screening.

        Built forward (no root-finding), so every row is an exact (F(x), x) pair.
        """
        geo = self.length * np.logspace(-8, -2.5, 12)
        x = np.unique(np.concatenate([np.linspace(self.alpha, self.beta, 1025),
                                      self.alpha + geo, self.beta - geo]))
        u = self.cdf(x)
        return u, x, self.h(x)

    def check_normalized(self, tol: float = 1e-9) -> None:
        if not abs(self.integral(self.alpha, self.beta) - 1.0) <= tol:
            raise NonNormalizedError(f"density {self.label!r} does not integrate to 1")

    def to_doc(self) -> dict:
        doc = {"kind": getattr(self, "_doc_kind", "table"), "domain": list(self.domain)}
        model = getattr(self, "_doc_model", None)
        if model is not None:
            doc["kind"] = "model"
            doc["model"] = {k: (v if math.isfinite(v) else ("inf" if v > 0 else "-inf"))
                            for k, v in model.items()}
        else:
            ts = np.asarray(self.breakpoints if self.breakpoints else
                            np.linspace(self.alpha, self.beta, 257))
            doc["kind"] = "table"
            doc["table"] = [[float(t), float(self.weight(np.asarray(t)))] for t in ts]
        return doc


def quadrature(mu: Density1D, interval) -> float:
    """int over interval ∩ domain of h/Z; the interval may be unbounded."""
    x, y = interval
    return mu.integral(float(x), float(y))


def constant_density(lo: float, hi: float, label: str = "uniform") -> Density1D:
    return Density1D((lo, hi), lambda t: np.ones_like(np.asarray(t, dtype=float)),
                     kind="constant", label=label)


def tabulated_density(ts, hs, label: str = "table") -> Density1D:
    """Piecewise-linear interpolation of samples (t_i, h_i), t increasing."""
    ts = np.asarray(ts, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if ts.ndim != 1 or ts.shape != hs.shape or len(ts) < 2:
        raise InvalidParametersError("table needs matching 1-D arrays with >= 2 rows")
    if np.any(np.diff(ts) <= 0):
        raise InvalidParametersError("table abscissae must be strictly increasing")
    if np.any(hs < 0) or not np.all(np.isfinite(hs)):
        raise InvalidParametersError("table values must be finite and >= 0")

    def w(t):
        return np.interp(t, ts, hs)

    return Density1D((ts[0], ts[-1]), w, kind="tabulated",
                     breakpoints=tuple(ts.tolist()), label=label)


# --- model Jacobian densities ------------------------------------------------

def phi_from_H(H: float, N: float) -> float:
    """Compactified coordinate: H = (N-1) tan(phi)."""
    if math.isinf(H):
        return math.copysign(math.pi / 2, H)
    return math.atan(H / (N - 1))


def H_from_phi(phi: float, N: float) -> float:
    if abs(abs(phi) - math.pi / 2) < 1e-15:
        return math.copysign(math.inf, phi)
    return (N - 1) * math.tan(phi)


@lru_cache(maxsize=4096)
def _model_master(K: float, N: float, D: float, phi: float):
    """Shared cumulative for the Jacobian with angle phi over all windows in [-D, D]."""
    cphi, sphi = max(math.cos(phi), 0.0), math.sin(phi)
    if abs(abs(phi) - math.pi / 2) < 1e-15:
        cphi = 0.0
    delta = K / (N - 1)
    xi_lo, xi_hi = phase_roots(cphi, sphi, delta)
    lo, hi = max(xi_lo, -D), min(xi_hi, D)
    p = N - 1
    if delta > 0:
        r = math.sqrt(delta)

        def base(t):
            return cphi * np.cos(r * t) + (sphi / r) * np.sin(r * t)
    elif delta < 0:
        k = math.sqrt(-delta)

        def base(t):
            return cphi * np.cosh(k * t) + (sphi / k) * np.sinh(k * t)
    else:
        def base(t):
            return cphi + sphi * t

    if p == 1:
        def w(t):
            return np.maximum(base(t), 0.0)
    else:
        def w(t):
            return np.power(np.maximum(base(t), 0.0), p)

    if hi <= lo:
        return w, lo, hi, None
    return w, lo, hi, _Cumulative(w, lo, hi)


def model_density_phi(phi: float, params: CurvatureParams, a: float) -> Density1D:
    """J_{H,K,N} on [-a, D-a] with H = (N-1) tan(phi); |phi| = pi/2 gives the limit profiles."""
    K, N, D = params.K, params.N, params.D
    if not math.isfinite(D):
        raise InvalidParametersError("model densities need a finite diameter D")
    if not 0 <= a <= D:
        raise InvalidParametersError(f"a must lie in [0, D], got {a}")
    if params.degenerate:
        raise DegenerateModelError("N=1, K>0: the model Jacobian is a point mass")
    if N == 1:
        # J = indicator of {H t >= 0}; only the sign of H matters
        lo, hi = -a, D - a
        if phi > 0:
            lo = max(lo, 0.0)
        elif phi < 0:
            hi = min(hi, 0.0)
        if hi <= lo:
            raise ZeroMassError("window misses the support of the Jacobian")
        mu = constant_density(lo, hi, label=f"model(phi={phi:.6g},a={a:.6g})")
    else:
        w, slo, shi, cum = _model_master(K, N, D, float(phi))
        lo, hi = max(-a, slo), min(D - a, shi)
        if cum is None or hi - lo <= 1e-12 * max(D, 1.0):
            raise ZeroMassError("window misses the support of the Jacobian")
        mu = Density1D((lo, hi), w, "continuous", (), f"model(phi={phi:.6g},a={a:.6g})", cum)
    object.__setattr__(mu, "_doc_model", {
        "H": H_from_phi(phi, N) if N > 1 else float(np.sign(phi)),
        "K": K, "N": N, "a": a, "D": D})
    return mu


def make_model_density(H: float, params: CurvatureParams, a: float) -> Density1D:
    """Normalized J_{H,K,N} restricted to [-a, D-a] (support = window ∩ root interval)."""
    if params.N == 1:
        phi = float(np.sign(H))
    else:
        phi = phi_from_H(H, params.N)
    return model_density_phi(phi, params, a)


# --- curvature check ----------------------------------------------------------

@dataclass
class CDReport:
    passed: bool
    worst_violation: float
    witness: tuple | None
    grid_n: int
    tol: float
    max_slack: float = math.nan  # largest slack over pairs with finite sigma, nonzero ends

    def as_dict(self) -> dict:
        return {"pass": self.passed, "worst_violation": self.worst_violation,
                "max_slack": self.max_slack,
                "witness": list(self.witness) if self.witness else None,
                "grid_n": self.grid_n, "tol": self.tol}


def cd_mesh(lo: float, hi: float, n: int) -> np.ndarray:
    """Chebyshev-Lobatto mesh: clustered near both ends, endpoints included."""
    k = np.arange(n)
    return lo + (hi - lo) * 0.5 * (1 - np.cos(np.pi * k / (n - 1)))


def check_cd_density(mu: Density1D, params: CurvatureParams, grid_n: int = 100,
                     tol: float = 1e-8, s_values=(0.25, 0.5, 0.75)) -> CDReport:
    """Grid test of the sigma-concavity of h^(1/(N-1)).

    Slack is h(ts)^p - sigma^(1-s) h(t0)^p - sigma^(s) h(t1)^p with p = 1/(N-1),
    over all mesh pairs t0 < t1. A zero endpoint value kills its term even
    when sigma is infinite; values below tol count as zero.
    """
    if grid_n < 2:
        raise InvalidParametersError("grid_n must be >= 2")
    if mu.length > params.D * (1 + 1e-12):
        raise DomainTooLongError(
            f"support length {mu.length:.6g} exceeds diameter bound {params.D:.6g}")
    t = cd_mesh(mu.alpha, mu.beta, grid_n)
    hv = mu.h(t)
    if params.N == 1:
        dev = np.abs(hv - hv.mean())
        i = int(np.argmax(dev))
        worst = -float(dev[i])
        return CDReport(worst >= -tol, worst, (float(t[i]),), grid_n, tol, 0.0)
    p = 1.0 / (params.N - 1)
    i0, i1 = np.triu_indices(grid_n, k=1)
    t0, t1 = t[i0], t[i1]
    H0, H1 = np.power(hv[i0], p), np.power(hv[i1], p)
    H0 = np.where(H0 <= tol, 0.0, H0)
    H1 = np.where(H1 <= tol, 0.0, H1)
    theta = t1 - t0
    worst, witness, top = math.inf, None, -math.inf
    for s in s_values:
        ts = (1 - s) * t0 + s * t1
        lhs = np.power(mu.h(ts), p)
        sa = sigma(params.K, params.N - 1, 1 - s, theta)
        sb = sigma(params.K, params.N - 1, s, theta)
        with np.errstate(invalid="ignore"):
            rhs = np.where(H0 > 0, sa * H0, 0.0) + np.where(H1 > 0, sb * H1, 0.0)
        slack = lhs - rhs
        finite = np.isfinite(sa) & np.isfinite(sb) & ((H0 > 0) | (H1 > 0))
        if np.any(finite):
            top = max(top, float(np.max(slack[finite])))
        j = int(np.argmin(slack))
        if slack[j] < worst:
            worst = float(slack[j])
            witness = (float(t0[j]), float(t1[j]), float(s))
    return CDReport(worst >= -tol, worst, witness, grid_n, tol, top)


def sample_synthetic_density(params: CurvatureParams, seed: int, *, shrink_prob: float = 0.5,
                             grid_n: int = 40, tol: float = 1e-8,
                             max_tries: int = 100) -> Density1D:
    """Random member of the synthetic class F^s_{K,N,D}, deterministic in ``seed``.

    Draws phi uniformly on [-pi/2, pi/2] (H = (N-1) tan phi) and a on [0, D],
    optionally restricts to a random sub-interval, and keeps the first draw
    that passes :func:`check_cd_density`.
    """
    if params.N <= 1:
        raise InvalidParametersError("synthetic sampling needs N > 1")
    if not math.isfinite(params.D):
        raise InvalidParametersError("synthetic sampling needs a finite D")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        phi = rng.uniform(-math.pi / 2, math.pi / 2)
        a = rng.uniform(0.0, params.D)
        shrink = rng.uniform() < shrink_prob
        frac, start = rng.uniform(0.3, 1.0), rng.uniform()
        try:
            mu = model_density_phi(phi, params, a)
            if shrink:
                width = frac * mu.length
                lo = mu.alpha + start * (mu.length - width)
                mu = mu.restrict(lo, lo + width)
        except ZeroMassError:
            continue
        if check_cd_density(mu, params, grid_n=grid_n, tol=tol).passed:
            object.__setattr__(mu, "label", f"synthetic(seed={seed})")
            return mu
    raise GenerationFailedError(f"no admissible density after {max_tries} draws (seed={seed})")


def density_from_doc(doc: dict) -> Density1D:
    """Parse ``{domain, kind: model|table, model: {H,K,N,a,D}, table: [[t,h],...]}``."""
    kind = doc.get("kind")
    if kind == "model":
        m = doc.get("model") or {}
        try:
            params = CurvatureParams(float(m["K"]), float(m["N"]), float(m["D"]))
            mu = make_model_density(float(m["H"]), params, float(m.get("a", 0.0)))
        except KeyError as exc:
            raise InvalidParametersError(f"model density missing field {exc}") from None
        except (TypeError, ValueError) as exc:
            raise InvalidParametersError(f"bad model density field: {exc}") from None
        dom = doc.get("domain")
        if dom is not None and (dom[0] > mu.alpha + 1e-12 or dom[1] < mu.beta - 1e-12):
            mu = mu.restrict(max(float(dom[0]), mu.alpha), min(float(dom[1]), mu.beta))
        return mu
    if kind == "table":
        rows = np.asarray(doc.get("table", []), dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 2:
            raise InvalidParametersError("table must be a list of [t, h] pairs")
        mu = tabulated_density(rows[:, 0], rows[:, 1])
        dom = doc.get("domain")
        if dom is not None and (abs(dom[0] - mu.alpha) > 1e-12 or abs(dom[1] - mu.beta) > 1e-12):
            mu = mu.restrict(float(dom[0]), float(dom[1]))
        return mu
    raise InvalidParametersError(f"unknown density kind {kind!r}")
