"""Closed-form special functions for the CD(K,N) comparison class.

All functions accept scalars or numpy arrays and broadcast. Infinite
distortion is returned as ``math.inf`` (never raised).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError, InvalidParametersError

#: Below this magnitude K*theta**2 is treated as exactly zero.
ZERO_CURVATURE_TOL = 1e-14


@dataclass(frozen=True)
class CurvatureParams:
    """The comparison triple (K, N, D).

    ``D=None`` means "not given": it resolves to the Bonnet-Myers diameter
    ``pi*sqrt((N-1)/K)`` when K > 0 and to infinity otherwise.
    """

    K: float
    N: float
    D: float | None = None

    def __post_init__(self):
        K, N, D = float(self.K), float(self.N), self.D
        if not (math.isfinite(K) and math.isfinite(N)):
            raise InvalidParametersError(f"K and N must be finite, got K={K}, N={N}")
        if N < 1:
            raise InvalidParametersError(f"N must be >= 1, got {N}")
        if D is None:
            if K > 0:
                if N == 1:
                    raise DegenerateModelError(
                        "N=1 with K>0 only admits a point mass; no diameter default")
                D = math.pi * math.sqrt((N - 1) / K)
                if math.isinf(D):
                    raise InvalidParametersError(
                        f"K={K} is too small: the default diameter overflows")
            else:
                D = math.inf
        D = float(D)
        if not D > 0:
            raise InvalidParametersError(f"D must be > 0, got {D}")
        if math.isinf(D) and K > 0:
            raise InvalidParametersError("K > 0 forces a finite diameter (Bonnet-Myers)")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "D", D)

    @property
    def delta(self) -> float:
        """K/(N-1); undefined (raises) for N = 1."""
        if self.N == 1:
            raise InvalidParametersError("delta = K/(N-1) is undefined for N = 1")
        return self.K / (self.N - 1)

    @property
    def degenerate(self) -> bool:
        return self.N == 1 and self.K > 0

    @property
    def bonnet_myers_diameter(self) -> float:
        if self.K <= 0:
            return math.inf
        if self.N == 1:
            return 0.0
        return math.pi * math.sqrt((self.N - 1) / self.K)

    def as_dict(self) -> dict:
        return {"K": self.K, "N": self.N, "D": self.D}


def _scalar_or_array(out, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return float(out)
    return out


def s_delta(delta, t):
    """sin(sqrt(d) t)/sqrt(d), t, or sinh(sqrt(-d) t)/sqrt(-d) by the sign of d."""
    d = np.asarray(delta, dtype=float)
    t_ = np.asarray(t, dtype=float)
    rp = np.sqrt(np.where(d > 0, d, 1.0))
    rn = np.sqrt(np.where(d < 0, -d, 1.0))
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(d > 0, np.sin(rp * t_) / rp,
                       np.where(d < 0, np.sinh(rn * t_) / rn, t_))
    return _scalar_or_array(out, delta, t)


def c_delta(delta, t):
    """cos(sqrt(d) t), 1, or cosh(sqrt(-d) t) by the sign of d."""
    d = np.asarray(delta, dtype=float)
    t_ = np.asarray(t, dtype=float)
    rp = np.sqrt(np.where(d > 0, d, 1.0))
    rn = np.sqrt(np.where(d < 0, -d, 1.0))
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(d > 0, np.cos(rp * t_),
                       np.where(d < 0, np.cosh(rn * t_), np.ones_like(t_)))
    return _scalar_or_array(out, delta, t)


def sigma(K, N, t, theta):
    """Distortion coefficient sigma_{K,N}^{(t)}(theta), N >= 0.

    Returns ``inf`` where K*theta**2 >= N*pi**2. Products with |K theta^2|
    below ``ZERO_CURVATURE_TOL`` take the flat value ``t``.
    """
    K_ = np.asarray(K, dtype=float)
    N_ = np.asarray(N, dtype=float)
    t_ = np.asarray(t, dtype=float)
    th = np.asarray(theta, dtype=float)
    if np.any(N_ < 0):
        raise InvalidParametersError("sigma requires N >= 0")
    k2 = K_ * th * th
    flat = np.abs(k2) < ZERO_CURVATURE_TOL
    blow = (~flat) & (k2 >= N_ * math.pi ** 2)
    pos = (~flat) & (~blow) & (k2 > 0)
    neg = (~flat) & (k2 < 0) & (N_ > 0)
    # K theta^2 < 0 with N = 0 falls through to the flat value t
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        Nsafe = np.where(N_ > 0, N_, 1.0)
        xp = th * np.sqrt(np.where(pos, K_ / Nsafe, 0.0))
        xn = th * np.sqrt(np.where(neg, -K_ / Nsafe, 0.0))
        vpos = np.sin(t_ * xp) / np.sin(np.where(pos, xp, 1.0))
        vneg = np.sinh(t_ * xn) / np.sinh(np.where(neg, xn, 1.0))
    out = np.where(blow, np.inf, np.where(pos, vpos, np.where(neg, vneg, t_ * np.ones_like(k2))))
    return _scalar_or_array(out, K, N, t, theta)


def tau(K, N, t, theta):
    """tau_{K,N}^{(t)}(theta) = t^(1/N) sigma_{K,N-1}^{(t)}(theta)^((N-1)/N), N >= 1."""
    N_ = np.asarray(N, dtype=float)
    if np.any(N_ < 1):
        raise InvalidParametersError("tau requires N >= 1")
    s = np.asarray(sigma(K, N_ - 1, t, theta), dtype=float)
    t_ = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.power(t_, 1.0 / N_) * np.power(s, (N_ - 1) / N_)
    out = np.where(np.isinf(s), np.inf, out)
    return _scalar_or_array(out, K, N, t, theta)


@dataclass(frozen=True)
class TruncatedJacobian:
    """Support [xi_minus, xi_plus] of the truncated model Jacobian.

    ``degenerate`` marks the N=1, K>0 point mass, for which the interval
    collapses to {0}.
    """

    H: float
    params: CurvatureParams
    xi_minus: float
    xi_plus: float
    degenerate: bool = False

    def contains(self, t):
        t = np.asarray(t, dtype=float)
        return (t >= self.xi_minus) & (t <= self.xi_plus)


def phase_roots(cos_phi: float, sin_phi: float, delta: float) -> tuple[float, float]:
    """Roots bracketing 0 of g(t) = cos_phi*c_delta(t) + sin_phi*s_delta(t), cos_phi >= 0.

    Closed form per sign of delta. Returns (xi_minus, xi_plus) with
    infinities where g has no root on that side. At cos_phi = 0 the root at
    the origin is assigned to the side where g is non-positive.
    """
    if cos_phi < 0:
        raise ValueError("cos_phi must be >= 0")
    if delta > 0:
        r = math.sqrt(delta)
        # beta in [0, pi/2] is the phase of the root nearer the origin; taking
        # it against |sin_phi| avoids the cancellation in pi - atan2(.) as delta -> 0
        beta = math.atan2(cos_phi * r, abs(sin_phi))
        if sin_phi >= 0:
            return -beta / r, (math.pi - beta) / r
        return -(math.pi - beta) / r, beta / r
    if delta == 0:
        if sin_phi == 0:
            return -math.inf, math.inf
        root = -cos_phi / sin_phi
        return (root, math.inf) if sin_phi > 0 else (-math.inf, root)
    k = math.sqrt(-delta)
    if sin_phi == 0:
        return -math.inf, math.inf
    ratio = -k * cos_phi / sin_phi
    if abs(ratio) >= 1:
        return -math.inf, math.inf
    root = math.atanh(ratio) / k
    return (root, math.inf) if sin_phi > 0 else (-math.inf, root)


def jacobian_support(H: float, params: CurvatureParams) -> TruncatedJacobian:
    """First non-positive and first positive roots of c_delta + H/(N-1) s_delta."""
    K, N = params.K, params.N
    if N == 1:
        if K > 0:
            return TruncatedJacobian(H, params, 0.0, 0.0, degenerate=True)
        if H > 0:
            return TruncatedJacobian(H, params, 0.0, math.inf)
        if H < 0:
            return TruncatedJacobian(H, params, -math.inf, 0.0)
        return TruncatedJacobian(H, params, -math.inf, math.inf)
    slope = H / (N - 1)
    norm = math.hypot(1.0, slope)
    lo, hi = phase_roots(1.0 / norm, slope / norm, params.delta)
    return TruncatedJacobian(H, params, lo, hi)


def jacobian(H: float, params: CurvatureParams, t):
    """Model Jacobian J_{H,K,N}(t), truncated outside its root interval."""
    t_ = np.asarray(t, dtype=float)
    K, N = params.K, params.N
    if N == 1:
        if K > 0:
            out = (t_ == 0).astype(float)
        else:
            out = (H * t_ >= 0).astype(float)
        return _scalar_or_array(out, t)
    supp = jacobian_support(H, params)
    d = params.delta
    base = c_delta(d, t_) + H / (N - 1) * s_delta(d, t_)
    inside = supp.contains(t_)
    with np.errstate(invalid="ignore"):
        out = np.where(inside, np.power(np.clip(base, 0.0, None), N - 1), 0.0)
    return _scalar_or_array(out, t)
