"""Finite unions of closed intervals and their measure, perimeter and Minkowski content.

Endpoints lying on (or beyond) the ends of the ambient domain never
contribute to perimeter or Minkowski content: both are computed inside the
space [alpha, beta] itself, where such a point is not a boundary point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density1d import Density1D
from .errors import InvalidParametersError, RampOverlapError


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, pairwise disjoint closed intervals in canonical (merged) form."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        ivs = []
        for pair in self.intervals:
            a, b = (float(pair[0]), float(pair[1]))
            if not (math.isfinite(a) and math.isfinite(b)) or a > b:
                raise InvalidParametersError(f"bad interval [{a}, {b}]")
            ivs.append((a, b))
        ivs.sort()
        merged: list[tuple[float, float]] = []
        for a, b in ivs:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def parse(cls, text: str) -> "IntervalUnion":
        """Parse ``"a,b;c,d;..."``; an empty string is the empty set."""
        text = text.strip()
        if not text:
            return cls()
        pairs = []
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = chunk.split(",")
            if len(parts) != 2:
                raise InvalidParametersError(f"cannot parse interval {chunk!r}")
            pairs.append((_parse_real(parts[0]), _parse_real(parts[1])))
        return cls(tuple(pairs))

    @classmethod
    def from_doc(cls, doc) -> "IntervalUnion":
        if isinstance(doc, dict):
            doc = doc.get("intervals", [])
        try:
            return cls(tuple((p[0], p[1]) for p in doc))
        except (TypeError, IndexError):
            raise InvalidParametersError(f"malformed interval list {doc!r}") from None

    def to_doc(self) -> dict:
        return {"intervals": [list(p) for p in self.intervals]}

    def __str__(self) -> str:
        return ";".join(f"{a!r},{b!r}" for a, b in self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def has_degenerate(self) -> bool:
        return any(a == b for a, b in self.intervals)

    @property
    def endpoints(self) -> list[float]:
        return [x for pair in self.intervals for x in pair]

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.intervals + other.intervals)

    def distance(self, other: "IntervalUnion") -> float:
        best = math.inf
        for a, b in self.intervals:
            for c, d in other.intervals:
                best = min(best, max(0.0, c - b, a - d))
        return best


def _parse_real(s: str) -> float:
    s = s.strip().lower()
    if s in ("pi", "+pi"):
        return math.pi
    if s == "-pi":
        return -math.pi
    return float(s)


def measure(mu: Density1D, E: IntervalUnion) -> float:
    return float(sum(mu.integral(a, b) for a, b in E))


def _interior_h(mu: Density1D, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    inside = (pts > mu.alpha) & (pts < mu.beta)
    return np.where(inside, mu.h(pts), 0.0)


def perimeter(mu: Density1D, E: IntervalUnion) -> float:
    """Sum of h over interval endpoints (the one-dimensional representation formula).

    Degenerate intervals carry no mass and are dropped first.
    """
    pts = [x for a, b in E if b > a for x in (a, b)]
    if not pts:
        return 0.0
    return float(_interior_h(mu, pts).sum())


def minkowski_content(mu: Density1D, E: IntervalUnion) -> float:
    """Outer Minkowski content from one-sided density values at free endpoints.

    h is continuous inside the domain, so both one-sided limits equal h there;
    a degenerate interval {x} is enlarged on both sides and gives 2 h(x).
    """
    pts = [x for a, b in E for x in (a, b)]
    if not pts:
        return 0.0
    return float(_interior_h(mu, pts).sum())


def enlarge(E: IntervalUnion, eps: float, domain=None) -> IntervalUnion:
    out = IntervalUnion(tuple((a - eps, b + eps) for a, b in E))
    if domain is None:
        return out
    lo, hi = domain
    return IntervalUnion(tuple((max(a, lo), min(b, hi)) for a, b in out if b >= lo and a <= hi))


def minkowski_difference_quotient(mu: Density1D, E: IntervalUnion, eps: float) -> float:
    """(mu(E^eps) - mu(E)) / eps at a finite eps; converges to the content."""
    return (measure(mu, enlarge(E, eps, mu.domain)) - measure(mu, E)) / eps


def default_ramp_count(n: int) -> int:
    """Ramp schedule m(n) = n**2, so n * Lip(h) / m(n) -> 0."""
    return n * n


def relaxation_perimeter_oracle(mu: Density1D, E: IntervalUnion, n: int,
                                m: int | None = None) -> float:
    """Total variation of the piecewise-affine approximation u_n of the indicator of E.

    u_n equals 1 on the first n intervals, 0 outside their 1/m-enlargement, and
    is affine on the ramps; each ramp contributes m * mu(ramp). Ramps are never
    placed at the domain ends.
    """
    if n < 1:
        raise InvalidParametersError("n must be >= 1")
    m = default_ramp_count(n) if m is None else int(m)
    if m < 1:
        raise InvalidParametersError("m must be >= 1")
    w = 1.0 / m
    ivs = [(max(a, mu.alpha), min(b, mu.beta)) for a, b in E if b > a]
    ivs = [(a, b) for a, b in ivs if b > a][:n]
    total = 0.0
    prev_end = mu.alpha
    for i, (a, b) in enumerate(ivs):
        if a > mu.alpha:
            room = a - prev_end
            need = w if prev_end == mu.alpha else 2 * w
            if room <= need:
                raise RampOverlapError(f"ramp width 1/{m} does not fit before {a}")
            total += m * mu.integral(a - w, a)
        if b < mu.beta:
            nxt = ivs[i + 1][0] if i + 1 < len(ivs) else mu.beta
            need = 2 * w if i + 1 < len(ivs) else w
            if nxt - b <= need:
                raise RampOverlapError(f"ramp width 1/{m} does not fit after {b}")
            total += m * mu.integral(b, b + w)
        prev_end = b
    return float(total)


def complement(E: IntervalUnion, domain) -> IntervalUnion:
    """Closure of domain minus E, as a canonical union (degenerate pieces dropped)."""
    lo, hi = (float(domain[0]), float(domain[1]))
    out = []
    cur = lo
    for a, b in E:
        a, b = max(a, lo), min(b, hi)
        if b < a:
            continue
        if a > cur:
            out.append((cur, a))
        cur = max(cur, b)
    if cur < hi:
        out.append((cur, hi))
    return IntervalUnion(tuple(out))
