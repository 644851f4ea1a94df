"""Closed-form exponents and the two small vertex-enumeration problems.

Every function takes rationals (ints, Fractions, ``"p/q"`` strings, or floats
through their decimal repr) and returns exact Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import PreconditionError, VerificationError
from .exact import frac_str, to_fraction


def _q(*xs):
    return tuple(to_fraction(x) for x in xs)


def _require(cond: bool, msg: str):
    if not cond:
        raise PreconditionError(msg)


def furstenberg_conjecture(s, t) -> Fraction:
    s, t = _q(s, t)
    _require(0 <= s <= 1 and s <= t <= 2, "need s in [0,1] and t in [s,2]")
    return min(s + t, (3 * s + t) / 2, s + 1)


def furstenberg_baseline(s, t) -> Fraction:
    """The elementary lower bound min{t/2 + s, 2s}."""
    s, t = _q(s, t)
    _require(0 <= s <= 1 and 0 <= t <= 2, "need s in [0,1] and t in [0,2]")
    return min(t / 2 + s, 2 * s)


def gamma(t, s) -> Fraction:
    """Tube-count exponent t/2 + max{t, 2-t}/(2-s) * s/2."""
    t, s = _q(t, s)
    _require(0 < s < 1 and s <= t <= 2 - s, "need s in (0,1) and t in [s, 2-s]")
    return t / 2 + max(t, 2 - t) / (2 - s) * s / 2


@dataclass(frozen=True)
class FurstenbergBound:
    dimension: Fraction
    gamma: Fraction

    def to_dict(self) -> dict:
        return {"dimension": frac_str(self.dimension), "gamma": frac_str(self.gamma)}


def furstenberg_general(s, t) -> FurstenbergBound:
    g = gamma(t, s)
    return FurstenbergBound(to_fraction(s) + g, g)


REGIMES = ("hausdorff_packing", "borel_le1", "borel_ge1")


def projection_exceptional(t, u, regime: str) -> Fraction:
    t, u = _q(t, u)
    if regime == "hausdorff_packing":
        _require(0 <= t <= 2 and 0 <= u <= min(t, 1), "need 0 <= u <= min(t, 1)")
        return max(2 * u - t, Fraction(0))
    if regime == "borel_le1":
        _require(0 <= t <= 1 and 0 < u <= t, "need t <= 1 and 0 < u <= t")
        return max((2 * u - t) / (u + 1 - t), Fraction(0))
    if regime == "borel_ge1":
        _require(1 <= t <= 2 and 0 < u <= 1, "need t >= 1 and 0 < u <= 1")
        return max(2 - t / u, Fraction(0))
    raise PreconditionError(f"unknown regime {regime!r}; expected one of {REGIMES}")


def sumproduct_exponent(s, variant: str = "general") -> Fraction:
    """Multiplier of s in the exponent of max{|A+A|, |A.A|}."""
    (s,) = _q(s)
    _require(0 < s < Fraction(2, 3), "need s in (0, 2/3)")
    if variant == "general":
        return 1 + max(s, 1 - s) / (2 * (2 - s))
    if variant == "regular":
        return Fraction(5, 4)
    raise PreconditionError("variant must be 'general' or 'regular'")


def minimal_nonconcentration_exponent(s, t, u, sharp: bool = False) -> Fraction:
    s, t, u = _q(s, t, u)
    _require(0 < s <= 1 and 0 < t < 2 and 0 < u <= min(t, 2 - t),
             "need s in (0,1], t in (0,2), u in (0, min(t, 2-t)]")
    return t / 2 + s * u / (2 if sharp else 4)


# ---------------------------------------------------------------------------
# vertex enumeration

KAPPA_SLACK = 1   # the O(eta) slacks are instantiated as KAPPA_SLACK * eta


@dataclass(frozen=True)
class PolygonMin:
    minimum: Fraction
    vertex: tuple
    ties: tuple
    vertices: tuple
    kappa: int
    reference: Fraction
    meets_reference: bool

    def to_dict(self) -> dict:
        pt = lambda v: [frac_str(v[0]), frac_str(v[1])]
        return {"minimum": frac_str(self.minimum), "value": float(self.minimum),
                "vertex": pt(self.vertex), "ties": [pt(v) for v in self.ties],
                "vertices": [pt(v) for v in self.vertices], "kappa": self.kappa,
                "reference": frac_str(self.reference), "meets_reference": self.meets_reference}


def polygon_vertices(constraints) -> list:
    """Vertices of {x : a x + b y + c >= 0 for all (a, b, c)}, exact and sorted."""
    pts = set()
    for (a1, b1, c1), (a2, b2, c2) in combinations(constraints, 2):
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        x = (b1 * c2 - b2 * c1) / det
        y = (a2 * c1 - a1 * c2) / det
        if all(a * x + b * y + c >= 0 for a, b, c in constraints):
            pts.add((x, y))
    return sorted(pts)


def _minimize(constraints, obj, reference) -> PolygonMin:
    verts = polygon_vertices(constraints)
    if not verts:
        raise PreconditionError("the polygon is empty")
    vals = [obj(*v) for v in verts]
    m = min(vals)
    ties = tuple(v for v, f in zip(verts, vals) if f == m)
    return PolygonMin(m, ties[0], ties, tuple(verts), KAPPA_SLACK, reference, m >= reference)


def polygon_K(s, tbar, eta=0) -> list:
    """Half-planes (coefficients of a, h, 1) describing K."""
    s, tb, eta = _q(s, tbar, eta)
    k = KAPPA_SLACK * eta
    return [
        (Fraction(1), Fraction(0), Fraction(0)),              # a >= 0
        (Fraction(-1), Fraction(0), Fraction(1)),             # a <= 1
        (-s, Fraction(1), Fraction(0)),                       # h >= s a
        (2 - s, Fraction(-1), Fraction(0)),                   # h <= (2-s) a
        (2 - s, Fraction(-1), tb - (2 - s) * (1 - k)),        # tbar - h >= (2-s)(1 - a - k)
        (Fraction(-2), Fraction(1), 2 - tb),                  # tbar - h <= 2 (1 - a)
    ]


def lp_min_polygon_K(s, tbar, eta=0) -> PolygonMin:
    """Minimize (1-a) + a s/2 + h/2 over K; compared with gamma(tbar, s) - 2 KAPPA eta."""
    s, tb, eta = _q(s, tbar, eta)
    _require(0 < s < 1 and s <= tb <= 2 and eta >= 0, "need s in (0,1), tbar in [s,2], eta >= 0")
    ref_t = min(tb, 2 - s)
    ref = gamma(ref_t, s) - 2 * KAPPA_SLACK * eta if tb <= 2 - s else Fraction(0)
    return _minimize(polygon_K(s, tb, eta), lambda a, h: (1 - a) + a * s / 2 + h / 2, ref)


def polygon_L(s, t, eta=0) -> list:
    s, t, eta = _q(s, t, eta)
    k = KAPPA_SLACK * eta
    return [
        (Fraction(1), Fraction(0), Fraction(0)),              # b >= 0
        (Fraction(-1), Fraction(0), Fraction(1)),             # b <= 1
        (-s, Fraction(1), Fraction(0)),                       # h >= b s
        (2 - s, Fraction(-1), Fraction(0)),                   # h <= b (2-s)
        (Fraction(0), Fraction(-1), t + eta),                 # t - h >= -eta
        (-s, Fraction(1), s + k - t),                         # t - h <= s (1-b) + k
    ]


def lp_min_polygon_L(s, t, eta=0) -> PolygonMin:
    """Minimize (t-h) + (b s + h)/2 over L; compared with t/(2-s) - 2 KAPPA eta."""
    s, t, eta = _q(s, t, eta)
    _require(0 < s < 1 and 1 < t < 2 - s and eta >= 0, "need s in (0,1), t in (1, 2-s), eta >= 0")
    ref = t / (2 - s) - 2 * KAPPA_SLACK * eta
    return _minimize(polygon_L(s, t, eta), lambda b, h: (t - h) + (b * s + h) / 2, ref)


def dominance_violations(n: int = 100) -> list:
    """Grid points (s, t) where the proven bound leaves [baseline, conjecture]."""
    bad = []
    for i in range(1, n):
        s = Fraction(i, n)
        for j in range(n + 1):
            t = s + (2 - 2 * s) * Fraction(j, n)       # t in [s, 2-s]
            d = furstenberg_general(s, t).dimension
            if d > furstenberg_conjecture(s, t) or d < furstenberg_baseline(s, t):
                bad.append((s, t))
    return bad


def check_vertex_claims(res: PolygonMin):
    if not res.meets_reference:
        raise VerificationError("vertex minimum below the reference exponent",
                                witness=res.to_dict())
    return res
