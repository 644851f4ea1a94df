"""Generators for example inputs: Cantor-type sets, progressions, Elekes
sum-product configurations and the sharpness configuration for the minimal
non-concentration Furstenberg estimate.

Every generator is a pure function of its arguments; randomness comes only
from ``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dyadic_core import DyadicSet, ancestors
from .errors import PreconditionError, VerificationError
from .exact import Pow2Rational, frac_str, to_fraction
from .frostman import frostman_constant
from .incidence import NiceConfiguration, tube_contains_points


# ---------------------------------------------------------------------------
# Cantor-type sets

def _child_offsets(dim: int, T: int) -> np.ndarray:
    axes = [np.arange(1 << T, dtype=np.int64)] * dim
    return np.array(np.meshgrid(*axes, indexing="ij")).reshape(dim, -1).T


def cantor_set(T: int, N, dim: int = 1, seed: int = 0, ambient: str = "unit",
               mode: str = "random") -> DyadicSet:
    """Uniform set with branching numbers ``N[j]`` at stage ``j`` (each a power of 2).

    ``mode="random"`` picks children by a seeded shuffle per parent,
    ``mode="first"`` takes the lexicographically smallest children.
    """
    N = [int(n) for n in N]
    if T < 1:
        raise PreconditionError("T must be a positive integer")
    if ambient not in ("unit", "shifted"):
        raise PreconditionError("Cantor sets live in the unit or shifted ambient")
    nchild = 1 << (dim * T)
    for n in N:
        if not 1 <= n <= nchild or n & (n - 1):
            raise PreconditionError(f"branching number {n} must be a power of 2 in [1, {nchild}]")
    rng = np.random.default_rng(seed)
    offs = _child_offsets(dim, T)
    cur = np.zeros((1, dim), dtype=np.int64)
    for n in N:
        if mode == "random":
            pick = np.argsort(rng.random((len(cur), nchild)), axis=1, kind="stable")[:, :n]
            pick.sort(axis=1)
        elif mode == "first":
            pick = np.broadcast_to(np.arange(n), (len(cur), n))
        else:
            raise PreconditionError(f"unknown mode {mode!r}")
        cur = ((cur << T)[:, None, :] + offs[pick]).reshape(-1, dim)
    level = T * len(N)
    if ambient == "shifted":
        cur = cur + (1 << level)
    return DyadicSet.from_array(dim, level, cur, ambient, check=False)


def regular_branching(s, level: int, dim: int = 1) -> list:
    """Per-level branching 2^(floor(s j) - floor(s (j-1))), so that |P|_{2^-j} = 2^floor(s j)."""
    s = to_fraction(s)
    if not 0 <= s <= dim:
        raise PreconditionError("s must lie in [0, dim]")
    return [1 << (math.floor(s * j) - math.floor(s * (j - 1))) for j in range(1, level + 1)]


def cantor_regular(s, level: int, dim: int = 1, seed: int = 0, ambient: str = "unit",
                   mode: str = "random") -> DyadicSet:
    """A regular Cantor set of exponent ``s``; coarsenings of finer outputs (same seed)
    reproduce coarser outputs."""
    return cantor_set(1, regular_branching(s, level, dim), dim, seed, ambient, mode)


def progression(level: int, step_level: int, ambient: str = "shifted") -> DyadicSet:
    """Cells at spacing 2^-step_level: a discretized arithmetic progression."""
    if not 0 <= step_level <= level:
        raise PreconditionError("need 0 <= step_level <= level")
    base = (1 << level) if ambient == "shifted" else 0
    idx = base + (np.arange(1 << step_level, dtype=np.int64) << (level - step_level))
    return DyadicSet.from_array(1, level, idx[:, None], ambient, check=False)


def random_subsample(P: DyadicSet, fraction, seed: int = 0) -> DyadicSet:
    """Seeded subset with floor(fraction |P|) cells (at least one)."""
    f = to_fraction(fraction)
    if not 0 < f <= 1:
        raise PreconditionError("fraction must lie in (0, 1]")
    if f == 1 or len(P) == 0:
        return P
    n = max(1, math.floor(f * len(P)))
    idx = np.sort(np.random.default_rng(seed).choice(len(P), n, replace=False))
    return DyadicSet.from_array(P.dim, P.level, P.array[idx], P.ambient, check=False)


# ---------------------------------------------------------------------------
# Elekes configuration

@dataclass(frozen=True)
class ElekesConfiguration:
    """Points (a+b, ac) and lines y = cx - bc, together with the dual nice configuration.

    In the dual picture the coordinates are normalized by
    ``(x, y) -> (y/4, x/8)`` so that everything fits the unit square at level
    ``k+3``: each line becomes a point ``(1/(2c), b/8)`` and each sum-product
    point becomes a tube of slope ``-ac/4`` and intercept ``(a+b)/8``.
    """
    level: int
    A: DyadicSet
    B: DyadicSet
    C: DyadicSet
    points: DyadicSet               # cells of (a+b, ac) in the plane, level k
    nice: NiceConfiguration          # dual configuration at level k+3
    identity_ok: bool
    dedup_loss: Fraction             # worst |A| / distinct cells on one line

    def to_dict(self) -> dict:
        return {"level": self.level, "sizes": [len(self.A), len(self.B), len(self.C)],
                "points": len(self.points), "lines": len(self.B) * len(self.C),
                "M": self.nice.M, "identity_ok": self.identity_ok,
                "dedup_loss": frac_str(self.dedup_loss),
                "dual_level": self.nice.points.level, "C": self.nice.C.to_dict()}


def _shifted_1d(X: DyadicSet, name: str):
    if X.dim != 1 or X.ambient != "shifted":
        raise PreconditionError(f"{name} must be a 1-dim set in the shifted ambient [1, 2)")
    if len(X) == 0:
        raise PreconditionError(f"{name} is empty")


def elekes_identity_mask(k: int, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """For integer cell indices (level k) of a, b, c: does the line y = cx - bc meet the
    cell of (a+b, ac) in the closed column, half-open row sense?"""
    X = a + b
    Y = (a * c) >> k
    # along the column [X, X+1] 2^-k the line runs from c a 4^-k to c (a+1) 4^-k
    ylo = c * (X - b)
    yhi = c * (X + 1 - b)
    return (ylo < (Y + 1) << k) & (yhi >= Y << k)


def elekes_config(A: DyadicSet, B: DyadicSet, C: DyadicSet, s=None) -> ElekesConfiguration:
    for X, nm in ((A, "A"), (B, "B"), (C, "C")):
        _shifted_1d(X, nm)
    if not A.level == B.level == C.level:
        raise PreconditionError("A, B, C must share a level")
    k = A.level
    a = A.array[:, 0]
    b = B.array[:, 0]
    c = C.array[:, 0]

    # primal: every (a, b, c) incidence at cell resolution
    aa, bb, cc = np.meshgrid(a, b, c, indexing="ij")
    ok = bool(elekes_identity_mask(k, aa.ravel(), bb.ravel(), cc.ravel()).all())
    X = (aa + bb).ravel()
    Y = ((aa * cc) >> k).ravel()
    pts = DyadicSet.from_array(2, k, np.stack([X, Y], axis=1), "plane")
    # per line the x-coordinates a+b are distinct cells, so no two points merge
    lid = (np.arange(len(b))[None, :, None] * len(c) + np.arange(len(c))[None, None, :])
    lid = np.broadcast_to(lid, aa.shape).ravel()
    ukeys = np.unique((lid << (2 * k + 6)) + (X << (k + 3)) + Y)
    distinct = np.bincount(ukeys >> (2 * k + 6), minlength=len(b) * len(c))
    loss = Fraction(len(a), int(distinct.min()))

    # dual
    kd = k + 3
    alpha = (1 << (2 * k + 2)) // c                 # floor(2^(k+3) / (2c))
    dual_pts = [(int(al), int(bv)) for bv in b for al in alpha]
    fams = []
    for bv in b:
        for cv in c:
            slope = -((2 * a * cv) >> k) - 1
            icpt = a + bv
            fams.append(DyadicSet.from_array(2, kd, np.stack([slope, icpt], 1), "param",
                                             check=False))
    order = sorted(range(len(dual_pts)), key=lambda i: dual_pts[i])
    P = DyadicSet.from_cells(2, kd, [dual_pts[i] for i in order], "unit")
    if len(P) != len(dual_pts):
        raise VerificationError("dual points collided")
    fams = tuple(fams[i] for i in order)
    s_val = to_fraction(s) if s is not None else Fraction(0)
    Cmax = max((frostman_constant(f, s_val).C for f in fams), default=Pow2Rational.of(1))
    nice = NiceConfiguration(P, fams, s_val, Cmax, len(a))
    return ElekesConfiguration(k, A, B, C, pts, nice, ok, loss)


# ---------------------------------------------------------------------------
# sharpness configuration

def _round_half_even(q: Fraction) -> int:
    return round(q)                      # Fraction.__round__ rounds half to even


def _choose_levels(k: int, t: Fraction, u: Fraction):
    """Integer levels for Delta and rho.

    The Delta level is the nearest integer to k u; an exact tie goes to the
    candidate for which the rho level needs no rounding (so |P_0| hits
    2^(kt) exactly), and otherwise to the even candidate.
    """
    x = k * u
    lo, hi = math.floor(x), math.ceil(x)
    cands = sorted({lo, hi}, key=lambda K: (abs(K - x),
                                            ((2 * k - K - k * t) / 2).denominator != 1,
                                            K % 2))
    Kd = cands[0]
    return Kd, _round_half_even((2 * k - Kd - k * t) / 2)


def _farey_slopes(n: int, level: int):
    """The ``n`` reduced fractions in [0, 1) of smallest denominator (ties by numerator),
    floored to the level grid; returns the sorted slope indices and the largest denominator."""
    out = set()
    q = 0
    while len(out) < n:
        q += 1
        if q > (1 << level):
            raise PreconditionError("too many base slopes for the Delta grid")
        for p in range(q):
            if math.gcd(p, q) == 1 and len(out) < n:
                out.add((p << level) // q)
    return np.array(sorted(out), dtype=np.int64), q


@dataclass
class SharpnessConfiguration:
    s: Fraction
    t: Fraction
    u: Fraction
    k: int
    K_delta: int
    K_rho: int
    L: int
    Q: int
    base_points: np.ndarray         # level K_delta cells
    base_slopes: np.ndarray         # level K_delta slope indices
    base_tubes: int
    points: np.ndarray              # level k cells of P_0
    slopes: np.ndarray              # level k slope indices of Theta_0
    tubes: int                      # |T_0|
    checks: dict = field(default_factory=dict)
    ledger: list = field(default_factory=list)

    @property
    def M(self) -> int:
        return len(self.slopes)

    def point_set(self) -> DyadicSet:
        return DyadicSet.from_array(2, self.k, self.points, "unit", check=False)

    def family(self, p) -> DyadicSet:
        X, Y = int(p[0]), int(p[1])
        A = self.slopes
        Bv = Y - (-((-(A * X)) >> self.k))         # Y - ceil(A X / 2^k)
        return DyadicSet.from_array(2, self.k, np.stack([A, Bv], 1), "param", check=False)

    def nice(self) -> NiceConfiguration:
        fams = tuple(self.family(p) for p in self.points)
        C = frostman_constant(DyadicSet.from_array(1, self.k, self.slopes[:, None], "param",
                                                   check=False), self.s).C
        return NiceConfiguration(self.point_set(), fams, self.s, C, self.M)

    def to_dict(self) -> dict:
        return {"s": frac_str(self.s), "t": frac_str(self.t), "u": frac_str(self.u),
                "level": self.k, "K_delta": self.K_delta, "K_rho": self.K_rho,
                "theta0_extra_levels": self.L, "farey_Q": self.Q,
                "base_points": int(len(self.base_points)), "base_slopes": int(len(self.base_slopes)),
                "base_tubes": self.base_tubes, "points": int(len(self.points)),
                "M": self.M, "tubes": self.tubes, "checks": self.checks, "ledger": self.ledger}


def _tube_keys(points: np.ndarray, slopes: np.ndarray, level: int, chunk: int = 1 << 22):
    """Distinct canonical tubes (slope A, intercept Y - ceil(A X / 2^level)) over all pairs."""
    keys = []
    step = max(1, chunk // max(1, len(slopes)))
    A = slopes[None, :]
    off = np.int64(1) << (level + 2)
    for s0 in range(0, len(points), step):
        X = points[s0:s0 + step, 0:1]
        Y = points[s0:s0 + step, 1:2]
        Bv = Y - (-((-(A * X)) >> level))
        keys.append(np.unique((A * off * 4 + (Bv + off)).ravel()))
    return np.unique(np.concatenate(keys)) if keys else np.zeros(0, dtype=np.int64)


def _pow2_le(count: int, C: int, exp: Fraction) -> bool:
    """count <= C 2^exp, exactly."""
    return Pow2Rational(Fraction(count)) <= Pow2Rational(Fraction(C), exp)


SHARPNESS_C_C = 4


def sharpness_config(s, t, u, k: int, verify: bool = True) -> SharpnessConfiguration:
    """Scaled lattice/Farey configuration realizing the sharp tube count.

    Scales are rounded to integer dyadic levels: ``K_delta = round(k u)``,
    ``K_rho = round((2k - K_delta - k t)/2)`` and ``L = round((k - K_delta) s)``
    extra levels for the slope intervals of the fine slope set.
    """
    s, t, u = to_fraction(s), to_fraction(t), to_fraction(u)
    if not (0 < s <= 1 and 0 < t < 2 and 0 < u <= min(t, 2 - t)):
        raise PreconditionError("need s in (0,1], t in (0,2), u in (0, min(t, 2-t)]")
    if k < 1:
        raise PreconditionError("level must be positive")
    Kd, Kr = _choose_levels(k, t, u)
    if Kd < 1 or Kr < 0 or Kd + Kr > k:
        near = max(k, math.ceil(4 / u))
        raise PreconditionError("scale arithmetic infeasible at this level",
                                witness={"nearest_level": near})
    m_total = _round_half_even(s * k)
    m1 = _round_half_even(s * Kd)
    L = m_total - m1
    if not 0 <= L <= k - Kd:
        raise PreconditionError("slope interval length does not fit between the two scales")
    ledger = [
        {"quantity": "Delta level", "exact": frac_str(k * u), "realized": Kd},
        {"quantity": "rho level", "exact": frac_str((2 * k - Kd - k * t) / 2), "realized": Kr},
        {"quantity": "base slope count log2", "exact": frac_str(s * Kd), "realized": m1},
        {"quantity": "slope interval extra levels", "exact": frac_str((k - Kd) * s), "realized": L},
        {"quantity": "realized t", "value": frac_str(Fraction(2 * k - 2 * Kr - Kd, k))},
        {"quantity": "realized u", "value": frac_str(Fraction(Kd, k))},
        {"quantity": "realized s", "value": frac_str(Fraction(m_total, k))},
    ]

    # base lattice: one point per lattice rectangle
    ax = Kd // 2
    ay = Kd - ax
    cols = np.arange(1 << ax, dtype=np.int64) << (Kd - ax)
    rows = np.arange(1 << ay, dtype=np.int64) << (Kd - ay)
    base_pts = np.stack(np.meshgrid(cols, rows, indexing="ij"), -1).reshape(-1, 2)
    if ax != ay:
        ledger.append({"quantity": "base lattice", "value": f"{1 << ax} x {1 << ay} (odd Delta level)"})

    base_slopes, Q = _farey_slopes(1 << m1, Kd)
    ledger.append({"quantity": "Farey order", "value": Q, "slopes": int(len(base_slopes))})

    base_tubes = len(_tube_keys(base_pts, base_slopes, Kd))

    # P_0: rho-scaling of the base, then all descendants down to level k
    fill = k - Kr - Kd
    sub = np.stack(np.meshgrid(np.arange(1 << fill), np.arange(1 << fill), indexing="ij"), -1)
    sub = sub.reshape(-1, 2).astype(np.int64)
    pts = ((base_pts << fill)[:, None, :] + sub[None, :, :]).reshape(-1, 2)
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    # Theta_0: intervals of 2^L fine slope cells at the base left endpoints
    slopes = ((base_slopes << (k - Kd))[:, None] + np.arange(1 << L)[None, :]).reshape(-1)
    tubes = len(_tube_keys(pts, slopes, k))

    cfg = SharpnessConfiguration(s, t, u, k, Kd, Kr, L, Q, base_pts, base_slopes, base_tubes,
                                 pts, slopes, tubes, ledger=ledger)
    if verify:
        cfg.checks = verify_sharpness(cfg)
    return cfg


def verify_sharpness(cfg: SharpnessConfiguration) -> dict:
    """Measure the base properties, the P_0 identities and the nice-configuration
    conditions; raise VerificationError when the tube-count bound of the base fails."""
    k, Kd, Kr, s = cfg.k, cfg.K_delta, cfg.K_rho, cfg.s
    out = {}
    base = DyadicSet.from_array(2, Kd, cfg.base_points, "unit", check=False)
    ax = Kd // 2
    per = np.unique(ancestors(cfg.base_points, Kd - ax), axis=0, return_counts=True)[1]
    out["a_size_exact"] = len(base) == (1 << Kd)
    out["a_per_square"] = sorted(set(int(v) for v in per))
    out["a_ok"] = out["a_size_exact"] and len(per) == (1 << (2 * ax)) and \
        set(per.tolist()) == {1 << (Kd - 2 * ax)}

    n1 = len(cfg.base_slopes)
    sl = np.sort(cfg.base_slopes)
    gap = int(np.diff(sl).min()) if n1 > 1 else 1 << Kd
    out["b_slopes"] = n1
    out["b_log_ratio"] = math.log2(n1) - float(s) * Kd        # log2(|Theta_1| Delta^s)
    out["b_min_gap_over_Delta_s"] = gap / 2 ** (Kd - float(s) * Kd)
    out["b_frostman"] = frostman_constant(
        DyadicSet.from_array(1, Kd, sl[:, None], "param", check=False), s).C.to_dict()

    # realized base exponent: |Theta_1| = 2^m1 stands in for Delta^-s
    m1 = int(len(cfg.base_slopes)).bit_length() - 1
    exp_c = Fraction(Kd, 2) + Fraction(3 * m1, 2)
    out["c_tubes"] = cfg.base_tubes
    out["c_constant"] = cfg.base_tubes / 2 ** float(exp_c)
    out["c_declared"] = SHARPNESS_C_C
    out["c_ok"] = _pow2_le(cfg.base_tubes, SHARPNESS_C_C, exp_c)

    # |P_0| = delta^-t up to rounding, and the single-scale non-concentration
    n0 = len(cfg.points)
    e_real = 2 * k - 2 * Kr - Kd
    out["P0_size"] = n0
    out["P0_log2"] = e_real
    out["P0_target_log2"] = frac_str(k * cfg.t)
    out["P0_within_rounding"] = abs(Fraction(e_real) - k * cfg.t) <= 1 and n0 == 1 << e_real
    qlev = Kr + ax
    cnt = np.unique(ancestors(cfg.points, k - qlev), axis=0, return_counts=True)[1]
    ratio_max = Fraction(int(cnt.max()), n0)
    ratio_min = Fraction(int(cnt.min()), n0)
    out["nonconc_level"] = qlev
    out["nonconc_ratio_max"] = frac_str(ratio_max)
    out["nonconc_ratio_min"] = frac_str(ratio_min)
    out["nonconc_Delta"] = frac_str(Fraction(1, 1 << Kd))
    out["nonconc_ok"] = ratio_min == ratio_max and Fraction(1, 1 << Kd) <= ratio_max <= Fraction(2, 1 << Kd)

    # nice configuration: membership for every pair, Frostman through the slope projection
    fam_C = frostman_constant(DyadicSet.from_array(1, k, cfg.slopes[:, None], "param",
                                                   check=False), s).C
    miss = 0
    step = max(1, (1 << 20) // max(1, len(cfg.slopes)))
    A = cfg.slopes
    for s0 in range(0, len(cfg.points), step):
        X = cfg.points[s0:s0 + step, 0:1]
        Y = cfg.points[s0:s0 + step, 1:2]
        Bv = Y - (-((-(A[None, :] * X)) >> k))
        c = [A * X, (A + 1) * X, A * (X + 1), (A + 1) * (X + 1)]
        lo = np.minimum(np.minimum(c[0], c[1]), np.minimum(c[2], c[3])) + (Bv << k)
        hi = np.maximum(np.maximum(c[0], c[1]), np.maximum(c[2], c[3])) + ((Bv + 1) << k)
        unit = 1 << k
        miss += int((~((lo < (Y + 1) * unit) & (hi > Y * unit))).sum())
    out["nice_misses"] = miss
    sample = cfg.points[:: max(1, len(cfg.points) // 16)]
    worst = max(frostman_constant(cfg.family(p), s).C for p in sample)
    out["nice_family_C_bound"] = fam_C.to_dict()
    out["nice_family_C_sampled"] = worst.to_dict()
    out["nice_ok"] = miss == 0 and worst <= fam_C
    if not out["c_ok"]:
        raise VerificationError("base configuration exceeds its tube-count bound",
                                witness={"tubes": cfg.base_tubes, "exponent": frac_str(exp_c),
                                         "constant": out["c_constant"]})
    if not (out["a_ok"] or Kd % 2) or not out["nice_ok"]:
        raise VerificationError("sharpness configuration failed a structural check", witness=out)
    return out


def check_family_membership(k: int, family: DyadicSet, p) -> bool:
    return bool(tube_contains_points(k, family, p).all())
