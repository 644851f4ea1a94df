"""Dyadic tubes, incidences, projections, multiplicities and additive energy.

A tube at level ``k`` is a parameter cell ``(A, B)`` standing for all lines
``y = a x + b`` with ``a`` in ``[A, A+1) 2^-k`` and ``b`` in ``[B, B+1) 2^-k``.
Its raster at level ``L >= k`` is decided column by column from the four
corner values of the bilinear map ``(a, x) -> a x``, in integers scaled by
``2^(k+L)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dyadic_core import DyadicSet, coarsen, neighborhood, covering_number
from .errors import PreconditionError
from .exact import Pow2Rational, frac_str, to_fraction
from .frostman import frostman_constant


# ---------------------------------------------------------------------------
# rasterization

def tube_column_ranges(k: int, A, B, L: int):
    """Row ranges ``[jlo, jhi]`` (inclusive, unclipped) met by tubes in every column.

    ``A`` and ``B`` may be arrays of tubes; the result has shape ``(ntubes, 2^L)``.
    """
    if L < k:
        raise PreconditionError("rasterization level must be at least the tube level")
    A = np.asarray(A, dtype=np.int64).reshape(-1, 1)
    B = np.asarray(B, dtype=np.int64).reshape(-1, 1)
    i = np.arange(1 << L, dtype=np.int64).reshape(1, -1)
    c = [A * i, A * (i + 1), (A + 1) * i, (A + 1) * (i + 1)]
    lo = np.minimum(np.minimum(c[0], c[1]), np.minimum(c[2], c[3])) + (B << L)
    hi = np.maximum(np.maximum(c[0], c[1]), np.maximum(c[2], c[3])) + ((B + 1) << L)
    unit = 1 << k                                  # one row of height 2^-L in these units
    # row j meets iff lo < (j+1) unit and hi > j unit
    jlo = np.floor_divide(lo, unit)
    jhi = -np.floor_divide(-hi, unit) - 1
    return jlo, jhi


def tube_cells(k: int, tube: Sequence[int], L: int | None = None) -> DyadicSet:
    """Unit-square cells at level ``L`` meeting the tube with parameter cell ``tube``."""
    L = k if L is None else L
    jlo, jhi = tube_column_ranges(k, tube[0], tube[1], L)
    n = 1 << L
    jlo = np.clip(jlo[0], 0, n)
    jhi = np.clip(jhi[0], -1, n - 1)
    cells = [(i, j) for i in range(n) for j in range(int(jlo[i]), int(jhi[i]) + 1)]
    return DyadicSet.from_cells(2, L, cells, "unit", check=False)


def line_hits_cell(alpha, beta, L: int, cell: Sequence[int]) -> bool:
    """Does the exact line y = alpha x + beta meet the closed column of ``cell`` inside its row?"""
    alpha, beta = to_fraction(alpha), to_fraction(beta)
    i, j = cell
    x0, x1 = Fraction(i, 1 << L), Fraction(i + 1, 1 << L)
    ya, yb = alpha * x0 + beta, alpha * x1 + beta
    ymin, ymax = min(ya, yb), max(ya, yb)
    y0, y1 = Fraction(j, 1 << L), Fraction(j + 1, 1 << L)
    return ymin < y1 and ymax >= y0


def duality_constants(k: int, tube: Sequence[int], L: int | None = None) -> dict:
    """Compare a tube raster with the raster of its centre line.

    Returns whether the centre line's cells are all inside the tube raster and
    the largest vertical distance (in units of 2^-k) from a tube cell centre to
    the centre line.
    """
    L = k if L is None else L
    cells = tube_cells(k, tube, L)
    a_c = (Fraction(tube[0]) + Fraction(1, 2)) / (1 << k)
    b_c = (Fraction(tube[1]) + Fraction(1, 2)) / (1 << k)
    n = 1 << L
    centre = [(i, j) for i in range(n) for j in range(n) if line_hits_cell(a_c, b_c, L, (i, j))]
    inside = all(c in cells for c in centre)
    worst = Fraction(0)
    for i, j in cells:
        x = Fraction(2 * i + 1, 2 * n)
        y = Fraction(2 * j + 1, 2 * n)
        worst = max(worst, abs(y - a_c * x - b_c) * (1 << k))
    return {"centre_inside": inside, "max_offset": worst}


# ---------------------------------------------------------------------------
# families

def slope_set(family: DyadicSet) -> DyadicSet:
    """Left endpoints of the slope intervals, as a 1-dim set in the slope range [-1, 1)."""
    return DyadicSet.from_array(1, family.level, family.array[:, :1], "param", check=False)


SLOPE_RATIO_CONSTANT = 4


def slope_ratio(family: DyadicSet) -> Fraction:
    """|family| / |slopes|; at most 4 for tubes through a common cell."""
    return Fraction(len(family), len(slope_set(family)))


def _point_keys(P: DyadicSet) -> np.ndarray:
    return np.sort(P.array[:, 0] * (1 << P.level) + P.array[:, 1])


def incidences(P: DyadicSet, family: DyadicSet) -> int:
    """Number of pairs (p, T) with p in the raster of T, at the common level."""
    if P.level != family.level:
        raise PreconditionError("points and tubes must share a level")
    if len(P) == 0 or len(family) == 0:
        return 0
    k = P.level
    n = 1 << k
    keys = _point_keys(P)
    total = 0
    chunk = max(1, (1 << 20) // n)
    fa = family.array
    for s in range(0, len(fa), chunk):
        jlo, jhi = tube_column_ranges(k, fa[s:s + chunk, 0], fa[s:s + chunk, 1], k)
        jlo = np.clip(jlo, 0, n)
        jhi = np.clip(jhi, -1, n - 1)
        base = np.arange(n, dtype=np.int64).reshape(1, -1) * n
        right = np.searchsorted(keys, (base + jhi).ravel(), side="right")
        left = np.searchsorted(keys, (base + jlo).ravel(), side="left")
        cnt = np.where((jhi >= jlo).ravel(), right - left, 0)
        total += int(cnt.sum())
    return total


def tube_contains_points(k: int, family: DyadicSet, point: Sequence[int]) -> np.ndarray:
    """Boolean mask: which tubes of ``family`` have ``point`` (a level-k cell) in their raster."""
    fa = family.array
    i, j = int(point[0]), int(point[1])
    A, B = fa[:, 0], fa[:, 1]
    c = [A * i, A * (i + 1), (A + 1) * i, (A + 1) * (i + 1)]
    lo = np.minimum(np.minimum(c[0], c[1]), np.minimum(c[2], c[3])) + (B << k)
    hi = np.maximum(np.maximum(c[0], c[1]), np.maximum(c[2], c[3])) + ((B + 1) << k)
    unit = 1 << k
    return (lo < (j + 1) * unit) & (hi > j * unit)


# ---------------------------------------------------------------------------
# nice configurations

@dataclass(frozen=True)
class NiceConfiguration:
    points: DyadicSet
    families: tuple          # one param-ambient DyadicSet per point, same order as points
    s: Fraction
    C: Pow2Rational
    M: int
    meta: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"points": self.points.to_dict(),
                "families": [{"point_index": i, "tubes": [list(c) for c in fam.cells]}
                             for i, fam in enumerate(self.families)],
                "s": frac_str(self.s), "C": self.C.to_dict(), "M": self.M,
                "level": self.points.level}

    @classmethod
    def from_dict(cls, d: dict) -> "NiceConfiguration":
        pts = DyadicSet.from_dict(d["points"])
        k = pts.level
        fams = [None] * len(pts)
        for f in d["families"]:
            fams[int(f["point_index"])] = DyadicSet.from_cells(2, k, f["tubes"], "param")
        if any(f is None for f in fams):
            raise PreconditionError("every point needs a tube family")
        C = d["C"]
        if isinstance(C, dict):
            C = Pow2Rational(to_fraction(C["coef"]), to_fraction(C["pow2"]))
        return cls(pts, tuple(fams), to_fraction(d["s"]), Pow2Rational.of(C), int(d["M"]))


@dataclass(frozen=True)
class NiceCheck:
    ok: bool
    violations: tuple
    max_frostman: Pow2Rational | None

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations),
                "max_frostman": None if self.max_frostman is None else self.max_frostman.to_dict()}


def check_nice_configuration(cfg: NiceConfiguration, max_violations: int = 20) -> NiceCheck:
    """Verify |T(p)| = M, p in every raster, and the Frostman bound for every family."""
    k = cfg.points.level
    bad = []
    worst = None
    if len(cfg.families) != len(cfg.points):
        bad.append({"kind": "shape", "detail": "families and points differ in number"})
        return NiceCheck(False, tuple(bad), None)
    for idx, (p, fam) in enumerate(zip(cfg.points.cells, cfg.families)):
        if fam.level != k:
            bad.append({"kind": "level", "point": list(p)})
        elif len(fam) != cfg.M:
            bad.append({"kind": "cardinality", "point": list(p), "size": len(fam), "M": cfg.M})
        else:
            miss = ~tube_contains_points(k, fam, p)
            if miss.any():
                t = fam.array[int(np.argmax(miss))].tolist()
                bad.append({"kind": "miss", "point": list(p), "tube": t})
            fc = frostman_constant(fam, cfg.s).C
            worst = fc if worst is None or fc > worst else worst
            if fc > cfg.C:
                bad.append({"kind": "frostman", "point": list(p), "C": fc.to_dict()})
        if len(bad) >= max_violations:
            break
    return NiceCheck(not bad, tuple(bad), worst)


def union_tube_count(cfg: NiceConfiguration) -> int:
    if not cfg.families:
        return 0
    allc = np.concatenate([f.array for f in cfg.families])
    return int(np.unique(allc, axis=0).shape[0])


# ---------------------------------------------------------------------------
# projections

def _theta(theta) -> Fraction:
    th = to_fraction(theta)
    if th < 0 or th > 1:
        raise PreconditionError("theta must lie in [0, 1]")
    return th


def _union_length(first: np.ndarray, last: np.ndarray) -> int:
    """Number of integers covered by the ranges [first_i, last_i]."""
    if len(first) == 0:
        return 0
    o = np.lexsort((last, first))
    f, l = first[o], last[o]
    prev = np.maximum.accumulate(np.r_[np.iinfo(np.int64).min // 2, l[:-1]])
    start = np.maximum(f, prev + 1)
    return int(np.maximum(0, l - start + 1).sum())


def project_covering(P: DyadicSet, theta, D: int) -> int:
    """|π_θ(P)|_Δ for π_θ(x, y) = x + θ y, each cell contributing its image interval."""
    if P.dim != 2:
        raise PreconditionError("projection needs a 2-dim set")
    th = _theta(theta)
    if D < 0:
        raise PreconditionError("scale exponent must be non-negative")
    p, q = th.numerator, th.denominator
    k = P.level
    K = max(k, D)
    arr = P.array
    lo = (q * arr[:, 0] + p * arr[:, 1]) << (K - k)
    hi = lo + ((q + p) << (K - k))
    W = q << (K - D)
    return _union_length(np.floor_divide(lo, W), np.floor_divide(hi - 1, W))


def project_covering_bound(P: DyadicSet, D: int) -> int:
    """A cell of side r has an image of length at most 2r, hence meets at most
    2r/Δ + 1 intervals of length Δ; here r = max(Δ, δ)."""
    c = min(D, P.level)
    return min(((2 << (D - c)) + 1) * covering_number(P, c), 2 << D)


# ---------------------------------------------------------------------------
# multiplicity

def multiplicity(K: DyadicSet, theta, x: Sequence[int], r: int, R: int, dilate: bool = True) -> int:
    """Number of r-cells of K_r meeting the R-box around the centre of x whose
    θ-image interval contains π_θ(centre of x).

    ``K_r`` is the one-ring neighbourhood of K at level r, or the plain
    coarsening when ``dilate`` is false.
    """
    th = _theta(theta)
    k = K.level
    if not R <= r <= k:
        raise PreconditionError("need R <= r <= level (R coarsest)")
    Kr = neighborhood(K, r) if dilate else coarsen(K, r)
    return int(_mult_mask(Kr.array, th, x, k, r, R).sum())


def _mult_mask(cells: np.ndarray, th: Fraction, x, k: int, r: int, R: int) -> np.ndarray:
    p, q = th.numerator, th.denominator
    u, v = cells[:, 0], cells[:, 1]
    cx, cy = 2 * int(x[0]) + 1, 2 * int(x[1]) + 1          # centre times 2^(k+1)
    sr = 1 << (k + 1 - r)
    rad = 1 << (k + 1 - R)
    in_box = ((u * sr <= cx + rad) & ((u + 1) * sr > cx - rad) &
              (v * sr <= cy + rad) & ((v + 1) * sr > cy - rad))
    pi = q * cx + p * cy
    img_lo = (q * u + p * v) * sr
    img_hi = img_lo + (q + p) * sr
    return in_box & (img_lo <= pi) & (pi < img_hi)


def high_multiplicity_set(K: DyadicSet, theta, M: int, r: int, R: int,
                          dilate: bool = True) -> DyadicSet:
    th = _theta(theta)
    k = K.level
    if not R <= r <= k:
        raise PreconditionError("need R <= r <= level (R coarsest)")
    Kr = (neighborhood(K, r) if dilate else coarsen(K, r)).array
    keep = [c for c in K.cells if int(_mult_mask(Kr, th, c, k, r, R).sum()) >= M]
    return DyadicSet.from_cells(2, k, keep, K.ambient, check=False)


# ---------------------------------------------------------------------------
# additive energy

def additive_energy(A: DyadicSet, B: DyadicSet) -> int:
    """#{(a1, a2, b1, b2) : |(a1 + b1) - (a2 + b2)| <= δ}, from the histogram of sums."""
    if A.dim != 1 or B.dim != 1 or A.level != B.level:
        raise PreconditionError("additive energy needs 1-dim sets at a common level")
    if len(A) == 0 or len(B) == 0:
        return 0
    sums = np.add.outer(A.array[:, 0], B.array[:, 0]).ravel()
    lo = sums.min()
    c = np.bincount(sums - lo).astype(object)        # python ints: no overflow
    c = np.array([int(v) for v in c], dtype=object)
    left = np.r_[np.array([0], dtype=object), c[:-1]]
    right = np.r_[c[1:], np.array([0], dtype=object)]
    return int((c * (left + c + right)).sum())
