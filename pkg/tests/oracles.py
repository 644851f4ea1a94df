"""Naive reference implementations used as test oracles.

These are deliberately slow and written straight from the definitions, so
they share no code path with the package. Only the polygon grid scans use
numpy, since a 1e-4 grid has 10^8 points.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct


def cover(cells, level, D):
    seen = set()
    for c in cells:
        seen.add(tuple(v // 2 ** (level - D) for v in c))
    return len(seen)


def restrict(cells, level, Q_level, Q):
    out = []
    for c in cells:
        if all(v // 2 ** (level - Q_level) == q for v, q in zip(c, Q)):
            out.append(tuple(c))
    return sorted(out)


def neighborhood(cells, level, D, lo=None, hi=None):
    """Level-D cells at L-infinity index distance <= 1 from an ancestor."""
    anc = {tuple(v // 2 ** (level - D) for v in c) for c in cells}
    dim = len(next(iter(anc))) if anc else 1
    out = set()
    for a in anc:
        for off in iproduct((-1, 0, 1), repeat=dim):
            cand = tuple(x + o for x, o in zip(a, off))
            if lo is not None and any(x < lo or x >= hi for x in cand):
                continue
            out.add(cand)
    return sorted(out)


def frostman_C(cells, level, s):
    """max over dyadic scales i and cells Q of |P n Q| / (2^{-i s} |P|), as (count/|P|, i)."""
    n = len(cells)
    best = None
    for i in range(level + 1):
        counts = {}
        for c in cells:
            key = tuple(v // 2 ** (level - i) for v in c)
            counts[key] = counts.get(key, 0) + 1
        m = max(counts.values())
        val = (Fraction(m, n), i)
        if best is None or _gt(val, best, s):
            best = val
    return best


def _gt(x, y, s):
    # compare a 2^{i s} with b 2^{j s}
    return float(x[0]) * 2.0 ** float(x[1] * s) > float(y[0]) * 2.0 ** float(y[1] * s) * (1 + 1e-12)


def scaleinv_C(cells, level, t):
    """max over r-level i >= R-level I and R-cells of |P n p|_r / 2^{(i - I) t}, as float."""
    best = 0.0
    for i in range(level + 1):
        at_r = {tuple(v // 2 ** (level - i) for v in c) for c in cells}
        for I in range(i + 1):
            counts = {}
            for c in at_r:
                key = tuple(v // 2 ** (i - I) for v in c)
                counts[key] = counts.get(key, 0) + 1
            best = max(best, max(counts.values()) / 2.0 ** float((i - I) * t))
    return best


def tube_hits(k, A, B, L, i, j):
    """Open parameter box times open column versus open row, from the corner values."""
    a0, a1 = Fraction(A, 2 ** k), Fraction(A + 1, 2 ** k)
    b0, b1 = Fraction(B, 2 ** k), Fraction(B + 1, 2 ** k)
    x0, x1 = Fraction(i, 2 ** L), Fraction(i + 1, 2 ** L)
    vals = [a * x for a in (a0, a1) for x in (x0, x1)]
    lo, hi = min(vals) + b0, max(vals) + b1
    return lo < Fraction(j + 1, 2 ** L) and hi > Fraction(j, 2 ** L)


def tube_raster(k, A, B, L):
    n = 2 ** L
    return sorted((i, j) for i in range(n) for j in range(n) if tube_hits(k, A, B, L, i, j))


def incidences(points, tubes, k):
    return sum(1 for (A, B) in tubes for (i, j) in points if tube_hits(k, A, B, k, i, j))


def project(cells, level, theta, D):
    """Number of level-D intervals met by the images [x + theta y] of the cells."""
    theta = Fraction(theta)
    hit = set()
    w = Fraction(1, 2 ** D)
    for (i, j) in cells:
        lo = Fraction(i, 2 ** level) + theta * Fraction(j, 2 ** level)
        hi = lo + (1 + theta) / 2 ** level
        a = lo // w
        b = -((-hi) // w) - 1           # half-open image [lo, hi)
        for m in range(int(a), int(b) + 1):
            hit.add(m)
    return len(hit)


def multiplicity(K_cells, level, theta, x, r, R, dilate=True):
    theta = Fraction(theta)
    if dilate:
        Kr = neighborhood(K_cells, level, r, 0, 2 ** r)
    else:
        Kr = sorted({tuple(v // 2 ** (level - r) for v in c) for c in K_cells})
    cx = Fraction(2 * x[0] + 1, 2 ** (level + 1))
    cy = Fraction(2 * x[1] + 1, 2 ** (level + 1))
    rad = Fraction(1, 2 ** R)
    side = Fraction(1, 2 ** r)
    pi = cx + theta * cy
    n = 0
    for (u, v) in Kr:
        x0, y0 = u * side, v * side
        in_box = (x0 <= cx + rad and x0 + side > cx - rad and
                  y0 <= cy + rad and y0 + side > cy - rad)
        lo = x0 + theta * y0
        hi = lo + (1 + theta) * side
        if in_box and lo <= pi < hi:
            n += 1
    return n


def energy(A, B):
    sums = [a + b for a in A for b in B]
    return sum(1 for s1 in sums for s2 in sums if abs(s1 - s2) <= 1)


def pa_eval(xs, ys, x):
    for i in range(len(xs) - 1):
        if xs[i] <= x <= xs[i + 1]:
            return ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i])
    raise ValueError("outside domain")


def superlinear(xs, ys, a, b, sigma, eps):
    fa = pa_eval(xs, ys, a)
    pts = [a, b] + [x for x in xs if a < x < b]
    return all(pa_eval(xs, ys, x) >= fa + sigma * (x - a) - eps * (b - a) for x in pts)


def linear(xs, ys, a, b, eps):
    fa, fb = pa_eval(xs, ys, a), pa_eval(xs, ys, b)
    s = (fb - fa) / (b - a)
    pts = [x for x in xs if a < x < b]
    return all(abs(pa_eval(xs, ys, x) - fa - s * (x - a)) <= eps * (b - a) for x in pts)


def polygon_grid_min(obj, feasible, xs, ys):
    best = None
    for x in xs:
        for y in ys:
            if feasible(x, y):
                v = obj(x, y)
                if best is None or v < best:
                    best = v
    return best


def grid_min(obj, feasible, x_hi, y_hi, step=1e-4, rows=500):
    """Vectorized scan of the box [0, x_hi] x [0, y_hi] on a uniform grid."""
    import numpy as np
    xs = np.arange(0, x_hi + step / 2, step)
    ys = np.arange(0, y_hi + step / 2, step)[None, :]
    best = np.inf
    for i in range(0, len(xs), rows):
        x = xs[i:i + rows, None]
        ok = feasible(x, ys)
        if ok.any():
            best = min(best, float(np.where(ok, obj(x, ys), np.inf).min()))
    return best


def polygon_K_grid(s, tb, step=1e-4):
    s, tb = float(s), float(tb)
    feas = lambda a, h: ((h >= s * a) & (h <= (2 - s) * a)
                         & (tb - h >= (2 - s) * (1 - a)) & (tb - h <= 2 * (1 - a)))
    return grid_min(lambda a, h: (1 - a) + a * s / 2 + h / 2, feas, 1.0, 2.0, step)


def polygon_L_grid(s, t, step=1e-4):
    s, t = float(s), float(t)
    feas = lambda b, h: ((h >= b * s) & (h <= b * (2 - s)) & (t - h >= 0)
                         & (t - h <= s * (1 - b)))
    return grid_min(lambda b, h: (t - h) + (b * s + h) / 2, feas, 1.0, 2.0, step)


def tube_raster_int(k, A, B, L):
    """Same predicate as tube_hits, in integer units of 2^-(k+L)."""
    n = 2 ** L
    b0, b1 = B * n, (B + 1) * n
    out = []
    for i in range(n):
        vals = (A * i, A * (i + 1), (A + 1) * i, (A + 1) * (i + 1))
        lo, hi = min(vals) + b0, max(vals) + b1
        for j in range(n):
            if lo < (j + 1) * 2 ** k and hi > j * 2 ** k:
                out.append((i, j))
    return out


def scaleinv_best(cells, level, t):
    """Maximizer of |P n p|_r 2^{-(i - I) t} as (count, i - I), found by float comparison."""
    best, arg = -1.0, None
    for i in range(level + 1):
        at_r = {tuple(v // 2 ** (level - i) for v in c) for c in cells}
        for I in range(i + 1):
            counts = {}
            for c in at_r:
                key = tuple(v // 2 ** (i - I) for v in c)
                counts[key] = counts.get(key, 0) + 1
            m = max(counts.values())
            val = m / 2.0 ** float((i - I) * t)
            if val > best * (1 + 1e-12):
                best, arg = val, (m, i - I)
    return arg
