"""Random admissible piecewise-affine inputs for the decomposition procedures."""

from __future__ import annotations

from fractions import Fraction

import oracles
from gmtlab.lipschitz import PiecewiseAffine


def _frac(rng, denom=16):
    return Fraction(int(rng.integers(1, denom + 1)), denom)


def random_pa(rng, n, slope_lo, slope_hi, m=1, denom=8):
    lengths = [int(rng.integers(1, 5)) for _ in range(n)]
    total = sum(lengths)
    lo, hi = int(slope_lo * denom), int(slope_hi * denom)
    slopes = [Fraction(int(rng.integers(lo, hi + 1)), denom) for _ in range(n)]
    return PiecewiseAffine.from_slopes([Fraction(L * m, total) for L in lengths], slopes)


def _tmax(f, eps):
    m = f.end
    return min((f(x) + eps * m) / x for x in f.xs if x > 0)


def linear_instance(rng):
    f = random_pa(rng, int(rng.integers(1, 8)), -2, 2, m=int(rng.integers(1, 5)))
    eps = Fraction(1, int(rng.choice([2, 4, 8, 16, 32, 64])))
    return f, eps


def kaufman_instance(rng):
    while True:
        m = int(rng.integers(1, 5))
        f = random_pa(rng, int(rng.integers(1, 7)), Fraction(-1, 2), 2, m=m)
        eps = Fraction(1, int(rng.choice([2, 4, 8, 16, 32])))
        tmax = min(_tmax(f, eps), 2)
        if tmax <= Fraction(1, 64):
            continue
        s = min(1, tmax) * Fraction(int(rng.integers(1, 65)), 65)
        t = s + (tmax - s) * _frac(rng, 64)
        return f, s, t, eps


def falconer_instance(rng):
    while True:
        m = int(rng.integers(1, 5))
        f = random_pa(rng, int(rng.integers(1, 7)), Fraction(-1, 2), 2, m=m)
        eps = Fraction(1, int(rng.choice([2, 4, 8, 16, 32])))
        lo = max(f(f.end) / f.end - eps, Fraction(0))
        hi = min(_tmax(f, eps), Fraction(2))
        if hi <= lo:
            continue
        t = lo + (hi - lo) * Fraction(int(rng.integers(1, 64)), 64)
        s = min(Fraction(1), 2 - t) * Fraction(int(rng.integers(1, 65)), 65)
        return f, s, t, eps


def weak_instance(rng):
    d = int(rng.integers(1, 3))
    f = random_pa(rng, int(rng.integers(1, 8)), 0, d, m=int(rng.integers(1, 5)))
    eps = Fraction(1, int(rng.choice([1, 2, 4, 8, 16])))
    return f, eps, d


def tail_instance(rng):
    d = int(rng.integers(1, 3))
    f = random_pa(rng, int(rng.integers(1, 8)), 0, d, m=1)
    zeta = Fraction(int(rng.integers(1, 9)), 8)
    eps = zeta / 6 * Fraction(int(rng.integers(1, 5)), 4)
    smax = min(_tmax(f, eps), Fraction(d))
    sigma = smax * _frac(rng, 64)
    return f, sigma, zeta, eps, d


# independent conclusion checks ------------------------------------------------

def pieces_disjoint(pieces, a, b):
    prev = a
    for p in pieces:
        if not (prev <= p.c < p.d <= b):
            return False
        prev = p.d
    return True


def check_linear(f, dec, eps):
    a, b = f.start, f.end
    xs, ys = f.xs, f.ys
    ok = pieces_disjoint(dec.pieces, a, b)
    for p in dec.pieces:
        ok &= oracles.linear(xs, ys, p.c, p.d, eps)
        ok &= p.d - p.c >= dec.tau * (b - a)
    covered = sum((p.d - p.c for p in dec.pieces), Fraction(0))
    return ok and (b - a) - covered <= eps * (b - a)


def check_capped(f, dec, eps, cap, lower):
    """Kaufman (lower=True: slope >= cap) or Falconer (slope <= cap) alternatives."""
    m = f.end
    xs, ys = f.xs, f.ys
    ok = pieces_disjoint(dec.pieces, Fraction(0), m)
    for p in dec.pieces:
        sl = (oracles.pa_eval(xs, ys, p.d) - oracles.pa_eval(xs, ys, p.c)) / (p.d - p.c)
        lin = oracles.linear(xs, ys, p.c, p.d, eps) and (sl >= cap if lower else sl <= cap)
        sup = sl == cap and oracles.superlinear(xs, ys, p.c, p.d, cap, eps)
        ok &= lin or sup
        ok &= p.d - p.c >= dec.tau * m
    covered = sum((p.d - p.c for p in dec.pieces), Fraction(0))
    return ok and m - covered <= dec.declared_constant * eps * m and dec.tau > 0


def check_weak(f, w, eps):
    xs, ys = f.xs, f.ys
    m = f.end
    a, sig = w.a, w.sigma
    ok = a[0] == 0 and all(x < y for x, y in zip(a, a[1:]))
    ok &= all(x < y for x, y in zip(sig, sig[1:]))
    for j, s in enumerate(sig):
        ok &= oracles.superlinear(xs, ys, a[j], a[j + 1], s, 0)
    mass = sum(((a[j + 1] - a[j]) * s for j, s in enumerate(sig)), Fraction(0))
    return ok and mass >= oracles.pa_eval(xs, ys, m) - eps * m


def check_tail(f, tp, sigma, zeta, d):
    a = tp.a
    return (zeta / (12 * d) <= a <= Fraction(1, 3)
            and oracles.superlinear(f.xs, f.ys, a, Fraction(1), sigma - zeta, 0))
