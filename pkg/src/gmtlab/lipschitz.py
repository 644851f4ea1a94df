"""Exact piecewise-affine functions and the interval decomposition procedures.

Everything here is rational arithmetic on ``fractions.Fraction``; a
decomposition is only returned after each of its pieces has been re-checked
against the defining inequalities.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PreconditionError, VerificationError
from .exact import frac_str, to_fraction

F0 = Fraction(0)


@dataclass(frozen=True)
class PiecewiseAffine:
    """Continuous function interpolating ``(xs[i], ys[i])`` linearly."""

    xs: tuple
    ys: tuple

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise PreconditionError("need at least two breakpoints with one value each")
        for a, b in zip(self.xs, self.xs[1:]):
            if not a < b:
                raise PreconditionError("breakpoints must be strictly increasing")

    @classmethod
    def from_points(cls, points: Iterable[Sequence]) -> "PiecewiseAffine":
        pts = [(to_fraction(x), to_fraction(y)) for x, y in points]
        return cls(tuple(p[0] for p in pts), tuple(p[1] for p in pts))

    @classmethod
    def from_slopes(cls, lengths: Sequence, slopes: Sequence, start=0) -> "PiecewiseAffine":
        x, y = to_fraction(start), F0
        xs, ys = [x], [y]
        for L, s in zip(lengths, slopes):
            x += to_fraction(L)
            y += to_fraction(L) * to_fraction(s)
            xs.append(x)
            ys.append(y)
        return cls(tuple(xs), tuple(ys))

    # evaluation -----------------------------------------------------------
    @property
    def start(self) -> Fraction:
        return self.xs[0]

    @property
    def end(self) -> Fraction:
        return self.xs[-1]

    def __call__(self, x) -> Fraction:
        x = to_fraction(x)
        if x < self.xs[0] or x > self.xs[-1]:
            raise PreconditionError(f"x={x} outside the domain")
        i = bisect.bisect_right(self.xs, x) - 1
        if i >= len(self.xs) - 1:
            return self.ys[-1]
        x0, x1 = self.xs[i], self.xs[i + 1]
        y0, y1 = self.ys[i], self.ys[i + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def segment_slopes(self) -> list:
        return [(y1 - y0) / (x1 - x0) for x0, x1, y0, y1
                in zip(self.xs, self.xs[1:], self.ys, self.ys[1:])]

    def lipschitz(self) -> Fraction:
        return max(abs(s) for s in self.segment_slopes())

    def interior_breakpoints(self, a, b) -> list:
        lo = bisect.bisect_right(self.xs, a)
        hi = bisect.bisect_left(self.xs, b)
        return list(self.xs[lo:hi])

    def window(self, a, b) -> "PiecewiseAffine":
        """``y -> f(y + a) - f(a)`` on ``[0, b - a]``."""
        a, b = to_fraction(a), to_fraction(b)
        fa = self(a)
        xs = [a] + self.interior_breakpoints(a, b) + [b]
        return PiecewiseAffine(tuple(x - a for x in xs), tuple(self(x) - fa for x in xs))

    def is_nondecreasing(self) -> bool:
        return all(s >= 0 for s in self.segment_slopes())

    def to_dict(self) -> dict:
        return {"breakpoints": [[frac_str(x), frac_str(y)] for x, y in zip(self.xs, self.ys)]}

    @classmethod
    def from_dict(cls, d) -> "PiecewiseAffine":
        pts = d["breakpoints"] if isinstance(d, dict) else d
        out = []
        for x, y in pts:
            if isinstance(x, (list, tuple)):
                x = Fraction(int(x[0]), int(x[1]))
            if isinstance(y, (list, tuple)):
                y = Fraction(int(y[0]), int(y[1]))
            out.append((x, y))
        return cls.from_points(out)


def slope(f: PiecewiseAffine, a, b) -> Fraction:
    """Secant slope ``(f(b) - f(a)) / (b - a)``."""
    a, b = to_fraction(a), to_fraction(b)
    if not a < b:
        raise PreconditionError("slope needs a < b")
    return (f(b) - f(a)) / (b - a)


def superlinear_violation(f: PiecewiseAffine, a, b, sigma, eps):
    """First point where ``f(x) >= f(a) + sigma (x - a) - eps (b - a)`` fails, or ``None``.

    Checking the breakpoints and ``b`` is enough since the difference is
    piecewise affine.
    """
    a, b = to_fraction(a), to_fraction(b)
    sigma, eps = to_fraction(sigma), to_fraction(eps)
    if not a < b:
        raise PreconditionError("need a < b")
    fa = f(a)
    slack = eps * (b - a)
    for x in f.interior_breakpoints(a, b) + [b]:
        if f(x) < fa + sigma * (x - a) - slack:
            return x
    return None


def is_superlinear(f: PiecewiseAffine, a, b, sigma, eps) -> bool:
    return superlinear_violation(f, a, b, sigma, eps) is None


def linear_deviation(f: PiecewiseAffine, a, b) -> Fraction:
    """max |f - L| on [a, b] where L is the secant through the endpoints."""
    a, b = to_fraction(a), to_fraction(b)
    fa, s = f(a), slope(f, a, b)
    return max([abs(f(x) - fa - s * (x - a)) for x in f.interior_breakpoints(a, b)] or [F0])


def is_linear(f: PiecewiseAffine, a, b, eps) -> bool:
    a, b = to_fraction(a), to_fraction(b)
    s = slope(f, a, b)
    neg = PiecewiseAffine(f.xs, tuple(-y for y in f.ys))
    return is_superlinear(f, a, b, s, eps) and is_superlinear(neg, a, b, -s, eps)


# ---------------------------------------------------------------------------
# pieces

@dataclass(frozen=True)
class DecompositionPiece:
    c: Fraction
    d: Fraction
    kind: str            # "linear" or "superlinear"
    slope: Fraction
    epsilon: Fraction

    @property
    def length(self) -> Fraction:
        return self.d - self.c

    def verify(self, f: PiecewiseAffine) -> bool:
        if slope(f, self.c, self.d) != self.slope:
            return False
        if self.kind == "linear":
            return is_linear(f, self.c, self.d, self.epsilon)
        if self.kind == "superlinear":
            return is_superlinear(f, self.c, self.d, self.slope, self.epsilon)
        return False

    def to_dict(self) -> dict:
        return {"c": frac_str(self.c), "d": frac_str(self.d), "kind": self.kind,
                "slope": frac_str(self.slope), "epsilon": frac_str(self.epsilon)}


@dataclass(frozen=True)
class Decomposition:
    pieces: tuple
    tau: Fraction
    leftover: Fraction
    domain: tuple
    declared_constant: Fraction | None = None
    epsilon: Fraction | None = None

    def to_dict(self) -> dict:
        return {"pieces": [p.to_dict() for p in self.pieces], "tau": frac_str(self.tau),
                "leftover": frac_str(self.leftover),
                "domain": [frac_str(self.domain[0]), frac_str(self.domain[1])],
                "declared_constant": None if self.declared_constant is None
                else frac_str(self.declared_constant),
                "epsilon": None if self.epsilon is None else frac_str(self.epsilon)}


def _leftover(pieces, a, b) -> Fraction:
    return (b - a) - sum((p.d - p.c for p in pieces), F0)


def _check_disjoint(pieces, a, b):
    prev = a
    for p in pieces:
        if p.c < prev or p.d > b or not p.c < p.d:
            raise VerificationError("pieces overlap or leave the domain",
                                    witness=[frac_str(p.c), frac_str(p.d)])
        prev = p.d


def _ceil_log2(q: Fraction) -> int:
    """Smallest integer K with 2**K >= q (q > 0)."""
    K = max(0, q.numerator.bit_length() - q.denominator.bit_length() - 1)
    while Fraction(2) ** K < q:
        K += 1
    while K > 0 and Fraction(2) ** (K - 1) >= q:
        K -= 1
    return K


def decompose_linear(f: PiecewiseAffine, eps, d=None, a=None, b=None) -> Decomposition:
    """Split [a, b] into eps-linear pieces by dyadic bisection.

    Bisection stops at depth K = ceil(log2(n / eps)) where n counts the interior
    breakpoints; an interval that is still not eps-linear at that depth must
    contain a breakpoint, so the discarded measure is at most n 2^-K (b - a).
    """
    eps = to_fraction(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    a = f.start if a is None else to_fraction(a)
    b = f.end if b is None else to_fraction(b)
    if not a < b:
        raise PreconditionError("need a < b")
    if d is not None and f.lipschitz() > to_fraction(d):
        raise PreconditionError("function is not d-Lipschitz")
    n = max(1, len(f.interior_breakpoints(a, b)))
    K = max(1, _ceil_log2(n / eps))
    pieces = []
    stack = [(a, b, 0)]
    while stack:
        c, e, depth = stack.pop()
        if not f.interior_breakpoints(c, e) or is_linear(f, c, e, eps):
            pieces.append(DecompositionPiece(c, e, "linear", slope(f, c, e), eps))
        elif depth < K:
            mid = (c + e) / 2
            stack.append((mid, e, depth + 1))
            stack.append((c, mid, depth + 1))
    pieces = _merge_linear(f, pieces, eps)
    out = Decomposition(tuple(pieces), Fraction(1, 2 ** K), _leftover(pieces, a, b), (a, b),
                        epsilon=eps)
    _certify_linear(f, out, eps)
    return out


def _merge_linear(f, pieces, eps):
    """Greedily fuse adjacent pieces while the union stays eps-linear."""
    out = []
    for p in pieces:
        if out and out[-1].d == p.c and is_linear(f, out[-1].c, p.d, eps):
            q = out.pop()
            p = DecompositionPiece(q.c, p.d, "linear", slope(f, q.c, p.d), eps)
        out.append(p)
    return out


def _certify_linear(f, dec: Decomposition, eps):
    a, b = dec.domain
    _check_disjoint(dec.pieces, a, b)
    for p in dec.pieces:
        if not p.verify(f):
            raise VerificationError("piece is not eps-linear", witness=p.to_dict())
        if p.length < dec.tau * (b - a):
            raise VerificationError("piece shorter than tau", witness=p.to_dict())
    if dec.leftover > eps * (b - a):
        raise VerificationError("leftover exceeds eps (b - a)", witness=frac_str(dec.leftover))


# ---------------------------------------------------------------------------
# slope-capped decompositions

def _first_cap_crossing(g: PiecewiseAffine, c, d, cap):
    """Smallest x > d with s_g(c, x) = cap, given s_g(c, d) > cap; ``None`` if absent."""
    gc = g(c)

    def h(x):
        return g(x) - gc - cap * (x - c)

    prev = d
    hp = h(d)
    for x in g.interior_breakpoints(d, g.end) + [g.end]:
        hx = h(x)
        if hx <= 0:
            return prev + hp * (x - prev) / (hp - hx)
        prev, hp = x, hx
    return None


def _cap_procedure(g: PiecewiseAffine, cap: Fraction, tail: Fraction, eps: Fraction):
    """Pieces of [0, m] that are eps-linear with slope <= cap or eps-superlinear with slope cap.

    Starts from an (eps^2/2)-linear decomposition and extends each steep piece
    to the first point where the secant slope drops to ``cap``.
    """
    m = g.end
    lin = decompose_linear(g, eps * eps / 2)
    queue = [(p.c, p.d) for p in lin.pieces]
    out = []
    i = 0
    while i < len(queue):
        c, d = queue[i]
        s = slope(g, c, d)
        if s <= cap:
            out.append(DecompositionPiece(c, d, "linear", s, eps))
            i += 1
            continue
        if c >= m - tail:
            break
        dp = _first_cap_crossing(g, c, d, cap)
        if dp is None or not dp < m:
            raise VerificationError("no point where the secant slope reaches the cap",
                                    witness=frac_str(c))
        out.append(DecompositionPiece(c, dp, "superlinear", cap, eps))
        j = i + 1
        while j < len(queue) and queue[j][1] < dp:
            j += 1
        if j >= len(queue):
            break
        cl, dl = queue[j]
        if cl > dp:                                  # d' lies in a gap
            i = j
        elif dl - dp <= eps * (dl - cl):             # drop a short remainder
            i = j + 1
        else:                                        # keep the right part of the piece
            queue[j] = (dp, dl)
            i = j
    out = [p for p in out if p.c < p.d]
    return out, eps * lin.tau


def _check_hypotheses(f: PiecewiseAffine, t, eps, upper: bool):
    m = f.end
    if f.start != 0 or f(0) != 0:
        raise PreconditionError("f must be defined on [0, m] with f(0) = 0")
    if f.lipschitz() > 2:
        raise PreconditionError("f must be 2-Lipschitz")
    for x in f.xs:
        if f(x) < t * x - eps * m:
            raise PreconditionError("hypothesis f(x) >= t x - eps m violated",
                                    witness=frac_str(x))
    if upper and f(m) > (t + eps) * m:
        raise PreconditionError("hypothesis f(m) <= (t + eps) m violated", witness=frac_str(m))


def _finalize(f, pieces, tau, eps, K, check_kind):
    m = f.end
    pieces = sorted(pieces, key=lambda p: p.c)
    dec = Decomposition(tuple(pieces), tau, _leftover(pieces, F0, m), (F0, m), K, eps)
    _check_disjoint(pieces, F0, m)
    for p in pieces:
        if not p.verify(f) or not check_kind(p):
            raise VerificationError("piece fails its alternative", witness=p.to_dict())
        if p.length < tau * m:
            raise VerificationError("piece shorter than tau m", witness=p.to_dict())
    if dec.leftover > K * eps * m:
        raise VerificationError("leftover exceeds the declared bound",
                                witness=frac_str(dec.leftover))
    return dec


def _eps_check(eps):
    eps = to_fraction(eps)
    if not 0 < eps <= 1:
        raise PreconditionError("eps must lie in (0, 1]")
    return eps


def falconer_decompose(f: PiecewiseAffine, s, t, eps) -> Decomposition:
    """Pieces that are eps-linear with slope <= 2 - s, or eps-superlinear with slope 2 - s."""
    s, t, eps = to_fraction(s), to_fraction(t), _eps_check(eps)
    if not (0 < s < 1 and 0 < t < 2 - s):
        raise PreconditionError("need 0 < s < 1 and 0 < t < 2 - s")
    _check_hypotheses(f, t, eps, upper=True)
    cap = 2 - s
    m = f.end
    pieces, tau = _cap_procedure(f, cap, 2 * eps * m / (2 - s - t), eps)
    K = 2 + 2 / (2 - s - t)

    def kind_ok(p):
        return (p.kind == "linear" and p.slope <= cap) or \
               (p.kind == "superlinear" and p.slope == cap)

    return _finalize(f, pieces, tau, eps, K, kind_ok)


def kaufman_decompose(f: PiecewiseAffine, s, t, eps) -> Decomposition:
    """Pieces that are eps-linear with slope >= s, or eps-superlinear with slope s.

    Runs the capped procedure on the mirrored function G(y) = f(m - y) - f(m) + 2y,
    whose secant slopes are 2 minus those of f.
    """
    s, t, eps = to_fraction(s), to_fraction(t), _eps_check(eps)
    if not (0 < s < 1 and s < t <= 2):
        raise PreconditionError("need 0 < s < 1 and s < t <= 2")
    _check_hypotheses(f, t, eps, upper=False)
    m = f.end
    fm = f(m)
    G = PiecewiseAffine(tuple(m - x for x in reversed(f.xs)),
                        tuple(y - fm + 2 * (m - x) for x, y in zip(reversed(f.xs), reversed(f.ys))))
    gpieces, tau = _cap_procedure(G, 2 - s, eps * m / (t - s), eps)
    pieces = []
    for p in gpieces:
        c, d = m - p.d, m - p.c
        sl = slope(f, c, d)
        kind = p.kind
        if kind == "linear" and sl == s:
            kind = "superlinear"            # an eps-linear piece of slope s is also eps-superlinear
        pieces.append(DecompositionPiece(c, d, kind, sl, eps))
    K = 2 + 1 / (t - s)

    def kind_ok(p):
        return (p.kind == "linear" and p.slope >= s) or \
               (p.kind == "superlinear" and p.slope == s)

    return _finalize(f, pieces, tau, eps, K, kind_ok)


# ---------------------------------------------------------------------------
# monotone decompositions

def lower_hull(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> list:
    """Indices of the vertices of the greatest convex minorant."""
    hull = []
    for i in range(len(xs)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b if it lies on or above the segment a -> i
            if (ys[b] - ys[a]) * (xs[i] - xs[a]) >= (ys[i] - ys[a]) * (xs[b] - xs[a]):
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


@dataclass(frozen=True)
class WeakDecomposition:
    a: tuple             # a_0 = 0 < a_1 < ... < a_n
    sigma: tuple         # sigma_0 < ... < sigma_{n-1}
    tau: Fraction
    epsilon: Fraction
    d: int

    def to_dict(self) -> dict:
        return {"a": [frac_str(x) for x in self.a], "sigma": [frac_str(x) for x in self.sigma],
                "tau": frac_str(self.tau), "epsilon": frac_str(self.epsilon), "d": self.d}


def _hull_groups(f: PiecewiseAffine, x0: Fraction, width: Fraction):
    xs = [x0] + f.interior_breakpoints(x0, f.end) + [f.end]
    ys = [f(x) for x in xs]
    idx = lower_hull(xs, ys)
    groups = []                              # [start, end, sigma, bucket]
    for i, j in zip(idx, idx[1:]):
        sl = (ys[j] - ys[i]) / (xs[j] - xs[i])
        bucket = math.floor(sl / width)
        if groups and groups[-1][3] == bucket:
            groups[-1][1] = xs[j]
        else:
            groups.append([xs[i], xs[j], sl, bucket])
    return groups


def weak_decompose(f: PiecewiseAffine, eps, d=None) -> WeakDecomposition:
    """Blocks on which f is (sigma_j, 0)-superlinear with strictly increasing sigma_j.

    Hull segments of the greatest convex minorant are grouped by slope into
    buckets of width eps/2; each group takes its smallest slope, and groups
    shorter than tau m are absorbed by their left neighbour.
    """
    eps = _eps_check(eps)
    if f.start != 0 or f(0) != 0:
        raise PreconditionError("f must be defined on [0, m] with f(0) = 0")
    if not f.is_nondecreasing():
        bad = next(x for x, sl in zip(f.xs, f.segment_slopes()) if sl < 0)
        raise PreconditionError("f is decreasing somewhere", witness=frac_str(bad))
    lip = f.lipschitz()
    d = max(1, math.ceil(lip)) if d is None else int(d)
    if d < 1 or lip > d:
        raise PreconditionError("f must be d-Lipschitz with integer d >= 1")
    m = f.end
    width = eps / 2
    nbuckets = math.floor(2 * d / eps) + 1
    tau = eps / (2 * d * (nbuckets + 1))
    groups = _hull_groups(f, F0, width)
    if groups[0][1] - groups[0][0] >= tau * m:
        blocks = [[groups[0][0], groups[0][1], groups[0][2]]]
        rest = groups[1:]
    else:
        blocks = [[F0, tau * m, F0]]
        rest = _hull_groups(f, tau * m, width)
        while rest and rest[0][3] == 0:
            blocks[0][1] = rest.pop(0)[1]
    for start, end, sl, _ in rest:
        if end - start < tau * m:
            blocks[-1][1] = end
        else:
            blocks.append([start, end, sl])
    out = WeakDecomposition(tuple([b[0] for b in blocks] + [blocks[-1][1]]),
                            tuple(b[2] for b in blocks), tau, eps, d)
    verify_weak(f, out)
    return out


def verify_weak(f: PiecewiseAffine, w: WeakDecomposition):
    m = f.end
    a, sig = w.a, w.sigma
    if a[0] != 0 or a[-1] > m or len(a) != len(sig) + 1:
        raise VerificationError("malformed block sequence")
    for x, y in zip(a, a[1:]):
        if y - x < w.tau * m:
            raise VerificationError("block shorter than tau m", witness=[frac_str(x), frac_str(y)])
    for s0, s1 in zip(sig, sig[1:]):
        if not s0 < s1:
            raise VerificationError("slopes not strictly increasing")
    if sig[0] < 0 or sig[-1] > w.d:
        raise VerificationError("slopes outside [0, d]")
    for j, s in enumerate(sig):
        if not is_superlinear(f, a[j], a[j + 1], s, 0):
            raise VerificationError("block is not (sigma, 0)-superlinear",
                                    witness=[frac_str(a[j]), frac_str(a[j + 1])])
    mass = sum(((a[j + 1] - a[j]) * s for j, s in enumerate(sig)), F0)
    if mass < f(m) - w.epsilon * m:
        raise VerificationError("slope mass below f(m) - eps m")
    F = [F0]
    for j, s in enumerate(sig):
        F.append(F[-1] + (a[j + 1] - a[j]) * s)
    for i in range(len(sig)):
        for j in range(len(sig)):
            if abs(f(a[i]) - f(a[j]) - (F[i] - F[j])) > w.epsilon * m:
                raise VerificationError("comparison with the model function failed")


@dataclass(frozen=True)
class TailPoint:
    a: Fraction
    c: Fraction
    weak: WeakDecomposition

    def to_dict(self) -> dict:
        return {"a": frac_str(self.a), "c": frac_str(self.c), "weak": self.weak.to_dict()}


def superlinear_tail(f: PiecewiseAffine, sigma, zeta, eps, d) -> TailPoint:
    """A point a in [zeta/(12 d), 1/3] such that (f, a, 1) is (sigma - zeta, 0)-superlinear."""
    sigma, zeta, eps = to_fraction(sigma), to_fraction(zeta), to_fraction(eps)
    d = int(d)
    if d < 1:
        raise PreconditionError("need d >= 1")
    if not 0 < sigma <= d:
        raise PreconditionError("need 0 < sigma <= d")
    if not 0 < zeta <= 1:
        raise PreconditionError("need zeta in (0, 1]")
    if not 0 < eps <= zeta / 6:
        raise PreconditionError("need eps in (0, zeta/6]")
    if f.start != 0 or f.end != 1 or f(0) != 0:
        raise PreconditionError("f must live on [0, 1] with f(0) = 0")
    if f.lipschitz() > d:
        raise PreconditionError("f is not d-Lipschitz")
    if min(f.ys) < 0:
        raise PreconditionError("f must be non-negative")
    if not f.is_nondecreasing():
        raise PreconditionError("f must be non-decreasing")
    if not is_superlinear(f, 0, 1, sigma, eps):
        raise PreconditionError("(f, 0, 1) is not (sigma, eps)-superlinear")
    c = zeta / (12 * d)
    g = f.window(c, 1)
    w = weak_decompose(g, eps / 100, d)
    target = sigma - zeta
    starts = [w.a[j] for j, s in enumerate(w.sigma) if s >= target]
    if not starts:
        raise VerificationError("no block reaches slope sigma - zeta")
    a = c + min(starts)
    if not (c <= a <= Fraction(1, 3)):
        raise VerificationError("tail point outside [zeta/(12d), 1/3]", witness=frac_str(a))
    if not is_superlinear(f, a, 1, target, 0):
        raise VerificationError("(f, a, 1) is not (sigma - zeta, 0)-superlinear",
                                witness=frac_str(a))
    return TailPoint(a, c, w)
