"""Non-concentration constants of dyadic sets, computed exactly.

All radii are dyadic, ``r = 2^-i`` for ``i = 0..level``, and the ball ``B(x, r)``
is replaced by the dyadic ``r``-cell containing ``x`` (or, with ``ring=True``,
by that cell together with its ``3^dim - 1`` neighbours).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic_core import DyadicSet, ancestors
from .errors import PreconditionError, VerificationError
from .exact import Pow2Rational, frac_str, to_fraction


@dataclass(frozen=True)
class FrostmanCertificate:
    s: Fraction
    C: Pow2Rational
    witness_level: int
    witness_cell: tuple
    ring: bool = False

    def to_dict(self) -> dict:
        d = {"s": frac_str(self.s), "ring": self.ring}
        d.update(self.C.to_dict())
        d["witness"] = {"level": self.witness_level, "cell": list(self.witness_cell)}
        return d


@dataclass(frozen=True)
class RegularityCertificate:
    t: Fraction
    frostman: FrostmanCertificate
    C_scaleinv: Pow2Rational
    witness_R_level: int
    witness_R_cell: tuple
    witness_r_level: int

    @property
    def C(self) -> Pow2Rational:
        return max(self.frostman.C, self.C_scaleinv)

    def to_dict(self) -> dict:
        return {"t": frac_str(self.t), "C": self.C.to_dict(),
                "C_frostman": self.frostman.to_dict(),
                "C_scaleinv": self.C_scaleinv.to_dict(),
                "witness_scaleinv": {"R_level": self.witness_R_level,
                                     "R_cell": list(self.witness_R_cell),
                                     "r_level": self.witness_r_level}}


def _nonempty(P: DyadicSet):
    if len(P) == 0:
        raise PreconditionError("empty set has no non-concentration constant")


def _ring_offsets(dim: int) -> np.ndarray:
    return np.array(np.meshgrid(*[[-1, 0, 1]] * dim, indexing="ij")).reshape(dim, -1).T


def _level_max_count(P: DyadicSet, i: int, ring: bool):
    """Largest number of ``P``-cells inside one level-``i`` cell (or ring); ties to the
    lexicographically smallest cell."""
    anc = ancestors(P.array, P.level - i)
    cells, counts = np.unique(anc, axis=0, return_counts=True)
    if not ring:
        j = int(np.argmax(counts))        # first maximum in lexicographic order
        return int(counts[j]), tuple(int(v) for v in cells[j])
    offs = _ring_offsets(P.dim)
    cand = (cells[:, None, :] + offs[None, :, :]).reshape(-1, P.dim)
    weights = np.repeat(counts, len(offs))
    ucells, inv = np.unique(cand, axis=0, return_inverse=True)
    totals = np.bincount(inv.reshape(-1), weights=weights).astype(np.int64)
    j = int(np.argmax(totals))
    return int(totals[j]), tuple(int(v) for v in ucells[j])


def count_in_cell(P: DyadicSet, level: int, cell, ring: bool = False) -> int:
    """|P ∩ Q|_δ for a level-``level`` cell ``Q`` (or its 3^dim ring)."""
    anc = ancestors(P.array, P.level - level)
    c = np.asarray(cell, dtype=np.int64)
    if ring:
        return int(np.sum(np.all(np.abs(anc - c) <= 1, axis=1)))
    return int(np.sum(np.all(anc == c, axis=1)))


def frostman_ratio(P: DyadicSet, s, level: int, cell, ring: bool = False) -> Pow2Rational:
    """The ratio |P ∩ Q|_δ / (r^s |P|_δ) for the given cell ``Q`` of side ``r = 2^-level``."""
    s = to_fraction(s)
    n = count_in_cell(P, level, cell, ring)
    if n == 0:
        raise PreconditionError("witness cell does not meet the set")
    return Pow2Rational(Fraction(n, len(P)), level * s)


def frostman_constant(P: DyadicSet, s, ring: bool = False) -> FrostmanCertificate:
    """Smallest C such that |P ∩ Q|_δ ≤ C r^s |P|_δ for all dyadic r and r-cells Q."""
    _nonempty(P)
    s = to_fraction(s)
    if s < 0 or s > P.dim:
        raise PreconditionError("s must lie in [0, dim]")
    best = None
    for i in range(P.level + 1):
        cnt, cell = _level_max_count(P, i, ring)
        val = Pow2Rational(Fraction(cnt, len(P)), i * s)
        if best is None or val > best[0]:
            best = (val, i, cell)
    return FrostmanCertificate(s, best[0], best[1], best[2], ring)


def is_delta_s_set(P: DyadicSet, s, C, ring: bool = False) -> bool:
    cert = frostman_constant(P, s, ring)
    C = Pow2Rational.of(C)
    ok = cert.C <= C
    if ok:
        # a (δ,s,C)-set has at least δ^{-s}/C cells
        if Pow2Rational(Fraction(len(P)), Fraction(0)) * C < Pow2Rational(Fraction(1), P.level * cert.s):
            raise VerificationError("cardinality consequence of the Frostman bound failed")
    return ok


def katz_tao_constant(P: DyadicSet, s, ring: bool = False) -> Pow2Rational:
    """max over dyadic r and r-cells Q of |P ∩ Q|_δ (δ/r)^s."""
    _nonempty(P)
    s = to_fraction(s)
    best = None
    for i in range(P.level + 1):
        cnt, _ = _level_max_count(P, i, ring)
        val = Pow2Rational(Fraction(cnt), -(P.level - i) * s)
        if best is None or val > best:
            best = val
    return best


def regularity_constant(P: DyadicSet, t) -> RegularityCertificate:
    """Frostman constant together with max |P ∩ p|_r / (R/r)^t over δ ≤ r ≤ R ≤ 1."""
    _nonempty(P)
    t = to_fraction(t)
    fc = frostman_constant(P, t)
    best = None
    for i in range(P.level + 1):                       # r = 2^-i
        anc_i = np.unique(ancestors(P.array, P.level - i), axis=0)
        for I in range(i + 1):                         # R = 2^-I
            up = ancestors(anc_i, i - I)
            cells, counts = np.unique(up, axis=0, return_counts=True)
            j = int(np.argmax(counts))
            val = Pow2Rational(Fraction(int(counts[j])), -(i - I) * t)
            if best is None or val > best[0]:
                best = (val, I, tuple(int(v) for v in cells[j]), i)
    return RegularityCertificate(t, fc, best[0], best[1], best[2], best[3])


def scaleinv_ratio(P: DyadicSet, t, R_level: int, R_cell, r_level: int) -> Pow2Rational:
    """Re-evaluate |P ∩ p|_r / (R/r)^t for a single pair of scales and an R-cell."""
    t = to_fraction(t)
    anc_r = np.unique(ancestors(P.array, P.level - r_level), axis=0)
    up = ancestors(anc_r, r_level - R_level)
    n = int(np.sum(np.all(up == np.asarray(R_cell, dtype=np.int64), axis=1)))
    return Pow2Rational(Fraction(n), -(r_level - R_level) * t)
