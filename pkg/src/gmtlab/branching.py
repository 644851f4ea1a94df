"""Uniform subsets along the stage ladder 2^-T, 2^-2T, ..., and branching functions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic_core import DyadicSet, ancestors, coarsen, row_keys
from .errors import PreconditionError, VerificationError
from .exact import Pow2Rational, frac_str, to_fraction
from .frostman import frostman_constant
from .lipschitz import PiecewiseAffine


@dataclass(frozen=True)
class UniformStructure:
    T: int
    m: int
    N: tuple
    subject: DyadicSet

    def to_dict(self) -> dict:
        return {"T": self.T, "m": self.m, "N": list(self.N), "size": len(self.subject)}


@dataclass(frozen=True)
class UniformityFailure:
    stage: int
    cell_a: tuple
    count_a: int
    cell_b: tuple
    count_b: int
    reason: str

    def to_dict(self) -> dict:
        return {"stage": self.stage, "reason": self.reason,
                "cells": [list(self.cell_a), list(self.cell_b)],
                "counts": [self.count_a, self.count_b]}


def _stages(P: DyadicSet, T: int) -> int:
    if T < 1:
        raise PreconditionError("T must be a positive integer")
    if P.level % T:
        raise PreconditionError(f"level {P.level} is not divisible by T={T}")
    return P.level // T


def _child_counts(cells: np.ndarray, shift: int):
    """Unique parents (``shift`` levels up) of the unique rows of ``cells`` and their counts."""
    par = ancestors(np.unique(cells, axis=0), shift)
    return np.unique(par, axis=0, return_counts=True)


def check_uniform(P: DyadicSet, T: int):
    """Return the branching numbers, or the first stage where they are not constant."""
    m = _stages(P, T)
    N = []
    if len(P) == 0:
        raise PreconditionError("empty set")
    for j in range(1, m + 1):
        kids = ancestors(P.array, P.level - j * T)
        par, cnt = _child_counts(kids, T)
        if cnt.min() != cnt.max():
            a = int(np.argmax(cnt != cnt[0]))
            return UniformityFailure(j, tuple(par[0].tolist()), int(cnt[0]),
                                     tuple(par[a].tolist()), int(cnt[a]), "unequal child counts")
        n = int(cnt[0])
        if n & (n - 1):
            return UniformityFailure(j, tuple(par[0].tolist()), n, tuple(par[0].tolist()), n,
                                     "branching number is not a power of 2")
        N.append(n)
    return UniformStructure(T, m, tuple(N), P)


def _best_threshold(counts: np.ndarray) -> int:
    """Exponent i maximising 2^i * #{counts >= 2^i}; ties go to the larger i."""
    best_i, best_v = 0, -1
    top = int(counts.max()).bit_length() - 1
    for i in range(top + 1):
        v = (1 << i) * int(np.sum(counts >= (1 << i)))
        if v >= best_v:
            best_i, best_v = i, v
    return best_i


def uniformize(P: DyadicSet, T: int) -> DyadicSet:
    """A uniform subset found by pigeonholing one stage at a time, finest stage first.

    At each stage the surviving parents all carry the same mass below every
    child, so keeping the parents with at least 2^i children (i chosen to
    maximise the kept mass) and trimming each to its 2^i lexicographically
    smallest children loses at most a factor of about dim*T per stage.
    """
    m = _stages(P, T)
    if len(P) == 0:
        raise PreconditionError("empty set")
    cur = P.array
    for j in range(m, 0, -1):
        kid_all = ancestors(cur, P.level - j * T)
        kids = np.unique(kid_all, axis=0)
        par = ancestors(kids, T)
        pk = row_keys(par)
        order = np.lexsort(tuple(kids[:, ax] for ax in range(P.dim - 1, -1, -1)) + (pk,))
        kids, pk = kids[order], pk[order]
        starts = np.r_[0, np.flatnonzero(np.diff(pk)) + 1]
        sizes = np.diff(np.r_[starts, len(pk)])
        i = _best_threshold(sizes)
        want = 1 << i
        rank = np.arange(len(pk)) - np.repeat(starts, sizes)
        keep_kid = (np.repeat(sizes, sizes) >= want) & (rank < want)
        kept = kids[keep_kid]
        # filter the current fine cells by membership of their stage-j ancestor
        both = np.concatenate([kept, kid_all])
        keys = row_keys(both)
        mask = np.isin(keys[len(kept):], keys[:len(kept)])
        cur = cur[mask]
    out = DyadicSet.from_array(P.dim, P.level, cur, P.ambient, check=False)
    res = check_uniform(out, T)
    if not isinstance(res, UniformStructure):
        raise VerificationError("uniformize produced a non-uniform set", witness=res.to_dict())
    return out


def uniformize_bound_holds(P: DyadicSet, Pu: DyadicSet, T: int) -> bool:
    """|P'| >= (2T)^-m |P|, checked in integers."""
    m = _stages(P, T)
    return len(Pu) * (2 * T) ** m >= len(P)


def min_T_for(eps) -> int:
    """Smallest T with log2(2T)/T <= eps."""
    eps = to_fraction(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    T = 1
    while not _T_ok(T, eps):
        T += 1
    return T


def _T_ok(T: int, eps: Fraction) -> bool:
    # log2(2T) <= eps T  <=>  (2T)^q <= 2^(p T)  with eps = p/q
    return (2 * T) ** eps.denominator <= 2 ** (eps.numerator * T)


def _at_least_pow(part: int, whole: int, level: int, eps: Fraction, mult: int) -> bool:
    """part >= 2^(-mult * eps * level) * whole, exactly."""
    p, q = eps.numerator, eps.denominator
    return (part ** q) * (2 ** (mult * p * level)) >= whole ** q


def exhaustive_uniformize(P: DyadicSet, T: int, eps) -> tuple:
    """Disjoint uniform subsets, each of size >= δ^{2ε}|P|, leaving at most δ^ε|P| behind."""
    eps = to_fraction(eps)
    _stages(P, T)
    if not _T_ok(T, eps):
        raise PreconditionError(f"T={T} too small for eps={frac_str(eps)}; need T >= {min_T_for(eps)}",
                                witness=min_T_for(eps))
    total = len(P)
    p, q = eps.numerator, eps.denominator

    def small(n):                       # n <= δ^ε |P|
        return (n ** q) * (2 ** (p * P.level)) <= total ** q

    rest = set(P.cells)
    parts = []
    while rest and not (parts and small(len(rest))):
        U = uniformize(P.with_cells(rest), T)
        if not _at_least_pow(len(U), total, P.level, eps, 2):
            raise VerificationError("extracted subset below the δ^{2ε}|P| floor")
        parts.append(U)
        rest -= U.cellset
    if not small(len(rest)):
        raise VerificationError("leftover above δ^ε|P|")
    return tuple(parts)


def branching_function(U: UniformStructure) -> PiecewiseAffine:
    """β(j) = (1/T) Σ_{i<=j} log2 N_i, interpolated linearly."""
    ys = [Fraction(0)]
    for n in U.N:
        ys.append(ys[-1] + Fraction(n.bit_length() - 1, U.T))
    return PiecewiseAffine(tuple(Fraction(j) for j in range(U.m + 1)), tuple(ys))


def frostman_transfer_holds(U: UniformStructure, s, C) -> bool:
    """β(j) >= s j - log2(C)/T at every stage, i.e. |P|_{2^{-jT}} >= 2^{jTs}/C exactly."""
    s = to_fraction(s)
    C = Pow2Rational.of(C)
    beta = branching_function(U)
    for j in range(U.m + 1):
        cover = Pow2Rational(Fraction(1), beta.ys[j] * U.T)
        if cover * C < Pow2Rational(Fraction(1), j * U.T * s):
            return False
    return True


KAPPA = {1: 4, 2: 16}


@dataclass(frozen=True)
class IntermediateCheck:
    ok: bool
    measured: Pow2Rational
    bound: Pow2Rational
    kappa: int

    def to_dict(self) -> dict:
        return {"ok": self.ok, "measured": self.measured.to_dict(),
                "bound": self.bound.to_dict(), "kappa": self.kappa}


def intermediate_scale_set_check(P: DyadicSet, T: int, s, C, j: int,
                                 subset: DyadicSet | None = None, C2=1) -> IntermediateCheck:
    """Check that the coarsening of a uniform set (or of a dense subset) to 2^{-jT} stays a
    (Δ, s, κ C)-set, with κ = 4^dim (times C2 for a subset of relative size >= 1/C2)."""
    m = _stages(P, T)
    if not 1 <= j <= m:
        raise PreconditionError("Δ must be one of the stage scales 2^{-jT}, 1 <= j <= m")
    res = check_uniform(P, T)
    if not isinstance(res, UniformStructure):
        raise PreconditionError("P is not uniform", witness=res.to_dict())
    target = P if subset is None else subset
    C2 = to_fraction(C2)
    if subset is not None:
        if not subset.cellset <= P.cellset:
            raise PreconditionError("subset is not contained in P")
        if len(subset) * C2 < len(P):
            raise PreconditionError("subset smaller than |P|/C2")
    measured = frostman_constant(coarsen(target, j * T), s).C
    kappa = KAPPA[P.dim]
    bound = Pow2Rational.of(C) * Pow2Rational.of(kappa) * Pow2Rational.of(C2)
    return IntermediateCheck(measured <= bound, measured, bound, kappa)


def stage_net(P: DyadicSet, T: int) -> DyadicSet:
    """Coarsen to the largest stage scale 2^{-mT} >= δ so that the stage ladder applies."""
    if T < 1:
        raise PreconditionError("T must be a positive integer")
    return coarsen(P, (P.level // T) * T)
