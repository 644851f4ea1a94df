"""Dyadic cells and finite unions of them, stored as sorted integer coordinates.

A cell at level ``k`` with coordinates ``(i, j)`` is the half-open box
``[i 2^-k, (i+1) 2^-k) x [j 2^-k, (j+1) 2^-k)``.  Coarsening is floor division
by a power of two, which is also correct for the negative slope coordinates
used in tube parameter space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import PreconditionError

AMBIENTS = ("unit", "param", "shifted", "plane")


def ambient_bounds(ambient: str, dim: int, level: int):
    """Per-axis half-open coordinate ranges ``(lo, hi)``; ``None`` means unbounded."""
    n = 1 << level
    if ambient == "unit":
        return [(0, n)] * dim
    if ambient == "shifted":
        return [(n, 2 * n)] * dim
    if ambient == "param":
        return [(-n, n)] + [None] * (dim - 1)
    if ambient == "plane":
        return [None] * dim
    raise PreconditionError(f"unknown ambient {ambient!r}")


@dataclass(frozen=True)
class DyadicSet:
    """A sorted, duplicate-free family of dyadic cells at a single level."""

    dim: int
    level: int
    cells: tuple = field(repr=False)
    ambient: str = "unit"

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise PreconditionError("dim must be 1 or 2")
        if self.level < 0:
            raise PreconditionError("level must be non-negative")
        if self.ambient not in AMBIENTS:
            raise PreconditionError(f"unknown ambient {self.ambient!r}")

    # construction -----------------------------------------------------
    @classmethod
    def from_cells(cls, dim: int, level: int, cells: Iterable, ambient: str = "unit",
                   *, dedup: bool = True, check: bool = True) -> "DyadicSet":
        raw = [tuple(int(v) for v in c) for c in cells]
        for c in raw:
            if len(c) != dim:
                raise PreconditionError(f"cell {c} has wrong dimension")
        if dedup:
            raw = sorted(set(raw))
        else:
            raw.sort()
            for a, b in zip(raw, raw[1:]):
                if a == b:
                    raise PreconditionError(f"duplicate cell {list(a)}")
        out = cls(dim, level, tuple(raw), ambient)
        if check:
            out._check_bounds()
        return out

    @classmethod
    def from_array(cls, dim: int, level: int, arr, ambient: str = "unit",
                   check: bool = True) -> "DyadicSet":
        a = np.asarray(arr, dtype=np.int64).reshape(-1, dim)
        if len(a):
            a = np.unique(a, axis=0)
        out = cls(dim, level, tuple(map(tuple, a.tolist())), ambient)
        out.__dict__["array"] = a
        if check:
            out._check_bounds()
        return out

    def _check_bounds(self):
        if not self.cells:
            return
        arr = self.array
        for axis, bd in enumerate(ambient_bounds(self.ambient, self.dim, self.level)):
            if bd is None:
                continue
            lo, hi = bd
            col = arr[:, axis]
            if col.min() < lo or col.max() >= hi:
                bad = arr[np.argmax((col < lo) | (col >= hi))].tolist()
                raise PreconditionError(
                    f"cell {bad} outside the {self.ambient} ambient at level {self.level}")

    # views -------------------------------------------------------------
    @cached_property
    def array(self) -> np.ndarray:
        if not self.cells:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.array(self.cells, dtype=np.int64).reshape(-1, self.dim)

    @cached_property
    def cellset(self) -> frozenset:
        return frozenset(self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def __contains__(self, cell) -> bool:
        return tuple(cell) in self.cellset

    def with_cells(self, cells, ambient: str | None = None) -> "DyadicSet":
        return DyadicSet.from_cells(self.dim, self.level, cells, ambient or self.ambient)

    # serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        return {"dim": self.dim, "level": self.level, "ambient": self.ambient,
                "cells": [list(c) for c in self.cells]}

    @classmethod
    def from_dict(cls, d: dict) -> "DyadicSet":
        try:
            return cls.from_cells(int(d["dim"]), int(d["level"]), d["cells"],
                                  d.get("ambient", "unit"), dedup=False)
        except KeyError as exc:
            raise PreconditionError(f"set file missing field {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "DyadicSet":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# keys and ancestors

def row_keys(arr: np.ndarray) -> np.ndarray:
    """Order-preserving int64 keys for the rows of a small-range integer array."""
    arr = np.asarray(arr, dtype=np.int64)
    if arr.ndim == 1 or arr.shape[1] == 1:
        return arr.reshape(-1).copy()
    if len(arr) == 0:
        return np.zeros(0, dtype=np.int64)
    lo = arr.min(axis=0)
    span = arr.max(axis=0) - lo + 1
    key = np.zeros(len(arr), dtype=np.int64)
    for axis in range(arr.shape[1]):
        key = key * span[axis] + (arr[:, axis] - lo[axis])
    return key


def ancestors(arr: np.ndarray, shift: int) -> np.ndarray:
    """Coordinates of the ancestors ``shift`` levels up (floor division)."""
    return np.right_shift(np.asarray(arr, dtype=np.int64), shift)


def _check_scale(P: DyadicSet, D: int):
    if D < 0:
        raise PreconditionError("scale exponent must be non-negative")
    if D > P.level:
        raise PreconditionError("scale finer than representation")


def coarsen(P: DyadicSet, D: int) -> DyadicSet:
    """The set of level-``D`` ancestors of the cells of ``P``."""
    _check_scale(P, D)
    if D == P.level:
        return P
    anc = ancestors(P.array, P.level - D)
    return DyadicSet.from_array(P.dim, D, anc, P.ambient, check=False)


def covering_number(P: DyadicSet, D: int) -> int:
    """Number of distinct level-``D`` ancestors of the cells of ``P``."""
    _check_scale(P, D)
    if len(P) == 0:
        return 0
    if D == P.level:
        return len(P)
    return int(np.unique(row_keys(ancestors(P.array, P.level - D))).size)


def cell_contains(Q_level: int, Q: Sequence[int], level: int, cell: Sequence[int]) -> bool:
    s = level - Q_level
    return all((c >> s) == q for c, q in zip(cell, Q))


def restrict(P: DyadicSet, Q_level: int, Q: Sequence[int]) -> DyadicSet:
    """Cells of ``P`` contained in the cell ``Q`` (given at level ``Q_level``)."""
    if Q_level > P.level:
        raise PreconditionError("restricting cell finer than the set")
    if len(P) == 0:
        return P
    anc = ancestors(P.array, P.level - Q_level)
    mask = np.all(anc == np.asarray(Q, dtype=np.int64), axis=1)
    sub = P.array[mask]
    out = DyadicSet(P.dim, P.level, tuple(map(tuple, sub.tolist())), P.ambient)
    out.__dict__["array"] = sub
    return out


def renormalize(P: DyadicSet, Q_level: int, Q: Sequence[int]) -> DyadicSet:
    """Image of ``P`` inside ``Q`` under the homothety taking ``Q`` onto the unit cube."""
    sub = restrict(P, Q_level, Q)
    if len(sub) == 0:
        raise PreconditionError("renormalizing empty intersection")
    shift = P.level - Q_level
    offset = np.asarray(Q, dtype=np.int64) << shift
    return DyadicSet.from_array(P.dim, shift, sub.array - offset, "unit", check=False)


def rescale(P: DyadicSet, Q_level: int, Q: Sequence[int]) -> DyadicSet:
    """Apply the same homothety as :func:`renormalize` to all of ``P`` (plane ambient)."""
    if Q_level > P.level:
        raise PreconditionError("rescaling cell finer than the set")
    shift = P.level - Q_level
    offset = np.asarray(Q, dtype=np.int64) << shift
    return DyadicSet.from_array(P.dim, shift, P.array - offset, "plane", check=False)


def neighborhood(P: DyadicSet, D: int) -> DyadicSet:
    """Level-``D`` cells within one cell ring of the level-``D`` coarsening of ``P``."""
    C = coarsen(P, D)
    if len(C) == 0:
        return C
    offs = np.array(np.meshgrid(*[[-1, 0, 1]] * P.dim, indexing="ij")).reshape(P.dim, -1).T
    cand = (C.array[:, None, :] + offs[None, :, :]).reshape(-1, P.dim)
    keep = np.ones(len(cand), dtype=bool)
    for axis, bd in enumerate(ambient_bounds(P.ambient, P.dim, D)):
        if bd is not None:
            keep &= (cand[:, axis] >= bd[0]) & (cand[:, axis] < bd[1])
    return DyadicSet.from_array(P.dim, D, cand[keep], P.ambient, check=False)


# ---------------------------------------------------------------------------
# small constructors and set algebra

def full_grid(dim: int, level: int, ambient: str = "unit") -> DyadicSet:
    n = 1 << level
    base = n if ambient == "shifted" else 0
    axes = [np.arange(base, base + n, dtype=np.int64)] * dim
    grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(dim, -1).T
    return DyadicSet.from_array(dim, level, grid, ambient, check=False)


def _same_frame(P: DyadicSet, Q: DyadicSet):
    if (P.dim, P.level, P.ambient) != (Q.dim, Q.level, Q.ambient):
        raise PreconditionError("set algebra needs equal dim, level and ambient")


def union(P: DyadicSet, Q: DyadicSet) -> DyadicSet:
    _same_frame(P, Q)
    return P.with_cells(P.cellset | Q.cellset)


def intersection(P: DyadicSet, Q: DyadicSet) -> DyadicSet:
    _same_frame(P, Q)
    return P.with_cells(P.cellset & Q.cellset)


def difference(P: DyadicSet, Q: DyadicSet) -> DyadicSet:
    _same_frame(P, Q)
    return P.with_cells(P.cellset - Q.cellset)


def product(A: DyadicSet, B: DyadicSet, ambient: str | None = None) -> DyadicSet:
    """Cartesian product of two 1-dim sets at a common level."""
    if A.dim != 1 or B.dim != 1 or A.level != B.level:
        raise PreconditionError("product needs two 1-dim sets at a common level")
    a = A.array[:, 0]
    b = B.array[:, 0]
    grid = np.stack([np.repeat(a, len(b)), np.tile(b, len(a))], axis=1)
    amb = ambient or (A.ambient if A.ambient == B.ambient else "plane")
    return DyadicSet.from_array(2, A.level, grid, amb, check=False)


def to_level(P: DyadicSet, level: int) -> DyadicSet:
    """Refine (all children) or coarsen ``P`` to ``level``."""
    if level <= P.level:
        return coarsen(P, level)
    s = level - P.level
    k = 1 << s
    offs = np.array(np.meshgrid(*[np.arange(k)] * P.dim, indexing="ij")).reshape(P.dim, -1).T
    cand = ((P.array << s)[:, None, :] + offs[None, :, :]).reshape(-1, P.dim)
    return DyadicSet.from_array(P.dim, level, cand, P.ambient, check=False)
