from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import random_set
from gmtlab.constructions import cantor_set
from gmtlab.dyadic_core import DyadicSet, covering_number, full_grid, product, rescale
from gmtlab.errors import PreconditionError
from gmtlab.exact import Pow2Rational
from gmtlab.incidence import (SLOPE_RATIO_CONSTANT, NiceConfiguration, additive_energy,
                              check_nice_configuration, duality_constants,
                              high_multiplicity_set, incidences, multiplicity,
                              project_covering, project_covering_bound, slope_ratio, slope_set,
                              tube_cells, tube_contains_points, union_tube_count)

F = Fraction
seeds = st.integers(0, 2 ** 32 - 1)


def random_tubes(rng, k, n):
    A = rng.integers(-(1 << k), 1 << k, size=n)
    B = rng.integers(-(1 << k), 1 << k, size=n)
    return DyadicSet.from_array(2, k, np.c_[A, B], "param")


def test_horizontal_tube_is_two_rows():
    k = 6
    cells = tube_cells(k, (0, 1 << (k - 1)))
    rows = {j for _, j in cells.cells}
    assert rows == {32, 33} and len(cells) == 2 << k


def test_small_slope_tube_contains_bottom_row_near_origin():
    cells = tube_cells(5, (0, 0))
    assert (0, 0) in cells.cellset and all(j <= 1 for _, j in cells.cells)


@given(seeds)
def test_tube_cells_match_corner_scan(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    L = k + int(rng.integers(0, 2))
    A, B = int(rng.integers(-(1 << k), 1 << k)), int(rng.integers(-(1 << k), 1 << k))
    assert sorted(tube_cells(k, (A, B), L).cells) == oracles.tube_raster(k, A, B, L)


def test_duality_sandwich():
    rng = np.random.default_rng(1)
    for _ in range(30):
        k = int(rng.integers(2, 6))
        t = (int(rng.integers(-(1 << k), 1 << k)), int(rng.integers(-(1 << k), 1 << k)))
        d = duality_constants(k, t, k + 1)
        assert d["centre_inside"] and d["max_offset"] <= 2


def test_incidences_examples():
    k = 5
    G = full_grid(2, k)
    horiz = DyadicSet.from_cells(2, k, [(0, 8)], "param")
    assert incidences(G, horiz) == 2 << k
    assert incidences(G, DyadicSet.from_cells(2, k, [], "param")) == 0


@given(seeds)
def test_incidences_match_double_loop(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 6))
    P = random_set(rng, 2, k, int(rng.integers(1, 30)))
    fam = random_tubes(rng, k, int(rng.integers(1, 15)))
    assert incidences(P, fam) == oracles.incidences(P.cells, fam.cells, k)
    by_point = sum(int(tube_contains_points(k, fam, p).sum()) for p in P.cells)
    assert by_point == incidences(P, fam)


def fan(k, p):
    """All level-k tubes whose raster contains the cell p."""
    n = 1 << k
    cand = DyadicSet.from_array(2, k, [(A, B) for A in range(-n, n) for B in range(-3 * n, 3 * n)],
                                "param")
    keep = tube_contains_points(k, cand, p)
    return DyadicSet.from_array(2, k, cand.array[keep], "param")


def test_slope_set_examples():
    k = 4
    T = fan(k, (5, 9))
    S = slope_set(T)
    assert [c[0] for c in S.cells] == list(range(-(1 << k), 1 << k))
    assert slope_ratio(T) <= SLOPE_RATIO_CONSTANT
    single = DyadicSet.from_cells(2, k, [(3, -2)], "param")
    assert slope_set(single).cells == ((3,),)


def test_slope_ratio_on_random_common_cell_families():
    rng = np.random.default_rng(2)
    k = 5
    for _ in range(10):
        p = tuple(int(v) for v in rng.integers(0, 1 << k, 2))
        full = fan(k, p)
        sub = DyadicSet.from_array(2, k, full.array[rng.random(len(full)) < 0.5], "param")
        if len(sub):
            assert slope_ratio(sub) <= SLOPE_RATIO_CONSTANT


def nice_from(points, fams, s=0, C=1000):
    return NiceConfiguration(points, tuple(fams), F(s), Pow2Rational.of(C), len(fams[0]))


def test_nice_check_and_union_counts():
    k = 4
    p1, p2 = (3, 3), (12, 10)
    f1 = fan(k, p1)
    f2 = fan(k, p2)
    M = min(len(f1), len(f2))
    f1 = DyadicSet.from_array(2, k, f1.array[:M], "param")
    f2 = DyadicSet.from_array(2, k, f2.array[:M], "param")
    pts = DyadicSet.from_cells(2, k, [p1, p2])
    cfg = nice_from(pts, [f1, f2])
    chk = check_nice_configuration(cfg)
    assert chk.ok
    assert union_tube_count(cfg) == len(f1.cellset | f2.cellset)
    shared = nice_from(DyadicSet.from_cells(2, k, [p1]), [f1])
    assert union_tube_count(shared) == M
    bad = nice_from(pts, [f1, DyadicSet.from_array(2, k, f2.array[:M - 1], "param")])
    chk = check_nice_configuration(bad)
    assert not chk.ok and chk.violations[0]["kind"] == "cardinality"
    miss = nice_from(pts, [f1, f1])
    assert any(v["kind"] == "miss" for v in check_nice_configuration(miss).violations)


def test_nice_roundtrip():
    k = 3
    pts = DyadicSet.from_cells(2, k, [(1, 1)])
    f = fan(k, (1, 1))
    cfg = nice_from(pts, [f], s=F(1, 2), C=3)
    back = NiceConfiguration.from_dict(cfg.to_dict())
    assert back.points == pts and back.families[0] == f and back.M == len(f)


def test_projection_examples():
    A = random_set(np.random.default_rng(3), 1, 6, 20)
    B = random_set(np.random.default_rng(4), 1, 6, 9)
    K = product(A, B)
    for D in range(7):
        assert project_covering(K, 0, D) == covering_number(A, D)
    one = DyadicSet.from_cells(2, 4, [(3, 5)])
    assert project_covering(one, 0, 4) == 1
    assert project_covering(one, F(1, 2), 4) == 2
    with pytest.raises(PreconditionError):
        project_covering(one, F(3, 2), 4)


@given(seeds)
def test_projection_matches_interval_union(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 7))
    P = random_set(rng, 2, k, int(rng.integers(1, 40)))
    theta = F(int(rng.integers(0, 9)), 8)
    D = int(rng.integers(0, k + 2))
    got = project_covering(P, theta, D)
    assert got == oracles.project(P.cells, k, theta, D)
    assert got <= project_covering_bound(P, D)


def test_full_square_projections_are_full():
    G = full_grid(2, 6)
    for j in range(9):
        th = F(j, 8)
        assert project_covering(G, th, 6) >= 1 << 6


def test_multiplicity_product_fiber():
    A = random_set(np.random.default_rng(5), 1, 5, 8)
    B = random_set(np.random.default_rng(6), 1, 5, 11)
    K = product(A, B)
    x = K.cells[0]
    for r in range(6):
        assert multiplicity(K, 0, x, r, 0, dilate=False) == covering_number(B, r)


def test_multiplicity_isolated_point():
    K = DyadicSet.from_cells(2, 6, [(10, 10), (50, 50)])
    assert multiplicity(K, F(1, 3), (10, 10), 6, 3, dilate=False) == 1


@given(seeds)
def test_multiplicity_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 6))
    K = random_set(rng, 2, k, int(rng.integers(1, 25)))
    theta = F(int(rng.integers(0, 5)), 4)
    r = int(rng.integers(0, k + 1))
    R = int(rng.integers(0, r + 1))
    x = K.cells[int(rng.integers(0, len(K)))]
    for dil in (True, False):
        assert multiplicity(K, theta, x, r, R, dil) == \
            oracles.multiplicity(K.cells, k, theta, x, r, R, dil)


@given(seeds)
def test_multiplicity_monotone(seed):
    rng = np.random.default_rng(seed)
    k = 5
    K = random_set(rng, 2, k, 30)
    x = K.cells[0]
    th = F(1, 2)
    for r in range(k + 1):
        vals = [multiplicity(K, th, x, r, R) for R in range(r + 1)]
        assert all(v >= 1 for v in vals)
        assert all(a >= b for a, b in zip(vals, vals[1:]))        # R finer -> smaller box


def test_high_multiplicity_examples():
    A = random_set(np.random.default_rng(7), 1, 4, 5)
    B = random_set(np.random.default_rng(8), 1, 4, 6)
    K = product(A, B)
    assert high_multiplicity_set(K, F(1, 4), 1, 4, 2) == K
    assert len(high_multiplicity_set(K, F(1, 4), 10 ** 6, 4, 2)) == 0
    assert high_multiplicity_set(K, 0, covering_number(B, 3), 3, 0, dilate=False) == K


def test_high_multiplicity_scaling_law():
    rng = np.random.default_rng(9)
    k, l = 7, 2
    inner = rng.integers(1 << (k - 2), 3 << (k - 2), size=(60, 2))
    K = DyadicSet.from_array(2, k, inner)
    Q = (1, 2)
    th, M = F(1, 3), 2
    for r, R in ((6, 3), (5, 2), (7, 4)):
        for dil in (False, True):
            H = high_multiplicity_set(K, th, M, r, R, dil)
            lhs = rescale(H, l, Q) if len(H) else None
            TK = rescale(K, l, Q)
            rhs = high_multiplicity_set(TK, th, M, r - l, R - l, dil)
            assert (lhs.cells if lhs is not None else ()) == rhs.cells


def test_energy_examples():
    one = DyadicSet.from_cells(1, 6, [(4,)])
    assert additive_energy(one, one) == 1
    A = random_set(np.random.default_rng(10), 1, 6, 25)
    e = additive_energy(A, one)
    assert e == sum(1 for a in A.cells for b in A.cells if abs(a[0] - b[0]) <= 1)
    assert e <= 3 * len(A)


@given(seeds)
def test_energy_matches_quadruple_loop(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 8))
    A = random_set(rng, 1, k, int(rng.integers(1, 12)))
    B = random_set(rng, 1, k, int(rng.integers(1, 12)))
    e = additive_energy(A, B)
    assert e == oracles.energy([c[0] for c in A.cells], [c[0] for c in B.cells])
    assert e <= 3 * len(A) * len(B) ** 2
