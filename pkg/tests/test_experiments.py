import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gmtlab.dyadic_core import DyadicSet
from gmtlab.errors import PreconditionError
from gmtlab.experiments import (build_set, fit_exponent, run_experiment, sum_dilate_covering,
                                sum_product_coverings)

F = Fraction


def intervals_hit(images, k):
    """Level-k cells met by a union of half-open intervals [lo, hi)."""
    hit = set()
    w = F(1, 2 ** k)
    for lo, hi in images:
        a = lo // w
        b = -((-hi) // w) - 1
        hit.update(range(int(a), int(b) + 1))
    return len(hit)


def test_fit_exponent_examples():
    f = fit_exponent([(k, 2 ** (3 * k)) for k in range(2, 7)])
    assert f.slope == pytest.approx(3) and f.residual < 1e-9
    f = fit_exponent([(k, 2 ** (k / 2) * 5) for k in range(1, 9)])
    assert f.slope == pytest.approx(0.5) and f.intercept == pytest.approx(math.log2(5))


@pytest.mark.parametrize("bad", [[(1, 2)], [(1, 2), (1, 4)], [(1, 0), (2, 3)]])
def test_fit_exponent_rejects(bad):
    with pytest.raises(PreconditionError):
        fit_exponent(bad)


@given(st.integers(0, 2 ** 32 - 1))
def test_sum_dilate_matches_interval_union(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 6))
    a = sorted(set(int(v) for v in rng.integers(0, 1 << k, int(rng.integers(1, 8)))))
    b = sorted(set(int(v) for v in rng.integers(1 << k, 2 << k, int(rng.integers(1, 8)))))
    A = DyadicSet.from_cells(1, k, [(v,) for v in a])
    Bs = DyadicSet.from_cells(1, k, [(v,) for v in b], "shifted")
    ci = int(rng.integers(0, 2 << k))
    c, w = F(ci, 2 ** k), F(1, 2 ** k)
    imgs = [(x * w + c * y * w, (x + 1) * w + c * (y + 1) * w) for x in a for y in b]
    assert sum_dilate_covering(A, Bs, ci) == intervals_hit(imgs, k)
    pts = {(x * w + c * y * w) // w for x in a for y in b}
    assert sum_dilate_covering(A, Bs, ci, "points") == len(pts)


@given(st.integers(0, 2 ** 32 - 1))
def test_sum_product_coverings_match_interval_union(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 6))
    a = sorted(set(int(v) for v in rng.integers(1 << k, 2 << k, int(rng.integers(1, 8)))))
    A = DyadicSet.from_cells(1, k, [(v,) for v in a], "shifted")
    w = F(1, 2 ** k)
    sums = [((x + y) * w, (x + y + 2) * w) for x in a for y in a]
    prods = [(x * y * w * w, (x + 1) * (y + 1) * w * w) for x in a for y in a]
    assert sum_product_coverings(A) == (intervals_hit(sums, k), intervals_hit(prods, k))


def test_abc_with_B_zero_in_points_mode():
    # B = {0}: A + cB = A at every c
    spec = {"levels": [4, 5, 6], "mode": "points",
            "A": {"kind": "cantor_regular", "s": "1/2"},
            "B": {"kind": "cells", "level": 8, "cells": [[0]]},
            "C": {"kind": "full", "ambient": "shifted"}}
    rep = run_experiment("abc", spec)
    for r in rep["measurements"]:
        assert r["max_count"] == r["min_count"] == r["A"] and r["max_ratio"] == 1


def test_projection_theta_zero_is_first_coordinate():
    spec = {"levels": [4, 6], "directions": ["0"],
            "K": {"kind": "product", "A": {"kind": "cantor_regular", "s": "1/2"},
                  "B": {"kind": "full"}}}
    rep = run_experiment("projection", spec)
    for r in rep["measurements"]:
        assert r["min_count"] == 2 ** (r["level"] // 2)


def test_projection_full_square():
    rep = run_experiment("projection", {"levels": [3, 5], "K": {"kind": "full", "dim": 2},
                                        "t": 1, "u": "3/4", "regime": "borel_le1"})
    for r in rep["measurements"]:
        assert r["min_count"] >= 2 ** r["level"]
    assert rep["bounds"]["exceptional_dimension"]["value"] == "2/3"


def test_sumproduct_progression():
    rep = run_experiment("sumproduct", {"levels": [4, 6, 8], "s": "1/2",
                                        "A": {"kind": "progression", "step": "1/2"}})
    assert rep["bound"]["value"] == "7/12"
    for r in rep["measurements"]:
        assert r["A"] == 2 ** (r["level"] // 2)
        assert r["sum"] <= 4 * r["A"]


def test_sharpness_experiment_reports_bounds():
    rep = run_experiment("sharpness", {"levels": [8, 10]})
    assert rep["bounds"]["lower"]["value"] == "9/16"
    assert rep["measurements"][0]["checks"]["nice_ok"]


def test_furstenberg_elekes_realized_exponents():
    spec = {"levels": [4, 6], "config": {
        "kind": "elekes", "A": {"kind": "cantor_regular", "s": "1/2", "ambient": "shifted"},
        "B": {"kind": "cantor_regular", "s": "1/2", "ambient": "shifted", "seed": 3},
        "C": {"kind": "cantor_regular", "s": "1/2", "ambient": "shifted", "seed": 4}}}
    rep = run_experiment("furstenberg", spec)
    assert rep["realized"] == {"s": "1/2", "t": "1", "level": 6}
    assert rep["bounds"]["baseline"]["value"] == "1"


def test_threads_do_not_change_reports():
    spec = {"levels": [4, 5, 6, 7], "A": {"kind": "cantor_regular", "s": "1/2"},
            "B": {"kind": "cantor_regular", "s": "1/2", "ambient": "shifted"},
            "C": {"kind": "full", "ambient": "shifted"}}
    assert run_experiment("abc", spec, threads=1) == run_experiment("abc", spec, threads=4)


def test_generator_errors():
    with pytest.raises(PreconditionError):
        build_set({"kind": "nope"}, 3)
    with pytest.raises(PreconditionError):
        build_set({"kind": "cantor", "T": 1, "N": [2, 2]}, 5)
    with pytest.raises(PreconditionError):
        run_experiment("nope", {"levels": [1]})
    with pytest.raises(PreconditionError):
        run_experiment("abc", {"levels": [3, 2]})
