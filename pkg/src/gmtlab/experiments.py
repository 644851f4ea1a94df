"""Experiment harness: build inputs per scale, measure covering numbers, fit exponents.

Inputs are described by small JSON "generator" dicts so that the same
description can be evaluated at every level of a scale grid.  Reports are
plain dicts with deterministic key order and no timing data.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bounds as B
from .constructions import (cantor_regular, cantor_set, elekes_config, progression,
                            random_subsample, sharpness_config)
from .dyadic_core import DyadicSet, coarsen, covering_number, full_grid, product
from .errors import PreconditionError, VerificationError
from .exact import frac_str, to_fraction
from .incidence import (_union_length, check_nice_configuration, project_covering,
                        union_tube_count)


# ---------------------------------------------------------------------------
# fitting

@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    residual: float

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "max_abs_residual": self.residual}


def fit_exponent(samples) -> Fit:
    """Least squares line through (k, log2 count); residual is the max absolute deviation."""
    samples = list(samples)
    if len(samples) < 2:
        raise PreconditionError("need at least two samples to fit an exponent")
    if any(c <= 0 for _, c in samples):
        raise PreconditionError("counts must be positive")
    pts = [(float(k), math.log2(c)) for k, c in samples]
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.ptp(xs) == 0:
        raise PreconditionError("samples need at least two distinct scales")
    xm, ym = xs.mean(), ys.mean()
    slope = float(((xs - xm) * (ys - ym)).sum() / ((xs - xm) ** 2).sum())
    icpt = float(ym - slope * xm)
    res = float(np.abs(ys - (slope * xs + icpt)).max())
    return Fit(slope, icpt, res)


# ---------------------------------------------------------------------------
# generators evaluated per level

def build_set(gen: dict, level: int, seed: int = 0) -> DyadicSet:
    """Evaluate a generator description at ``level``."""
    if not isinstance(gen, dict) or "kind" not in gen:
        raise PreconditionError("generator must be an object with a 'kind'")
    kind = gen["kind"]
    dim = int(gen.get("dim", 1))
    amb = gen.get("ambient", "unit")
    sd = int(gen.get("seed", seed))
    if kind == "cantor_regular":
        return cantor_regular(gen["s"], level, dim, sd, amb, gen.get("mode", "random"))
    if kind == "cantor":
        T, N = int(gen["T"]), list(gen["N"])
        P = cantor_set(T, N, dim, sd, amb, gen.get("mode", "random"))
        return _at_level(P, level)
    if kind == "full":
        return full_grid(dim, level, amb)
    if kind == "progression":
        step = math.floor(to_fraction(gen.get("step", "1/2")) * level + Fraction(1, 2))
        return progression(level, step, gen.get("ambient", "shifted"))
    if kind == "set":
        return _at_level(DyadicSet.from_dict(gen["set"]), level)
    if kind == "cells":
        P = DyadicSet.from_cells(dim, int(gen["level"]), gen["cells"], amb)
        return _at_level(P, level)
    if kind == "product":
        X = build_set(gen["A"], level, seed)
        Y = build_set(gen["B"], level, seed + 1)
        return product(X, Y, gen.get("ambient"))
    if kind == "subsample":
        return random_subsample(build_set(gen["of"], level, seed), gen["fraction"], sd)
    raise PreconditionError(f"unknown generator kind {kind!r}")


def _at_level(P: DyadicSet, level: int) -> DyadicSet:
    if level > P.level:
        raise PreconditionError(f"generator has level {P.level}, finer level {level} requested")
    return coarsen(P, level)


def _levels(spec: dict) -> list:
    ks = [int(k) for k in spec.get("levels", [])]
    if not ks:
        raise PreconditionError("experiment needs a non-empty 'levels' list")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise PreconditionError("levels must be strictly increasing")
    if ks[0] < 1:
        raise PreconditionError("levels must be positive")
    return ks


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _nondecreasing(xs) -> bool:
    return all(b >= a for a, b in zip(xs, xs[1:]))


# ---------------------------------------------------------------------------
# ABC sums

def sum_dilate_covering(A: DyadicSet, Bs: DyadicSet, c_idx: int, mode: str = "cells") -> int:
    """|A + c B|_δ with c = c_idx 2^-k (c >= 0).

    ``mode="cells"`` covers the exact image of the two cells, an interval of
    length δ(1 + c); ``mode="points"`` uses the left endpoints only.
    """
    k = A.level
    a = A.array[:, 0]
    b = Bs.array[:, 0]
    lo = ((a[:, None] << k) + c_idx * b[None, :]).ravel()       # units of 4^-k
    W = 1 << k
    if mode == "points":
        return int(np.unique(np.floor_divide(lo, W)).size)
    if mode != "cells":
        raise PreconditionError("mode must be 'cells' or 'points'")
    if c_idx < 0:
        raise PreconditionError("dilation factor must be non-negative")
    hi = lo + W + c_idx
    return _union_length(np.floor_divide(lo, W), np.floor_divide(hi - 1, W))


def run_abc(spec: dict, seed: int = 0, threads: int = 1) -> dict:
    ks = _levels(spec)
    mode = spec.get("mode", "cells")

    def one(k):
        A = build_set(spec["A"], k, seed)
        Bs = build_set(spec["B"], k, seed + 1)
        C = build_set(spec["C"], k, seed + 2)
        if len(Bs) == 0 or len(C) == 0:
            raise PreconditionError("B and C must be non-empty")
        if A.dim != 1 or Bs.dim != 1 or C.dim != 1:
            raise PreconditionError("A, B, C must be 1-dim")
        cs = C.array[:, 0]
        counts = [sum_dilate_covering(A, Bs, int(c), mode) for c in cs]
        i = int(np.argmax(counts))
        nA = len(A)
        return {"level": k, "A": nA, "B": len(Bs), "C": len(C),
                "max_count": int(counts[i]), "argmax_c": f"{int(cs[i])}/2^{k}",
                "min_count": int(min(counts)), "median_count": float(np.median(counts)),
                "max_ratio": counts[i] / nA}

    rows = _pmap(one, ks, threads)
    fit = fit_exponent([(r["level"], r["max_ratio"]) for r in rows]) if len(rows) > 1 else None
    ratios = [r["max_ratio"] for r in rows]
    return {"kind": "abc", "levels": ks, "mode": mode, "measurements": rows,
            "fit": fit.to_dict() if fit else None,
            "checks": {"ratio_nondecreasing": _nondecreasing(ratios),
                       "fitted_exponent_positive": bool(fit and fit.slope > 0)},
            "bound": {"value": None, "source": "growth constant of the ABC sum-product theorem is not explicit"}}


# ---------------------------------------------------------------------------
# projections

def default_directions(k: int) -> list:
    m = (k + 1) // 2
    return [Fraction(j, 1 << m) for j in range((1 << m) + 1)]


def run_projection(spec: dict, seed: int = 0, threads: int = 1) -> dict:
    ks = _levels(spec)
    cands = [to_fraction(x) for x in spec.get("candidates", [])]

    def one(k):
        K = build_set(spec["K"], k, seed)
        if K.dim != 2:
            raise PreconditionError("K must be 2-dim")
        dirs = [to_fraction(x) for x in spec["directions"]] if "directions" in spec \
            else default_directions(k)
        counts = [project_covering(K, th, k) for th in dirs]
        exps = [math.log2(c) / k for c in counts]
        frac = {frac_str(e): sum(x < e for x in exps) / len(exps) for e in cands}
        return {"level": k, "size": len(K), "directions": len(dirs),
                "min_count": int(min(counts)), "max_count": int(max(counts)),
                "argmin_theta": frac_str(dirs[int(np.argmin(counts))]),
                "min_exponent": min(exps), "max_exponent": max(exps),
                "exceptional_fraction": frac,
                "counts": {frac_str(d): int(c) for d, c in zip(dirs, counts)}}

    rows = _pmap(one, ks, threads)
    fit = fit_exponent([(r["level"], r["min_count"]) for r in rows]) if len(rows) > 1 else None
    out = {"kind": "projection", "levels": ks, "measurements": rows,
           "fit_min": fit.to_dict() if fit else None, "bounds": {}}
    if "t" in spec and "u" in spec and "regime" in spec:
        out["bounds"]["exceptional_dimension"] = {
            "value": frac_str(B.projection_exceptional(spec["t"], spec["u"], spec["regime"])),
            "source": f"projection_exceptional(t, u, {spec['regime']})"}
    if all(x in spec for x in ("s", "t", "u")):
        out["bounds"]["single_scale"] = {
            "value": frac_str(B.minimal_nonconcentration_exponent(spec["s"], spec["t"], spec["u"])),
            "source": "minimal_nonconcentration_exponent(s, t, u)"}
    return out


# ---------------------------------------------------------------------------
# Furstenberg configurations

def run_furstenberg(spec: dict, seed: int = 0, threads: int = 1) -> dict:
    ks = _levels(spec)
    cfg = spec.get("config", {})
    kind = cfg.get("kind")
    if kind == "elekes":
        rows = _pmap(lambda k: _elekes_row(cfg, k, seed, spec.get("certify", False)), ks, threads)
    elif kind == "sharpness":
        rows = _pmap(lambda k: _sharpness_row(cfg, k), ks, threads)
    elif kind == "fan":
        rows = _pmap(lambda k: _fan_row(cfg, k, seed), ks, threads)
    else:
        raise PreconditionError("config.kind must be 'elekes', 'sharpness' or 'fan'")
    out = {"kind": "furstenberg", "config": kind, "levels": ks, "measurements": rows}
    if len(rows) > 1:
        out["fit_ratio"] = fit_exponent([(r["level"], r["ratio"]) for r in rows]).to_dict()
        out["fit_tubes"] = fit_exponent([(r["level"], r["tubes"]) for r in rows]).to_dict()
    last = rows[-1]
    out["finest"] = {"level": last["level"], "ratio_exponent": math.log2(last["ratio"]) / last["level"]}
    s, t = to_fraction(cfg.get("s", 0)), to_fraction(cfg.get("t", 0))
    bnd = {}
    if kind == "elekes":
        # tube families are copies of A, the dual point set is C x B
        rz = last["realized"]
        s = Fraction(rz["A"]).limit_denominator(1 << 12)
        t = Fraction(rz["B"] + rz["C"]).limit_denominator(1 << 12)
        out["realized"] = {"s": frac_str(s), "t": frac_str(t), "level": last["level"]}
        base = B.furstenberg_baseline(s, t)
        bnd["baseline"] = {"value": frac_str(base), "source": "furstenberg_baseline(s, t)"}
        out["baseline_gap"] = out["finest"]["ratio_exponent"] - float(base)
        try:
            bnd["gamma"] = {"value": frac_str(B.gamma(t, s)), "source": "gamma(t, s)"}
        except PreconditionError:
            pass
    if kind == "sharpness":
        u = to_fraction(cfg["u"])
        bnd["tube_exponent"] = {"value": frac_str(s + t / 2 + u * s / 2),
                                "source": "s + t/2 + u s/2"}
        bnd["lower"] = {"value": frac_str(B.minimal_nonconcentration_exponent(s, t, u)),
                        "source": "minimal_nonconcentration_exponent(s, t, u)"}
        bnd["lower_sharp"] = {"value": frac_str(B.minimal_nonconcentration_exponent(s, t, u, True)),
                              "source": "minimal_nonconcentration_exponent(s, t, u, sharp)"}
    out["bounds"] = bnd
    return out


def _elekes_row(cfg: dict, k: int, seed: int, certify: bool) -> dict:
    A = build_set(cfg["A"], k, seed)
    Bs = build_set(cfg["B"], k, seed + 1)
    C = build_set(cfg["C"], k, seed + 2)
    s = to_fraction(cfg.get("s", 0))
    E = elekes_config(A, Bs, C, s=s if certify else None)
    if not E.identity_ok:
        raise VerificationError("an Elekes incidence failed at cell resolution")
    U = union_tube_count(E.nice)
    row = {"level": k, "points": len(E.nice.points), "M": E.nice.M, "tubes": U,
           "ratio": U / E.nice.M, "dedup_loss": frac_str(E.dedup_loss),
           "realized": {"A": math.log2(len(A)) / k, "B": math.log2(len(Bs)) / k,
                        "C": math.log2(len(C)) / k}}
    if certify:
        chk = check_nice_configuration(E.nice)
        if not chk.ok:
            raise VerificationError("Elekes configuration is not nice", witness=chk.to_dict())
        row["frostman_C"] = E.nice.C.to_dict()
    return row


def _sharpness_row(cfg: dict, k: int) -> dict:
    S = sharpness_config(cfg["s"], cfg["t"], cfg["u"], k)
    ch = S.checks
    if not (ch["P0_within_rounding"] and ch["nonconc_ok"]):
        raise VerificationError("sharpness identities failed after rounding", witness=ch)
    s_r = Fraction(S.M.bit_length() - 1, k)
    t_r = Fraction(2 * k - 2 * S.K_rho - S.K_delta, k)
    u_r = Fraction(S.K_delta, k)
    return {"level": k, "points": len(S.points), "M": S.M, "tubes": S.tubes,
            "ratio": S.tubes / S.M, "base_tubes": S.base_tubes,
            "realized": {"s": frac_str(s_r), "t": frac_str(t_r), "u": frac_str(u_r),
                         "tube_exponent": frac_str(s_r + t_r / 2 + u_r * s_r / 2)},
            "checks": ch, "ledger": S.ledger}


def _fan_row(cfg: dict, k: int, seed: int) -> dict:
    """One point with tubes through it whose slopes form a given 1-dim set."""
    S = build_set(cfg["slopes"], k, seed)
    if S.dim != 1 or S.ambient != "unit":
        raise PreconditionError("fan slopes must be a 1-dim unit set")
    return {"level": k, "points": 1, "M": len(S), "tubes": len(S), "ratio": 1.0}


# ---------------------------------------------------------------------------
# sum-product

def sum_product_coverings(A: DyadicSet):
    """(|A+A|_δ, |A.A|_δ) for A in [1, 2), from exact cell images."""
    if A.dim != 1 or A.ambient != "shifted":
        raise PreconditionError("A must be a 1-dim set in the shifted ambient [1, 2)")
    k = A.level
    a = A.array[:, 0]
    s_lo = (a[:, None] + a[None, :]).ravel()                 # image [lo, lo+2) in δ units
    plus = _union_length(s_lo, s_lo + 1)
    p_lo = (a[:, None] * a[None, :]).ravel()                 # δ² units
    p_hi = ((a + 1)[:, None] * (a + 1)[None, :]).ravel()
    W = 1 << k
    times = _union_length(np.floor_divide(p_lo, W), np.floor_divide(p_hi - 1, W))
    return plus, times


def run_sumproduct(spec: dict, seed: int = 0, threads: int = 1) -> dict:
    ks = _levels(spec)

    def one(k):
        A = build_set(spec["A"], k, seed)
        plus, times = sum_product_coverings(A)
        # product-covering identity on two coarse 1-dim factors
        X = DyadicSet.from_array(1, k, np.unique(A.array), "shifted", check=False)
        prod = covering_number(product(X, X), max(k - 1, 0)) if k > 0 else 1
        ident = prod == covering_number(X, max(k - 1, 0)) ** 2
        if not ident:
            raise VerificationError("covering number of a product is not the product")
        m = max(plus, times)
        return {"level": k, "A": len(A), "sum": plus, "product": times, "max": m,
                "max_exponent": math.log2(m) / k, "size_exponent": math.log2(len(A)) / k}

    rows = _pmap(one, ks, threads)
    out = {"kind": "sumproduct", "levels": ks, "measurements": rows}
    if len(rows) > 1:
        out["fit_max"] = fit_exponent([(r["level"], r["max"]) for r in rows]).to_dict()
        out["fit_size"] = fit_exponent([(r["level"], r["A"]) for r in rows]).to_dict()
    if "s" in spec:
        s = to_fraction(spec["s"])
        try:
            e = B.sumproduct_exponent(s) * s
            out["bound"] = {"value": frac_str(e), "source": "sumproduct_exponent(s) * s"}
        except PreconditionError as exc:
            out["bound"] = {"value": None, "source": str(exc)}
    return out


# ---------------------------------------------------------------------------

RUNNERS = {"abc": run_abc, "projection": run_projection, "furstenberg": run_furstenberg,
           "sumproduct": run_sumproduct}


def run_sharpness(spec: dict, seed: int = 0, threads: int = 1) -> dict:
    inner = dict(spec)
    inner["config"] = {"kind": "sharpness", "s": spec.get("s", "1/2"), "t": spec.get("t", 1),
                       "u": spec.get("u", "1/2")}
    out = run_furstenberg(inner, seed, threads)
    out["kind"] = "sharpness"
    return out


RUNNERS["sharpness"] = run_sharpness


def run_experiment(kind: str, spec: dict, seed: int = 0, threads: int = 1) -> dict:
    if kind not in RUNNERS:
        raise PreconditionError(f"unknown experiment {kind!r}; expected one of {sorted(RUNNERS)}")
    return RUNNERS[kind](spec, seed, max(1, int(threads)))
