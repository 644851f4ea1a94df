"""One function per CLI command; the service and the CLI both go through :func:`dispatch`."""

from __future__ import annotations

import math
from fractions import Fraction

from pydantic import ValidationError

from . import bounds as B
from .branching import (UniformStructure, branching_function, check_uniform,
                        exhaustive_uniformize, uniformize, uniformize_bound_holds)
from .constructions import elekes_config, sharpness_config
from .dyadic_core import covering_number
from .errors import PreconditionError, VerificationError
from .exact import frac_str
from .experiments import build_set, run_experiment
from .frostman import (frostman_constant, frostman_ratio, is_delta_s_set, katz_tao_constant,
                       regularity_constant, scaleinv_ratio)
from .incidence import check_nice_configuration, union_tube_count
from .lipschitz import (PiecewiseAffine, decompose_linear, falconer_decompose,
                        kaufman_decompose, superlinear_tail, weak_decompose)
from .schemas import (BoundsSpec, ConstructSpec, CoverSpec, DecomposeSpec, ExperimentSpec,
                      FrostmanSpec, UniformizeSpec)

COMMANDS = ("cover", "frostman", "uniformize", "decompose", "construct", "bounds", "experiment")


def _validate(model, spec: dict):
    try:
        return model.model_validate(spec)
    except ValidationError as exc:
        errs = [{"loc": list(e["loc"]), "msg": e["msg"]} for e in exc.errors()]
        raise PreconditionError("invalid spec", witness=errs) from None


def cmd_cover(spec: dict, seed: int, threads: int) -> dict:
    req = _validate(CoverSpec, spec)
    P = req.set.to_set()
    levels = req.levels if req.levels is not None else list(range(P.level + 1))
    return {"size": len(P), "level": P.level,
            "covering": [{"level": D, "count": covering_number(P, D)} for D in levels]}


def cmd_frostman(spec: dict, seed: int, threads: int) -> dict:
    req = _validate(FrostmanSpec, spec)
    P = req.set.to_set()
    cert = frostman_constant(P, req.s, req.ring)
    again = frostman_ratio(P, req.s, cert.witness_level, cert.witness_cell, req.ring)
    if again != cert.C:
        raise VerificationError("witness does not reproduce the Frostman constant",
                                witness=cert.to_dict())
    if req.C is not None and not is_delta_s_set(P, req.s, req.C, req.ring):
        raise VerificationError(f"set is not a (delta, {req.s}, {req.C})-set",
                                witness=cert.to_dict())
    out = {"frostman": cert.to_dict(), "katz_tao": katz_tao_constant(P, req.s, req.ring).to_dict()}
    if req.t is not None:
        reg = regularity_constant(P, req.t)
        chk = scaleinv_ratio(P, req.t, reg.witness_R_level, reg.witness_R_cell, reg.witness_r_level)
        if chk != reg.C_scaleinv:
            raise VerificationError("witness does not reproduce the regularity constant",
                                    witness=reg.to_dict())
        out["regularity"] = reg.to_dict()
    return out


def cmd_uniformize(spec: dict, seed: int, threads: int) -> dict:
    req = _validate(UniformizeSpec, spec)
    P = req.set.to_set()
    U = uniformize(P, req.T)
    st = check_uniform(U, req.T)
    if not isinstance(st, UniformStructure):
        raise VerificationError("output is not uniform", witness=st.to_dict())
    beta = branching_function(st)
    out = {"input_size": len(P), "structure": st.to_dict(),
           "size_bound_holds": uniformize_bound_holds(P, U, req.T),
           "branching": [frac_str(y) for y in beta.ys], "set": U.to_dict()}
    if req.eps is not None:
        parts = exhaustive_uniformize(P, req.T, req.eps)
        out["exhaustive"] = {"parts": [check_uniform(p, req.T).to_dict() for p in parts],
                             "leftover": len(P) - sum(len(p) for p in parts)}
    return out


def cmd_decompose(spec: dict, seed: int, threads: int) -> dict:
    req = _validate(DecomposeSpec, spec)
    f = PiecewiseAffine.from_points([(x, y) for x, y in req.f.breakpoints])

    def need(name):
        v = getattr(req, name)
        if v is None:
            raise PreconditionError(f"decomposition {req.kind!r} needs '{name}'")
        return v

    if req.kind == "linear":
        res = decompose_linear(f, req.eps, req.d)
    elif req.kind == "falconer":
        res = falconer_decompose(f, need("s"), need("t"), req.eps)
    elif req.kind == "kaufman":
        res = kaufman_decompose(f, need("s"), need("t"), req.eps)
    elif req.kind == "weak":
        res = weak_decompose(f, req.eps, req.d)
    else:
        res = superlinear_tail(f, need("sigma"), need("zeta"), req.eps, need("d"))
    return {"function": f.to_dict(), "decomposition": res.to_dict()}


def cmd_construct(spec: dict, seed: int, threads: int) -> dict:
    req = _validate(ConstructSpec, spec)
    extra = dict(req.model_extra or {})
    if req.kind == "sharpness":
        if req.level is None:
            raise PreconditionError("sharpness construction needs 'level'")
        S = sharpness_config(extra.get("s", "1/2"), extra.get("t", 1), extra.get("u", "1/2"),
                             req.level)
        out = {"configuration": S.to_dict()}
        if req.emit_cells:
            out["points"] = S.points.tolist()
            out["slopes"] = S.slopes.tolist()
        return out
    if req.kind == "elekes":
        if req.level is None:
            raise PreconditionError("Elekes construction needs 'level'")
        sets = [build_set(extra[n], req.level, seed + i) for i, n in enumerate("ABC")]
        E = elekes_config(*sets, s=extra.get("s", 0))
        chk = check_nice_configuration(E.nice)
        if not (chk.ok and E.identity_ok):
            raise VerificationError("Elekes configuration failed verification",
                                    witness=chk.to_dict())
        out = {"configuration": E.to_dict(), "tubes": union_tube_count(E.nice),
               "check": chk.to_dict()}
        if req.emit_cells:
            out["nice"] = E.nice.to_dict()
        return out
    gen = dict(extra, kind=req.kind)
    level = req.level
    if level is None and req.kind == "cantor":
        level = int(extra["T"]) * len(extra["N"])
    if level is None:
        raise PreconditionError(f"construction {req.kind!r} needs 'level'")
    P = build_set(gen, level, seed)
    out = {"size": len(P), "level": P.level, "dim": P.dim, "ambient": P.ambient,
           "log2_size_over_level": math.log2(len(P)) / P.level if len(P) and P.level else None}
    if req.emit_cells:
        out["set"] = P.to_dict()
    return out


def _bound_row(op: str, value: Fraction, query: dict, source: str) -> dict:
    return {"query": query, "op": op, "value_num": value.numerator,
            "value_den": value.denominator, "value": float(value), "source_theorem": source}


SOURCES = {
    "furstenberg_conjecture": "Furstenberg set conjecture",
    "furstenberg_general": "Furstenberg set estimate for general sets",
    "furstenberg_baseline": "elementary Furstenberg estimate",
    "projection_exceptional": "exceptional set estimate for projections",
    "sumproduct_exponent": "discretized sum-product estimate",
    "minimal_nonconcentration_exponent": "Furstenberg estimate under minimal non-concentration",
    "lp_min_polygon_K": "vertex minimization, case t <= 1",
    "lp_min_polygon_L": "vertex minimization, case t > 1",
}


def _eval_query(op: str, args: dict, regime=None, variant=None):
    a = {k: v for k, v in args.items()}
    if op == "furstenberg_conjecture":
        return B.furstenberg_conjecture(a["s"], a["t"]), {}
    if op == "furstenberg_baseline":
        return B.furstenberg_baseline(a["s"], a["t"]), {}
    if op == "furstenberg_general":
        r = B.furstenberg_general(a["s"], a["t"])
        return r.dimension, {"gamma": frac_str(r.gamma)}
    if op == "projection_exceptional":
        return B.projection_exceptional(a["t"], a["u"], regime or a.get("regime", "")), {}
    if op == "sumproduct_exponent":
        return B.sumproduct_exponent(a["s"], variant or "general"), {}
    if op == "minimal_nonconcentration_exponent":
        return B.minimal_nonconcentration_exponent(a["s"], a["t"], a["u"],
                                                   bool(a.get("sharp", False))), {}
    if op == "lp_min_polygon_K":
        r = B.lp_min_polygon_K(a["s"], a["tbar"], a.get("eta", 0))
        return r.minimum, r.to_dict()
    if op == "lp_min_polygon_L":
        r = B.lp_min_polygon_L(a["s"], a["t"], a.get("eta", 0))
        return r.minimum, r.to_dict()
    raise PreconditionError(f"unknown bound {op!r}")


def cmd_bounds(spec: dict, seed: int, threads: int) -> dict:
    req = _validate(BoundsSpec, spec)
    rows = []
    for q in req.queries:
        try:
            val, extra = _eval_query(q.op, q.args, q.regime, q.variant)
        except KeyError as exc:
            raise PreconditionError(f"bound {q.op!r} is missing argument {exc}") from None
        row = _bound_row(q.op, val, q.model_dump(exclude_none=True), SOURCES[q.op])
        if extra:
            row["details"] = extra
        rows.append(row)
    if req.grid is not None:
        for s in req.grid.s:
            for t in req.grid.t:
                try:
                    val, _ = _eval_query(req.grid.op, {"s": s, "t": t})
                except PreconditionError:
                    continue
                rows.append(_bound_row(req.grid.op, val, {"s": s, "t": t}, SOURCES[req.grid.op]))
    return {"rows": rows}


def cmd_experiment(spec: dict, seed: int, threads: int, kind: str | None = None) -> dict:
    _validate(ExperimentSpec, spec)
    kind = kind or spec.get("kind")
    if kind is None:
        raise PreconditionError("experiment kind missing")
    return run_experiment(kind, spec, seed, threads)


HANDLERS = {"cover": cmd_cover, "frostman": cmd_frostman, "uniformize": cmd_uniformize,
            "decompose": cmd_decompose, "construct": cmd_construct, "bounds": cmd_bounds}


def dispatch(command: str, spec: dict, kind: str | None = None, seed: int = 0,
             threads: int = 1) -> dict:
    """Run one command and wrap the result; raises library errors unchanged."""
    if command not in COMMANDS:
        raise PreconditionError(f"unknown command {command!r}")
    if not isinstance(spec, dict):
        raise PreconditionError("spec must be a JSON object")
    if command == "experiment":
        result = cmd_experiment(spec, seed, threads, kind)
        kind = kind or spec.get("kind")
    else:
        if kind is not None:
            spec = dict(spec, kind=kind)
        result = HANDLERS[command](spec, seed, threads)
    return {"command": command, "kind": kind if kind is not None else spec.get("kind"),
            "seed": seed, "result": result}
