"""Request and response models shared by the HTTP service and the CLI."""

from __future__ import annotations

from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field

from .dyadic_core import DyadicSet
from .exact import frac_str, to_fraction


def _rational(v):
    if isinstance(v, bool):
        raise ValueError("booleans are not rationals")
    try:
        return frac_str(to_fraction(v))
    except Exception as exc:                       # PreconditionError carries the message
        raise ValueError(str(exc)) from None


Rational = Annotated[str, BeforeValidator(_rational)]


class SetModel(BaseModel):
    dim: Literal[1, 2]
    level: int = Field(ge=0, le=30)
    ambient: Literal["unit", "param", "shifted", "plane"] = "unit"
    cells: list[list[int]]

    def to_set(self) -> DyadicSet:
        return DyadicSet.from_dict(self.model_dump())


class CoverSpec(BaseModel):
    set: SetModel
    levels: Optional[list[int]] = None


class FrostmanSpec(BaseModel):
    set: SetModel
    s: Rational
    ring: bool = False
    t: Optional[Rational] = None
    C: Optional[Rational] = None      # claimed constant; exceeding it is a verification failure


class UniformizeSpec(BaseModel):
    set: SetModel
    T: int = Field(ge=1)
    eps: Optional[Rational] = None


class FunctionModel(BaseModel):
    breakpoints: list[tuple[Rational, Rational]] = Field(min_length=2)


class DecomposeSpec(BaseModel):
    kind: Literal["linear", "falconer", "kaufman", "weak", "tail"]
    f: FunctionModel
    eps: Rational
    s: Optional[Rational] = None
    t: Optional[Rational] = None
    d: Optional[int] = Field(default=None, ge=1)
    sigma: Optional[Rational] = None
    zeta: Optional[Rational] = None


class ConstructSpec(BaseModel):
    model_config = ConfigDict(extra="allow")
    kind: Literal["cantor", "cantor_regular", "progression", "full", "product", "subsample",
                  "elekes", "sharpness"]
    level: Optional[int] = Field(default=None, ge=0, le=30)
    emit_cells: bool = True


class BoundQuery(BaseModel):
    op: Literal["furstenberg_conjecture", "furstenberg_general", "furstenberg_baseline",
                "projection_exceptional", "sumproduct_exponent",
                "minimal_nonconcentration_exponent", "lp_min_polygon_K", "lp_min_polygon_L"]
    args: dict[str, Union[Rational, bool]] = Field(default_factory=dict)
    regime: Optional[str] = None
    variant: Optional[str] = None


class BoundsGrid(BaseModel):
    op: Literal["furstenberg_conjecture", "furstenberg_general", "furstenberg_baseline"]
    s: list[Rational]
    t: list[Rational]


class BoundsSpec(BaseModel):
    queries: list[BoundQuery] = Field(default_factory=list)
    grid: Optional[BoundsGrid] = None


class ExperimentSpec(BaseModel):
    model_config = ConfigDict(extra="allow")
    levels: list[int] = Field(min_length=1)


class RunRequest(BaseModel):
    """Body of every service call: the input document plus the run options the CLI exposes."""
    spec: dict[str, Any]
    seed: int = 0
    threads: int = Field(default=1, ge=1, le=64)


class Report(BaseModel):
    command: str
    kind: Optional[str] = None
    seed: int
    result: dict[str, Any]


class ErrorReport(BaseModel):
    error: str
    exit_code: int
    witness: Any = None
