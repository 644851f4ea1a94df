"""Dyadic, delta-discretized geometric measure theory lab."""

from .errors import GmtlabError, PreconditionError, VerificationError
from .exact import Pow2Rational, frac_str, to_fraction
from .dyadic_core import (DyadicSet, coarsen, covering_number, full_grid, product, restrict,
                          renormalize, rescale)
from .frostman import (frostman_constant, is_delta_s_set, katz_tao_constant,
                       regularity_constant)
from .branching import (branching_function, check_uniform, exhaustive_uniformize,
                        uniformize)
from .lipschitz import (PiecewiseAffine, decompose_linear, falconer_decompose,
                        kaufman_decompose, superlinear_tail, weak_decompose)
from .incidence import (NiceConfiguration, additive_energy, check_nice_configuration,
                        incidences, multiplicity, project_covering, tube_cells,
                        union_tube_count)
from .constructions import (cantor_regular, cantor_set, elekes_config, progression,
                            sharpness_config, verify_sharpness)
from .bounds import (furstenberg_baseline, furstenberg_conjecture, furstenberg_general,
                     lp_min_polygon_K, lp_min_polygon_L, projection_exceptional,
                     sumproduct_exponent)
from .experiments import fit_exponent, run_experiment

__version__ = "0.1.0"

__all__ = [
    "GmtlabError",
    "PreconditionError",
    "VerificationError",
    "Pow2Rational",
    "frac_str",
    "to_fraction",
    "DyadicSet",
    "coarsen",
    "covering_number",
    "full_grid",
    "product",
    "restrict",
    "renormalize",
    "rescale",
    "frostman_constant",
    "is_delta_s_set",
    "katz_tao_constant",
    "regularity_constant",
    "branching_function",
    "check_uniform",
    "exhaustive_uniformize",
    "uniformize",
    "PiecewiseAffine",
    "decompose_linear",
    "falconer_decompose",
    "kaufman_decompose",
    "superlinear_tail",
    "weak_decompose",
    "NiceConfiguration",
    "additive_energy",
    "check_nice_configuration",
    "incidences",
    "multiplicity",
    "project_covering",
    "tube_cells",
    "union_tube_count",
    "cantor_regular",
    "cantor_set",
    "elekes_config",
    "progression",
    "sharpness_config",
    "verify_sharpness",
    "furstenberg_baseline",
    "furstenberg_conjecture",
    "furstenberg_general",
    "lp_min_polygon_K",
    "lp_min_polygon_L",
    "projection_exceptional",
    "sumproduct_exponent",
    "fit_exponent",
    "run_experiment",
]
