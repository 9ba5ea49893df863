"""Explanation engine for classifiers compiled to d-DNNF circuits.

Computes and enumerates abductive and contrastive explanations using
polynomial-time circuit queries (consistency, validity, conditioning)
plus one SAT oracle call per explanation.
"""

from .circuit import (Circuit, CircuitBuilder, ParseError, StructureReport,
                      check_structure, from_decision_tree, parse_c2d,
                      parse_sdd, serialize_c2d, smooth)
from .explain import (ConstantFunctionError, EnumerationSession, Explanation,
                      Instance, check_duality, classify, enumerate_explanations,
                      explanation_record, find_axp_from_seed, find_cxp_from_seed,
                      is_weak_axp, is_weak_cxp, one_axp, one_cxp)
from .gdf import (Gdf, GdfEnumerationSession, GdfError, GdfValidation,
                  gdf_classify, gdf_enumerate, gdf_is_weak_axp, gdf_is_weak_cxp,
                  gdf_one_axp, gdf_one_cxp, gdf_predict, load_gdf, validate_gdf)
from .queries import (Count, PointQueries, condition, condition_selector,
                      count_models, evaluate, is_consistent, is_valid,
                      query_counts, reset_query_counts)
from .solver import CnfFormula, DimacsOracle, DpllOracle, make_oracle, solve

__version__ = "0.1.0"

_LAZY = {"CircuitClassifier", "CircuitExplainer"}


def __getattr__(name):
    # estimators pull in sklearn; load them only on demand
    if name in _LAZY:
        from . import estimators
        return getattr(estimators, name)
    raise AttributeError("module %r has no attribute %r" % (__name__, name))
