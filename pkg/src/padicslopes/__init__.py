"""Finite-precision p-adic computation toolkit.

Scalar arithmetic with valuation tracking, truncated series and Iwasawa
elements, weight characters, locally analytic coefficient modules,
branching-law evaluators, slope decompositions of compact operators, and a
desk-scale overconvergent modular symbol instantiation with a classical
oracle.
"""

from .padic import PadicNum, teichmuller, one_unit_part, one_unit_pow
from .errors import PrecisionError, DegenerateVertexError, TruncationError, TowerError
from .series import (
    BOUNDED,
    TATE,
    IwasawaElement,
    TruncatedSeries,
    extend_vars,
    iwasawa_eval,
    scaled,
    series_compose,
    series_exp_small,
    series_inverse,
    series_log_one_unit,
    substitute_vars,
)
from .characters import (
    Character,
    WeightDisc,
    char_eval,
    is_m_analytic,
    omega_pullback,
)
from .branching import (
    SphericalPairData,
    TwigValue,
    big_twig_bf,
    big_twig_tp,
    branch_map,
    classical_twig_bf,
    classical_twig_tp,
    gsp4_weights,
)
from .linalg import (
    as_padic_matrix,
    column_span_form,
    fredholm_poly,
    identity_matrix,
    invert_matrix,
    kernel_basis,
    mat_mul,
    solve_columns,
)
from .slopes import (
    PRECISION_FLOOR,
    CompactOperator,
    FredholmSeries,
    MultiSlopeDecomposition,
    NewtonPolygon,
    SlopeDecomposition,
    evaluate_operator_poly,
    fredholm_det,
    h_crit,
    multi_slope_decompose,
    newton_slopes,
    non_critical,
    projector_poly_tower,
    riesz_decompose,
    slope_factor,
)
from .coeffmod import (
    FiniteDistribution,
    LAFunction,
    LIFunction,
    TwistedFunction,
    act_compact,
    act_group,
    character_function,
    fil_degree,
    la_to_li,
    li_to_la,
    moment,
    sp_mu,
    specialize_rho,
    weight_schedule,
)
from .modsym import (
    ClassicalSymbolSpace,
    EigenSymbol,
    ManinPresentation,
    OverconvergentSymbol,
    SymbolModule,
    UpSlopeReport,
    classical_symbols,
    cusp_form_dimension,
    lift_symbol,
    symbol_space_dimension,
    up_slopes,
)

__all__ = [
    "as_padic_matrix",
    "column_span_form",
    "fredholm_poly",
    "identity_matrix",
    "invert_matrix",
    "kernel_basis",
    "mat_mul",
    "solve_columns",
    "PRECISION_FLOOR",
    "CompactOperator",
    "FredholmSeries",
    "MultiSlopeDecomposition",
    "NewtonPolygon",
    "SlopeDecomposition",
    "evaluate_operator_poly",
    "fredholm_det",
    "h_crit",
    "multi_slope_decompose",
    "newton_slopes",
    "non_critical",
    "projector_poly_tower",
    "riesz_decompose",
    "slope_factor",
    "PadicNum",
    "teichmuller",
    "one_unit_part",
    "one_unit_pow",
    "PrecisionError",
    "DegenerateVertexError",
    "TruncationError",
    "TowerError",
    "BOUNDED",
    "TATE",
    "IwasawaElement",
    "TruncatedSeries",
    "extend_vars",
    "iwasawa_eval",
    "scaled",
    "series_compose",
    "series_exp_small",
    "series_inverse",
    "series_log_one_unit",
    "substitute_vars",
    "Character",
    "WeightDisc",
    "char_eval",
    "is_m_analytic",
    "omega_pullback",
    "SphericalPairData",
    "TwigValue",
    "big_twig_bf",
    "big_twig_tp",
    "branch_map",
    "classical_twig_bf",
    "classical_twig_tp",
    "gsp4_weights",
    "FiniteDistribution",
    "LAFunction",
    "LIFunction",
    "TwistedFunction",
    "act_compact",
    "act_group",
    "character_function",
    "fil_degree",
    "la_to_li",
    "li_to_la",
    "moment",
    "sp_mu",
    "specialize_rho",
    "weight_schedule",
    "ClassicalSymbolSpace",
    "EigenSymbol",
    "ManinPresentation",
    "OverconvergentSymbol",
    "SymbolModule",
    "UpSlopeReport",
    "classical_symbols",
    "cusp_form_dimension",
    "lift_symbol",
    "symbol_space_dimension",
    "up_slopes",
]

__version__ = "0.1.0"
