"""Modular symbols at desk scale: a classical oracle and its lift.

The presentation module builds coset generators and relations for the
p-completed level, the classical module computes the weight-k symbol
space two independent ways (exact rationals and interval arithmetic),
and the overconvergent module carries distribution-valued symbols whose
p-coset slopes are compared against the classical answer.
"""

from .presentation import (
    ManinPresentation,
    cusp_form_dimension,
    eisenstein_dimension,
    genus_x0,
    level_index,
    lift_to_sl2,
    p1_classes,
    symbol_space_dimension,
    unimodular_chain,
)
from .classical import (
    ClassicalSymbolSpace,
    EigenSymbol,
    classical_symbols,
    exact_newton_slopes,
    slope_multiset_at_most,
)
from .overconvergent import (
    OverconvergentSymbol,
    SymbolModule,
    UpSlopeReport,
    action_block,
    lift_symbol,
    up_slopes,
)

__all__ = [
    "ManinPresentation",
    "cusp_form_dimension",
    "eisenstein_dimension",
    "genus_x0",
    "level_index",
    "lift_to_sl2",
    "p1_classes",
    "symbol_space_dimension",
    "unimodular_chain",
    "ClassicalSymbolSpace",
    "EigenSymbol",
    "classical_symbols",
    "exact_newton_slopes",
    "slope_multiset_at_most",
    "OverconvergentSymbol",
    "SymbolModule",
    "UpSlopeReport",
    "action_block",
    "lift_symbol",
    "up_slopes",
]
