"""Weyl, anti-Wick and hybrid quantization of phase-space symbols on truncated Fock spaces."""

from .antiwick import anti_wick_matrix, hybrid_atom_sum, hybrid_matrix
from .symbol import (ClosedFormSymbol, GaussSymbol, Symbol, TrigSymbol, constant_symbol, finite_difference,
                     heat_smooth, sum_symbols, telescoping_apply, trig_atom)
from .weyl import (CalibrationRecord, NonConvergence, QuantizationConfig, calibrate_translation_sign,
                   cahill_table, old_weyl_matrix, weyl_coherent_element, weyl_matrix)

__all__ = [
    "CalibrationRecord", "ClosedFormSymbol", "GaussSymbol", "NonConvergence", "QuantizationConfig", "Symbol",
    "TrigSymbol", "anti_wick_matrix", "cahill_table", "calibrate_translation_sign", "constant_symbol",
    "finite_difference", "heat_smooth", "hybrid_atom_sum", "hybrid_matrix", "old_weyl_matrix", "sum_symbols",
    "telescoping_apply", "trig_atom", "weyl_coherent_element", "weyl_matrix",
]
