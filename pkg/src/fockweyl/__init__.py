"""Weyl, anti-Wick and hybrid quantization on truncated Fock spaces over finite mode sets.

The subpackages and modules are layered: index bookkeeping and Hermite bases at the bottom,
Gaussian measures and Fock-space operators above them, the Segal-Bargmann transform, the
quantizers, norm bounds and example symbols on top, and a batch CLI.
"""

from .bounds import RhoDeltaCert, SymbolClassCert, cv_bound, diff_bound, operator_norm_lower, telescoped_term_bound
from .core_index import ModeSet, MultiIndex, Truncation
from .fock import FockVector, OperatorMatrix, PadInsufficient, PhasePoint
from .gaussmeasure import GaussianMeasureSpec, NonFiniteEvaluation, RngStream
from .quantize import (ClosedFormSymbol, GaussSymbol, NonConvergence, QuantizationConfig, Symbol, TrigSymbol,
                       anti_wick_matrix, heat_smooth, hybrid_atom_sum, hybrid_matrix, old_weyl_matrix,
                       weyl_matrix)
from .symbols import cosine_symbol, example15_symbol, lattice_gaussian, trig_from_atoms

__version__ = "0.1.0"

__all__ = [
    "ClosedFormSymbol", "FockVector", "GaussSymbol", "GaussianMeasureSpec", "ModeSet", "MultiIndex",
    "NonConvergence", "NonFiniteEvaluation", "OperatorMatrix", "PadInsufficient", "PhasePoint",
    "QuantizationConfig", "RhoDeltaCert", "RngStream", "Symbol", "SymbolClassCert", "TrigSymbol", "Truncation",
    "anti_wick_matrix", "cosine_symbol", "cv_bound", "diff_bound", "example15_symbol", "heat_smooth",
    "hybrid_atom_sum", "hybrid_matrix", "lattice_gaussian", "old_weyl_matrix", "operator_norm_lower",
    "telescoped_term_bound", "trig_from_atoms", "weyl_matrix",
]
