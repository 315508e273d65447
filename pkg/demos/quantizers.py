"""Weyl, anti-Wick and hybrid matrices of one two-mode cosine symbol.

The hybrid operator interpolates: with E = both modes it is the Weyl matrix, with E empty it
is the anti-Wick matrix. Each intermediate choice sits between them, and the printed
differences show how much each mode contributes.
"""

import numpy as np

from fockweyl import ModeSet, QuantizationConfig, Truncation, anti_wick_matrix, hybrid_matrix, weyl_matrix
from fockweyl.bounds import cv_bound, operator_norm_lower
from fockweyl.symbols import cosine_symbol

modes = ModeSet((0, 1))
F, cert = cosine_symbol(modes, [0.8, -0.3], [0.2, 0.5])

for h in (0.25, 1.0):
    cfg = QuantizationConfig(h, Truncation(modes, 8, 8))
    W = weyl_matrix(F, cfg).entries
    A = anti_wick_matrix(F, cfg).entries
    print(f"h = {h}")
    print(f"  ||Weyl||      = {operator_norm_lower(W):.6f}   bound {cv_bound(cert, h):.4g}")
    print(f"  ||anti-Wick|| = {operator_norm_lower(A):.6f}")
    for E in (ModeSet(()), ModeSet((0,)), ModeSet((1,)), modes):
        H = hybrid_matrix(F, E, cfg).entries
        print(f"  E = {list(E.ids)!s:7}  |H - W| = {np.max(np.abs(H - W)):.2e}  |H - A| = {np.max(np.abs(H - A)):.2e}")
