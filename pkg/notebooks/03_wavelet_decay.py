"""
Coefficient decay of a smooth symbol
====================================

Wavelet coefficients of a Gaussian fall off like 2^{-lambda (M + d/2)}.
"""

import numpy as np

from mlinbound.norms import fit_scaling
from mlinbound.wavelets import SymbolGrid, analyze, build_daubechies, coeff_norms

w = build_daubechies(3)
grid = SymbolGrid.box(8, 4.0, 2)
table = analyze(np.exp(-np.pi * grid.radius2()), grid, w, 5)

sups = [coeff_norms(table, lam, np.inf)[0] for lam in range(6)]
for lam, s in enumerate(sups):
    print(f"lambda={lam}  sup|b| = {s:.3e}")
rep = fit_scaling(range(6), sups, "lambda", "linear")
print("fitted decay rate:", round(-rep.slope, 2), " (M + d/2 =", w.M + 1, ")")
