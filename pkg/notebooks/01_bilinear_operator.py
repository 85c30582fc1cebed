"""
A bilinear multiplier on a periodic grid
========================================

Build a small atom-sum symbol, apply it two ways, and estimate the
L^2 x L^2 -> L^1 quasinorm of the operator.
"""

import numpy as np

from mlinbound.engine import (AtomSumOperator, AtomSymbol, GridFunction, TorusGrid,
                              apply_atomsum, apply_dense)
from mlinbound.norms import estimate_opnorm
from mlinbound.wavelets import BumpFamily, build_bump

grid = TorusGrid(L=32.0, G=64)
family = BumpFamily(build_bump(0.5))

# three atoms at level 1; keys are ((k1,), (k2,)) for n = 1
b = {((0,), (1,)): 1.0, ((2,), (-1,)): -1.0, ((3,), (3,)): 0.5j}
sigma = AtomSymbol.from_dict(1, family, b)

rng = np.random.default_rng(0)
f, g = (GridFunction(grid, rng.standard_normal(64)) for _ in range(2))

direct = apply_dense(sigma.to_dense(grid), f, g).values
fast = apply_atomsum(sigma, f, g).values
print("max |dense - atom sum| =", np.abs(direct - fast).max())

est = estimate_opnorm(AtomSumOperator(sigma, grid), trials=32, ascent_steps=100, seed=1)
print("norm estimate         =", round(est.value, 4))
print("re-evaluated          =", round(est.reevaluate(AtomSumOperator(sigma, grid)), 4))
