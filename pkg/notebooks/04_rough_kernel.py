"""
Dyadic pieces of a rough kernel
===============================

Omega(theta) = cos(theta) on the circle; K = Omega(y/|y|) / |y|^2.
"""

import numpy as np

from mlinbound.kernels import (K0_hat, K0_hat_fft, PieceGrid, rough_coeffs, shell_violations,
                               sphere_from_function)
from mlinbound.wavelets import coeff_norms

omega = sphere_from_function(lambda u: u[..., 0])
print("mean over the circle:", omega.mean())

# two independent routes to the transform of the unit-scale piece
pg = PieceGrid(8.0, 256)
a, b = K0_hat_fft(omega, pg), K0_hat(omega, pg.mesh("xi"))
print("route agreement:", np.abs(a - b).max() / np.abs(b).max())

for mu in range(2, 6):
    tab = rough_coeffs(omega, mu, 0)
    print(f"mu={mu}  sup|b| = {coeff_norms(tab, 0, np.inf)[0]:.3e}  "
          f"outside shell: {shell_violations(tab, mu, 7)}")
