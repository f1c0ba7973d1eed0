"""
Transport of the unit circle by v(x, y) = (x - 1, 2y)
=====================================================

The flow is linear, so the image of the unit circle after time T is the
ellipse centred at (1 - e^T, 0) with semi-axes e^T and e^{2T}. Node masses
ride along unchanged, so the density drops where the curve stretches.
"""

import numpy as np

from morphosplit import build_circle, named_field, pushforward, uniform
from morphosplit.svg import curve_frame

from _common import OUT

T = 0.25
circle = build_circle(256)
mu = uniform(circle, 0.1)
nu = pushforward(mu, named_field("paper"), T, 1e-3)

x, y = nu.curve.positions.T
residual = ((x - (1 - np.exp(T))) / np.exp(T)) ** 2 + (y / np.exp(2 * T)) ** 2 - 1
print(f"max ellipse residual   {np.max(np.abs(residual)):.2e}")
print(f"total mass before/after {mu.total:.15f} {nu.total:.15f}")
print(f"density range on image  [{nu.density.min():.4f}, {nu.density.max():.4f}]")

(OUT / "ellipse_t0.svg").write_text(curve_frame(mu, "t = 0"))
(OUT / "ellipse_t025.svg").write_text(curve_frame(nu, "t = 0.25"))
