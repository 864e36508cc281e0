"""Circles, scaling and normal offsets.

A circle of radius R has length 2 pi R and constant curvature 1/R, so its
p-elastica energy is ``alpha 2 pi R + beta 2 pi R^(1-p)``; the unit circle
with p = 2 gives 4 pi.  Offsetting a curve along its outward normal by
``delta`` changes the energy in a predictable way, which we compare with a
direct measurement on an ellipse.

Run with ``python3 demos/01_circles_and_offsets.py``.
"""

import math

import numpy as np

from elastica_coarea.curve_core import ElasticaParams, circle, curvature_samples, elastica_energy, ellipse
from elastica_coarea.smoothing import offset_curve, offset_energy_transform

print("circle energies, measured vs closed form")
for R in (0.5, 1.0, 2.0):
    for p in (1.5, 2.0, 3.0):
        got = elastica_energy(circle(R, 1024), ElasticaParams(p=p))
        want = 2 * math.pi * R + 2 * math.pi * R ** (1 - p)
        print(f"  R={R:<4} p={p:<4} W={got:10.6f}  closed form {want:10.6f}")

off = offset_curve(circle(2.0, 1024), 0.5)
print(f"\ncircle R=2 offset by 0.5: mean curvature {np.mean(curvature_samples(off.result)):.6f} (1/2.5 = 0.4)")

e = ellipse(2.0, 1.0, 1024)
print("\nellipse a=2, b=1 offset outward:")
print("  delta   predicted    measured")
for delta in (0.0, 0.05, 0.1, 0.2, 0.4):
    predicted = offset_energy_transform(e, delta)
    measured = elastica_energy(offset_curve(e, delta).result)
    print(f"  {delta:<6}  {predicted:10.6f}  {measured:10.6f}")
# The energy first dips and then grows: the length term grows linearly in
# delta while the curvature term shrinks, and for this ellipse the second
# effect wins for small offsets.
