"""How strongly do two half-wave dipoles talk to each other?

Prints the mutual impedance against spacing and compares the closed form with
brute-force quadrature, then shows what the coupling does to a pair of
elements driven in phase.
"""

import numpy as np

from endfire_de import ModelParams, mutual_impedance, self_impedance
from endfire_de.em import mutual_impedance_quadrature

p = ModelParams()
print(f"f = {p.f / 1e9:.1f} GHz, lambda = {p.lam * 100:.2f} cm, l = lambda/2, radius = lambda/200")
print(f"isolated dipole: Z = {self_impedance(p):.3f} ohm\n")

print(" d/lambda   R12 [ohm]   X12 [ohm]   |closed - quad| / |quad|")
for dl in (0.05, 0.1, 0.2, 0.25, 0.35, 0.5, 0.75, 1.0, 1.5):
    z = mutual_impedance(dl * p.lam, p)
    zq = mutual_impedance_quadrature(dl * p.lam, p)
    print(f"  {dl:5.2f}   {z.real:9.3f}   {z.imag:9.3f}     {abs(z - zq) / abs(zq):.1e}")

# two in-phase elements: each port sees Z11 + Z12
print("\nin-phase pair, driving-point resistance per element:")
for dl in np.linspace(0.1, 1.0, 10):
    print(f"  d = {dl:.1f} lambda: {self_impedance(p).real + mutual_impedance(dl * p.lam, p).real:7.2f} ohm")
