"""Design a four-element single-feed array and look inside the result.

The optimizer only chooses gaps; each candidate's loads come from the
gain-optimal driven array at the same positions.
"""

import numpy as np

from endfire_de import ModelParams, optimize_parasitic

p = ModelParams()
d = optimize_parasitic(4, p, seed=0)
rep = d.report

print(f"best of {d.trace.evaluations} evaluations in {d.runtime_s:.1f} s, fed port {d.feed + 1}\n")
print(" n   d/lambda   load [ohm]   |i| [A]   phase [deg]")
for n in range(d.N):
    load = "  (feed)" if n == d.feed else f"{d.loads[n]:9.2f}"
    i = rep.currents[n]
    print(f" {n + 1}   {d.positions_lambda[n]:7.3f}   {load:>10}   {abs(i):7.3f}   {np.degrees(np.angle(i)):8.2f}")

zin = rep.driving_impedances[d.feed]
print(f"\ninput impedance {zin.real:.2f} {zin.imag:+.2f}j ohm against a {p.Z0:g} ohm line")
print(f"directivity {rep.directivity_dbi:.2f} dBi, e_cd {rep.e_cd:.4f}, e_r {rep.e_r:.4f}")
print(f"realized gain {rep.realized_gain_db:.2f} dB")
print("\nconvergence (best realized gain every 10 generations):")
print("  " + "  ".join(f"{g:.3f}" for g in d.trace.best_fitness[::10]))
