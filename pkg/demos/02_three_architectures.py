"""Uniform array, optimized driven array and optimized single-feed array.

Runs all three procedures for N = 2 .. 5 and prints realized gain and array
size side by side.  Takes about half a minute.
"""

from endfire_de import ModelParams, optimize_active, optimize_parasitic, ula_baseline

p = ModelParams()
print(" N |  uniform  |  driven   | single-feed | size driven / single-feed [lambda]")
for N in range(2, 6):
    u = ula_baseline(N, p)
    a = optimize_active(N, p, seed=1)
    q = optimize_parasitic(N, p, seed=1)
    print(
        f" {N} | {u.realized_gain_db:6.2f} dB | {a.realized_gain_db:6.2f} dB | "
        f"{q.realized_gain_db:8.2f} dB | {a.layout.size / p.lam:.2f} / {q.layout.size / p.lam:.2f}"
    )
