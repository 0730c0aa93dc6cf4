"""How forgiving is a five-element single-feed design?

Sweeps each load and each gap by +-5 % one at a time and reports the spread
of realized gain.  Loads barely matter; the gaps matter much more.
"""

from endfire_de import ModelParams, SensitivitySpec, optimize_parasitic, sensitivity

p = ModelParams()
d = optimize_parasitic(5, p, seed=0)
print(f"nominal design: {d.realized_gain_db:.3f} dB\n")
print(" parameter   swept values             realized gain [dB]")
for r in sensitivity(d, SensitivitySpec(scale=0.05, samples=21)):
    unit = "ohm" if r.parameter.startswith("X") else "lambda"
    lo, hi = r.gain_range_db
    print(f"   {r.parameter:>3}     [{r.values[0]:8.3f}, {r.values[1]:8.3f}] {unit:<6}  [{lo:.3f}, {hi:.3f}]")
