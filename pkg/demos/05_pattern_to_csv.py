"""Write the azimuth realized-gain cut of a three-element design to CSV.

Any plotting tool can take the file from here; the script itself only
reports front-to-back ratio and half-power beamwidth.
"""

import sys

import numpy as np

from endfire_de import ModelParams, optimize_parasitic, pattern_export
from endfire_de.results import pattern_csv

p = ModelParams()
d = optimize_parasitic(3, p, seed=0)
s = pattern_export(d, cut="azimuth", resolution=0.5)

g = s.realized_gain_db
front = g[np.argmin(np.abs(s.phi_deg))]
back = g[np.argmin(np.abs(np.abs(s.phi_deg) - 180))]
above = s.phi_deg[g >= front - 3]
print(f"peak {front:.2f} dB at phi = 0, front-to-back {front - back:.1f} dB, "
      f"half-power beamwidth {above.max() - above.min():.1f} deg")

out = sys.argv[1] if len(sys.argv) > 1 else "azimuth_cut.csv"
with open(out, "w", newline="") as fh:
    fh.write(pattern_csv(s))
print(f"wrote {len(g)} samples to {out}")
