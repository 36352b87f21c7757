"""Delta and gamma read from the tree, and why traders distrust them here.

Sweeps the spot through the callable region two years in and prints summary
statistics of the lattice delta (hedge ratio) and gamma.  The delta a desk
would use to size a hedge oscillates through dozens of local extrema instead
of rising smoothly from bond-floor to equity-like levels.

Run: python demos/greek_profiles.py
"""

from datetime import date

import numpy as np

from cblab import reference_market, reference_terms, surface
from cblab.sensitivities import local_extrema_count

terms = reference_terms()
market = reference_market()
t = date(2004, 1, 2)

spots = np.round(np.arange(90.0, 120.0001, 0.25), 6)
srf = surface(terms, market, [t], spots, steps=500)
delta = srf.delta[0]
gamma = srf.gamma[0]

print(f"delta over [90, 120]: min {delta.min():.4f}, max {delta.max():.4f}")
print(f"local extrema in the delta profile: {local_extrema_count(delta)} "
      "(a clean profile would have none)")

jumps = np.abs(np.diff(delta))
print(f"largest delta jump between adjacent spots: {jumps.max():.4f} "
      f"at S = {spots[np.argmax(jumps) + 1]:.2f}")

pinned = np.abs(gamma) < 1e-12
print(f"gamma: max {gamma.max():.4f}; pinned-flat points (|gamma| < 1e-12): {pinned.sum()}")
print()
print("sample of the delta staircase near the call level:")
sel = (spots >= 106.0) & (spots <= 110.0)
for s, d in zip(spots[sel][::4], delta[sel][::4]):
    bar = "#" * int(round(d * 60))
    print(f"  S={s:6.2f}  delta={d:6.4f}  {bar}")
