"""An oscillating family whose level sets multiply.

``U`` is the primitive of the 2-periodic function that is ``+1`` on
``(0, 1/2) U (1, 2)`` and ``-1`` on ``(1/2, 1)``, and ``U_n(x) = 2^-n U(2^n x)``.
``U_n`` converges uniformly, yet the number of solutions of ``U_n = t``
keeps alternating between 3 and 1 on ever thinner slabs of levels, so the
level counts converge to 2 only weakly.  The level counts, their averages
against test functions and an energy bound are printed for a few ``n``.

Run with ``python3 demos/03_oscillating_profiles.py``.
"""

import numpy as np

from elastica_coarea.gallery import (
    savare_energy_bound, savare_expected_count, savare_level_counts, savare_weak_convergence,
)

for n in (1, 2, 4, 8):
    t, counts = savare_level_counts(n)
    expected = savare_expected_count(n, t)
    print(f"n={n}: {len(t)} sampled levels, counts match the expected formula: "
          f"{bool(np.array_equal(counts, expected))}; range {counts.min()}..{counts.max()}")

print("\nweak convergence of the level counts:")
for name, row in savare_weak_convergence([1, 2, 4, 8]).items():
    print(f"  {name}: {row}")

print("\nenergy bound for n = 4:", savare_energy_bound(4))
