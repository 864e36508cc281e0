"""Nested level families and the gap between two candidate energies.

A level family assigns a curve system to every level.  It is admissible
when the systems never cross, interiors shrink as the level grows and
touching traces are tangent.  We print the verdicts for three pairs of
systems, then rank two candidate families for a two-level image and
compare the winner with the coarea lower bound.

Run with ``python3 demos/04_nesting_and_gap.py``.
"""

import json

import numpy as np

from elastica_coarea.gallery import build_figure_examples, evaluate_fixture
from elastica_coarea.nesting import dyadic_average

fixtures = build_figure_examples(["fig5_nesting", "fig9_two_level"])

nesting = evaluate_fixture(fixtures["fig5_nesting"])
for pair, verdict in nesting["verdicts"].items():
    failed = verdict["failed"] or "none"
    print(f"{pair}: failed conditions {failed}")

two = evaluate_fixture(fixtures["fig9_two_level"])
print(f"\nbest candidate: {two['best']}  G = {two['G_best']:.2f}")
print(f"coarea lower bound {two['lower_bound']:.2f}, gap {two['gap']:.2f}")
print("rejected:", json.dumps(two["rejected"]))

# Dyadic averages of a level function form a martingale: the mean over a
# parent interval equals the mean of its two children.
ts = np.linspace(0.0, 1.0, 257)
f = 1.0 + np.sin(3 * ts)
coarse, fine = dyadic_average(ts, f, depth=3), dyadic_average(ts, f, depth=4)
worst = max(abs(coarse.values[k] - 0.5 * (fine.values[2 * k] + fine.values[2 * k + 1])) for k in coarse.values)
print(f"\ndyadic means at depth 3 equal the averaged depth-4 means to {worst:.1e}")
