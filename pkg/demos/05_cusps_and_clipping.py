"""Cusped sets, ghost bridges and clipping to a window.

A drop-shaped set with a cusp has infinite curve energy on its own.  Pairing
two cusps with a straight "ghost" bridge, traversed twice, gives a finite
relaxed energy that costs exactly ``2 alpha L`` for a bridge of length L.
Clipping to a window that excludes the cusps also gives a finite energy.

Run with ``python3 demos/05_cusps_and_clipping.py``.
"""

from elastica_coarea.gallery import build_figure_examples, evaluate_fixture

for name in ("fig6_drop_pair", "mirrored_arcs", "fig10_drop_in_omega", "fig11_double_drop", "fig1_staircase"):
    result = evaluate_fixture(build_figure_examples([name])[name])
    shown = {k: v for k, v in result.items() if k not in ("figure", "expected", "fixture")}
    print(f"{name}:")
    for key, value in shown.items():
        print(f"  {key}: {value}")
