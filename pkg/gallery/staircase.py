"""Walk up the base from 1.5 to 2 and watch the escape rate come down.

Below the golden ratio every point of [0, 1) eventually falls into the hole,
so ``E = 1``. Past the Komornik-Loreti constant a Cantor set of survivors
appears and ``E`` drops to 0 at ``beta = 2``, mostly in flat steps.

Run with ``python gallery/staircase.py``.
"""
from betaescape import make_beta
from betaescape.markov_escape import AnalysisConfig, decide_escape

config = AnalysisConfig(empirical=False, on_undetermined="bracket")
for spec in ["1.5", "golden", "1.75", "kl", "1.8", "1.85", "tribonacci", "1.9", "1.95", "1.99", "2"]:
    rep = decide_escape(make_beta(spec), config)
    if rep.method == "bracket":
        shown = f"[{rep.bracket.lo:.6f}, {rep.bracket.hi:.6f}]"
    else:
        shown = f"{rep.E:.6f}"
    print(f"{spec:>10}  {rep.method:>8}  E = {shown}")
