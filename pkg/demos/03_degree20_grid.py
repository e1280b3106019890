"""
Median largest counter over a degree-20 grid
============================================

Ten seeds per cell, forged-signature byzantine nodes.  Pass ``--full`` to
include n = 2000 and 3000 (a few minutes on one core).
"""

import sys

import numpy as np

from aggsig.netsim import SimConfig, run_simulation

sizes = (1000, 2000, 3000) if "--full" in sys.argv else (1000,)
fractions = (0.0, 0.1, 0.2, 0.3)

print("n     " + "".join(f"{f:>9.0%}" for f in fractions))
for n in sizes:
    row = []
    for byz in fractions:
        runs = [run_simulation(SimConfig(n=n, degree=20, byz_fraction=byz, behavior="fake", seed=s))
                for s in range(10)]
        row.append(np.median([r.max_entry for r in runs]))
    print(f"{n:<6d}" + "".join(f"{m:9.1f}" for m in row))
