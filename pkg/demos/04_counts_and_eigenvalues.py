"""
Counters are matrix powers
==========================

With the finalize break switched off, entry k of every guardian's vector
after t rounds is column k of (A + I)^t.  The growth rate is the top
eigenvalue of A + I.
"""

from aggsig.analysis import build_omega, lambda_max, oracle_check, propagate_counts
from aggsig.netsim import SimConfig, run_simulation

cfg = SimConfig(n=24, degree=4, iterations=5, seed=3, break_on_finalize=False, record_trajectory=True)
run = run_simulation(cfg)
omega = build_omega(run.topology)

print("simulation == matrix powers:", oracle_check(run.trajectory, omega))
print("guardian 0's column after 5 rounds:", propagate_counts(omega, 0, 5)[:8], "...")

lam = lambda_max(omega)
for t, snap in enumerate(run.trajectory):
    print(f"t={t}  max entry {int(snap.max()):6d}   lambda^t {lam ** t:10.1f}")
