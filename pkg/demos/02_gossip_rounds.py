"""
One checkpoint, round by round
==============================

A thousand guardians with twenty neighbors each, thirty percent of them
byzantine and sending forged aggregates.  Watch the finalized count jump.
"""

from aggsig.netsim import SimConfig, run_simulation

cfg = SimConfig(n=1000, degree=20, byz_fraction=0.3, behavior="fake", seed=7)
run = run_simulation(cfg)

print(f"threshold {cfg.threshold} of {cfg.n}, loop bound L={cfg.rounds}")
print("round  msgs    verified discarded finalized  max entry  largest msg")
for r in run.rounds:
    print(f"{r.round:5d}  {r.messages_sent:6d}  {r.verified:8d} {r.discarded:9d} "
          f"{r.finalized_honest:9d}  {int(r.max_entry.max()):9d}  {r.max_message_bytes:6d} B")

sent = run.honest_msgs()
print(f"\nconverged in round {run.convergence_round}")
print(f"messages per honest guardian: median {int(sorted(sent)[len(sent) // 2])}, max {sent.max()}")
