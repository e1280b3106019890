"""
Equivocation and leapfrog finalization
======================================

Byzantine guardians sign two conflicting hashes for the same height and
show each honest neighbor whichever one it will accept.  With a strict
supermajority that cannot finalize both; with ceil(2n/3) it can.
"""

from aggsig.netsim import NetworkTopology
from aggsig.netsim.scenarios import leapfrog_scenario, safety_harness
from aggsig.suites import safety_hunt

k3 = NetworkTopology.complete(3)
for rule in ("strict", "loose"):
    rep = safety_harness(3, 2, byz_count=1, camp_a_size=1, seed=0, threshold_rule=rule, topology=k3)
    print(f"{rule:6s} threshold {rep.threshold}: A finalized by {rep.finalized_a}, "
          f"B by {rep.finalized_b} -> {'VIOLATION' if rep.violation else 'safe'}")

violations, _, reports = safety_hunt(200)
print(f"\n{len(reports)} random equivocation runs, {len(violations)} double finalizations")

# a partition swallows checkpoint 100; 200 finalizes after the heal and
# carries every earlier block with it
seq = leapfrog_scenario(seed=0)
ledger = seq.ledgers[0]
print("\ncheckpoint statuses at guardian 0:", ledger.statuses)
print("block 150 final:", ledger.is_block_finalized(150), " prefix closed:", seq.prefix_closed)
