"""Solve a tiny MDP end to end and watch the fixed point emerge.

A two-state chain: state 0 walks (reward 0) into state 1, which pays 1
forever. At discount 0.9 the fixed point is V = (9, 10); value iteration
finds it and the Q-table's greedy action agrees.
"""

import numpy as np

from capir.mdp import Mdp, compute_q, greedy_action, value_iteration

chain = Mdp.from_triples(
    [
        [[(1, 1.0, 0.0)]],  # state 0, single action: move to state 1
        [[(1, 1.0, 1.0)]],  # state 1, single action: stay, collect 1
    ],
    discount=0.9,
)

values, report = value_iteration(chain, epsilon=1e-10)
print(f"converged in {report.iterations} sweeps, residual {report.final_residual:.1e}")
print(f"V = {np.round(values, 6)}   (fixed point: 9, 10)")

q = compute_q(chain, values)
print(f"Q = {np.round(q.ravel(), 6)}")
print(f"greedy action in state 0: {greedy_action(q, 0)}")

print("\nresidual decay per sweep (geometric, ratio <= discount):")
for i, r in enumerate(report.residuals[:8], start=1):
    print(f"  sweep {i}: {r:.3e}")
