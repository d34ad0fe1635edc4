"""Compare assistant policies over seeded episode batches.

Mean steps with standard error, paired seeds across configurations. The
planning assistant should finish far faster than the random one, which
often burns the whole step budget; the oracle (given the human's true
target) upper-bounds what intention tracking can recover.
"""

from capir.level import load_level
from capir.planner import plan_level
from capir.simulate import evaluate

level = load_level("level1")
cache = plan_level(level)

human = {"kind": "softmax", "targeting": "fixed", "beta": 1.0}
configs = [
    {"name": name, "human": human, "assistant": name, "tracker_beta": 1.0}
    for name in ("capir", "oracle", "random")
]

rows = evaluate(level, cache, configs, episodes=60, base_seed=0)
print(f"{'assistant':>10}  {'mean steps':>10}  {'sem':>6}  {'completion':>10}")
for row in rows:
    print(f"{row['config']:>10}  {row['mean_steps']:>10.1f}  {row['sem']:>6.1f}  {row['completion_rate']:>10.0%}")
