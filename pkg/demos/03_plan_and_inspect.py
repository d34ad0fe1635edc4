"""Plan a bundled level and poke at the resulting policy cache.

Each ghost gets its own solved subtask over m*m*(m+1) states and the 30
joint actions. The cache is keyed to the level's content hash, so editing
the level file invalidates it.
"""

import numpy as np

from capir.brain import best_response_values
from capir.dynamics import HUMAN_ACTIONS, initial_world_state
from capir.level import load_level
from capir.planner import plan_level, project_state

level = load_level("level1")
m = level.grid.num_cells
print(f"level1: {m} floor cells, {level.num_ghosts} ghosts; "
      f"subtask state space {m}*{m}*{m+1} = {m*m*(m+1)}")

cache = plan_level(level)
for i, rep in enumerate(cache.reports):
    print(f"  subtask {i}: {rep.iterations} sweeps, residual {rep.final_residual:.1e}, "
          f"{rep.wall_time:.2f}s")
print(f"level hash {cache.level_hash[:16]}...  converged={cache.converged}")

world = initial_world_state(level)
print("\nhuman's best-response action values from the start, per subtask:")
for i in range(cache.num_subtasks):
    q, codec = cache.subtask(i)
    u = best_response_values(q, codec, project_state(world, i))
    best = HUMAN_ACTIONS[int(np.argmax(u))]
    print(f"  ghost {i}: " + "  ".join(f"{a}={v:.3f}" for a, v in zip(HUMAN_ACTIONS, u)) + f"   -> {best}")
