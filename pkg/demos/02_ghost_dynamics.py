"""Watch the ghost's move distribution react to protagonist pressure.

On a short corridor the ghost flees a nearby hunter (90% toward the far
side, 10% random) and wanders uniformly once everyone is out of its
4-step flee radius.
"""

from capir.dynamics import SubtaskState, ghost_transition
from capir.level import parse_level

text = """\
capir-level v1
gamma=0.95 flee_radius=4 flee_prob=0.9 shoot_range=3 max_steps=300 switch_stay=0.8
############
#HD.......G#
############
"""
level = parse_level(text, "corridor")
grid = level.grid

print("corridor cells 0..9, ghost at 5:")
for human in (4, 3, 1, 0):
    dist = ghost_transition(grid, SubtaskState(human, 0, 5))
    d = grid.dist(5, human)
    pretty = {cell: round(p, 3) for cell, p in sorted(dist.items())}
    mode = "fleeing" if d <= level.params.flee_radius else "wandering"
    print(f"  human at {human} (distance {d}, {mode}): {pretty}")

print("\nghost boxed into the dead end at cell 0, hunter two steps away:")
print(" ", ghost_transition(grid, SubtaskState(2, 3, 0)))
