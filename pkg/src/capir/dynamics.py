"""Game dynamics: protagonist moves, ghost flight, per-ghost subtask MDPs.

One game step resolves in a fixed order: both protagonists move
deterministically (blocked moves become STAY), then a SHOOT within range
kills before the ghost can react, then surviving ghosts move. Ghosts flee
the nearest protagonist when close (within ``flee_radius`` shortest-path
steps, fleeing with probability ``flee_prob``, otherwise stepping to a
uniform random neighbour) and wander uniformly when nobody is near. A ghost
never stands still unless it has no passable neighbour at all.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .grid import MOVE_DELTAS, GridMap
from .level import Level, LevelParams
from .mdp import Mdp

__all__ = [
    "HUMAN_ACTIONS",
    "ASSISTANT_ACTIONS",
    "NUM_JOINT_ACTIONS",
    "DEAD",
    "KILL_REWARD",
    "WorldState",
    "SubtaskState",
    "SubtaskCodec",
    "protagonist_move",
    "ghost_transition",
    "subtask_step",
    "build_subtask_mdp",
    "world_step",
    "initial_world_state",
    "sample_categorical",
]

HUMAN_ACTIONS = ("N", "S", "E", "W", "STAY", "SHOOT")
ASSISTANT_ACTIONS = ("N", "S", "E", "W", "STAY")
NUM_JOINT_ACTIONS = len(HUMAN_ACTIONS) * len(ASSISTANT_ACTIONS)

DEAD = -1  # ghost marker in a SubtaskState once killed
KILL_REWARD = 1.0


class WorldState(NamedTuple):
    """Full game configuration; ghosts is a tuple of (cell, alive) pairs."""

    human_pos: int
    assistant_pos: int
    ghosts: tuple


class SubtaskState(NamedTuple):
    """Per-ghost projection: the two protagonists and one ghost (or DEAD)."""

    human_pos: int
    assistant_pos: int
    ghost: int


def initial_world_state(level: Level) -> WorldState:
    return WorldState(
        level.human_start,
        level.assistant_start,
        tuple((g, True) for g in level.ghost_starts),
    )


def joint_action_index(human_action: str, assistant_action: str) -> int:
    return HUMAN_ACTIONS.index(human_action) * len(ASSISTANT_ACTIONS) + ASSISTANT_ACTIONS.index(assistant_action)


def protagonist_move(grid: GridMap, pos: int, action: str) -> int:
    """Deterministic move; STAY, SHOOT and blocked moves keep the position."""
    if action in MOVE_DELTAS:
        return grid.move(pos, action)
    return pos


class SubtaskCodec:
    """Bijection between SubtaskState and a dense index in [0, m*m*(m+1)).

    Ghost slot m (one past the last cell) encodes DEAD; DEAD states are
    absorbing in every subtask MDP.
    """

    def __init__(self, num_cells: int):
        self.num_cells = num_cells
        self.num_states = num_cells * num_cells * (num_cells + 1)

    def encode(self, state: SubtaskState) -> int:
        m = self.num_cells
        gcode = m if state.ghost == DEAD else state.ghost
        return (state.human_pos * m + state.assistant_pos) * (m + 1) + gcode

    def decode(self, index: int) -> SubtaskState:
        m = self.num_cells
        gcode = index % (m + 1)
        rest = index // (m + 1)
        return SubtaskState(rest // m, rest % m, DEAD if gcode == m else gcode)


def _ghost_move_distribution(grid: GridMap, ghost: int, human: int, assistant: int, flee_radius: int, flee_prob: float):
    """Next-cell distribution for a live ghost, as ([cells], [probs]).

    Candidates are the adjacent passable cells; the ghost stays only when
    boxed in. Within flee_radius of the nearest protagonist it moves to a
    distance-maximizing neighbour with probability flee_prob and to a
    uniform random neighbour otherwise; out of range it wanders uniformly.
    """
    nbs = grid.neighbors(ghost)
    if not nbs:
        return [ghost], [1.0]
    d = min(grid.dist(ghost, human), grid.dist(ghost, assistant))
    n = len(nbs)
    if d > flee_radius:
        return list(nbs), [1.0 / n] * n
    scores = [min(grid.dist(nb, human), grid.dist(nb, assistant)) for nb in nbs]
    best = max(scores)
    flee_set = [nb for nb, sc in zip(nbs, scores) if sc == best]
    probs = []
    for nb in nbs:
        p = (1.0 - flee_prob) / n
        if nb in flee_set:
            p += flee_prob / len(flee_set)
        probs.append(p)
    return list(nbs), probs


def ghost_transition(grid: GridMap, state: SubtaskState, flee_radius: int = 4, flee_prob: float = 0.9):
    """Distribution over the ghost's next cell, as a dict {cell: prob}."""
    if state.ghost == DEAD:
        raise ValueError("ghost_transition called on a dead ghost")
    cells, probs = _ghost_move_distribution(
        grid, state.ghost, state.human_pos, state.assistant_pos, flee_radius, flee_prob
    )
    return dict(zip(cells, probs))


def subtask_step(grid: GridMap, state: SubtaskState, human_action: str, assistant_action: str, params: LevelParams):
    """One subtask step as a list of (next_state, reward, prob) outcomes.

    Order inside the step: protagonists move, then the kill check (SHOOT
    within shoot_range of the post-move human), then ghost motion. DEAD
    states are absorbing with zero reward.
    """
    if state.ghost == DEAD:
        return [(state, 0.0, 1.0)]
    hp = protagonist_move(grid, state.human_pos, human_action)
    dp = protagonist_move(grid, state.assistant_pos, assistant_action)
    if human_action == "SHOOT" and grid.dist(hp, state.ghost) <= params.shoot_range:
        return [(SubtaskState(hp, dp, DEAD), KILL_REWARD, 1.0)]
    cells, probs = _ghost_move_distribution(grid, state.ghost, hp, dp, params.flee_radius, params.flee_prob)
    return [(SubtaskState(hp, dp, g), 0.0, p) for g, p in zip(cells, probs)]


def build_subtask_mdp(grid: GridMap, params: LevelParams):
    """Enumerate the full subtask MDP over m*m*(m+1) states and 30 joint actions.

    Returns ``(mdp, codec)``. Raises if the map is disconnected (distances,
    and therefore the flee rule, would be undefined across components).
    """
    if not grid.is_connected():
        raise ValueError("subtask MDPs require a connected map")
    m = grid.num_cells
    codec = SubtaskCodec(m)
    num_actions = NUM_JOINT_ACTIONS

    # Per-cell destination for each protagonist action.
    hmove = {a: [protagonist_move(grid, c, a) for c in range(m)] for a in HUMAN_ACTIONS}
    dmove = {a: [protagonist_move(grid, c, a) for c in range(m)] for a in ASSISTANT_ACTIONS}

    shoot_range = params.shoot_range
    dist = grid.distance  # raw table; all pairs finite on a connected map

    ghost_dists = {}  # (ghost, human', assistant') -> (cells, probs)

    def ghost_dist(g, hp, dp):
        key = (g, hp, dp)
        hit = ghost_dists.get(key)
        if hit is None:
            hit = _ghost_move_distribution(grid, g, hp, dp, params.flee_radius, params.flee_prob)
            ghost_dists[key] = hit
        return hit

    row_ptr = [0]
    cols, probs, rews = [], [], []
    for h in range(m):
        for a in range(m):
            for gcode in range(m + 1):
                s = (h * m + a) * (m + 1) + gcode
                if gcode == m:  # DEAD: absorbing, zero reward
                    for _ in range(num_actions):
                        cols.append(s)
                        probs.append(1.0)
                        rews.append(0.0)
                        row_ptr.append(len(cols))
                    continue
                g = gcode
                for ha in HUMAN_ACTIONS:
                    hp = hmove[ha][h]
                    for da in ASSISTANT_ACTIONS:
                        dp = dmove[da][a]
                        if ha == "SHOOT" and dist[hp, g] <= shoot_range:
                            cols.append((hp * m + dp) * (m + 1) + m)
                            probs.append(1.0)
                            rews.append(KILL_REWARD)
                        else:
                            gcells, gprobs = ghost_dist(g, hp, dp)
                            base = (hp * m + dp) * (m + 1)
                            for gc, gp in zip(gcells, gprobs):
                                cols.append(base + gc)
                                probs.append(gp)
                                rews.append(0.0)
                        row_ptr.append(len(cols))

    mdp = Mdp(codec.num_states, num_actions, row_ptr, cols, probs, rews, params.gamma)
    return mdp, codec


def sample_categorical(cells, probs, rng: np.random.Generator) -> int:
    """Draw one outcome using a single uniform variate from ``rng``."""
    u = rng.random()
    acc = 0.0
    for c, p in zip(cells, probs):
        acc += p
        if u < acc:
            return c
    return cells[-1]  # guard against accumulated round-off


def world_step(level: Level, world: WorldState, human_action: str, assistant_action: str, rng: np.random.Generator):
    """Advance the full game one step; returns (new_world, killed_ghost_ids).

    SHOOT kills at most one ghost: the nearest live ghost within
    shoot_range of the (post-move) human, ties to the lowest ghost index.
    Surviving ghosts then move in ascending ghost index, each consuming one
    draw from ``rng``.
    """
    grid, params = level.grid, level.params
    hp = protagonist_move(grid, world.human_pos, human_action)
    dp = protagonist_move(grid, world.assistant_pos, assistant_action)
    ghosts = list(world.ghosts)
    kills = []
    if human_action == "SHOOT":
        best_d, best_i = None, None
        for i, (gpos, alive) in enumerate(ghosts):
            if not alive:
                continue
            d = grid.dist(hp, gpos)
            if d <= params.shoot_range and (best_d is None or d < best_d):
                best_d, best_i = d, i
        if best_i is not None:
            ghosts[best_i] = (ghosts[best_i][0], False)
            kills.append(best_i)
    for i, (gpos, alive) in enumerate(ghosts):
        if not alive:
            continue
        cells, gprobs = _ghost_move_distribution(grid, gpos, hp, dp, params.flee_radius, params.flee_prob)
        ghosts[i] = (sample_categorical(cells, gprobs, rng), True)
    return WorldState(hp, dp, tuple(ghosts)), kills
