"""One game session: world state, intention tracker, seeded ghost randomness.

Both the headless simulator and the wire-protocol server drive this class,
so played and evaluated games share a single step implementation. World
randomness (assistant draw when the assistant policy is random, then ghost
moves in ascending ghost index) comes from a stream derived from the
session seed as ``SeedSequence(seed).spawn(2)[1]``; scripted humans draw
from the sibling stream ``spawn(2)[0]``. A live human consumes no draws, so
a played session is replayable from (level, cache, seed, action sequence).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .brain import IntentionTracker, select_assistant_action
from .dynamics import ASSISTANT_ACTIONS, HUMAN_ACTIONS, WorldState, initial_world_state, world_step
from .level import Level
from .planner import CacheError, PolicyCache

__all__ = [
    "GameSession",
    "StepResult",
    "CacheNotConvergedError",
    "IllegalActionError",
    "SessionFinishedError",
    "ASSISTANT_POLICIES",
    "human_stream",
    "world_stream",
]

ASSISTANT_POLICIES = ("capir", "random", "oracle")


class CacheNotConvergedError(CacheError):
    """Cache holds a subtask that hit max_iterations; refuse to serve it."""


class IllegalActionError(ValueError):
    """Human action name is not one of the six legal actions."""


class SessionFinishedError(RuntimeError):
    """act was called on a session that already ended."""


def human_stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[0])


def world_stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1])


@dataclass
class StepResult:
    human_action: str
    assistant_action: str
    world: WorldState
    kills: list
    belief_live: np.ndarray  # over live subtasks after retirement
    live_ids: list
    diagnostics: dict = field(repr=False, default_factory=dict)
    status: str = "active"
    step: int = 0
    latency_ms: float = 0.0


class GameSession:
    """Runs one level from its start configuration to won or timed-out."""

    ACTIVE, WON, TIMED_OUT = "active", "won", "timed-out"

    def __init__(
        self,
        level: Level,
        cache: PolicyCache,
        seed: int = 0,
        assistant: str = "capir",
        beta: float = 1.0,
        human_model: str = "expected",
        max_steps: int | None = None,
        allow_nonconverged: bool = False,
    ):
        cache.require_match(level)
        if not cache.converged and not allow_nonconverged:
            raise CacheNotConvergedError(
                "policy cache holds non-converged subtasks; re-plan with more "
                "iterations or pass allow_nonconverged"
            )
        if assistant not in ASSISTANT_POLICIES:
            raise ValueError(f"unknown assistant policy {assistant!r}")
        self.level = level
        self.cache = cache
        self.seed = int(seed)
        self.assistant = assistant
        self.rng = world_stream(self.seed)
        self.world = initial_world_state(level)
        self.tracker = IntentionTracker(cache, level.params.switch_stay, beta, human_model)
        self.max_steps = level.params.max_steps if max_steps is None else int(max_steps)
        self.step_count = 0
        self.status = self.ACTIVE

    def apply_human_action(self, action: str, true_target: int | None = None) -> StepResult:
        """One atomic game turn: observe the human, answer, advance the world.

        ``true_target`` is only consulted by the oracle assistant (it is the
        scripted human's current goal, bypassing the tracker).
        """
        if self.status != self.ACTIVE:
            raise SessionFinishedError(f"session is {self.status}")
        if action not in HUMAN_ACTIONS:
            raise IllegalActionError(f"unknown human action {action!r}")
        t0 = time.perf_counter()

        assistant_action, diagnostics = self.tracker.step(self.world, action)
        diagnostics["live_ids"] = list(self.tracker.live_ids)  # live set the belief refers to
        if self.assistant == "random":
            assistant_action = ASSISTANT_ACTIONS[int(self.rng.integers(len(ASSISTANT_ACTIONS)))]
        elif self.assistant == "oracle":
            if true_target is None:
                raise ValueError("oracle assistant needs the scripted human's true target")
            assistant_action, _ = select_assistant_action(
                np.ones(1), self.cache, self.world, [true_target], self.tracker.beta, self.tracker.human_model
            )

        self.world, kills = world_step(self.level, self.world, action, assistant_action, self.rng)
        for ghost_id in kills:
            self.tracker.retire(ghost_id)

        self.step_count += 1
        if all(not alive for _, alive in self.world.ghosts):
            self.status = self.WON
        elif self.step_count >= self.max_steps:
            self.status = self.TIMED_OUT

        return StepResult(
            human_action=action,
            assistant_action=assistant_action,
            world=self.world,
            kills=kills,
            belief_live=self.tracker.belief.copy(),
            live_ids=list(self.tracker.live_ids),
            diagnostics=diagnostics,
            status=self.status,
            step=self.step_count,
            latency_ms=(time.perf_counter() - t0) * 1000.0,
        )

    def belief_full(self, diagnostics_belief=None, live_ids=None) -> list:
        """Belief expanded over all original ghost ids (zeros once dead)."""
        belief = self.tracker.belief if diagnostics_belief is None else diagnostics_belief
        ids = self.tracker.live_ids if live_ids is None else live_ids
        full = [0.0] * self.cache.num_subtasks
        for gid, b in zip(ids, belief):
            full[gid] = float(b)
        return full
