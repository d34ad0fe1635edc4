"""Headless episodes: scripted humans, seeded runs, batch statistics, replay.

Every episode is a deterministic function of (level, cache, config, seed).
The seed feeds one root SeedSequence whose two children drive, in a fixed
order, (a) the scripted human — per step: target re-pick or switch draw,
then the action-sampling draw — and (b) the world — per step: assistant
draw if the assistant policy is random, then one draw per live ghost in
ascending ghost index.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .brain import best_response_values, softmax
from .dynamics import HUMAN_ACTIONS, MOVE_DELTAS, WorldState
from .level import Level
from .mdp import canonical_json
from .planner import PolicyCache, project_state
from .session import GameSession, human_stream

__all__ = [
    "ScriptedHuman",
    "EpisodeLog",
    "StepRecord",
    "run_episode",
    "evaluate",
    "summary_to_csv",
    "tracking_accuracy",
    "replay_verify",
    "write_log",
    "read_log",
]

HUMAN_KINDS = ("softmax", "greedy", "random")
_KIND_ALIASES = {"softmax-capir": "softmax", "greedy-nearest": "greedy"}


class ScriptedHuman:
    """Stand-in for the human player during headless evaluation.

    kind:
      softmax  — samples from the same noisy-rational model the tracker
                 assumes, aimed at the current true target;
      greedy   — walks a shortest path to the nearest live ghost and shoots
                 when in range (ignores the target process; its target is
                 always the nearest ghost);
      random   — uniform over the six actions.
    targeting: "fixed" keeps one goal until that ghost dies; "switching"
    re-draws each step with the level's stay probability.
    """

    def __init__(self, kind: str = "softmax", targeting: str = "fixed", beta: float = 1.0, initial_target: int | None = None):
        kind = _KIND_ALIASES.get(kind, kind)
        if kind not in HUMAN_KINDS:
            raise ValueError(f"unknown scripted human kind {kind!r}")
        if targeting not in ("fixed", "switching"):
            raise ValueError(f"unknown targeting {targeting!r}")
        self.kind = kind
        self.targeting = targeting
        self.beta = beta
        self.initial_target = initial_target  # None: drawn uniformly at episode start
        self.level = None
        self.cache = None
        self.rng = None
        self.target = None

    def config(self) -> dict:
        return {
            "kind": self.kind,
            "targeting": self.targeting,
            "beta": self.beta,
            "initial_target": self.initial_target,
        }

    def reset(self, level: Level, cache: PolicyCache, rng: np.random.Generator):
        self.level = level
        self.cache = cache
        self.rng = rng
        self.target = self.initial_target

    # -- target process ------------------------------------------------------

    def _update_target(self, live_ids):
        if self.kind == "greedy":
            return  # greedy recomputes its target from distances every step
        if self.target is None or self.target not in live_ids:
            self.target = int(live_ids[self.rng.integers(len(live_ids))])
        elif self.targeting == "switching" and len(live_ids) > 1:
            if self.rng.random() >= self.level.params.switch_stay:
                others = [g for g in live_ids if g != self.target]
                self.target = int(others[self.rng.integers(len(others))])

    # -- action choice ---------------------------------------------------------

    def act(self, world: WorldState):
        """Pick (action, true_target) for the current world."""
        live_ids = [i for i, (_, alive) in enumerate(world.ghosts) if alive]
        self._update_target(live_ids)
        if self.kind == "greedy":
            return self._act_greedy(world, live_ids)
        if self.kind == "random":
            action = HUMAN_ACTIONS[int(self.rng.integers(len(HUMAN_ACTIONS)))]
            return action, self.target
        return self._act_softmax(world), self.target

    def _act_softmax(self, world):
        q, codec = self.cache.subtask(self.target)
        state = project_state(world, self.target)
        probs = softmax(best_response_values(q, codec, state), self.beta)
        u = self.rng.random()
        acc = 0.0
        for i, p in enumerate(probs):
            acc += p
            if u < acc:
                return HUMAN_ACTIONS[i]
        return HUMAN_ACTIONS[-1]

    def _act_greedy(self, world, live_ids):
        grid = self.level.grid
        target = min(live_ids, key=lambda g: (grid.dist(world.human_pos, world.ghosts[g][0]), g))
        self.target = target
        gpos = world.ghosts[target][0]
        here = grid.dist(world.human_pos, gpos)
        if here <= self.level.params.shoot_range:
            return "SHOOT", target
        for move in MOVE_DELTAS:  # N, S, E, W
            nxt = grid.move(world.human_pos, move)
            if nxt != world.human_pos and grid.dist(nxt, gpos) < here:
                return move, target
        return "STAY", target


@dataclass
class StepRecord:
    step: int
    human_action: str
    assistant_action: str
    world: WorldState
    belief: list  # over all original ghost ids, zeros once dead
    true_target: int
    kills: list = field(default_factory=list)


@dataclass
class EpisodeLog:
    level_name: str
    level_hash: str
    seed: int
    config: dict
    initial_world: WorldState
    steps: list
    outcome: str = "timed-out"
    total_steps: int = 0


def run_episode(
    level: Level,
    cache: PolicyCache,
    human: ScriptedHuman,
    assistant: str = "capir",
    seed: int = 0,
    max_steps: int | None = None,
    tracker_beta: float = 1.0,
    human_model: str = "expected",
    allow_nonconverged: bool = False,
) -> EpisodeLog:
    """Run one seeded episode to completion (all ghosts dead or step cap)."""
    session = GameSession(
        level,
        cache,
        seed=seed,
        assistant=assistant,
        beta=tracker_beta,
        human_model=human_model,
        max_steps=max_steps,
        allow_nonconverged=allow_nonconverged,
    )
    human.reset(level, cache, human_stream(seed))
    config = {
        "human": human.config(),
        "assistant": assistant,
        "tracker_beta": tracker_beta,
        "human_model": human_model,
        "max_steps": session.max_steps,
    }
    log = EpisodeLog(level.name, level.content_hash(), seed, config, session.world, [])
    while session.status == GameSession.ACTIVE:
        action, target = human.act(session.world)
        res = session.apply_human_action(action, true_target=target)
        belief_full = session.belief_full(res.diagnostics["belief"], res.diagnostics["live_ids"])
        log.steps.append(
            StepRecord(res.step, action, res.assistant_action, res.world, belief_full, target, res.kills)
        )
    log.outcome = session.status
    log.total_steps = session.step_count
    return log


def make_human(config: dict) -> ScriptedHuman:
    return ScriptedHuman(
        config["kind"], config["targeting"], config["beta"], config.get("initial_target")
    )


# -- batch evaluation ---------------------------------------------------------


def evaluate(level: Level, cache: PolicyCache, configs, episodes: int, base_seed: int = 0):
    """Mean steps with SEM and completion rate per configuration.

    ``configs`` is a list of dicts with keys name, human (ScriptedHuman
    config dict), assistant, and optionally tracker_beta / human_model.
    Episode i of every configuration uses seed base_seed + i, so
    configurations are compared on paired seeds.
    """
    if episodes < 2:
        raise ValueError("need at least 2 episodes for an SEM")
    rows = []
    for cfg in configs:
        steps = []
        completed = 0
        for i in range(episodes):
            log = run_episode(
                level,
                cache,
                make_human(cfg["human"]),
                assistant=cfg["assistant"],
                seed=base_seed + i,
                tracker_beta=cfg.get("tracker_beta", 1.0),
                human_model=cfg.get("human_model", "expected"),
                max_steps=cfg.get("max_steps"),
            )
            steps.append(log.total_steps)
            completed += log.outcome == "won"
        arr = np.asarray(steps, dtype=np.float64)
        rows.append(
            {
                "config": cfg["name"],
                "episodes": episodes,
                "mean_steps": float(arr.mean()),
                "sem": float(arr.std(ddof=1) / math.sqrt(episodes)),
                "completion_rate": completed / episodes,
            }
        )
    return rows


def summary_to_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["config", "episodes", "mean_steps", "sem", "completion_rate"])
        writer.writeheader()
        writer.writerows(rows)


def tracking_accuracy(log: EpisodeLog, burn_in: int = 3) -> float:
    """Fraction of counted steps whose belief argmax names the true target.

    The first ``burn_in`` steps after every target change (including the
    episode start) are skipped: a fresh uniform belief needs a few
    observations before the argmax means anything.
    """
    hits = counted = 0
    current = None
    age = 0
    for rec in log.steps:
        if rec.true_target != current:
            current, age = rec.true_target, 0
        if age >= burn_in:
            counted += 1
            hits += int(np.argmax(rec.belief)) == rec.true_target
        age += 1
    return hits / counted if counted else 0.0


# -- log serialization and replay ----------------------------------------------


def _world_to_obj(world: WorldState):
    return {
        "human": world.human_pos,
        "assistant": world.assistant_pos,
        "ghosts": [[pos, bool(alive)] for pos, alive in world.ghosts],
    }


def _world_from_obj(obj) -> WorldState:
    return WorldState(obj["human"], obj["assistant"], tuple((g[0], bool(g[1])) for g in obj["ghosts"]))


def write_log(log: EpisodeLog, path) -> None:
    """Line-delimited records: one header object, then one object per step."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "type": "header",
            "level": log.level_name,
            "level_sha256": log.level_hash,
            "seed": log.seed,
            "config": log.config,
            "initial_world": _world_to_obj(log.initial_world),
            "outcome": log.outcome,
            "total_steps": log.total_steps,
        }
        fh.write(canonical_json(header) + "\n")
        for rec in log.steps:
            fh.write(
                canonical_json(
                    {
                        "type": "step",
                        "step": rec.step,
                        "human_action": rec.human_action,
                        "assistant_action": rec.assistant_action,
                        "world": _world_to_obj(rec.world),
                        "belief": rec.belief,
                        "true_target": rec.true_target,
                        "kills": rec.kills,
                    }
                )
                + "\n"
            )


def read_log(path) -> EpisodeLog:
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("type") != "header":
        raise ValueError(f"{path}: not an episode log (missing header record)")
    head = lines[0]
    steps = [
        StepRecord(
            rec["step"],
            rec["human_action"],
            rec["assistant_action"],
            _world_from_obj(rec["world"]),
            rec["belief"],
            rec["true_target"],
            rec["kills"],
        )
        for rec in lines[1:]
    ]
    return EpisodeLog(
        head["level"],
        head["level_sha256"],
        head["seed"],
        head["config"],
        _world_from_obj(head["initial_world"]),
        steps,
        head["outcome"],
        head["total_steps"],
    )


def replay_verify(log: EpisodeLog, level: Level, cache: PolicyCache):
    """Re-run an episode from its recorded seed and config and compare.

    Returns (ok, divergence) where divergence is None or a dict naming the
    first step and field that disagreed.
    """
    if log.level_hash != level.content_hash():
        return False, {"step": 0, "field": "level_sha256", "expected": log.level_hash, "got": level.content_hash()}
    fresh = run_episode(
        level,
        cache,
        make_human(log.config["human"]),
        assistant=log.config["assistant"],
        seed=log.seed,
        max_steps=log.config.get("max_steps"),
        tracker_beta=log.config.get("tracker_beta", 1.0),
        human_model=log.config.get("human_model", "expected"),
    )
    for recorded, rerun in zip(log.steps, fresh.steps):
        for name in ("step", "human_action", "assistant_action", "world", "belief", "true_target", "kills"):
            got, expected = getattr(rerun, name), getattr(recorded, name)
            if got != expected:
                return False, {"step": recorded.step, "field": name, "expected": expected, "got": got}
    if len(log.steps) != len(fresh.steps) or log.outcome != fresh.outcome or log.total_steps != fresh.total_steps:
        return False, {
            "step": min(len(log.steps), len(fresh.steps)),
            "field": "episode",
            "expected": (log.total_steps, log.outcome),
            "got": (fresh.total_steps, fresh.outcome),
        }
    return True, None
