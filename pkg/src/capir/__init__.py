"""Collaborative game AI engine: per-subtask MDP planning, Bayesian
intention tracking over a probabilistic goal-switching model, and
expected-utility action selection, packaged with a ghost-hunting gridworld,
a headless evaluator, and a session server for live play."""

from .brain import (
    IntentionTracker,
    belief_predict,
    belief_update,
    default_transition_matrix,
    human_action_likelihood,
    retire_subtask,
    select_assistant_action,
    softmax,
)
from .dynamics import (
    ASSISTANT_ACTIONS,
    DEAD,
    HUMAN_ACTIONS,
    SubtaskCodec,
    SubtaskState,
    WorldState,
    build_subtask_mdp,
    ghost_transition,
    initial_world_state,
    protagonist_move,
    subtask_step,
    world_step,
)
from .grid import GridMap
from .level import Level, LevelError, LevelParams, load_level, parse_level
from .mdp import Mdp, SolveReport, compute_q, greedy_action, value_iteration
from .planner import (
    CacheChecksumError,
    CacheError,
    CacheLevelMismatchError,
    CacheVersionError,
    PolicyCache,
    default_cache_path,
    load_cache,
    plan_level,
    project_state,
    save_cache,
)
from .session import GameSession, StepResult
from .simulate import (
    EpisodeLog,
    ScriptedHuman,
    evaluate,
    read_log,
    replay_verify,
    run_episode,
    tracking_accuracy,
    write_log,
)

__version__ = "0.1.0"
