"""Online assistant: noisy-rational human model, belief tracking, action choice.

The human is modelled as softmax-rational over the best-response values of
their own actions: P(a_H) is proportional to exp(beta * max_aD Q(s, a_H, a_D)).
A row-stochastic subtask-switching matrix carries the belief forward each
step (the human keeps their current goal with probability ``switch_stay``),
then Bayes conditions on the observed human action. The assistant finally
plays the action with the highest belief- and human-marginalized expected
value.
"""

from __future__ import annotations

import numpy as np

from .dynamics import ASSISTANT_ACTIONS, DEAD, HUMAN_ACTIONS, SubtaskState
from .planner import PolicyCache, project_state

__all__ = [
    "softmax",
    "default_transition_matrix",
    "human_action_likelihood",
    "belief_predict",
    "belief_update",
    "retire_subtask",
    "select_assistant_action",
    "IntentionTracker",
]

_NUM_HUMAN = len(HUMAN_ACTIONS)
_NUM_ASSIST = len(ASSISTANT_ACTIONS)


def softmax(utilities, beta: float = 1.0) -> np.ndarray:
    """Numerically stable softmax of beta * utilities (max subtracted first)."""
    z = beta * np.asarray(utilities, dtype=np.float64)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def default_transition_matrix(k: int, switch_stay: float = 0.8) -> np.ndarray:
    """Homogeneous subtask-switching matrix: stay with prob switch_stay,
    otherwise switch uniformly to one of the k-1 others."""
    if k < 1:
        raise ValueError("need at least one subtask")
    if k == 1:
        return np.ones((1, 1))
    T = np.full((k, k), (1.0 - switch_stay) / (k - 1))
    np.fill_diagonal(T, switch_stay)
    return T


def best_response_values(q: np.ndarray, codec, state: SubtaskState) -> np.ndarray:
    """Per-human-action value assuming the assistant best-responds:
    u[a_H] = max_aD Q(s, a_H, a_D)."""
    s = codec.encode(state)
    return q[s].reshape(_NUM_HUMAN, _NUM_ASSIST).max(axis=1)


def human_action_likelihood(q: np.ndarray, codec, state: SubtaskState, beta: float = 1.0) -> np.ndarray:
    """Distribution over the six human actions under the noisy-rational model.

    A DEAD subtask offers no preference, so it is scored uniform; this keeps
    a just-killed ghost from attracting or repelling belief before it is
    retired.
    """
    if state.ghost == DEAD:
        return np.full(_NUM_HUMAN, 1.0 / _NUM_HUMAN)
    return softmax(best_response_values(q, codec, state), beta)


def belief_predict(belief: np.ndarray, transition: np.ndarray) -> np.ndarray:
    """Push the belief through the subtask-switching matrix:
    b'[i] = sum_j T[j, i] * b[j]."""
    belief = np.asarray(belief, dtype=np.float64)
    if transition.shape != (belief.size, belief.size):
        raise ValueError("transition matrix and belief dimensions disagree")
    return transition.T @ belief


def belief_update(belief_pred: np.ndarray, likelihoods: np.ndarray):
    """Bayes step: posterior proportional to prior times likelihood.

    Returns (posterior, degenerate). With exact softmax likelihoods the
    evidence is strictly positive; a zero total signals numerical underflow
    somewhere upstream, in which case the prediction is kept unchanged and
    the degenerate flag is raised for diagnostics.
    """
    post = np.asarray(belief_pred, dtype=np.float64) * np.asarray(likelihoods, dtype=np.float64)
    total = post.sum()
    if total <= 0.0 or not np.isfinite(total):
        return np.array(belief_pred, dtype=np.float64, copy=True), True
    return post / total, False


def retire_subtask(belief: np.ndarray, transition: np.ndarray, index: int):
    """Drop a finished subtask: renormalize the survivors' belief and the
    surviving rows of the switching matrix. One-way; needs >= 2 live subtasks."""
    k = belief.size
    if k < 2:
        raise ValueError("cannot retire the last subtask")
    keep = [i for i in range(k) if i != index]
    b = np.asarray(belief, dtype=np.float64)[keep]
    total = b.sum()
    b = np.full(k - 1, 1.0 / (k - 1)) if total <= 0 else b / total
    T = np.asarray(transition, dtype=np.float64)[np.ix_(keep, keep)]
    T = T / T.sum(axis=1, keepdims=True)
    return b, T


def expected_q_over_human(q: np.ndarray, codec, state: SubtaskState, human_probs: np.ndarray) -> np.ndarray:
    """Per-assistant-action value with the human marginalized out:
    u[a_D] = sum_aH P(a_H) * Q(s, a_H, a_D). DEAD subtasks contribute zero."""
    if state.ghost == DEAD:
        return np.zeros(_NUM_ASSIST)
    s = codec.encode(state)
    return human_probs @ q[s].reshape(_NUM_HUMAN, _NUM_ASSIST)


def max_q_over_human(q: np.ndarray, codec, state: SubtaskState) -> np.ndarray:
    """Best-case variant: u[a_D] = max_aH Q(s, a_H, a_D)."""
    if state.ghost == DEAD:
        return np.zeros(_NUM_ASSIST)
    s = codec.encode(state)
    return q[s].reshape(_NUM_HUMAN, _NUM_ASSIST).max(axis=0)


def select_assistant_action(belief, cache: PolicyCache, world, live_ids=None, beta: float = 1.0, human_model: str = "expected"):
    """Assistant action maximizing the belief-weighted expected value.

    ``human_model`` picks how the human slot of the joint action is
    resolved: "expected" marginalizes with the noisy-rational model (the
    default; a best-response human would contradict that same model),
    "best-response" takes the max instead. Ties break to the lowest
    assistant action index. Returns (action_name, utilities).
    """
    belief = np.asarray(belief, dtype=np.float64)
    if live_ids is None:
        live_ids = list(range(cache.num_subtasks))
    if belief.size != len(live_ids):
        raise ValueError("belief dimension must match the live subtask count")
    utilities = np.zeros(_NUM_ASSIST)
    for weight, gid in zip(belief, live_ids):
        q, codec = cache.subtask(gid)
        state = project_state(world, gid)
        if human_model == "expected":
            probs = human_action_likelihood(q, codec, state, beta)
            utilities += weight * expected_q_over_human(q, codec, state, probs)
        elif human_model == "best-response":
            utilities += weight * max_q_over_human(q, codec, state)
        else:
            raise ValueError(f"unknown human_model {human_model!r}")
    return ASSISTANT_ACTIONS[int(np.argmax(utilities))], utilities


class IntentionTracker:
    """Per-session belief over which ghost the human is hunting.

    Holds the live subtask ids, the belief over them, and the switching
    matrix; one ``step`` consumes one observed human action (predict, then
    Bayes, then action selection — in that order). State is confined to one
    session; the Q-tables are shared read-only.
    """

    def __init__(self, cache: PolicyCache, switch_stay: float = 0.8, beta: float = 1.0, human_model: str = "expected"):
        self.cache = cache
        self.beta = beta
        self.human_model = human_model
        self.live_ids = list(range(cache.num_subtasks))
        self.belief = np.full(len(self.live_ids), 1.0 / len(self.live_ids))
        self.transition = default_transition_matrix(len(self.live_ids), switch_stay)
        self.step_count = 0

    def likelihood_table(self, world) -> np.ndarray:
        """Row i: P(a_H | subtask live_ids[i], its projected state)."""
        rows = []
        for gid in self.live_ids:
            q, codec = self.cache.subtask(gid)
            rows.append(human_action_likelihood(q, codec, project_state(world, gid), self.beta))
        return np.array(rows)

    def step(self, world, human_action: str):
        """Observe one human action taken at ``world``; update the belief and
        pick the assistant's reply. Returns (assistant_action, diagnostics)."""
        action_idx = HUMAN_ACTIONS.index(human_action)
        predicted = belief_predict(self.belief, self.transition)
        table = self.likelihood_table(world)
        evidence = table[:, action_idx]
        posterior, degenerate = belief_update(predicted, evidence)
        self.belief = posterior
        action, utilities = select_assistant_action(
            posterior, self.cache, world, self.live_ids, self.beta, self.human_model
        )
        self.step_count += 1
        diagnostics = {
            "belief": posterior.copy(),
            "likelihoods": evidence.copy(),
            "utilities": utilities,
            "degenerate_update": degenerate,
        }
        return action, diagnostics

    def retire(self, ghost_id: int) -> None:
        idx = self.live_ids.index(ghost_id)
        if len(self.live_ids) == 1:
            self.live_ids = []
            self.belief = np.zeros(0)
            self.transition = np.zeros((0, 0))
            return
        self.belief, self.transition = retire_subtask(self.belief, self.transition, idx)
        self.live_ids.pop(idx)

    def belief_by_ghost(self) -> dict:
        return {gid: float(b) for gid, b in zip(self.live_ids, self.belief)}
