"""Finite tabular MDPs: sparse storage, value iteration, Q extraction.

Transitions are kept in a CSR-like layout with one row per (state, action)
pair. Rewards are attached to individual (state, action, next_state)
entries, aligned with the transition row, so reward may depend on the
successor that was actually reached.
"""

from __future__ import annotations

import hashlib
import json
import struct
import time
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Mdp",
    "SolveReport",
    "value_iteration",
    "compute_q",
    "greedy_action",
    "save_qtable",
    "load_qtable",
    "QTableFormatError",
    "QTableChecksumError",
]

_ROW_SUM_TOL = 1e-9


class QTableFormatError(ValueError):
    """Persisted Q-table has a bad magic string or unsupported version."""


class QTableChecksumError(ValueError):
    """Persisted Q-table content does not match its checksum (truncated or corrupt)."""


class Mdp:
    """Finite MDP with sparse per-(state, action) transition rows.

    Row r = s * num_actions + a holds the successors of taking action a in
    state s: column indices ``next_state[row_ptr[r]:row_ptr[r+1]]`` with
    matching probabilities and rewards. Every row must be a probability
    distribution; this is validated at construction time so the solver can
    assume stochasticity.
    """

    def __init__(self, num_states, num_actions, row_ptr, next_state, prob, reward, discount):
        self.num_states = int(num_states)
        self.num_actions = int(num_actions)
        self.row_ptr = np.asarray(row_ptr, dtype=np.int64)
        self.next_state = np.asarray(next_state, dtype=np.int64)
        self.prob = np.asarray(prob, dtype=np.float64)
        self.reward = np.asarray(reward, dtype=np.float64)
        self.discount = float(discount)
        self._validate()
        # Expected immediate reward per (s, a) row; reused every sweep.
        self._row_reward = np.add.reduceat(self.prob * self.reward, self.row_ptr[:-1])

    def _validate(self):
        n_rows = self.num_states * self.num_actions
        if self.num_states <= 0 or self.num_actions <= 0:
            raise ValueError("num_states and num_actions must be positive")
        if not 0.0 < self.discount < 1.0:
            raise ValueError(f"discount must lie in (0, 1), got {self.discount}")
        if self.row_ptr.shape != (n_rows + 1,):
            raise ValueError("row_ptr must have num_states*num_actions+1 entries")
        if self.row_ptr[0] != 0 or self.row_ptr[-1] != len(self.next_state):
            raise ValueError("row_ptr does not span the transition arrays")
        if len(self.prob) != len(self.next_state) or len(self.reward) != len(self.next_state):
            raise ValueError("next_state, prob and reward must be aligned")
        widths = np.diff(self.row_ptr)
        if (widths <= 0).any():
            raise ValueError("every (state, action) needs at least one successor")
        if (self.next_state < 0).any() or (self.next_state >= self.num_states).any():
            raise ValueError("next_state index out of range")
        if (self.prob < 0).any() or not np.isfinite(self.prob).all():
            raise ValueError("probabilities must be finite and non-negative")
        if not np.isfinite(self.reward).all():
            raise ValueError("rewards must be finite")
        row_sums = np.add.reduceat(self.prob, self.row_ptr[:-1])
        bad = np.abs(row_sums - 1.0) > _ROW_SUM_TOL
        if bad.any():
            r = int(np.argmax(bad))
            raise ValueError(
                f"transition row for state {r // self.num_actions}, action "
                f"{r % self.num_actions} sums to {row_sums[r]:.12f}, not 1"
            )

    @classmethod
    def from_triples(cls, transitions, discount):
        """Build from nested lists: transitions[s][a] = [(next, prob, reward), ...]."""
        num_states = len(transitions)
        num_actions = len(transitions[0]) if num_states else 0
        row_ptr = [0]
        cols, probs, rews = [], [], []
        for s in range(num_states):
            if len(transitions[s]) != num_actions:
                raise ValueError("all states must offer the same action count")
            for a in range(num_actions):
                for ns, p, r in transitions[s][a]:
                    cols.append(ns)
                    probs.append(p)
                    rews.append(r)
                row_ptr.append(len(cols))
        return cls(num_states, num_actions, row_ptr, cols, probs, rews, discount)

    def transition_row(self, state, action):
        """Successors of (state, action) as (next_states, probs, rewards) arrays."""
        r = state * self.num_actions + action
        lo, hi = self.row_ptr[r], self.row_ptr[r + 1]
        return self.next_state[lo:hi], self.prob[lo:hi], self.reward[lo:hi]

    def max_abs_reward(self):
        return float(np.abs(self.reward).max())


@dataclass
class SolveReport:
    """Outcome of one value-iteration run."""

    iterations: int
    final_residual: float
    wall_time: float
    converged: bool
    epsilon: float
    residuals: list[float] = field(default_factory=list, repr=False)


def _sweep_q(mdp: Mdp, values: np.ndarray) -> np.ndarray:
    """One synchronous Bellman backup; returns the (S, A) action-value table."""
    pv = mdp.prob * values[mdp.next_state]
    q_flat = mdp._row_reward + mdp.discount * np.add.reduceat(pv, mdp.row_ptr[:-1])
    return q_flat.reshape(mdp.num_states, mdp.num_actions)


def value_iteration(mdp: Mdp, epsilon: float = 1e-6, max_iterations: int = 10_000):
    """Solve an MDP to a fixed point by synchronous value iteration.

    Starts from the all-zero value function and stops once the infinity norm
    of successive sweeps drops to ``epsilon`` (or ``max_iterations`` is hit,
    in which case the report carries ``converged=False``). Returns the value
    vector together with a :class:`SolveReport`.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if max_iterations < 1:
        raise ValueError("max_iterations must be at least 1")
    t0 = time.perf_counter()
    values = np.zeros(mdp.num_states)
    residuals = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        new_values = _sweep_q(mdp, values).max(axis=1)
        residual = float(np.abs(new_values - values).max())
        residuals.append(residual)
        values = new_values
        if residual <= epsilon:
            converged = True
            break
    report = SolveReport(
        iterations=iterations,
        final_residual=residuals[-1],
        wall_time=time.perf_counter() - t0,
        converged=converged,
        epsilon=epsilon,
        residuals=residuals,
    )
    return values, report


def compute_q(mdp: Mdp, values: np.ndarray) -> np.ndarray:
    """Q(s, a) = sum_s' T_a(s,s') * (R_a(s,s') + discount * values[s'])."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (mdp.num_states,):
        raise ValueError(f"values must have shape ({mdp.num_states},), got {values.shape}")
    return _sweep_q(mdp, values)


def greedy_action(q: np.ndarray, state: int) -> int:
    """Action maximizing q[state]; ties go to the lowest action index."""
    return int(np.argmax(q[state]))


# ---------------------------------------------------------------------------
# Q-table persistence: small binary container, bit-exact round trip.
#
#   magic "QTAB" | u16 version | u32 num_states | u32 num_actions
#   | row-major float64 little-endian Q values | sha256 of all prior bytes
# ---------------------------------------------------------------------------

_QTAB_MAGIC = b"QTAB"
_QTAB_VERSION = 1


def qtable_to_bytes(q: np.ndarray) -> bytes:
    q = np.ascontiguousarray(q, dtype=np.float64)
    if q.ndim != 2:
        raise ValueError("q must be a 2-D (states x actions) array")
    body = (
        _QTAB_MAGIC
        + struct.pack("<HII", _QTAB_VERSION, q.shape[0], q.shape[1])
        + q.astype("<f8").tobytes()
    )
    return body + hashlib.sha256(body).digest()


def qtable_from_bytes(blob: bytes) -> np.ndarray:
    if len(blob) < len(_QTAB_MAGIC) + 10 + 32:
        raise QTableChecksumError("file too short to hold a Q-table")
    body, digest = blob[:-32], blob[-32:]
    if not body.startswith(_QTAB_MAGIC):
        raise QTableFormatError("not a Q-table file (bad magic)")
    if hashlib.sha256(body).digest() != digest:
        raise QTableChecksumError("checksum mismatch: file is truncated or corrupt")
    version, num_states, num_actions = struct.unpack_from("<HII", body, len(_QTAB_MAGIC))
    if version != _QTAB_VERSION:
        raise QTableFormatError(f"unsupported Q-table version {version}")
    payload = body[len(_QTAB_MAGIC) + 10 :]
    expected = num_states * num_actions * 8
    if len(payload) != expected:
        raise QTableChecksumError("payload length disagrees with header")
    q = np.frombuffer(payload, dtype="<f8").reshape(num_states, num_actions)
    return q.astype(np.float64, copy=True)


def save_qtable(path, q: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(qtable_to_bytes(q))


def load_qtable(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return qtable_from_bytes(fh.read())


def canonical_json(obj) -> str:
    """Deterministic JSON used for hashing and wire/golden fixtures."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
