"""Offline planning: one solved MDP per ghost, persisted as a policy cache.

Each ghost defines its own subtask (catch that ghost); subtasks are solved
independently over the shared map, so planning cost grows linearly with the
ghost count instead of exponentially with it. The cache file is keyed to
the exact level text (content hash) and the engine parameters, so a stale
or mismatched cache is never served silently.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import DEAD, SubtaskCodec, SubtaskState, WorldState, build_subtask_mdp
from .level import Level
from .mdp import SolveReport, canonical_json, compute_q, value_iteration

__all__ = [
    "PolicyCache",
    "plan_level",
    "project_state",
    "save_cache",
    "load_cache",
    "default_cache_path",
    "CacheError",
    "CacheVersionError",
    "CacheChecksumError",
    "CacheLevelMismatchError",
]

_CACHE_MAGIC = b"CAPIRPC"
_CACHE_VERSION = 1


class CacheError(Exception):
    """Base class for policy-cache load failures."""


class CacheVersionError(CacheError):
    """Bad magic string or unsupported cache format version."""


class CacheChecksumError(CacheError):
    """Cache content does not match its checksum (truncated or corrupt)."""


class CacheLevelMismatchError(CacheError):
    """Cache was planned for a different level text or parameter set."""


@dataclass
class PolicyCache:
    """Solved Q-tables for every subtask of one level."""

    level_hash: str
    params: dict
    qtables: list
    codecs: list
    reports: list

    @property
    def num_subtasks(self) -> int:
        return len(self.qtables)

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.reports)

    def subtask(self, i: int):
        return self.qtables[i], self.codecs[i]

    def matches(self, level: Level) -> bool:
        return self.level_hash == level.content_hash() and self.params == level.params.as_dict()

    def require_match(self, level: Level) -> None:
        if self.level_hash != level.content_hash():
            raise CacheLevelMismatchError(
                f"cache was planned for a different level (hash {self.level_hash[:12]}..., "
                f"level is {level.content_hash()[:12]}...); re-run plan"
            )
        if self.params != level.params.as_dict():
            raise CacheLevelMismatchError("cache parameter block differs from the level; re-run plan")


def plan_level(level: Level, epsilon: float = 1e-6, max_iterations: int = 10_000) -> PolicyCache:
    """Solve every subtask of a level. Deterministic given level + parameters.

    A subtask that hits max_iterations is kept (callers decide whether to
    serve it) but its report is marked non-converged.
    """
    qtables, codecs, reports = [], [], []
    for _ in range(level.num_ghosts):
        mdp, codec = build_subtask_mdp(level.grid, level.params)
        values, report = value_iteration(mdp, epsilon=epsilon, max_iterations=max_iterations)
        qtables.append(compute_q(mdp, values))
        codecs.append(codec)
        reports.append(report)
    return PolicyCache(level.content_hash(), level.params.as_dict(), qtables, codecs, reports)


def project_state(world: WorldState, subtask_id: int) -> SubtaskState:
    """Per-ghost view of the full game: positions plus that ghost (or DEAD)."""
    pos, alive = world.ghosts[subtask_id]
    return SubtaskState(world.human_pos, world.assistant_pos, pos if alive else DEAD)


# ---------------------------------------------------------------------------
# Cache container:
#   magic "CAPIRPC" | u16 version | u32 header_len | header JSON
#   | per-subtask row-major float64 little-endian Q blob | sha256 trailer
#
# The header omits wall-clock solve time so that planning the same level
# twice produces bit-identical files.
# ---------------------------------------------------------------------------


def cache_to_bytes(cache: PolicyCache) -> bytes:
    header = {
        "level_sha256": cache.level_hash,
        "params": cache.params,
        "subtasks": [
            {
                "num_states": int(q.shape[0]),
                "num_actions": int(q.shape[1]),
                "num_cells": codec.num_cells,
                "iterations": rep.iterations,
                "final_residual": rep.final_residual,
                "epsilon": rep.epsilon,
                "converged": rep.converged,
            }
            for q, codec, rep in zip(cache.qtables, cache.codecs, cache.reports)
        ],
    }
    header_bytes = canonical_json(header).encode("utf-8")
    parts = [_CACHE_MAGIC, struct.pack("<HI", _CACHE_VERSION, len(header_bytes)), header_bytes]
    for q in cache.qtables:
        parts.append(np.ascontiguousarray(q, dtype="<f8").tobytes())
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


def cache_from_bytes(blob: bytes) -> PolicyCache:
    import json

    min_len = len(_CACHE_MAGIC) + 6 + 32
    if len(blob) < min_len:
        raise CacheChecksumError("cache file too short; truncated?")
    if not blob.startswith(_CACHE_MAGIC):
        raise CacheVersionError("not a policy cache file (bad magic)")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CacheChecksumError("cache checksum mismatch: file is truncated or corrupt")
    version, header_len = struct.unpack_from("<HI", body, len(_CACHE_MAGIC))
    if version != _CACHE_VERSION:
        raise CacheVersionError(f"unsupported cache version {version}")
    off = len(_CACHE_MAGIC) + 6
    header = json.loads(body[off : off + header_len].decode("utf-8"))
    off += header_len

    qtables, codecs, reports = [], [], []
    for meta in header["subtasks"]:
        n = meta["num_states"] * meta["num_actions"] * 8
        q = np.frombuffer(body[off : off + n], dtype="<f8").reshape(meta["num_states"], meta["num_actions"])
        off += n
        qtables.append(q.astype(np.float64, copy=True))
        codecs.append(SubtaskCodec(meta["num_cells"]))
        reports.append(
            SolveReport(
                iterations=meta["iterations"],
                final_residual=meta["final_residual"],
                wall_time=0.0,
                converged=meta["converged"],
                epsilon=meta["epsilon"],
            )
        )
    if off != len(body):
        raise CacheChecksumError("cache payload length disagrees with header")
    return PolicyCache(header["level_sha256"], header["params"], qtables, codecs, reports)


def save_cache(cache: PolicyCache, path) -> None:
    Path(path).write_bytes(cache_to_bytes(cache))


def load_cache(path, level: Level | None = None) -> PolicyCache:
    """Load a cache; if ``level`` is given, verify hash and parameter block."""
    cache = cache_from_bytes(Path(path).read_bytes())
    if level is not None:
        cache.require_match(level)
    return cache


def default_cache_path(level_path) -> Path:
    return Path(level_path).with_suffix(".qcache")
