"""Level files: parsing, validation, bundled-level lookup.

Format (text)::

    capir-level v1
    gamma=0.95 flee_radius=4 flee_prob=0.9 shoot_range=3 max_steps=300 switch_stay=0.8
    #####
    #H.G#
    #.D.#
    #####

``#`` wall, ``.`` floor, ``H`` human start, ``D`` assistant start, ``G``
ghost start (one per ghost). Exactly one H, one D, at least one G, and the
whole floor must form a single connected component.

Levels are addressed either by filesystem path or by bare name (``level1``)
resolved against ``CAPIR_LEVEL_DIR`` or the bundled level directory.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .grid import GridMap

__all__ = ["Level", "LevelParams", "LevelError", "parse_level", "load_level", "level_dir", "bundled_level_names"]

MAGIC = "capir-level v1"

_PARAM_TYPES = {
    "gamma": float,
    "flee_radius": int,
    "flee_prob": float,
    "shoot_range": int,
    "max_steps": int,
    "switch_stay": float,
}

_DEFAULTS = {
    "gamma": 0.95,
    "flee_radius": 4,
    "flee_prob": 0.9,
    "shoot_range": 3,
    "max_steps": 300,
    "switch_stay": 0.8,
}


class LevelError(ValueError):
    """Raised when a level file is malformed or fails validation."""


@dataclass(frozen=True)
class LevelParams:
    gamma: float = 0.95
    flee_radius: int = 4
    flee_prob: float = 0.9
    shoot_range: int = 3
    max_steps: int = 300
    switch_stay: float = 0.8

    def validate(self):
        if not 0.0 < self.gamma < 1.0:
            raise LevelError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0.0 <= self.flee_prob <= 1.0:
            raise LevelError(f"flee_prob must lie in [0, 1], got {self.flee_prob}")
        if not 0.0 <= self.switch_stay <= 1.0:
            raise LevelError(f"switch_stay must lie in [0, 1], got {self.switch_stay}")
        if self.flee_radius < 0 or self.shoot_range < 0:
            raise LevelError("flee_radius and shoot_range must be non-negative")
        if self.max_steps < 1:
            raise LevelError("max_steps must be positive")

    def as_dict(self):
        return {
            "gamma": self.gamma,
            "flee_radius": self.flee_radius,
            "flee_prob": self.flee_prob,
            "shoot_range": self.shoot_range,
            "max_steps": self.max_steps,
            "switch_stay": self.switch_stay,
        }


class Level:
    """A parsed, validated level: geometry, parameters, start configuration."""

    def __init__(self, name, source_text, params: LevelParams, grid: GridMap, human_start, assistant_start, ghost_starts):
        self.name = name
        self.source_text = source_text
        self.params = params
        self.grid = grid
        self.human_start = human_start
        self.assistant_start = assistant_start
        self.ghost_starts = list(ghost_starts)

    @property
    def num_ghosts(self):
        return len(self.ghost_starts)

    def content_hash(self) -> str:
        """sha256 of the exact level text; keys policy caches to the level."""
        return hashlib.sha256(self.source_text.encode("utf-8")).hexdigest()


def parse_level(text: str, name: str = "<inline>") -> Level:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise LevelError(f"{name}: first line must be '{MAGIC}'")
    if len(lines) < 3:
        raise LevelError(f"{name}: missing parameter line or grid")

    params = dict(_DEFAULTS)
    for token in lines[1].split():
        if "=" not in token:
            raise LevelError(f"{name}: bad parameter token {token!r}")
        key, _, raw = token.partition("=")
        if key not in _PARAM_TYPES:
            raise LevelError(f"{name}: unknown parameter {key!r}")
        try:
            params[key] = _PARAM_TYPES[key](raw)
        except ValueError:
            raise LevelError(f"{name}: cannot parse {key}={raw!r}") from None
    level_params = LevelParams(**params)
    level_params.validate()

    grid_lines = [line for line in lines[2:] if line.strip() != ""]
    if not grid_lines:
        raise LevelError(f"{name}: empty grid")
    width = max(len(line) for line in grid_lines)
    grid_lines = [line.ljust(width) for line in grid_lines]

    passable_rows = []
    human = assistant = None
    ghosts = []
    for y, line in enumerate(grid_lines):
        row = []
        for x, ch in enumerate(line):
            if ch == "#" or ch == " ":
                row.append(False)
            elif ch in ".HDG":
                row.append(True)
            else:
                raise LevelError(f"{name}: unknown grid character {ch!r} at ({x}, {y})")
        passable_rows.append(row)
    grid = GridMap(passable_rows)

    for y, line in enumerate(grid_lines):
        for x, ch in enumerate(line):
            if ch == "H":
                if human is not None:
                    raise LevelError(f"{name}: more than one H")
                human = grid.cell_at(x, y)
            elif ch == "D":
                if assistant is not None:
                    raise LevelError(f"{name}: more than one D")
                assistant = grid.cell_at(x, y)
            elif ch == "G":
                ghosts.append(grid.cell_at(x, y))

    if human is None:
        raise LevelError(f"{name}: no human start (H)")
    if assistant is None:
        raise LevelError(f"{name}: no assistant start (D)")
    if not ghosts:
        raise LevelError(f"{name}: no ghosts (G)")
    if grid.num_cells == 0:
        raise LevelError(f"{name}: no passable cells")
    if not grid.is_connected():
        raise LevelError(f"{name}: floor is disconnected; every passable cell must be reachable")

    return Level(name, text, level_params, grid, human, assistant, ghosts)


def level_dir() -> Path:
    """Directory holding bundled levels; overridable via CAPIR_LEVEL_DIR."""
    env = os.environ.get("CAPIR_LEVEL_DIR")
    if env:
        return Path(env)
    return Path(resources.files("capir").joinpath("levels"))


def bundled_level_names():
    d = level_dir()
    if not d.is_dir():
        return []
    return sorted(p.stem for p in d.glob("*.lvl"))


def resolve_level_path(ref: str) -> Path:
    """Map a path-or-name reference to an existing level file."""
    p = Path(ref)
    if p.is_file():
        return p
    candidate = level_dir() / f"{ref}.lvl"
    if candidate.is_file():
        return candidate
    raise LevelError(f"no such level: {ref!r} (not a file, and {candidate} does not exist)")


def load_level(ref: str) -> Level:
    path = resolve_level_path(ref)
    return parse_level(path.read_text(encoding="utf-8"), name=path.stem)
