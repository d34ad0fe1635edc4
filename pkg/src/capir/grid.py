"""Maze geometry: passable cells, 4-neighbourhoods, all-pairs BFS distances.

Cells are referred to by a dense index in [0, m) over the passable cells,
assigned row-major over the ASCII grid. All "steps away" logic in the game
uses shortest-path distance through the maze, never straight-line distance,
so the distance table is computed once per map and shared read-only.
"""

from __future__ import annotations

from collections import deque

import numpy as np

__all__ = ["GridMap", "MOVE_DELTAS", "UNREACHABLE"]

# Move deltas in (dx, dy); y grows downward (row 0 is the top line).
MOVE_DELTAS = {"N": (0, -1), "S": (0, 1), "E": (1, 0), "W": (-1, 0)}

UNREACHABLE = -1  # sentinel in the distance table for disconnected pairs


class GridMap:
    """Immutable gridworld geometry with a precomputed distance table."""

    def __init__(self, passable_rows):
        """``passable_rows`` is a list of equal-length lists of booleans."""
        self.height = len(passable_rows)
        self.width = len(passable_rows[0]) if self.height else 0
        if any(len(row) != self.width for row in passable_rows):
            raise ValueError("all grid rows must have the same width")
        self.passable = np.array(passable_rows, dtype=bool)

        # Dense cell ids, row-major over passable cells only.
        self.cell_of_xy = np.full((self.height, self.width), -1, dtype=np.int32)
        coords = []
        for y in range(self.height):
            for x in range(self.width):
                if self.passable[y, x]:
                    self.cell_of_xy[y, x] = len(coords)
                    coords.append((x, y))
        self.coords = coords
        self.num_cells = len(coords)

        self._neighbors = [self._adjacent(c) for c in range(self.num_cells)]
        self._move_target = self._build_move_table()
        self.distance = self._all_pairs_bfs()

    # -- construction helpers -------------------------------------------------

    def _adjacent(self, cell):
        x, y = self.coords[cell]
        out = []
        for dx, dy in MOVE_DELTAS.values():
            nx, ny = x + dx, y + dy
            if 0 <= nx < self.width and 0 <= ny < self.height and self.passable[ny, nx]:
                out.append(int(self.cell_of_xy[ny, nx]))
        return sorted(out)

    def _build_move_table(self):
        table = {}
        for move, (dx, dy) in MOVE_DELTAS.items():
            col = np.empty(self.num_cells, dtype=np.int32)
            for c, (x, y) in enumerate(self.coords):
                nx, ny = x + dx, y + dy
                if 0 <= nx < self.width and 0 <= ny < self.height and self.passable[ny, nx]:
                    col[c] = self.cell_of_xy[ny, nx]
                else:
                    col[c] = c  # blocked moves keep you in place
            table[move] = col
        return table

    def _all_pairs_bfs(self):
        m = self.num_cells
        dist = np.full((m, m), UNREACHABLE, dtype=np.int32)
        for src in range(m):
            dist[src, src] = 0
            queue = deque([src])
            while queue:
                cur = queue.popleft()
                for nb in self._neighbors[cur]:
                    if dist[src, nb] == UNREACHABLE:
                        dist[src, nb] = dist[src, cur] + 1
                        queue.append(nb)
        return dist

    # -- queries ---------------------------------------------------------------

    def cell_at(self, x, y):
        """Cell id at grid coordinates, or -1 for walls."""
        return int(self.cell_of_xy[y, x])

    def xy(self, cell):
        return self.coords[cell]

    def neighbors(self, cell):
        """Adjacent passable cells, ascending cell id."""
        return self._neighbors[cell]

    def move(self, cell, direction):
        """Destination of a deterministic move; blocked moves stay put."""
        return int(self._move_target[direction][cell])

    def dist(self, a, b):
        """Shortest-path step count, or infinity if disconnected."""
        d = int(self.distance[a, b])
        return float("inf") if d == UNREACHABLE else d

    def is_connected(self):
        return bool((self.distance != UNREACHABLE).all()) if self.num_cells else True

    def walls(self):
        """Wall coordinates as a list of [x, y] pairs (for wire snapshots)."""
        out = []
        for y in range(self.height):
            for x in range(self.width):
                if not self.passable[y, x]:
                    out.append([x, y])
        return out
