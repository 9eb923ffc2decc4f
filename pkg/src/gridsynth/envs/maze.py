"""Maze environment: a medium perfect maze seen through an egocentric 5x5 view.

The world is a 13x13 grid of wall and floor cells carved with a seeded
recursive backtracker, so every pair of floor cells is joined by exactly
one path (verified with union-find after carving). The agent observes a
5x5 window rotated into its own frame: it sits at view cell (0, 2) facing
+x, which shows four cells ahead and two to each side. Cells outside the
world read as walls. Codes: 1 empty, 2 wall, 3 goal.

Directions are absolute: 0 east, 1 south, 2 west, 3 north (screen axes,
y grows downward). `left` and `right` rotate in place, `forward` advances
one world cell unless a wall blocks it.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from gridsynth.errors import GridSynthError, IllegalActionError
from gridsynth.state import GridState

EMPTY, WALL, GOAL = 1, 2, 3
MAZE_CELLS = 6
VIEW = 5
ACTIONS = ("left", "right", "forward")

# Heading vectors indexed by direction; right-hand vector is (-ay, ax).
DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))


def carve_maze(cells: int, rng: random.Random) -> list[list[int]]:
    """Recursive-backtracker carving on a (2*cells+1)^2 wall grid."""
    size = 2 * cells + 1
    grid = [[WALL] * size for _ in range(size)]
    start = (rng.randrange(cells), rng.randrange(cells))
    grid[2 * start[1] + 1][2 * start[0] + 1] = EMPTY
    seen = {start}
    stack = [start]
    while stack:
        cx, cy = stack[-1]
        nbrs = [
            (cx + dx, cy + dy)
            for dx, dy in DIRS
            if 0 <= cx + dx < cells and 0 <= cy + dy < cells and (cx + dx, cy + dy) not in seen
        ]
        if not nbrs:
            stack.pop()
            continue
        nx, ny = rng.choice(nbrs)
        grid[cy + ny + 1][cx + nx + 1] = EMPTY
        grid[2 * ny + 1][2 * nx + 1] = EMPTY
        seen.add((nx, ny))
        stack.append((nx, ny))
    return grid


def verify_perfect(grid: list[list[int]], cells: int) -> None:
    """Union-find check: carved passages form a spanning tree of the cells."""
    parent = list(range(cells * cells))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    edges = 0
    for cy in range(cells):
        for cx in range(cells):
            for dx, dy in ((1, 0), (0, 1)):
                nx, ny = cx + dx, cy + dy
                if nx >= cells or ny >= cells:
                    continue
                if grid[cy + ny + 1][cx + nx + 1] != EMPTY:
                    continue
                edges += 1
                a, b = find(cy * cells + cx), find(ny * cells + nx)
                if a == b:
                    raise GridSynthError("maze carving produced a cycle")
                parent[a] = b
    if edges != cells * cells - 1:
        raise GridSynthError("maze carving left disconnected cells")


@dataclass
class MazeEnv:
    """Single-agent perfect-maze world with rotation and forward movement."""

    env_tag = "maze"
    cells: int = MAZE_CELLS
    grid: tuple[tuple[int, ...], ...] = ()
    pos: tuple[int, int] = (1, 1)
    direction: int = 0
    goal: tuple[int, int] = (1, 1)
    done: bool = False
    _dist: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return 2 * self.cells + 1

    def reset(self, layout_seed: int, dynamics_seed: int = 0) -> GridState:
        del dynamics_seed  # the maze has no stochastic dynamics
        rng = random.Random(layout_seed)
        raw = carve_maze(self.cells, rng)
        verify_perfect(raw, self.cells)
        spots = [(2 * cx + 1, 2 * cy + 1) for cy in range(self.cells) for cx in range(self.cells)]
        start, goal = rng.sample(spots, 2)
        raw[goal[1]][goal[0]] = GOAL
        self.grid = tuple(tuple(row) for row in raw)
        self.pos = start
        self.goal = goal
        self.direction = rng.randrange(4)
        self.done = False
        self._dist = self._distances()
        return self.observe()

    def cell(self, x: int, y: int) -> int:
        if 0 <= x < self.size and 0 <= y < self.size:
            return self.grid[y][x]
        return WALL

    def observe(self) -> GridState:
        ax, ay = DIRS[self.direction]
        rx, ry = -ay, ax
        px, py = self.pos
        rows = []
        for vy in range(VIEW):
            side = vy - 2
            rows.append(
                [self.cell(px + ax * vx + rx * side, py + ay * vx + ry * side) for vx in range(VIEW)]
            )
        return GridState.from_rows(rows, direction=self.direction)

    def step(self, action: str) -> tuple[GridState, bool]:
        if action not in ACTIONS:
            raise IllegalActionError(f"maze action must be one of {ACTIONS}, got {action!r}")
        if action == "left":
            self.direction = (self.direction - 1) % 4
        elif action == "right":
            self.direction = (self.direction + 1) % 4
        else:
            ax, ay = DIRS[self.direction]
            nx, ny = self.pos[0] + ax, self.pos[1] + ay
            if self.cell(nx, ny) != WALL:
                self.pos = (nx, ny)
        self.done = self.pos == self.goal
        return self.observe(), self.done

    def _distances(self) -> dict:
        """BFS distance to the goal for every floor cell."""
        dist = {self.goal: 0}
        queue = deque([self.goal])
        while queue:
            x, y = queue.popleft()
            for dx, dy in DIRS:
                n = (x + dx, y + dy)
                if n not in dist and self.cell(*n) != WALL:
                    dist[n] = dist[(x, y)] + 1
                    queue.append(n)
        return dist

    def oracle_action(self) -> str:
        """Shortest-path policy: rotate toward the next cell on a geodesic.

        The heuristic depends only on the agent's position, so repeated
        rotations always converge on `forward` and the policy can never
        livelock the way a turn-by-turn wall follower can at junctions.
        """
        if self.pos == self.goal:
            return "forward"
        best = None
        for i, (dx, dy) in enumerate(DIRS):
            n = (self.pos[0] + dx, self.pos[1] + dy)
            d = self._dist.get(n)
            if d is not None and (best is None or d < best[0]):
                best = (d, i)
        if best is None:
            return "forward"
        delta = (best[1] - self.direction) % 4
        if delta == 0:
            return "forward"
        if delta == 3:
            return "left"
        return "right"
