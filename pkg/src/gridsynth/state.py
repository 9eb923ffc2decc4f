"""Observed grid states: the `map` values DSL programs consume."""
from __future__ import annotations

from dataclasses import dataclass

from gridsynth.errors import MultiDigitCodeError


@dataclass(frozen=True)
class GridState:
    """An egocentric observation grid plus optional facing direction.

    `rows` is indexed rows[y][x] with y increasing downward; cell values are
    small integer object codes. `direction` is set for environments whose
    programs take a direction argument (maze) and None otherwise.
    """

    rows: tuple[tuple[int, ...], ...]
    direction: int | None = None

    @property
    def height(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def cell(self, x: int, y: int) -> int:
        return self.rows[y][x]

    def flat(self) -> list[int]:
        return [code for row in self.rows for code in row]

    def digits(self) -> str:
        """Row-major digit string; rejects codes that need more than one digit."""
        out = []
        for row in self.rows:
            for code in row:
                if not 0 <= code <= 9:
                    raise MultiDigitCodeError(
                        f"cell code {code} does not fit a single digit"
                    )
                out.append(str(code))
        return "".join(out)

    @staticmethod
    def from_rows(rows, direction: int | None = None) -> "GridState":
        return GridState(tuple(tuple(int(c) for c in r) for r in rows), direction)

    @staticmethod
    def from_flat(flat, width: int, direction: int | None = None) -> "GridState":
        flat = list(flat)
        if width <= 0 or len(flat) % width != 0:
            raise ValueError(f"flat length {len(flat)} not divisible by width {width}")
        rows = [flat[i : i + width] for i in range(0, len(flat), width)]
        return GridState.from_rows(rows, direction)
