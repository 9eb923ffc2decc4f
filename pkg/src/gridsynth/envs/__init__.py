"""Environment registry: deterministic simulators behind a tiny common API.

Every environment exposes `reset(layout_seed, dynamics_seed)`, `step(action)`
returning `(observation, done)`, `observe()`, `oracle_action()`, and a `done`
flag. Observations are `GridState` values whose codes match the environment's
primitive table, so oracle rollouts feed straight into program search.
"""
from __future__ import annotations

from dataclasses import dataclass

from gridsynth.errors import GridSynthError
from gridsynth.lang import Ty
from gridsynth.primitives import ENV_TAGS, primitive_table

from .asterix import AsterixEnv
from .maze import MazeEnv
from .spaceinvaders import SpaceInvadersEnv


@dataclass(frozen=True)
class EnvSpec:
    env_tag: str
    actions: tuple[str, ...]
    codes: tuple[tuple[int, str], ...]
    obs_shape: tuple[int, int]  # (height, width)
    request: Ty

    @property
    def code_table(self) -> dict:
        return dict(self.codes)


_ENV_CLASSES = {
    "maze": MazeEnv,
    "asterix": AsterixEnv,
    "spaceinvaders": SpaceInvadersEnv,
}

_CODES = {
    "maze": ((1, "empty"), (2, "wall"), (3, "goal")),
    "asterix": ((0, "empty"), (1, "player"), (2, "gold"), (3, "enemy"), (4, "trail")),
    "spaceinvaders": (
        (0, "empty"),
        (1, "cannon"),
        (2, "alien"),
        (3, "friendly-bullet"),
        (4, "enemy-bullet"),
    ),
}

_SHAPES = {"maze": (5, 5), "asterix": (10, 10), "spaceinvaders": (10, 10)}


def env_spec(env_tag: str) -> EnvSpec:
    if env_tag not in _ENV_CLASSES:
        raise GridSynthError(f"unknown environment {env_tag!r}; expected one of {ENV_TAGS}")
    prims = primitive_table(env_tag)
    return EnvSpec(
        env_tag=env_tag,
        actions=prims.action_words,
        codes=_CODES[env_tag],
        obs_shape=_SHAPES[env_tag],
        request=prims.request,
    )


def make_env(env_tag: str):
    if env_tag not in _ENV_CLASSES:
        raise GridSynthError(f"unknown environment {env_tag!r}; expected one of {ENV_TAGS}")
    return _ENV_CLASSES[env_tag]()


__all__ = [
    "AsterixEnv",
    "EnvSpec",
    "MazeEnv",
    "SpaceInvadersEnv",
    "env_spec",
    "make_env",
]
