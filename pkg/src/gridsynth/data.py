"""Imitation data: rollouts, sub-trajectory tasks, accuracy, text prompts.

Trajectories come either from the scripted oracle or from sampled programs
run inside a seeded environment. A trajectory is sliced into non-overlapping
length-L windows, each of which becomes one imitation task: find a program
whose action matches the recorded action on every state of the window.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gridsynth.envs import env_spec, make_env
from gridsynth.errors import EvalError, GridSynthError, UnknownTaskIdError
from gridsynth.grammar import Grammar, SampleConfig, sample_program
from gridsynth.interp import exec_program
from gridsynth.kernel import KernelUnsupportedError, compile_term, execute
from gridsynth.lang import Term, inline
from gridsynth.primitives import PrimTable, primitive_table
from gridsynth.sexpr import parse_program, print_program
from gridsynth.state import GridState

TASKSET_SCHEMA = "gridsynth-taskset-v1"
ROLLOUTS_SCHEMA = "gridsynth-rollouts-v1"
_SEED_RANGE = 1 << 62


@dataclass(frozen=True)
class RolloutParams:
    """Program-rollout length bounds plus the MinAtar oracle warmup cap."""

    t_min: int
    t_max: int
    warmup_max: int = 0


def default_params(env_tag: str) -> RolloutParams:
    if env_tag == "maze":
        return RolloutParams(t_min=5, t_max=60, warmup_max=0)
    return RolloutParams(t_min=3, t_max=20, warmup_max=20)


@dataclass(frozen=True)
class Trajectory:
    traj_id: str
    env_tag: str
    steps: tuple  # ((GridState, action word), ...)
    provenance: str  # "oracle" or the generating program text
    seeds: tuple  # (layout seed, dynamics seed)


@dataclass(frozen=True)
class Task:
    """One sub-trajectory: the unit the synthesizer tries to imitate."""

    task_id: str
    env_tag: str
    steps: tuple


@dataclass(frozen=True)
class TaskSet:
    env_tag: str
    L: int
    tasks: tuple

    @property
    def n(self) -> int:
        return len(self.tasks)

    def by_id(self, task_id: str) -> Task:
        for task in self.tasks:
            if task.task_id == task_id:
                return task
        raise UnknownTaskIdError(f"no task with id {task_id!r}")


def _defs(library) -> dict:
    if not library:
        return {}
    if isinstance(library, dict):
        return dict(library)
    return {a.name: a.body for a in library}


def _as_term(program, prims: PrimTable, library=None) -> Term:
    if isinstance(program, str):
        return parse_program(program, prims, extra=_defs(library))
    return program


class ProgramRunner:
    """Executes one program on observations: compiled kernel, interp fallback."""

    def __init__(self, term: Term, prims: PrimTable, library=None):
        defs = _defs(library)
        self.term = inline(term, defs) if defs else term
        self.prims = prims
        try:
            self.compiled = compile_term(self.term, prims)
        except KernelUnsupportedError:
            self.compiled = None

    def run(self, state: GridState) -> str | None:
        """Action word for one state, or None if evaluation fails."""
        if self.compiled is not None:
            grid = np.asarray(state.flat(), dtype=np.int64)
            direction = state.direction if state.direction is not None else 0
            aid = execute(self.compiled.code, grid, state.width, state.height, direction)
            return None if aid < 0 else self.prims.action_words[aid]
        try:
            return exec_program(self.term, state, self.prims)
        except EvalError:
            return None


def collect_oracle_rollouts(env_tag: str, count: int, seed: int, max_steps: int = 200):
    """Full oracle episodes, truncated at max_steps, one fresh env per episode."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        layout = rng.randrange(_SEED_RANGE)
        dynamics = rng.randrange(_SEED_RANGE)
        env = make_env(env_tag)
        obs = env.reset(layout, dynamics)
        steps = []
        for _ in range(max_steps):
            action = env.oracle_action()
            steps.append((obs, action))
            obs, done = env.step(action)
            if done:
                break
        out.append(Trajectory(f"oracle-{i:04d}", env_tag, tuple(steps), "oracle", (layout, dynamics)))
    return out


def collect_program_rollouts(
    grammar: Grammar,
    env_tag: str,
    count: int,
    params: RolloutParams,
    seed: int,
    d_max: int,
    library=None,
):
    """Rollouts whose actions come from sampled programs, states from the env.

    Each program runs for t ~ Uniform[t_min, t_max] steps after an optional
    oracle warmup of Uniform[0, warmup_max] steps. The episode ending or the
    program failing to evaluate truncates the trajectory; empty trajectories
    are dropped.
    """
    prims = primitive_table(env_tag)
    rng = random.Random(seed)
    out = []
    for i in range(count):
        term = sample_program(
            grammar, SampleConfig(d_max=d_max, request=prims.request, seed=rng.randrange(_SEED_RANGE))
        )
        t = rng.randint(params.t_min, params.t_max)
        layout = rng.randrange(_SEED_RANGE)
        dynamics = rng.randrange(_SEED_RANGE)
        env = make_env(env_tag)
        obs = env.reset(layout, dynamics)
        done = False
        if params.warmup_max > 0:
            for _ in range(rng.randint(0, params.warmup_max)):
                obs, done = env.step(env.oracle_action())
                if done:
                    break
        runner = ProgramRunner(term, prims, library)
        steps = []
        while not done and len(steps) < t:
            action = runner.run(obs)
            if action is None:
                break
            steps.append((obs, action))
            obs, done = env.step(action)
        if steps:
            out.append(
                Trajectory(f"prog-{i:05d}", env_tag, tuple(steps), print_program(term), (layout, dynamics))
            )
    return out


def slice_tasks(trajs, L: int) -> TaskSet:
    """Non-overlapping length-L windows; a tail shorter than L is dropped."""
    if L < 1:
        raise GridSynthError(f"slice length must be at least 1, got {L}")
    if not trajs:
        raise GridSynthError("cannot slice an empty trajectory list")
    env_tag = trajs[0].env_tag
    tasks = []
    for traj in trajs:
        if traj.env_tag != env_tag:
            raise GridSynthError("all trajectories in a slice must share one environment")
        for off in range(0, len(traj.steps) - L + 1, L):
            tasks.append(Task(f"{traj.traj_id}:{off:03d}", env_tag, traj.steps[off : off + L]))
    return TaskSet(env_tag, L, tuple(tasks))


def imitates(program, task: Task, prims: PrimTable | None = None, library=None) -> bool:
    """True iff the program reproduces every recorded action; errors are False."""
    prims = prims or primitive_table(task.env_tag)
    term = _as_term(program, prims, library)
    defs = _defs(library)
    if defs:
        term = inline(term, defs)
    for state, action in task.steps:
        try:
            if exec_program(term, state, prims) != action:
                return False
        except EvalError:
            return False
    return True


def accuracy(solutions: dict, tasks: TaskSet, library=None) -> float:
    """Fraction of tasks with at least one re-verified imitating program."""
    prims = primitive_table(tasks.env_tag)
    known = {t.task_id for t in tasks.tasks}
    unknown = set(solutions) - known
    if unknown:
        raise UnknownTaskIdError(f"solutions reference unknown tasks: {sorted(unknown)[:3]}")
    if not tasks.tasks:
        return 0.0
    hits = 0
    for task in tasks.tasks:
        if any(imitates(p, task, prims, library) for p in solutions.get(task.task_id, ())):
            hits += 1
    return hits / len(tasks.tasks)


def encode_prompt(task) -> str:
    """Digit-string encoding: grid digits, maze direction digit, action word."""
    segments = []
    for state, action in task.steps:
        digits = state.digits()
        if state.direction is not None:
            digits += str(state.direction)
        segments.append(f"{digits} {action}")
    return " ".join(segments)


def export_prompts(tasks: TaskSet, path) -> None:
    """One prompt per line; the conventional extension is .prompts.txt."""
    lines = [encode_prompt(task) for task in tasks.tasks]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _step_json(state: GridState, action: str) -> dict:
    step = {"grid": state.flat(), "action": action}
    if state.direction is not None:
        step["direction"] = state.direction
    return step


def _step_from_json(step: dict, width: int):
    state = GridState.from_flat(step["grid"], width, step.get("direction"))
    return state, step["action"]


def task_set_to_json(tasks: TaskSet) -> dict:
    return {
        "schema": TASKSET_SCHEMA,
        "envTag": tasks.env_tag,
        "L": tasks.L,
        "tasks": [
            {"id": t.task_id, "steps": [_step_json(s, a) for s, a in t.steps]} for t in tasks.tasks
        ],
    }


def task_set_from_json(doc: dict) -> TaskSet:
    if doc.get("schema") != TASKSET_SCHEMA:
        raise GridSynthError(f"unexpected task-set schema {doc.get('schema')!r}")
    env_tag = doc["envTag"]
    _, width = env_spec(env_tag).obs_shape
    tasks = tuple(
        Task(t["id"], env_tag, tuple(_step_from_json(s, width) for s in t["steps"]))
        for t in doc["tasks"]
    )
    return TaskSet(env_tag, doc["L"], tasks)


def save_task_set(tasks: TaskSet, path) -> None:
    Path(path).write_text(json.dumps(task_set_to_json(tasks), indent=2) + "\n", encoding="utf-8")


def load_task_set(path) -> TaskSet:
    return task_set_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def rollouts_to_json(trajs) -> dict:
    return {
        "schema": ROLLOUTS_SCHEMA,
        "envTag": trajs[0].env_tag if trajs else None,
        "rollouts": [
            {
                "id": t.traj_id,
                "provenance": t.provenance,
                "seeds": list(t.seeds),
                "steps": [_step_json(s, a) for s, a in t.steps],
            }
            for t in trajs
        ],
    }


def rollouts_from_json(doc: dict):
    if doc.get("schema") != ROLLOUTS_SCHEMA:
        raise GridSynthError(f"unexpected rollouts schema {doc.get('schema')!r}")
    env_tag = doc["envTag"]
    _, width = env_spec(env_tag).obs_shape
    return [
        Trajectory(
            r["id"],
            env_tag,
            tuple(_step_from_json(s, width) for s in r["steps"]),
            r["provenance"],
            tuple(r["seeds"]),
        )
        for r in doc["rollouts"]
    ]


def save_rollouts(trajs, path) -> None:
    Path(path).write_text(json.dumps(rollouts_to_json(trajs), indent=2) + "\n", encoding="utf-8")


def load_rollouts(path):
    return rollouts_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
