"""Curriculum driver: iterate sample / refit / solve / compress over growing L.

Each iteration runs five stages in order, persisting every stage's artifact
before the next begins:

  1. sample a fresh random-program corpus from the current grammar
  2. refit the grammar on the accumulated solved programs
  3. solve the oracle task set at the current window length L
  4. compress the accumulated solved programs into the library
  5. emit the iteration report

The run directory holds one subdirectory per iteration plus a top-level
run.json (config echo and history) and eval.csv.  solved.json, library.json
and eval.csv contain no wall-clock times, so reruns with identical seeds are
byte-identical regardless of --jobs.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from gridsynth.data import (
    RolloutParams,
    Task,
    TaskSet,
    collect_oracle_rollouts,
    collect_program_rollouts,
    default_params,
    imitates,
    save_task_set,
    slice_tasks,
)
from gridsynth.errors import GridSynthError
from gridsynth.grammar import refit, save_grammar, uniform_grammar
from gridsynth.lang import Term
from gridsynth.library import compress, expand, library_to_json, save_library
from gridsynth.primitives import primitive_table
from gridsynth.search import SearchBudget, solve_many
from gridsynth.sexpr import parse_program, print_program

SOLVED_SCHEMA = "gridsynth-solved-v1"
CORPUS_SCHEMA = "gridsynth-corpus-v1"
REPORT_SCHEMA = "gridsynth-report-v1"
RUN_SCHEMA = "gridsynth-run-v1"
EVAL_HEADER = "L,accuracy,n_tasks"

ADVANCE_RATE = 0.10
MAX_FAILS = 2

_ORACLE_SEED = 11
_EVAL_SEED = 777
_CORPUS_SEED = 1000


@dataclass(frozen=True)
class CurriculumState:
    """Where the curriculum stands before the next iteration."""

    L: int = 3
    fails: int = 0
    iteration: int = 0
    stopped: bool = False


def advance(state: CurriculumState, solve_rate: float) -> CurriculumState:
    """Raise L when at least 10% of tasks were solved; stop after two
    consecutive failures to raise.  L grows by at most one per call."""
    nxt = state.iteration + 1
    if solve_rate >= ADVANCE_RATE:
        return CurriculumState(L=state.L + 1, fails=0, iteration=nxt)
    fails = state.fails + 1
    return CurriculumState(
        L=state.L, fails=fails, iteration=nxt, stopped=fails >= MAX_FAILS
    )


@dataclass(frozen=True)
class RunConfig:
    """Knobs for one curriculum run; echoed verbatim into run.json."""

    env_tag: str
    t_min: int
    t_max: int
    d_max: int
    programs_per_task: int
    search_timeout_sec: float
    top_k: int
    corpus_size: int
    oracle_episodes: int
    eval_episodes: int
    max_iterations: int
    l_start: int
    seed: int
    jobs: int
    out_dir: str


_ENV_DEFAULTS = {
    "maze": dict(t_min=5, t_max=60, d_max=6, programs_per_task=100),
    "asterix": dict(t_min=3, t_max=20, d_max=20, programs_per_task=500),
    "spaceinvaders": dict(t_min=3, t_max=20, d_max=20, programs_per_task=500),
}

_PROFILES = {
    "desk": dict(
        search_timeout_sec=30.0,
        corpus_size=2000,
        oracle_episodes=12,
        eval_episodes=6,
        max_iterations=12,
    ),
    "paper": dict(
        search_timeout_sec=720.0,
        corpus_size=50000,
        oracle_episodes=100,
        eval_episodes=25,
        max_iterations=40,
    ),
}


def default_config(
    env_tag: str,
    profile: str = "desk",
    out_dir: str = "runs/run",
    seed: int = 0,
    jobs: int = 1,
    **overrides,
) -> RunConfig:
    if env_tag not in _ENV_DEFAULTS:
        raise GridSynthError(f"unknown env tag {env_tag!r}")
    if profile not in _PROFILES:
        raise GridSynthError(f"unknown profile {profile!r} (desk, paper)")
    fields = dict(
        env_tag=env_tag,
        top_k=5,
        l_start=3,
        seed=seed,
        jobs=jobs,
        out_dir=out_dir,
    )
    fields.update(_ENV_DEFAULTS[env_tag])
    fields.update(_PROFILES[profile])
    fields.update(overrides)
    return RunConfig(**fields)


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _solved_doc(env_tag: str, L: int, tasks: TaskSet, results) -> dict:
    entries = []
    for task in tasks.tasks:
        res = results[task.task_id]
        if not res.programs:
            continue
        entries.append(
            {
                "taskId": task.task_id,
                "programs": [print_program(p) for p in res.programs],
                "dlNats": list(res.dl_nats),
                "candidatesTried": res.candidates_tried,
                "wallTimeSec": None,
            }
        )
    return {"schema": SOLVED_SCHEMA, "envTag": env_tag, "L": L, "solved": entries}


def _acc_key(L: int, task_id: str) -> str:
    return f"L{L}:{task_id}"


def run_curriculum(config: RunConfig) -> dict:
    """Execute the curriculum; returns the run.json document."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prims = primitive_table(config.env_tag)
    params = RolloutParams(
        t_min=config.t_min,
        t_max=config.t_max,
        warmup_max=default_params(config.env_tag).warmup_max,
    )
    grammar = uniform_grammar(prims)
    library: tuple = ()
    oracle = collect_oracle_rollouts(
        config.env_tag, config.oracle_episodes, seed=config.seed + _ORACLE_SEED
    )
    state = CurriculumState(L=config.l_start)
    accumulated: dict[str, tuple[Task, Term]] = {}
    history: list[dict] = []
    stop_reason = "max-iterations"
    budget = SearchBudget(
        timeout_sec=config.search_timeout_sec,
        top_k=config.top_k,
        max_candidates=config.programs_per_task,
    )

    while state.iteration < config.max_iterations:
        k = state.iteration
        t0 = time.monotonic()
        iter_dir = out / f"iter-{k}"
        iter_dir.mkdir(exist_ok=True)

        # Stage 1: fresh random-program corpus from the current grammar.
        corpus = collect_program_rollouts(
            grammar,
            config.env_tag,
            config.corpus_size,
            params,
            seed=config.seed + _CORPUS_SEED + k,
            d_max=config.d_max,
            library=library,
        )
        _write_json(
            iter_dir / "corpus.json",
            {
                "schema": CORPUS_SCHEMA,
                "envTag": config.env_tag,
                "count": len(corpus),
                "programs": [t.provenance for t in corpus],
                "lengths": [len(t.steps) for t in corpus],
            },
        )

        # Stage 2: refit on everything solved so far (uniform when empty).
        solved_terms = [term for _, term in _ordered(accumulated).values()]
        grammar = refit(grammar, solved_terms)
        save_grammar(grammar, iter_dir / "grammar.json")

        # Stage 3: solve the oracle task set at the current L.
        tasks = slice_tasks(oracle, state.L)
        results = solve_many(
            grammar,
            tasks.tasks,
            budget,
            library=library,
            max_depth=config.d_max,
            jobs=config.jobs,
        )
        _write_json(iter_dir / "solved.json", _solved_doc(config.env_tag, state.L, tasks, results))
        save_task_set(tasks, iter_dir / "taskset.json")
        n_solved = sum(1 for r in results.values() if r.programs)
        rate = n_solved / tasks.n if tasks.n else 0.0
        for task in tasks.tasks:
            res = results[task.task_id]
            if res.programs:
                accumulated[_acc_key(state.L, task.task_id)] = (task, res.programs[0])

        # Stage 4: compress the accumulated corpus into the library.
        ordered = _ordered(accumulated)
        res = compress(
            {key: term for key, (_, term) in ordered.items()},
            grammar,
            library=library,
            max_arity=3,
        )
        grammar, library = res.grammar, res.library
        for key, new_term in res.rewritten.items():
            accumulated[key] = (accumulated[key][0], new_term)
        save_library(library, iter_dir / "library.json")

        # Stage 5: report.
        report = {
            "schema": REPORT_SCHEMA,
            "iteration": k,
            "L": state.L,
            "nTasks": tasks.n,
            "nSolved": n_solved,
            "solveRate": rate,
            "corpusSampled": len(corpus),
            "dlBefore": res.dl_before,
            "dlAfter": res.dl_after,
            "newAbstractions": [a.name for a in res.new_abstractions],
            "librarySize": len(library),
            "rewritten": [
                {"key": key, "taskId": task.task_id, "program": print_program(term)}
                for key, (task, term) in _ordered(accumulated).items()
            ],
        }
        _write_json(iter_dir / "report.json", report)

        nxt = advance(state, rate)
        history.append(
            {
                "iteration": k,
                "L": state.L,
                "solveRate": rate,
                "nTasks": tasks.n,
                "nSolved": n_solved,
                "newAbstractions": [a.name for a in res.new_abstractions],
                "librarySize": len(library),
                "dlBefore": res.dl_before,
                "dlAfter": res.dl_after,
                "advanced": nxt.L > state.L,
                "wallTimeSec": time.monotonic() - t0,
            }
        )
        state = nxt
        _write_run_json(out, config, history, state, "running")
        if state.stopped:
            stop_reason = "two-fails"
            break

    doc = _write_run_json(out, config, history, state, stop_reason)
    eval_run(out, seed=config.seed + _EVAL_SEED, episodes=config.eval_episodes)
    return doc


def _ordered(accumulated: dict) -> dict:
    return dict(sorted(accumulated.items()))


def _write_run_json(out: Path, config, history, state, stop_reason) -> dict:
    doc = {
        "schema": RUN_SCHEMA,
        "config": asdict(config),
        "history": history,
        "finalL": state.L,
        "stopped": state.stopped,
        "stopReason": stop_reason,
    }
    _write_json(out / "run.json", doc)
    return doc


def _load_run(run_dir: Path) -> dict:
    path = run_dir / "run.json"
    if not path.exists():
        raise GridSynthError(f"no run.json under {run_dir}")
    doc = json.loads(path.read_text())
    if doc.get("schema") != RUN_SCHEMA:
        raise GridSynthError(f"unexpected run schema {doc.get('schema')!r}")
    return doc


def final_iteration_dir(run_dir: Path) -> Path:
    doc = _load_run(run_dir)
    if not doc["history"]:
        raise GridSynthError("run has no completed iterations")
    return run_dir / f"iter-{doc['history'][-1]['iteration']}"


def eval_run(run_dir, seed: int | None = None, episodes: int | None = None) -> Path:
    """Score the run's solved programs on freshly seeded oracle data.

    One row per curriculum L: the fraction of fresh length-L windows imitated
    by at least one program from the final rewritten corpus.  Writes eval.csv
    into the run directory and returns its path.
    """
    from gridsynth.library import load_library

    run_dir = Path(run_dir)
    doc = _load_run(run_dir)
    config = doc["config"]
    if seed is None:
        seed = config["seed"] + _EVAL_SEED
    if episodes is None:
        episodes = config["eval_episodes"]
    last = final_iteration_dir(run_dir)
    prims = primitive_table(config["env_tag"])
    library = load_library(last / "library.json", prims)
    defs = {a.name: a.body for a in library}
    report = json.loads((last / "report.json").read_text())
    texts = sorted({entry["program"] for entry in report["rewritten"]})
    programs = [
        expand(parse_program(text, prims, extra=defs), library) for text in texts
    ]
    fresh = collect_oracle_rollouts(config["env_tag"], episodes, seed=seed)
    lengths = sorted({entry["L"] for entry in doc["history"]})
    lines = [EVAL_HEADER]
    for L in lengths:
        tasks = slice_tasks(fresh, L)
        hits = 0
        for task in tasks.tasks:
            if any(imitates(p, task, prims) for p in programs):
                hits += 1
        acc = hits / tasks.n if tasks.n else 0.0
        lines.append(f"{L},{acc:.6f},{tasks.n}")
    path = run_dir / "eval.csv"
    path.write_text("\n".join(lines) + "\n")
    return path
