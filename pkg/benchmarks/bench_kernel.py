"""Benchmark the compiled bytecode kernel against the pure-Python fallback.

Runs a few representative programs over a batch of real observations and
reports single-state executions per second for each backend, with the tree
interpreter as the reference point.

Usage: python3 benchmarks/bench_kernel.py [--n 20000] [--env maze]
"""

import argparse
import random
import time

import numpy as np

from gridsynth.envs import env_spec, make_env
from gridsynth.interp import exec_program
from gridsynth.kernel import compile_term, pykernel
from gridsynth.primitives import primitive_table
from gridsynth.sexpr import parse_program

try:
    from gridsynth.kernel import _ckernel
except ImportError:
    _ckernel = None

PROGRAMS = {
    "maze": [
        ("wall-check", "(λ(x) (if (eq-obj? wall-obj (get x 1 0)) left-action forward-action))"),
        (
            "turn-logic",
            "(λ(x) (λ(y) (if (eq-direction? y direction-2)"
            " (if (eq-obj? wall-obj (get x 1 2)) right-action forward-action)"
            " left-action)))",
        ),
    ],
    "asterix": [
        ("scan", "(λ(m) (if (eq-obj? enemy-obj (get m 4 5)) up-action no-op-action))"),
    ],
    "spaceinvaders": [
        ("align", "(λ(m) (if (eq-obj? alien-obj (get m 5 1)) fire-action left-action))"),
    ],
}


def collect_states(env_tag, count, seed):
    rng = random.Random(seed)
    env = make_env(env_tag)
    actions = env_spec(env_tag).actions
    states = []
    while len(states) < count:
        env.reset(rng.randrange(1 << 30), rng.randrange(1 << 30))
        for _ in range(12):
            states.append(env.observe())
            if len(states) >= count or env.done:
                break
            env.step(rng.choice(actions))
    return states[:count]


def bench_backend(impl, compiled, grids, dirs, width, height, n):
    start = time.perf_counter()
    for i in range(n):
        j = i % len(grids)
        impl.execute(compiled.code, grids[j], width, height, dirs[j])
    return n / (time.perf_counter() - start)


def bench_interp(term, states, prims, n):
    start = time.perf_counter()
    for i in range(n):
        exec_program(term, states[i % len(states)], prims)
    return n / (time.perf_counter() - start)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000, help="executions per backend")
    ap.add_argument("--env", choices=tuple(PROGRAMS), default=None,
                    help="benchmark one environment only")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    env_tags = [args.env] if args.env else list(PROGRAMS)
    backends = [("python", pykernel)] + ([("c", _ckernel)] if _ckernel else [])
    if _ckernel is None:
        print("note: compiled extension unavailable, benchmarking fallback only")
    for env_tag in env_tags:
        prims = primitive_table(env_tag)
        states = collect_states(env_tag, 64, args.seed)
        width, height = states[0].width, states[0].height
        grids = [np.asarray(s.flat(), dtype=np.int64) for s in states]
        dirs = [s.direction if s.direction is not None else 0 for s in states]
        for name, text in PROGRAMS[env_tag]:
            term = parse_program(text, prims)
            compiled = compile_term(term, prims)
            interp_rate = bench_interp(term, states, prims, max(args.n // 10, 1))
            print(f"{env_tag}/{name}: interp {interp_rate:,.0f}/s")
            base = None
            for bname, impl in backends:
                rate = bench_backend(impl, compiled, grids, dirs, width, height, args.n)
                line = (
                    f"{env_tag}/{name}: kernel[{bname}] {rate:,.0f}/s"
                    f" ({rate / interp_rate:.1f}x interp)"
                )
                if base is not None:
                    line += f" ({rate / base:.1f}x python kernel)"
                else:
                    base = rate
                print(line)


if __name__ == "__main__":
    main()
