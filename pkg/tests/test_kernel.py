"""Backend selection and interp/kernel equivalence fuzzing.

The bytecode kernel is the semantics-preserving fast path; both backends
(compiled and pure Python) must agree with the reference interpreter on
every program they accept, including the error-to-(-1) mapping.
"""

import os
import random
import subprocess
import sys

import numpy as np
import pytest

from conftest import maze_state
from gridsynth.envs import env_spec, make_env
from gridsynth.errors import EvalError, GridSynthError
from gridsynth.grammar import SampleConfig, sample_program, uniform_grammar
from gridsynth.interp import exec_program
from gridsynth.kernel import BACKEND, compile_term, KernelUnsupportedError
from gridsynth.kernel import pykernel
from gridsynth.primitives import primitive_table
from gridsynth.sexpr import parse_program

try:
    from gridsynth.kernel import _ckernel
except ImportError:
    _ckernel = None

BACKENDS = [pykernel] + ([_ckernel] if _ckernel is not None else [])


class TestBackendSelection:
    def test_backend_name_matches_availability(self):
        if _ckernel is not None:
            assert BACKEND == "c"
        else:
            assert BACKEND == "python"

    def test_env_override_forces_python(self):
        env = dict(os.environ, GRIDSYNTH_KERNEL="python")
        out = subprocess.run(
            [sys.executable, "-c", "import gridsynth.kernel as k; print(k.BACKEND)"],
            capture_output=True,
            text=True,
            env=env,
            check=True,
        )
        assert out.stdout.strip() == "python"

    def test_backend_names_distinct(self):
        names = {impl.BACKEND_NAME for impl in BACKENDS}
        assert "python" in names
        if _ckernel is not None:
            assert names == {"python", "c"}


def _interp_result(term, state, prims):
    try:
        return exec_program(term, state, prims)
    except EvalError:
        return None
    except GridSynthError:
        return None


def _kernel_result(impl, compiled, state, prims):
    grid = np.asarray(state.flat(), dtype=np.int64)
    direction = state.direction if state.direction is not None else 0
    aid = impl.execute(compiled.code, grid, state.width, state.height, direction)
    return None if aid < 0 else prims.action_words[aid]


def _env_states(env_tag, count, seed):
    rng = random.Random(seed)
    env = make_env(env_tag)
    actions = env_spec(env_tag).actions
    states = []
    while len(states) < count:
        env.reset(rng.randrange(1 << 30), rng.randrange(1 << 30))
        for _ in range(8):
            states.append(env.observe())
            if len(states) >= count or env.done:
                break
            env.step(rng.choice(actions))
    return states[:count]


class TestEquivalenceFuzz:
    @pytest.mark.parametrize("env_tag", ["maze", "asterix", "spaceinvaders"])
    def test_sampled_programs_agree(self, env_tag):
        prims = primitive_table(env_tag)
        grammar = uniform_grammar(prims)
        states = _env_states(env_tag, 15, seed=21)
        compiled_count = 0
        for k in range(120):
            term = sample_program(
                grammar, SampleConfig(d_max=6, request=prims.request, seed=4000 + k)
            )
            try:
                compiled = compile_term(term, prims)
            except KernelUnsupportedError:
                continue
            compiled_count += 1
            state = states[k % len(states)]
            want = _interp_result(term, state, prims)
            for impl in BACKENDS:
                assert _kernel_result(impl, compiled, state, prims) == want
        assert compiled_count >= 60

    def test_oob_get_maps_to_minus_one(self):
        prims = primitive_table("maze")
        term = parse_program(
            "(λ(x) (if (eq-obj? wall-obj (get x 5 5)) left-action forward-action))",
            prims,
        )
        compiled = compile_term(term, prims)
        state = maze_state()
        assert _interp_result(term, state, prims) is None
        for impl in BACKENDS:
            assert _kernel_result(impl, compiled, state, prims) is None

    def test_direction_program_uses_direction(self):
        prims = primitive_table("maze")
        term = parse_program(
            "(λ(x) (λ(y) (if (eq-direction? y direction-2) left-action forward-action)))",
            prims,
        )
        compiled = compile_term(term, prims)
        assert compiled.needs_direction
        for d, want in [(2, "left"), (0, "forward")]:
            state = maze_state(direction=d)
            assert _interp_result(term, state, prims) == want
            for impl in BACKENDS:
                assert _kernel_result(impl, compiled, state, prims) == want


class TestCheckTrajectory:
    def test_matches_manual_prefix_count(self):
        prims = primitive_table("maze")
        grammar = uniform_grammar(prims)
        states = _env_states("maze", 6, seed=9)
        actions = ["left", "forward", "left", "right", "forward", "left"]
        act_ids = np.asarray(
            [prims.action_words.index(a) for a in actions], dtype=np.int64
        )
        grids = np.stack([np.asarray(s.flat(), dtype=np.int64) for s in states])
        dirs = np.asarray([s.direction for s in states], dtype=np.int64)
        checked = 0
        for k in range(60):
            term = sample_program(
                grammar, SampleConfig(d_max=5, request=prims.request, seed=7000 + k)
            )
            try:
                compiled = compile_term(term, prims)
            except KernelUnsupportedError:
                continue
            manual = 0
            for s, a in zip(states, actions):
                if _interp_result(term, s, prims) != a:
                    break
                manual += 1
            for impl in BACKENDS:
                got = impl.check_trajectory(
                    compiled.code, grids, dirs, act_ids, 5, 5
                )
                assert got == manual
            checked += 1
        assert checked >= 30
