# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""C twin of pykernel; semantics must match it opcode for opcode."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "c"

DEF S_CONST = 1
DEF S_VAR_DIR = 2
DEF S_VAR_MAP = 3
DEF S_GET = 4
DEF S_EQ_OBJ = 5
DEF S_EQ_DIR = 6
DEF S_GGO = 7
DEF S_NOT = 8
DEF S_AND = 9
DEF S_OR = 10
DEF S_GETX = 11
DEF S_GETY = 12
DEF S_EQX = 13
DEF S_EQY = 14
DEF S_GTX = 15
DEF S_GTY = 16
DEF S_JF = 17
DEF S_JMP = 18
DEF S_RET = 19


cdef long long _run(const long long* code, const long long* grid,
                    long long width, long long height, long long direction) noexcept nogil:
    cdef long long stack[128]
    cdef long long sp = 0
    cdef long long pc = 0
    cdef long long op, arg, x, y
    while True:
        op = code[pc]
        arg = code[pc + 1]
        pc += 2
        if op == S_CONST:
            stack[sp] = arg
            sp += 1
        elif op == S_VAR_MAP:
            stack[sp] = 0
            sp += 1
        elif op == S_VAR_DIR:
            stack[sp] = direction
            sp += 1
        elif op == S_GET:
            sp -= 3
            x = stack[sp + 1]
            y = stack[sp + 2]
            if x < 0 or x >= width or y < 0 or y >= height:
                return -1
            stack[sp] = (grid[y * width + x] << 16) | (x << 8) | y
            sp += 1
        elif op == S_EQ_OBJ:
            sp -= 1
            stack[sp - 1] = 1 if (stack[sp] >> 16) == stack[sp - 1] else 0
        elif op == S_EQ_DIR or op == S_EQX or op == S_EQY:
            sp -= 1
            stack[sp - 1] = 1 if stack[sp - 1] == stack[sp] else 0
        elif op == S_GTX or op == S_GTY:
            sp -= 1
            stack[sp - 1] = 1 if stack[sp - 1] > stack[sp] else 0
        elif op == S_GGO:
            stack[sp - 1] = stack[sp - 1] >> 16
        elif op == S_NOT:
            stack[sp - 1] = 0 if stack[sp - 1] != 0 else 1
        elif op == S_AND:
            sp -= 1
            stack[sp - 1] = 1 if (stack[sp - 1] != 0 and stack[sp] != 0) else 0
        elif op == S_OR:
            sp -= 1
            stack[sp - 1] = 1 if (stack[sp - 1] != 0 or stack[sp] != 0) else 0
        elif op == S_GETX:
            stack[sp - 1] = (stack[sp - 1] >> 8) & 0xFF
        elif op == S_GETY:
            stack[sp - 1] = stack[sp - 1] & 0xFF
        elif op == S_JF:
            sp -= 1
            if stack[sp] == 0:
                pc = arg
        elif op == S_JMP:
            pc = arg
        elif op == S_RET:
            return stack[sp - 1]
        else:
            return -2


def execute(code, grid, long long width, long long height, long long direction):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] c = np.ascontiguousarray(code, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] g = np.ascontiguousarray(grid, dtype=np.int64)
    cdef long long result = _run(<const long long*> c.data, <const long long*> g.data,
                                 width, height, direction)
    if result == -2:
        raise ValueError("bad opcode")
    return result


def check_trajectory(code, grids, dirs, acts, long long width, long long height):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] c = np.ascontiguousarray(code, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] g = np.ascontiguousarray(grids, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] d = np.ascontiguousarray(dirs, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] a = np.ascontiguousarray(acts, dtype=np.int64)
    cdef long long n = a.shape[0]
    cdef long long stride = g.shape[1]
    cdef const long long* cp = <const long long*> c.data
    cdef const long long* gp = <const long long*> g.data
    cdef long long i, got
    for i in range(n):
        got = _run(cp, gp + i * stride, width, height, d[i])
        if got == -2:
            raise ValueError("bad opcode")
        if got != a[i]:
            return i
    return n
