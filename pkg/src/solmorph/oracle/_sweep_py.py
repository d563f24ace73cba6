"""Pure-Python sweep kernel; mirrors _sweep.pyx instruction for instruction.

Selected by solmorph.oracle.sweep when the compiled extension is absent (or
SOLMORPH_PURE is set). Semantics must stay identical to the Cython kernel;
the benchmark and the consistency tests compare the two directly.
"""

from __future__ import annotations

import numpy as np

from .program import (
    K_ADD,
    K_AND,
    K_CONST_BOOL,
    K_CONST_INT,
    K_DIV,
    K_EQ,
    K_GE,
    K_GT,
    K_LE,
    K_LT,
    K_MUL,
    K_NE,
    K_NEG,
    K_NOT,
    K_OR,
    K_SUB,
    K_VAR,
    TAG_BOOL,
    TAG_DIV_BY_ZERO,
    TAG_INT,
    TAG_OVERFLOW,
    TAG_TYPE_ERROR,
)

_ERR_TAGS = (TAG_DIV_BY_ZERO, TAG_OVERFLOW, TAG_TYPE_ERROR)


def run_sweep(kinds, args, lefts, rights, root, n_vars, width, checked):
    """Evaluate the program for every assignment of n_vars width-bit values.

    Returns an int64 array of encoded (tag << 32 | value) results, indexed
    by the packed assignment (variable i occupies bits [i*width, (i+1)*width)).
    """
    kinds = [int(k) for k in kinds]
    args = [int(a) for a in args]
    lefts = [int(x) for x in lefts]
    rights = [int(x) for x in rights]
    total = 1 << (width * n_vars)
    mask = (1 << width) - 1
    modulus = 1 << width
    out = np.empty(total, dtype=np.int64)
    values = [0] * max(n_vars, 1)

    def eval_node(node):
        kind = kinds[node]
        if kind == K_CONST_INT:
            return TAG_INT, args[node]
        if kind == K_CONST_BOOL:
            return TAG_BOOL, args[node]
        if kind == K_VAR:
            return TAG_INT, values[args[node]]
        if kind == K_NOT:
            tag, v = eval_node(lefts[node])
            if tag in _ERR_TAGS:
                return tag, 0
            if tag != TAG_BOOL:
                return TAG_TYPE_ERROR, 0
            return TAG_BOOL, 1 - v
        if kind == K_NEG:
            tag, v = eval_node(lefts[node])
            if tag in _ERR_TAGS:
                return tag, 0
            if tag != TAG_INT:
                return TAG_TYPE_ERROR, 0
            if checked:
                return (TAG_INT, 0) if v == 0 else (TAG_OVERFLOW, 0)
            return TAG_INT, (modulus - v) & mask
        if kind == K_AND or kind == K_OR:
            tag, v = eval_node(lefts[node])
            if tag in _ERR_TAGS:
                return tag, 0
            if tag != TAG_BOOL:
                return TAG_TYPE_ERROR, 0
            if kind == K_AND and v == 0:
                return TAG_BOOL, 0
            if kind == K_OR and v == 1:
                return TAG_BOOL, 1
            tag, v = eval_node(rights[node])
            if tag in _ERR_TAGS:
                return tag, 0
            if tag != TAG_BOOL:
                return TAG_TYPE_ERROR, 0
            return TAG_BOOL, v

        ltag, lv = eval_node(lefts[node])
        if ltag in _ERR_TAGS:
            return ltag, 0
        rtag, rv = eval_node(rights[node])
        if rtag in _ERR_TAGS:
            return rtag, 0

        if kind == K_EQ or kind == K_NE:
            if ltag != rtag:
                return TAG_TYPE_ERROR, 0
            same = 1 if lv == rv else 0
            return TAG_BOOL, same if kind == K_EQ else 1 - same
        if ltag != TAG_INT or rtag != TAG_INT:
            return TAG_TYPE_ERROR, 0
        if kind == K_LT:
            return TAG_BOOL, 1 if lv < rv else 0
        if kind == K_GT:
            return TAG_BOOL, 1 if lv > rv else 0
        if kind == K_LE:
            return TAG_BOOL, 1 if lv <= rv else 0
        if kind == K_GE:
            return TAG_BOOL, 1 if lv >= rv else 0
        if kind == K_DIV:
            if rv == 0:
                return TAG_DIV_BY_ZERO, 0
            return TAG_INT, lv // rv
        if kind == K_ADD:
            raw = lv + rv
        elif kind == K_SUB:
            raw = lv - rv
        elif kind == K_MUL:
            raw = lv * rv
        else:
            return TAG_TYPE_ERROR, 0
        if checked and not 0 <= raw < modulus:
            return TAG_OVERFLOW, 0
        return TAG_INT, raw & mask

    for a in range(total):
        packed = a
        for i in range(n_vars):
            values[i] = packed & mask
            packed >>= width
        tag, v = eval_node(root)
        out[a] = (tag << 32) | v
    return out
