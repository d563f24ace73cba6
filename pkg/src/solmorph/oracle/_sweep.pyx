# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled sweep kernel: evaluates a flattened expression program over the
whole width-bit assignment domain. Must stay semantically identical to
_sweep_py.run_sweep; the tests compare the two on random programs."""

import numpy as np

# node kinds (keep in sync with program.py)
DEF K_CONST_INT = 0
DEF K_CONST_BOOL = 1
DEF K_VAR = 2
DEF K_ADD = 3
DEF K_SUB = 4
DEF K_MUL = 5
DEF K_DIV = 6
DEF K_EQ = 7
DEF K_NE = 8
DEF K_LT = 9
DEF K_GT = 10
DEF K_LE = 11
DEF K_GE = 12
DEF K_AND = 13
DEF K_OR = 14
DEF K_NOT = 15
DEF K_NEG = 16

DEF TAG_INT = 0
DEF TAG_BOOL = 1
DEF TAG_DIV_BY_ZERO = 2
DEF TAG_OVERFLOW = 3
DEF TAG_TYPE_ERROR = 4


cdef long long _enc(long long tag, long long value) noexcept nogil:
    return (tag << 32) | value


cdef long long _eval(int node,
                     const int[:] kinds, const long long[:] args,
                     const int[:] lefts, const int[:] rights,
                     long long* values, long long modulus,
                     bint checked) noexcept nogil:
    cdef int kind = kinds[node]
    cdef long long enc_l, enc_r, ltag, lv, rtag, rv, raw

    if kind == K_CONST_INT:
        return _enc(TAG_INT, args[node])
    if kind == K_CONST_BOOL:
        return _enc(TAG_BOOL, args[node])
    if kind == K_VAR:
        return _enc(TAG_INT, values[args[node]])

    if kind == K_NOT or kind == K_NEG:
        enc_l = _eval(lefts[node], kinds, args, lefts, rights, values, modulus, checked)
        ltag = enc_l >> 32
        lv = enc_l & <long long>0xFFFFFFFFLL
        if ltag >= TAG_DIV_BY_ZERO:
            return _enc(ltag, 0)
        if kind == K_NOT:
            if ltag != TAG_BOOL:
                return _enc(TAG_TYPE_ERROR, 0)
            return _enc(TAG_BOOL, 1 - lv)
        if ltag != TAG_INT:
            return _enc(TAG_TYPE_ERROR, 0)
        if checked:
            if lv == 0:
                return _enc(TAG_INT, 0)
            return _enc(TAG_OVERFLOW, 0)
        return _enc(TAG_INT, (modulus - lv) & (modulus - 1))

    if kind == K_AND or kind == K_OR:
        enc_l = _eval(lefts[node], kinds, args, lefts, rights, values, modulus, checked)
        ltag = enc_l >> 32
        lv = enc_l & <long long>0xFFFFFFFFLL
        if ltag >= TAG_DIV_BY_ZERO:
            return _enc(ltag, 0)
        if ltag != TAG_BOOL:
            return _enc(TAG_TYPE_ERROR, 0)
        if kind == K_AND and lv == 0:
            return _enc(TAG_BOOL, 0)
        if kind == K_OR and lv == 1:
            return _enc(TAG_BOOL, 1)
        enc_r = _eval(rights[node], kinds, args, lefts, rights, values, modulus, checked)
        rtag = enc_r >> 32
        rv = enc_r & <long long>0xFFFFFFFFLL
        if rtag >= TAG_DIV_BY_ZERO:
            return _enc(rtag, 0)
        if rtag != TAG_BOOL:
            return _enc(TAG_TYPE_ERROR, 0)
        return _enc(TAG_BOOL, rv)

    enc_l = _eval(lefts[node], kinds, args, lefts, rights, values, modulus, checked)
    ltag = enc_l >> 32
    lv = enc_l & <long long>0xFFFFFFFFLL
    if ltag >= TAG_DIV_BY_ZERO:
        return _enc(ltag, 0)
    enc_r = _eval(rights[node], kinds, args, lefts, rights, values, modulus, checked)
    rtag = enc_r >> 32
    rv = enc_r & <long long>0xFFFFFFFFLL
    if rtag >= TAG_DIV_BY_ZERO:
        return _enc(rtag, 0)

    if kind == K_EQ or kind == K_NE:
        if ltag != rtag:
            return _enc(TAG_TYPE_ERROR, 0)
        if kind == K_EQ:
            return _enc(TAG_BOOL, 1 if lv == rv else 0)
        return _enc(TAG_BOOL, 1 if lv != rv else 0)

    if ltag != TAG_INT or rtag != TAG_INT:
        return _enc(TAG_TYPE_ERROR, 0)

    if kind == K_LT:
        return _enc(TAG_BOOL, 1 if lv < rv else 0)
    if kind == K_GT:
        return _enc(TAG_BOOL, 1 if lv > rv else 0)
    if kind == K_LE:
        return _enc(TAG_BOOL, 1 if lv <= rv else 0)
    if kind == K_GE:
        return _enc(TAG_BOOL, 1 if lv >= rv else 0)
    if kind == K_DIV:
        if rv == 0:
            return _enc(TAG_DIV_BY_ZERO, 0)
        return _enc(TAG_INT, lv / rv)

    if kind == K_ADD:
        raw = lv + rv
    elif kind == K_SUB:
        raw = lv - rv
    elif kind == K_MUL:
        raw = lv * rv
    else:
        return _enc(TAG_TYPE_ERROR, 0)
    if checked and (raw < 0 or raw >= modulus):
        return _enc(TAG_OVERFLOW, 0)
    # two's-complement wrap; C '%' would keep the sign of a negative raw
    return _enc(TAG_INT, raw & (modulus - 1))


def run_sweep(kinds, args, lefts, rights, int root, int n_vars, int width,
              bint checked):
    """Mirror of _sweep_py.run_sweep, compiled."""
    cdef const int[:] kv = np.ascontiguousarray(kinds, dtype=np.int32)
    cdef const long long[:] av = np.ascontiguousarray(args, dtype=np.int64)
    cdef const int[:] lv = np.ascontiguousarray(lefts, dtype=np.int32)
    cdef const int[:] rv = np.ascontiguousarray(rights, dtype=np.int32)

    cdef long long total = <long long>1 << (width * n_vars)
    cdef long long mask = (<long long>1 << width) - 1
    cdef long long modulus = <long long>1 << width
    out = np.empty(total, dtype=np.int64)
    cdef long long[:] ov = out
    cdef long long values[16]
    cdef long long a, packed
    cdef int i

    if n_vars > 16:
        raise ValueError("too many free variables for the compiled kernel")

    with nogil:
        for a in range(total):
            packed = a
            for i in range(n_vars):
                values[i] = packed & mask
                packed >>= width
            ov[a] = _eval(root, kv, av, lv, rv, values, modulus, checked)
    return out
