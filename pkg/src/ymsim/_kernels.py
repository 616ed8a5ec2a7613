"""Compiled statevector kernels. Basis index bit q is qubit q."""

import numba as nb
import numpy as np


@nb.njit(cache=True, inline="always")
def _parity(v):
    v ^= v >> 32
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return v & 1


@nb.njit(cache=True, inline="always")
def _top_bit(v):
    b = np.int64(1)
    while v > 1:
        v >>= 1
        b <<= 1
    return b


@nb.njit(cache=True)
def apply_1q(state, q, m00, m01, m10, m11):
    bit = np.int64(1) << q
    n = state.shape[0]
    for k in range(n):
        if k & bit:
            continue
        j = k | bit
        a = state[k]
        b = state[j]
        state[k] = m00 * a + m01 * b
        state[j] = m10 * a + m11 * b


@nb.njit(cache=True)
def apply_cnot(state, control, target):
    cb = np.int64(1) << control
    tb = np.int64(1) << target
    n = state.shape[0]
    for k in range(n):
        if (k & cb) and not (k & tb):
            j = k | tb
            tmp = state[k]
            state[k] = state[j]
            state[j] = tmp


@nb.njit(cache=True)
def apply_pauli_rotation(state, x, z, theta, yphase):
    """state <- exp(-i theta P) state with P|k> = yphase (-1)^{|k&z|} |k^x>."""
    c = np.cos(theta)
    s = np.sin(theta)
    n = state.shape[0]
    if x == 0:
        table = np.empty(2, dtype=np.complex128)
        table[0] = complex(c, -s)
        table[1] = complex(c, s)
        for k in range(n):
            state[k] *= table[_parity(k & z)]
        return
    ms = complex(0.0, -s) * yphase
    flip = 1.0 - 2.0 * _parity(x & z)
    top = _top_bit(x)
    for base in range(0, n, 2 * top):
        for k in range(base, base + top):
            j = k ^ x
            a = state[k]
            b = state[j]
            if a == 0 and b == 0:
                continue
            sk = 1.0 - 2.0 * _parity(k & z)
            state[k] = c * a + ms * (sk * flip) * b
            state[j] = c * b + ms * sk * a
