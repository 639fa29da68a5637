"""Compiled numeric kernels shared by the ring, HE and model-evaluation layers.

Everything here operates on plain numpy arrays so the callers can stay
allocation-friendly.  All residue arithmetic assumes moduli below 2**31, so a
product of two residues fits a native uint64 without overflow.  Ring-2**ell
arithmetic instead relies on natural uint64 wraparound followed by masking in
the caller.
"""

import numba
import numpy as np
from numba import njit, prange

_PAR = {"parallel": True, "cache": True, "nogil": True}
_SEQ = {"cache": True, "nogil": True}


def set_threads(n: int) -> None:
    numba.set_num_threads(max(1, int(n)))


# ---------------------------------------------------------------------------
# Negacyclic NTT over per-row prime moduli.
#
# rows: (R, N) uint64, row r reduced mod q[r].  psi_brv holds the 2N-th root
# powers in bit-reversed order (index 0 unused), one table per row.  Forward
# output is in bit-reversed order; the inverse consumes that order, so
# pointwise products between two forward-transformed rows are consistent.
# ---------------------------------------------------------------------------

@njit(**_PAR)
def ntt_forward(rows, psi_brv, q):
    R, N = rows.shape
    for r in prange(R):
        a = rows[r]
        w = psi_brv[r]
        qq = q[r]
        t = N
        m = 1
        while m < N:
            t //= 2
            for i in range(m):
                wi = w[m + i]
                j1 = 2 * i * t
                for j in range(j1, j1 + t):
                    u = a[j]
                    v = (a[j + t] * wi) % qq
                    a[j] = (u + v) % qq
                    a[j + t] = (u + qq - v) % qq
            m *= 2


@njit(**_PAR)
def ntt_inverse(rows, ipsi_brv, n_inv, q):
    R, N = rows.shape
    for r in prange(R):
        a = rows[r]
        w = ipsi_brv[r]
        qq = q[r]
        t = 1
        m = N
        while m > 1:
            h = m // 2
            j1 = 0
            for i in range(h):
                wi = w[h + i]
                for j in range(j1, j1 + t):
                    u = a[j]
                    v = a[j + t]
                    a[j] = (u + v) % qq
                    a[j + t] = ((u + qq - v) * wi) % qq
                j1 += 2 * t
            t *= 2
            m = h
        ninv = n_inv[r]
        for j in range(N):
            a[j] = (a[j] * ninv) % qq


@njit(**_PAR)
def pw_mul(out, a, b, q):
    R, N = out.shape
    for r in prange(R):
        qq = q[r]
        for j in range(N):
            out[r, j] = (a[r, j] * b[r, j]) % qq


@njit(**_PAR)
def pw_mul_acc(out, a, b, q):
    R, N = out.shape
    for r in prange(R):
        qq = q[r]
        for j in range(N):
            out[r, j] = (out[r, j] + a[r, j] * b[r, j] % qq) % qq


@njit(**_PAR)
def pw_add(out, a, b, q):
    R, N = out.shape
    for r in prange(R):
        qq = q[r]
        for j in range(N):
            out[r, j] = (a[r, j] + b[r, j]) % qq


@njit(**_PAR)
def pw_sub(out, a, b, q):
    R, N = out.shape
    for r in prange(R):
        qq = q[r]
        for j in range(N):
            out[r, j] = (a[r, j] + qq - b[r, j]) % qq


@njit(**_SEQ)
def negacyclic_mul_mod(a, b, q):
    """Schoolbook product of a*b mod (X^N + 1, q).  Oracle-grade, O(N^2)."""
    N = a.shape[0]
    out = np.zeros(N, dtype=np.uint64)
    for i in range(N):
        ai = a[i] % q
        if ai == 0:
            continue
        for j in range(N):
            k = i + j
            v = (ai * (b[j] % q)) % q
            if k < N:
                out[k] = (out[k] + v) % q
            else:
                out[k - N] = (out[k - N] + q - v) % q
    return out


@njit(**_PAR)
def negacyclic_mul_wrap(a, b):
    """Schoolbook negacyclic product with coefficients mod 2**64 (wraparound)."""
    N = a.shape[0]
    out = np.zeros(N, dtype=np.uint64)
    for k in prange(N):
        acc = np.uint64(0)
        for i in range(k + 1):
            acc += a[i] * b[k - i]
        for i in range(k + 1, N):
            acc -= a[i] * b[k + N - i]
        out[k] = acc
    return out


# ---------------------------------------------------------------------------
# RNS decoding: Garner mixed-radix digits followed by the scaled rounding
# round(t*x/q) mod t.  The fractional accumulation runs in float64, which is
# exact enough whenever the ciphertext retains any noise budget (the true
# value then sits >= 2^-40 away from a rounding boundary, versus ~2^-19
# accumulation error).
# ---------------------------------------------------------------------------

@njit(**_PAR)
def garner_digits(rows, q, prefix_inv):
    """Mixed-radix digits v of x = v0 + v1*q0 + v2*q0*q1 + ...

    prefix_inv[i][j] = (q0*...*q_{i-1})^-1 mod q_i for j-th factor handling:
    here we pass full pairwise tables; see caller for layout:
    prefix_inv[i, j] = q_j mod q_i precomputed handling is folded by caller.
    """
    L, N = rows.shape
    digits = np.empty((L, N), dtype=np.uint64)
    for j in prange(N):
        for i in range(L):
            qi = q[i]
            acc = np.uint64(0)
            mul = np.uint64(1)
            for k in range(i):
                acc = (acc + digits[k, j] * mul) % qi
                mul = (mul * (q[k] % qi)) % qi
            x = rows[i, j] % qi
            diff = (x + qi - acc) % qi
            digits[i, j] = (diff * prefix_inv[i]) % qi
    return digits


@njit(**_PAR)
def scale_round_digits(digits, int_part, frac_part, t_mask):
    """m = round(t*x/q) mod t given mixed-radix digits of x.

    int_part[i] = floor(t * P_{i-1} / q), frac_part[i] = frac(t * P_{i-1} / q)
    with P_{i-1} the radix weight of digit i.
    """
    L, N = digits.shape
    out = np.empty(N, dtype=np.uint64)
    for j in prange(N):
        acc_i = np.uint64(0)
        acc_f = 0.0
        for i in range(L):
            d = digits[i, j]
            acc_i += d * int_part[i]
            acc_f += float(d) * frac_part[i]
        out[j] = (acc_i + np.uint64(np.floor(acc_f + 0.5))) & t_mask
    return out


# ---------------------------------------------------------------------------
# Ring-2**ell tensor kernels (uint64 wraparound; caller masks to ell bits).
# ---------------------------------------------------------------------------

@njit(**_PAR)
def matmul_wrap(a, b):
    """(n, k) @ (k, m) with uint64 wraparound accumulation."""
    n, k = a.shape
    m = b.shape[1]
    out = np.empty((n, m), dtype=np.uint64)
    for i in prange(n):
        for j in range(m):
            acc = np.uint64(0)
            for l in range(k):
                acc += a[i, l] * b[l, j]
            out[i, j] = acc
    return out


@njit(**_SEQ)
def im2col_wrap(x, s, stride):
    """(B, C, H, W) -> (C*s*s, B*oh*ow) patch matrix for valid correlation."""
    B, C, H, W = x.shape
    oh = (H - s) // stride + 1
    ow = (W - s) // stride + 1
    out = np.empty((C * s * s, B * oh * ow), dtype=np.uint64)
    for b in range(B):
        for i in range(oh):
            for j in range(ow):
                col = (b * oh + i) * ow + j
                row = 0
                for c in range(C):
                    for di in range(s):
                        for dj in range(s):
                            out[row, col] = x[b, c, i * stride + di, j * stride + dj]
                            row += 1
    return out


@njit(**_SEQ)
def col2im_wrap(cols, B, C, H, W, s, stride):
    """Adjoint of im2col_wrap: scatter-add patch columns back to an image."""
    oh = (H - s) // stride + 1
    ow = (W - s) // stride + 1
    out = np.zeros((B, C, H, W), dtype=np.uint64)
    for b in range(B):
        for i in range(oh):
            for j in range(ow):
                col = (b * oh + i) * ow + j
                row = 0
                for c in range(C):
                    for di in range(s):
                        for dj in range(s):
                            out[b, c, i * stride + di, j * stride + dj] += cols[row, col]
                            row += 1
    return out


@njit(**_PAR)
def conv2d_wrap(x, w):
    """Valid-mode 2D cross-correlation, stride 1, uint64 wraparound."""
    B, Ci, H, W = x.shape
    Co, _, s, _ = w.shape
    oh = H - s + 1
    ow = W - s + 1
    out = np.empty((B, Co, oh, ow), dtype=np.uint64)
    for b in prange(B):
        for co in range(Co):
            for i in range(oh):
                for j in range(ow):
                    acc = np.uint64(0)
                    for ci in range(Ci):
                        for di in range(s):
                            for dj in range(s):
                                acc += x[b, ci, i + di, j + dj] * w[co, ci, di, dj]
                    out[b, co, i, j] = acc
    return out
