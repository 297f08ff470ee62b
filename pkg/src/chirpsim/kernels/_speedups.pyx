# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled modem kernels: fused chirped-tone synthesis and dechirp-DFT
detection with a precomputed radix-2 FFT per symbol length.

Contracts are identical to ``chirpsim.kernels._numpy``; the root-of-unity
and chirp tables are shared with that module so the synthesized samples
match the fallback bit for bit.
"""

import numpy as np

from libc.stdint cimport int64_t

from . import _numpy as _tables

ctypedef double complex cplx

_fft_plans = {}


def _plan(int m):
    plan = _fft_plans.get(m)
    if plan is None:
        rev = np.zeros(m, dtype=np.int64)
        bits = m.bit_length() - 1
        for i in range(m):
            rev[i] = int(format(i, f"0{bits}b")[::-1], 2) if bits else 0
        tw = np.exp(-2j * np.pi * np.arange(m // 2) / m)
        plan = (rev, tw)
        _fft_plans[m] = plan
    return plan


cdef void _fft_inplace(cplx* buf, Py_ssize_t m, const int64_t* rev, const cplx* tw) noexcept nogil:
    cdef Py_ssize_t i, j, le, half, step, base, k
    cdef cplx t, u, w
    for i in range(m):
        j = rev[i]
        if j > i:
            t = buf[i]
            buf[i] = buf[j]
            buf[j] = t
    # first stage: all twiddles are 1
    for base in range(0, m, 2):
        u = buf[base]
        t = buf[base + 1]
        buf[base] = u + t
        buf[base + 1] = u - t
    le = 4
    while le <= m:
        half = le >> 1
        step = m // le
        # k = 0 column: twiddle 1, no multiply
        base = 0
        while base < m:
            u = buf[base]
            t = buf[base + half]
            buf[base] = u + t
            buf[base + half] = u - t
            base += le
        for k in range(1, half):
            w = tw[k * step]
            base = k
            while base < m:
                t = w * buf[base + half]
                u = buf[base]
                buf[base] = u + t
                buf[base + half] = u - t
                base += le
        le <<= 1


cdef inline long long _pmod(long long x, long long period) noexcept nogil:
    x %= period
    return x + period if x < 0 else x


# Phase recurrences: for a tone on bin k the integer phase of sample n is
# p(n) = (2*k*n +/- n^2) mod 2M, whose first difference d(n) = 2*k +/- (2n+1)
# itself steps by +/-2. Keeping p and d reduced in [0, 2M) turns the per-sample
# work into two adds and two compares, with no integer division.

def dmtdm_modulate(idx, int m):
    """(N, 4) compressed indices (ke1, ko1, ke2, ko2) -> (N, M) symbols."""
    cdef const int64_t[:, :] iv = np.ascontiguousarray(idx, dtype=np.int64)
    out = np.empty((iv.shape[0], m), dtype=np.complex128)
    cdef cplx[:, ::1] ov = out
    cdef const cplx[::1] w = _tables.roots_table(m)
    cdef Py_ssize_t i, n, rows = iv.shape[0]
    cdef long long tm = 2 * m
    cdef long long p1, p2, p3, p4, d1, d2, d3, d4
    for i in range(rows):
        p1 = p2 = p3 = p4 = 0
        d1 = _pmod(4 * iv[i, 0] + 1, tm)
        d2 = _pmod(4 * iv[i, 1] + 3, tm)
        d3 = _pmod(4 * iv[i, 2] - 1, tm)
        d4 = _pmod(4 * iv[i, 3] + 1, tm)
        for n in range(m):
            ov[i, n] = w[p1] + w[p2] + w[p3] + w[p4]
            p1 += d1
            if p1 >= tm: p1 -= tm
            d1 += 2
            if d1 >= tm: d1 -= tm
            p2 += d2
            if p2 >= tm: p2 -= tm
            d2 += 2
            if d2 >= tm: d2 -= tm
            p3 += d3
            if p3 >= tm: p3 -= tm
            d3 -= 2
            if d3 < 0: d3 += tm
            p4 += d4
            if p4 >= tm: p4 -= tm
            d4 -= 2
            if d4 < 0: d4 += tm
    return out


def lora_modulate(k, int m):
    """(N,) tone indices -> (N, M) frequency-shifted up-chirps."""
    cdef const int64_t[:] kv = np.ascontiguousarray(k, dtype=np.int64)
    out = np.empty((kv.shape[0], m), dtype=np.complex128)
    cdef cplx[:, ::1] ov = out
    cdef const cplx[::1] w = _tables.roots_table(m)
    cdef Py_ssize_t i, n, rows = kv.shape[0]
    cdef long long p, d, tm = 2 * m
    for i in range(rows):
        p = 0
        d = _pmod(2 * kv[i] + 1, tm)
        for n in range(m):
            ov[i, n] = w[p]
            p += d
            if p >= tm: p -= tm
            d += 2
            if d >= tm: d -= tm
    return out


def tdm_modulate(idx, int m):
    """(N, 2) indices (k1 on the up-chirp, k2 on the down-chirp) -> (N, M)."""
    cdef const int64_t[:, :] iv = np.ascontiguousarray(idx, dtype=np.int64)
    out = np.empty((iv.shape[0], m), dtype=np.complex128)
    cdef cplx[:, ::1] ov = out
    cdef const cplx[::1] w = _tables.roots_table(m)
    cdef Py_ssize_t i, n, rows = iv.shape[0]
    cdef long long p1, p2, d1, d2, tm = 2 * m
    for i in range(rows):
        p1 = p2 = 0
        d1 = _pmod(2 * iv[i, 0] + 1, tm)
        d2 = _pmod(2 * iv[i, 1] - 1, tm)
        for n in range(m):
            ov[i, n] = w[p1] + w[p2]
            p1 += d1
            if p1 >= tm: p1 -= tm
            d1 += 2
            if d1 >= tm: d1 -= tm
            p2 += d2
            if p2 >= tm: p2 -= tm
            d2 -= 2
            if d2 < 0: d2 += tm
    return out


cdef void _branch_stat(
    const cplx* y, const cplx* dechirp, cplx* buf, double* stat,
    Py_ssize_t m, const int64_t* rev, const cplx* tw,
    bint coherent, double hr, double hi,
) noexcept nogil:
    cdef Py_ssize_t n
    cdef double re, im
    for n in range(m):
        buf[n] = y[n] * dechirp[n]
    _fft_inplace(buf, m, rev, tw)
    for n in range(m):
        re = buf[n].real
        im = buf[n].imag
        stat[n] = hr * re + hi * im if coherent else re * re + im * im


cdef Py_ssize_t _argmax_strided(const double* stat, Py_ssize_t start, Py_ssize_t m, Py_ssize_t step) noexcept nogil:
    # first maximum wins, i.e. ties break toward the smallest bin
    cdef Py_ssize_t k, best = start
    cdef double v, top = stat[start]
    k = start + step
    while k < m:
        v = stat[k]
        if v > top:
            top = v
            best = k
        k += step
    return best


def dmtdm_detect(y, int m, h=None):
    """(N, M) received symbols -> (N, 4) compressed index decisions."""
    cdef const cplx[:, ::1] yv = np.ascontiguousarray(y, dtype=np.complex128)
    cdef Py_ssize_t rows = yv.shape[0]
    out = np.empty((rows, 4), dtype=np.int64)
    cdef int64_t[:, ::1] ov = out
    cdef const cplx[::1] cd = _tables.chirp_table(m, -1)
    cdef const cplx[::1] cu = _tables.chirp_table(m, 1)
    rev_arr, tw_arr = _plan(m)
    cdef const int64_t[::1] rev = rev_arr
    cdef const cplx[::1] tw = tw_arr
    buf_arr = np.empty(m, dtype=np.complex128)
    stat_arr = np.empty(m, dtype=np.float64)
    cdef cplx[::1] buf = buf_arr
    cdef double[::1] stat = stat_arr
    cdef bint coherent = h is not None
    cdef double hr = 0.0, hi = 0.0
    if coherent:
        hc = complex(h)
        hr, hi = hc.real, hc.imag
    cdef Py_ssize_t i
    for i in range(rows):
        _branch_stat(&yv[i, 0], &cd[0], &buf[0], &stat[0], m, &rev[0], &tw[0], coherent, hr, hi)
        ov[i, 0] = _argmax_strided(&stat[0], 0, m, 2) >> 1
        ov[i, 1] = _argmax_strided(&stat[0], 1, m, 2) >> 1
        _branch_stat(&yv[i, 0], &cu[0], &buf[0], &stat[0], m, &rev[0], &tw[0], coherent, hr, hi)
        ov[i, 2] = _argmax_strided(&stat[0], 0, m, 2) >> 1
        ov[i, 3] = _argmax_strided(&stat[0], 1, m, 2) >> 1
    return out


def lora_detect(y, int m, h=None):
    """(N, M) received symbols -> (N,) tone decisions."""
    cdef const cplx[:, ::1] yv = np.ascontiguousarray(y, dtype=np.complex128)
    cdef Py_ssize_t rows = yv.shape[0]
    out = np.empty(rows, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef const cplx[::1] cd = _tables.chirp_table(m, -1)
    rev_arr, tw_arr = _plan(m)
    cdef const int64_t[::1] rev = rev_arr
    cdef const cplx[::1] tw = tw_arr
    buf_arr = np.empty(m, dtype=np.complex128)
    stat_arr = np.empty(m, dtype=np.float64)
    cdef cplx[::1] buf = buf_arr
    cdef double[::1] stat = stat_arr
    cdef bint coherent = h is not None
    cdef double hr = 0.0, hi = 0.0
    if coherent:
        hc = complex(h)
        hr, hi = hc.real, hc.imag
    cdef Py_ssize_t i
    for i in range(rows):
        _branch_stat(&yv[i, 0], &cd[0], &buf[0], &stat[0], m, &rev[0], &tw[0], coherent, hr, hi)
        ov[i] = _argmax_strided(&stat[0], 0, m, 1)
    return out


def tdm_detect(y, int m, h=None):
    """(N, M) received symbols -> (N, 2) index decisions."""
    cdef const cplx[:, ::1] yv = np.ascontiguousarray(y, dtype=np.complex128)
    cdef Py_ssize_t rows = yv.shape[0]
    out = np.empty((rows, 2), dtype=np.int64)
    cdef int64_t[:, ::1] ov = out
    cdef const cplx[::1] cd = _tables.chirp_table(m, -1)
    cdef const cplx[::1] cu = _tables.chirp_table(m, 1)
    rev_arr, tw_arr = _plan(m)
    cdef const int64_t[::1] rev = rev_arr
    cdef const cplx[::1] tw = tw_arr
    buf_arr = np.empty(m, dtype=np.complex128)
    stat_arr = np.empty(m, dtype=np.float64)
    cdef cplx[::1] buf = buf_arr
    cdef double[::1] stat = stat_arr
    cdef bint coherent = h is not None
    cdef double hr = 0.0, hi = 0.0
    if coherent:
        hc = complex(h)
        hr, hi = hc.real, hc.imag
    cdef Py_ssize_t i
    for i in range(rows):
        _branch_stat(&yv[i, 0], &cd[0], &buf[0], &stat[0], m, &rev[0], &tw[0], coherent, hr, hi)
        ov[i, 0] = _argmax_strided(&stat[0], 0, m, 1)
        _branch_stat(&yv[i, 0], &cu[0], &buf[0], &stat[0], m, &rev[0], &tw[0], coherent, hr, hi)
        ov[i, 1] = _argmax_strided(&stat[0], 0, m, 1)
    return out
