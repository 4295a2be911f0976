# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte-Carlo kernel.

Bit-for-bit mirror of ``dirimult.rng`` (see that module's docstring for
the stream contract); any change must be made in both lanes.  Compiled
with -ffp-contract=off so the doubles match the pure lane exactly.
"""

from libc.math cimport log, exp, sqrt, cos, pow
from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    """
    #define DM_MASK 0xFFFFFFFFFFFFFFFFULL
    """

cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef double TWO_PI = 6.283185307179586
cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef struct XoState:
    uint64_t s0
    uint64_t s1
    uint64_t s2
    uint64_t s3


cdef inline void _seed_state(XoState *st, uint64_t seed) nogil:
    cdef uint64_t z = seed
    z += GOLDEN
    st.s0 = _mix64(z)
    z += GOLDEN
    st.s1 = _mix64(z)
    z += GOLDEN
    st.s2 = _mix64(z)
    z += GOLDEN
    st.s3 = _mix64(z)


cdef inline uint64_t _next_u64(XoState *st) nogil:
    cdef uint64_t result = _rotl(st.s1 * 5ULL, 7) * 9ULL
    cdef uint64_t t = st.s1 << 17
    st.s2 ^= st.s0
    st.s3 ^= st.s1
    st.s1 ^= st.s2
    st.s0 ^= st.s3
    st.s2 ^= t
    st.s3 = _rotl(st.s3, 45)
    return result


cdef inline double _uniform(XoState *st) nogil:
    return <double>((_next_u64(st) >> 11) + 1ULL) * INV_2_53


cdef inline double _normal(XoState *st) nogil:
    cdef double u1 = _uniform(st)
    cdef double u2 = _uniform(st)
    return sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)


cdef double _gamma_ge1(XoState *st, double shape) nogil:
    cdef double d = shape - (1.0 / 3.0)
    cdef double c = 1.0 / sqrt(9.0 * d)
    cdef double x, v, u, xx
    while True:
        x = _normal(st)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = _uniform(st)
        xx = x * x
        if u < 1.0 - 0.0331 * xx * xx:
            return d * v
        if log(u) < 0.5 * xx + d * (1.0 - v + log(v)):
            return d * v


cdef double _gamma(XoState *st, double shape) nogil:
    cdef double g, u
    if shape < 1.0:
        # sequence the draws explicitly: C leaves operand order unspecified
        g = _gamma_ge1(st, shape + 1.0)
        u = _uniform(st)
        return g * pow(u, 1.0 / shape)
    return _gamma_ge1(st, shape)


def u64_sequence(seed, Py_ssize_t n):
    """First ``n`` raw 64-bit outputs for ``seed`` (lane-identity tests)."""
    cdef XoState st
    _seed_state(&st, <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF))
    cdef Py_ssize_t i
    out = []
    for i in range(n):
        out.append(_next_u64(&st))
    return out


def gamma_sequence(seed, double shape, Py_ssize_t n):
    """First ``n`` gamma variates for ``seed`` (lane-identity tests)."""
    if shape <= 0.0:
        raise ValueError(f"gamma shape must be positive, got {shape!r}")
    cdef XoState st
    _seed_state(&st, <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF))
    cdef Py_ssize_t i
    out = []
    for i in range(n):
        out.append(_gamma(&st, shape))
    return out


def predictive_mc_moments(alpha, counts, double log_coef, Py_ssize_t n_samples, seed):
    """Compiled twin of ``dirimult.rng.predictive_mc_moments``."""
    cdef Py_ssize_t k = len(alpha)
    if len(counts) != k:
        raise ValueError(
            f"alpha and counts disagree in length: {k} vs {len(counts)}"
        )
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    cdef double *a = <double *> malloc(k * sizeof(double))
    cdef long *y = <long *> malloc(k * sizeof(long))
    cdef double *g = <double *> malloc(k * sizeof(double))
    if a == NULL or y == NULL or g == NULL:
        free(a); free(y); free(g)
        raise MemoryError()
    cdef Py_ssize_t j
    try:
        for j in range(k):
            a[j] = alpha[j]
            y[j] = counts[j]
            if a[j] <= 0.0:
                raise ValueError(f"gamma shape must be positive, got {alpha[j]!r}")
        return _mc_loop(a, y, g, k, log_coef, n_samples,
                        <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF))
    finally:
        free(a); free(y); free(g)


cdef tuple _mc_loop(double *a, long *y, double *g, Py_ssize_t k,
                    double log_coef, Py_ssize_t n_samples, uint64_t seed):
    cdef XoState st
    _seed_state(&st, seed)
    cdef double sum_p = 0.0
    cdef double sum_p2 = 0.0
    cdef double total, log_total, logp, p, mean, var, stderr
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n_samples):
            total = 0.0
            for j in range(k):
                g[j] = _gamma(&st, a[j])
                total += g[j]
            log_total = log(total)
            logp = log_coef
            for j in range(k):
                if y[j] != 0:
                    logp += y[j] * (log(g[j]) - log_total)
            p = exp(logp)
            sum_p += p
            sum_p2 += p * p
    mean = sum_p / n_samples
    if n_samples == 1:
        return mean, 0.0
    var = (sum_p2 - sum_p * sum_p / n_samples) / (n_samples - 1)
    if var < 0.0:
        var = 0.0
    stderr = sqrt(var / n_samples)
    return mean, stderr
