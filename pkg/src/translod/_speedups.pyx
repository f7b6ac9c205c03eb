# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the interlinking kernels."""

from libc.math cimport asin, cos, sin, sqrt, M_PI
from libc.stdlib cimport free, malloc

cdef double EARTH_RADIUS_KM = 6371.0


def levenshtein_distance(str a, str b):
    cdef Py_ssize_t n, m, i, j
    cdef Py_UCS4 ca
    cdef int *prev
    cdef int *cur
    cdef int *tmp
    cdef int best, cost
    if len(a) < len(b):
        a, b = b, a
    n = len(a)
    m = len(b)
    if m == 0:
        return n
    prev = <int *> malloc((m + 1) * sizeof(int))
    cur = <int *> malloc((m + 1) * sizeof(int))
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    try:
        for j in range(m + 1):
            prev[j] = <int> j
        for i in range(1, n + 1):
            ca = a[i - 1]
            cur[0] = <int> i
            for j in range(1, m + 1):
                cost = 0 if ca == b[j - 1] else 1
                best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                if prev[j - 1] + cost < best:
                    best = prev[j - 1] + cost
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
        return prev[m]
    finally:
        free(prev)
        free(cur)


def haversine_km(double lat1, double lon1, double lat2, double lon2):
    cdef double rad = M_PI / 180.0
    cdef double phi1 = lat1 * rad
    cdef double phi2 = lat2 * rad
    cdef double dphi = (lat2 - lat1) * rad
    cdef double dlmb = (lon2 - lon1) * rad
    cdef double s1 = sin(dphi / 2)
    cdef double s2 = sin(dlmb / 2)
    cdef double h = s1 * s1 + cos(phi1) * cos(phi2) * s2 * s2
    h = sqrt(h)
    if h > 1.0:
        h = 1.0
    return 2 * EARTH_RADIUS_KM * asin(h)
