# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled hot loops. Signatures mirror :mod:`phdim._fallback` exactly."""

import numpy as np

from libc.math cimport sqrt, fabs, INFINITY
from libc.stdint cimport int64_t, int32_t, uint8_t
from libcpp.vector cimport vector
from libcpp.unordered_map cimport unordered_map
from libcpp.queue cimport priority_queue
from libcpp.algorithm cimport sort as cpp_sort
from cython.operator cimport dereference as deref


def prim_mst(const double[:, ::1] x, bint chebyshev=False):
    """Dense Prim on the complete graph of ``x``; returns (lengths, parent, child)."""
    cdef Py_ssize_t n = x.shape[0], m = x.shape[1]
    cdef Py_ssize_t ne = n - 1 if n > 0 else 0
    lengths_a = np.empty(ne, dtype=np.float64)
    parent_a = np.empty(ne, dtype=np.int64)
    child_a = np.empty(ne, dtype=np.int64)
    best_a = np.full(n, INFINITY, dtype=np.float64)
    src_a = np.zeros(n, dtype=np.int64)
    used_a = np.zeros(n, dtype=np.uint8)
    cdef double[::1] lengths = lengths_a
    cdef int64_t[::1] parent = parent_a
    cdef int64_t[::1] child = child_a
    cdef double[::1] best = best_a
    cdef int64_t[::1] src = src_a
    cdef uint8_t[::1] used = used_a
    cdef Py_ssize_t step, k, c, cur = 0, bi
    cdef double acc, t, bv
    if n == 0:
        return lengths_a, parent_a, child_a
    with nogil:
        used[0] = 1
        for step in range(ne):
            bi = -1
            bv = INFINITY
            for k in range(n):
                if used[k]:
                    continue
                acc = 0.0
                for c in range(m):
                    t = x[cur, c] - x[k, c]
                    if chebyshev:
                        t = fabs(t)
                        if t > acc:
                            acc = t
                    else:
                        acc += t * t
                if acc < best[k]:
                    best[k] = acc
                    src[k] = cur
                if bi < 0 or best[k] < bv:
                    bv = best[k]
                    bi = k
            used[bi] = 1
            lengths[step] = bv if chebyshev else sqrt(bv)
            parent[step] = src[bi]
            child[step] = bi
            cur = bi
    return lengths_a, parent_a, child_a


cdef inline int64_t _find(int64_t[::1] par, int64_t a) noexcept nogil:
    while par[a] != a:
        par[a] = par[par[a]]
        a = par[a]
    return a


def kruskal_select(const int64_t[::1] ei, const int64_t[::1] ej, Py_ssize_t n):
    """Scan pre-sorted edges; mark those that merge two components."""
    cdef Py_ssize_t ne = ei.shape[0], k
    mask_a = np.zeros(ne, dtype=np.uint8)
    par_a = np.arange(n, dtype=np.int64)
    cdef uint8_t[::1] mask = mask_a
    cdef int64_t[::1] par = par_a
    cdef int64_t a, b, merged = 0
    with nogil:
        for k in range(ne):
            if merged == n - 1:
                break
            a = _find(par, ei[k])
            b = _find(par, ej[k])
            if a != b:
                if a < b:
                    par[b] = a
                else:
                    par[a] = b
                mask[k] = 1
                merged += 1
    return mask_a


def pair_counts_below(const double[:, ::1] x, const double[::1] radii):
    """Number of unordered pairs with Euclidean distance strictly below each radius."""
    cdef Py_ssize_t n = x.shape[0], m = x.shape[1], nr = radii.shape[0]
    cdef Py_ssize_t i, j, c, q
    cdef double acc, t
    counts_a = np.zeros(nr, dtype=np.int64)
    sq_a = np.asarray(radii, dtype=np.float64) ** 2
    cdef int64_t[::1] counts = counts_a
    cdef double[::1] sq = sq_a
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                acc = 0.0
                for c in range(m):
                    t = x[i, c] - x[j, c]
                    acc += t * t
                for q in range(nr):
                    if acc < sq[q]:
                        counts[q] += 1
    return counts_a


cdef inline int64_t _cofacet_code(const int32_t* v, int q, int64_t l, int64_t n) noexcept nogil:
    cdef int64_t code = 0
    cdef int a
    cdef bint placed = False
    for a in range(q):
        if not placed and l < v[a]:
            code = code * n + l
            placed = True
        code = code * n + v[a]
    if not placed:
        code = code * n + l
    return code


cdef inline bint _member(const int32_t* v, int q, int64_t l) noexcept nogil:
    cdef int a
    for a in range(q):
        if v[a] == l:
            return True
    return False


cdef void _push_cofacets(priority_queue[int64_t]& heap, const int32_t[:, ::1] R,
                         const int32_t* v, int q, int32_t base_rank, int64_t n,
                         int32_t max_rank, int64_t base, int64_t floor_key) noexcept nogil:
    # only keys above floor_key are pushed; the rest cancel in the column sum
    cdef int64_t l, key
    cdef int32_t r, t
    cdef int32_t floor_rank = <int32_t>(floor_key // base) if floor_key >= 0 else -1
    cdef int a
    for l in range(n):
        if _member(v, q, l):
            continue
        r = base_rank
        for a in range(q):
            t = R[v[a], l]
            if t > r:
                r = t
        if r > max_rank or r < floor_rank:
            continue
        key = r * base + _cofacet_code(v, q, l, n)
        if key > floor_key:
            heap.push(-key)


cdef int64_t _pop_pivot(priority_queue[int64_t]& heap) noexcept nogil:
    cdef int64_t k
    while not heap.empty():
        k = heap.top()
        heap.pop()
        if not heap.empty() and heap.top() == k:
            heap.pop()
            continue
        heap.push(k)
        return -k
    return -1


def rips_reduce(const int32_t[:, ::1] R, const int32_t[:, ::1] verts,
                const int32_t[::1] srank, const uint8_t[::1] cleared,
                int32_t max_rank, int64_t base):
    """Persistent cohomology reduction of one Rips dimension.

    Columns are the simplices in ``verts`` (ascending filtration order) and are
    processed latest first. Cofacets are keyed ``rank * base + lex_code`` so that
    integer order is filtration order. A column whose smallest cofacet is still
    free is paired at once and its coboundary is regenerated on demand; any
    other column is reduced on a heap and its reduced coboundary is stored.
    Returns the pivot key paired with each column (-1: cleared or unpaired),
    the number of heap-reduced columns and the number of column additions.
    """
    cdef Py_ssize_t N = verts.shape[0]
    cdef int q = <int>verts.shape[1]
    cdef int64_t n = R.shape[0]
    death_a = np.full(N, -1, dtype=np.int64)
    cdef int64_t[::1] death = death_a
    cdef unordered_map[int64_t, int64_t] owner
    cdef unordered_map[int64_t, int64_t].iterator it
    cdef vector[vector[int64_t]] rstore
    cdef vector[int64_t] rcol
    cdef priority_queue[int64_t] heap
    cdef Py_ssize_t s, z
    cdef int64_t l, best_l, key, pivot, tag, tau, k
    cdef int32_t r, t, best_r, sr
    cdef int a
    cdef int64_t slow = 0, steps = 0
    cdef const int32_t* v
    with nogil:
        for s in range(N - 1, -1, -1):
            if cleared[s]:
                continue
            v = &verts[s, 0]
            sr = srank[s]
            best_r = max_rank + 1
            best_l = -1
            for l in range(n):
                if _member(v, q, l):
                    continue
                r = sr
                for a in range(q):
                    t = R[v[a], l]
                    if t > r:
                        r = t
                if r < best_r:
                    best_r = r
                    best_l = l
                    if r == sr:
                        break
            if best_l < 0:
                continue
            key = best_r * base + _cofacet_code(v, q, best_l, n)
            it = owner.find(key)
            if it == owner.end():
                owner[key] = -(s + 1)
                death[s] = key
                continue
            slow += 1
            while not heap.empty():
                heap.pop()
            _push_cofacets(heap, R, v, q, sr, n, max_rank, base, -1)
            pivot = key
            while True:
                it = owner.find(pivot)
                if it == owner.end():
                    # drain the heap into the reduced column, dropping cancelled pairs
                    heap.pop()
                    rcol.clear()
                    while not heap.empty():
                        k = heap.top()
                        heap.pop()
                        if not heap.empty() and heap.top() == k:
                            heap.pop()
                            continue
                        rcol.push_back(-k)
                    owner[pivot] = <int64_t>rstore.size()
                    rstore.push_back(rcol)
                    death[s] = pivot
                    break
                tag = deref(it).second
                steps += 1
                # the pivot sits alone on top of the heap and cancels with the owner's
                heap.pop()
                if tag < 0:
                    tau = -tag - 1
                    _push_cofacets(heap, R, &verts[tau, 0], q, srank[tau], n, max_rank, base, pivot)
                else:
                    for z in range(<Py_ssize_t>rstore[tag].size()):
                        heap.push(-rstore[tag][z])
                pivot = _pop_pivot(heap)
                if pivot < 0:
                    break
    return death_a, slow, steps
