# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as ``_pykernels`` for graphs of at most 64 nodes."""
from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, realloc, free

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil

cdef enum:
    MAXN = 64


cdef int _load(object masks, uint64_t* out) except -1:
    cdef Py_ssize_t i, n = len(masks)
    if n > MAXN:
        raise ValueError("compiled kernels support at most 64 nodes")
    for i in range(n):
        out[i] = <uint64_t>masks[i]
    return 0


def directed_paths(children, int x, int y):
    cdef uint64_t ch[MAXN]
    cdef uint64_t rem[MAXN]
    cdef int path[MAXN]
    cdef int v, c, d, i
    cdef uint64_t reach, low
    _load(children, ch)
    reach = (<uint64_t>1) << y
    for v in range(y - 1, -1, -1):
        if ch[v] & reach:
            reach |= (<uint64_t>1) << v
    out = []
    if not (reach >> x) & 1:
        return out
    d = 0
    path[0] = x
    rem[0] = ch[x] & reach
    while d >= 0:
        if rem[d] == 0:
            d -= 1
            continue
        low = rem[d] & (~rem[d] + 1)
        rem[d] ^= low
        c = __builtin_ctzll(low)
        if c == y:
            out.append(tuple([path[i] for i in range(d + 1)] + [y]))
            continue
        d += 1
        path[d] = c
        rem[d] = ch[c] & reach
    return out


def count_directed_paths(children, int x, int y):
    # counts can overflow 64 bits on large dense graphs; Python ints do not
    cdef uint64_t ch[MAXN]
    cdef int v
    cdef uint64_t m, low
    _load(children, ch)
    counts = [0] * len(children)
    counts[y] = 1
    for v in range(y - 1, x - 1, -1):
        total = 0
        m = ch[v]
        while m:
            low = m & (~m + 1)
            total += counts[__builtin_ctzll(low)]
            m ^= low
        counts[v] = total
    return counts[x]


def backdoor_paths(children, parents, int x, int y, long limit=-1):
    cdef uint64_t ch[MAXN]
    cdef uint64_t pa[MAXN]
    cdef uint64_t nb[MAXN]
    cdef uint64_t rem[MAXN]
    cdef int path[MAXN]
    cdef int n = len(children)
    cdef int v, w, d, i
    cdef uint64_t used, low
    _load(children, ch)
    _load(parents, pa)
    for v in range(n):
        nb[v] = ch[v] | pa[v]
    out = []
    d = 0
    path[0] = x
    used = (<uint64_t>1) << x
    rem[0] = pa[x]
    while True:
        if rem[d] == 0:
            if d == 0:
                break
            used &= ~((<uint64_t>1) << path[d])
            d -= 1
            continue
        low = rem[d] & (~rem[d] + 1)
        rem[d] ^= low
        w = __builtin_ctzll(low)
        if w == y:
            nodes = [path[i] for i in range(d + 1)] + [y]
            dirs = tuple([bool((ch[nodes[i]] >> nodes[i + 1]) & 1) for i in range(d + 1)])
            out.append((tuple(nodes), dirs))
            if 0 <= limit < len(out):
                break
            continue
        d += 1
        path[d] = w
        used |= low
        rem[d] = nb[w] & ~used
    return out


cdef bint _blocked_all(uint64_t z, Py_ssize_t p, uint64_t* nc, Py_ssize_t* coff, uint64_t* cm) nogil:
    cdef Py_ssize_t i, j
    cdef bint blocked
    for i in range(p):
        if nc[i] & z:
            continue
        blocked = False
        for j in range(coff[i], coff[i + 1]):
            if not (cm[j] & z):
                blocked = True
                break
        if not blocked:
            return False
    return True


def all_blocked(signatures, z):
    cdef uint64_t zz = <uint64_t>z
    cdef uint64_t m
    for nc, colliders in signatures:
        m = <uint64_t>nc
        if m & zz:
            continue
        for c in colliders:
            m = <uint64_t>c
            if not (m & zz):
                break
        else:
            return False
    return True


def minimal_blocking_sets(signatures, candidates, int max_size):
    cdef Py_ssize_t p = len(signatures)
    cdef Py_ssize_t total = 0
    cdef Py_ssize_t i, j, k, r
    cdef int nc_count = len(candidates)
    cdef uint64_t* nc = NULL
    cdef Py_ssize_t* coff = NULL
    cdef uint64_t* cm = NULL
    cdef uint64_t* found = NULL
    cdef uint64_t* grown = NULL
    cdef Py_ssize_t n_found = 0, cap_found = 16
    cdef int idx[MAXN]
    cdef uint64_t cand[MAXN]
    cdef uint64_t z
    cdef bint skip

    if nc_count > MAXN:
        raise ValueError("compiled kernels support at most 64 candidates")
    for sig in signatures:
        total += len(sig[1])
    nc = <uint64_t*>malloc((p + 1) * sizeof(uint64_t))
    coff = <Py_ssize_t*>malloc((p + 1) * sizeof(Py_ssize_t))
    cm = <uint64_t*>malloc((total + 1) * sizeof(uint64_t))
    found = <uint64_t*>malloc(cap_found * sizeof(uint64_t))
    if not nc or not coff or not cm or not found:
        free(nc); free(coff); free(cm); free(found)
        raise MemoryError()
    try:
        j = 0
        for i in range(p):
            nc[i] = <uint64_t>signatures[i][0]
            coff[i] = j
            for c in signatures[i][1]:
                cm[j] = <uint64_t>c
                j += 1
        coff[p] = j
        for i in range(nc_count):
            cand[i] = (<uint64_t>1) << <int>candidates[i]

        for k in range(0, min(max_size, nc_count) + 1):
            for i in range(k):
                idx[i] = i
            while True:
                z = 0
                for i in range(k):
                    z |= cand[idx[i]]
                skip = False
                for i in range(n_found):
                    if found[i] & z == found[i]:
                        skip = True
                        break
                if not skip and _blocked_all(z, p, nc, coff, cm):
                    if n_found == cap_found:
                        cap_found *= 2
                        grown = <uint64_t*>realloc(found, cap_found * sizeof(uint64_t))
                        if not grown:
                            raise MemoryError()
                        found = grown
                    found[n_found] = z
                    n_found += 1
                # next combination in lexicographic order
                r = k - 1
                while r >= 0 and idx[r] == nc_count - k + r:
                    r -= 1
                if r < 0:
                    break
                idx[r] += 1
                for i in range(r + 1, k):
                    idx[i] = idx[i - 1] + 1
        return [found[i] for i in range(n_found)]
    finally:
        free(nc)
        free(coff)
        free(cm)
        free(found)
