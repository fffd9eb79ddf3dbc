# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pure``; same signatures."""

from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport uint64_t, int64_t

BACKEND = "cython"

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325ULL
cdef uint64_t FNV_PRIME = 0x100000001B3ULL


cdef inline uint64_t _fnv_word(uint64_t h, uint64_t w) nogil:
    cdef int i
    for i in range(8):
        h ^= (w & 0xFF)
        h *= FNV_PRIME
        w >>= 8
    return h


cdef inline uint64_t _to_u64(object w):
    return <uint64_t>(int(w) & 0xFFFFFFFFFFFFFFFF)


def fnv1a64(words):
    cdef uint64_t h = FNV_OFFSET
    for w in words:
        h = _fnv_word(h, _to_u64(w))
    return h


ctypedef struct Pair:
    uint64_t code
    uint64_t inv


cdef int _cmp_pair(const void* a, const void* b) noexcept nogil:
    cdef const Pair* x = <const Pair*>a
    cdef const Pair* y = <const Pair*>b
    if x.code != y.code:
        return -1 if x.code < y.code else 1
    if x.inv != y.inv:
        return -1 if x.inv < y.inv else 1
    return 0


def morgan_environments(init, indptr, nbrs, codes, int radius):
    cdef Py_ssize_t n = len(init)
    cdef Py_ssize_t m = len(nbrs)
    cdef uint64_t* cur = <uint64_t*>malloc((n + 1) * sizeof(uint64_t))
    cdef uint64_t* nxt = <uint64_t*>malloc((n + 1) * sizeof(uint64_t))
    cdef int* ip = <int*>malloc((n + 1) * sizeof(int))
    cdef int* nb = <int*>malloc((m + 1) * sizeof(int))
    cdef int* cd = <int*>malloc((m + 1) * sizeof(int))
    cdef Pair* pairs = <Pair*>malloc((m + 1) * sizeof(Pair))
    cdef Py_ssize_t a, k, cnt
    cdef int r
    cdef uint64_t h
    cdef uint64_t* tmp
    out = []
    try:
        for a in range(n):
            cur[a] = _to_u64(init[a])
            out.append(cur[a])
        for a in range(n + 1):
            ip[a] = indptr[a]
        for k in range(m):
            nb[k] = nbrs[k]
            cd[k] = codes[k]
        for r in range(1, radius + 1):
            for a in range(n):
                cnt = 0
                for k in range(ip[a], ip[a + 1]):
                    pairs[cnt].code = <uint64_t>cd[k]
                    pairs[cnt].inv = cur[nb[k]]
                    cnt += 1
                qsort(pairs, cnt, sizeof(Pair), _cmp_pair)
                h = FNV_OFFSET
                h = _fnv_word(h, <uint64_t>r)
                h = _fnv_word(h, cur[a])
                for k in range(cnt):
                    h = _fnv_word(h, pairs[k].code)
                    h = _fnv_word(h, pairs[k].inv)
                nxt[a] = h
            tmp = cur
            cur = nxt
            nxt = tmp
            for a in range(n):
                out.append(cur[a])
    finally:
        free(cur)
        free(nxt)
        free(ip)
        free(nb)
        free(cd)
        free(pairs)
    return out


def refine_ranks(ranks, indptr, nbrs, codes):
    # Key construction is tuple-heavy; the typed loop still halves the cost.
    cdef Py_ssize_t n = len(ranks)
    cdef Py_ssize_t a, k, classes
    cur = list(ranks)
    classes = len(set(cur))
    ip = list(indptr)
    nb = list(nbrs)
    cd = list(codes)
    while True:
        keys = []
        for a in range(n):
            env = sorted([(cd[k], cur[nb[k]]) for k in range(ip[a], ip[a + 1])])
            keys.append((cur[a], tuple(env)))
        uniq = sorted(set(keys))
        index = {key: i for i, key in enumerate(uniq)}
        new = [index[key] for key in keys]
        if len(uniq) == classes:
            return new
        classes = len(uniq)
        cur = new


def subgraph_matches(int nq, int nt, order, cand, back_ptr, back_atom, back_mask,
                     t_indptr, t_nbrs, t_codes):
    cdef Py_ssize_t m = len(t_nbrs)
    cdef Py_ssize_t nb_back = len(back_atom)
    cdef int* ord_ = <int*>malloc(nq * sizeof(int))
    cdef unsigned char* cnd = <unsigned char*>malloc(nq * nt + 1)
    cdef int* bp = <int*>malloc((nq + 1) * sizeof(int))
    cdef int* ba = <int*>malloc((nb_back + 1) * sizeof(int))
    cdef int* bm = <int*>malloc((nb_back + 1) * sizeof(int))
    cdef int* tip = <int*>malloc((nt + 1) * sizeof(int))
    cdef int* tnb = <int*>malloc((m + 1) * sizeof(int))
    cdef unsigned char* bond = <unsigned char*>malloc(nt * nt + 1)
    cdef int* mapping = <int*>malloc(nq * sizeof(int))
    cdef unsigned char* used = <unsigned char*>malloc(nt + 1)
    # per-depth iteration cursor into its candidate pool
    cdef int* cursor = <int*>malloc((nq + 1) * sizeof(int))
    cdef int i, j, k, q, t, a, code, anchor, lo, hi, ok
    cdef bint found
    results = []
    if nq == 0:
        return results
    try:
        for i in range(nq):
            ord_[i] = order[i]
            mapping[i] = -1
        for i in range(nq * nt):
            cnd[i] = 1 if cand[i] else 0
        for i in range(nq + 1):
            bp[i] = back_ptr[i]
        for i in range(nb_back):
            ba[i] = back_atom[i]
            bm[i] = back_mask[i]
        for i in range(nt + 1):
            tip[i] = t_indptr[i]
        for i in range(nt * nt):
            bond[i] = 0
        for i in range(nt):
            used[i] = 0
        for a in range(nt):
            for k in range(tip[a], tip[a + 1]):
                tnb[k] = t_nbrs[k]
                bond[a * nt + tnb[k]] = <unsigned char>t_codes[k]

        k = 0
        cursor[0] = 0
        while k >= 0:
            q = ord_[k]
            if mapping[q] >= 0:
                used[mapping[q]] = 0
                mapping[q] = -1
            if bp[k + 1] > bp[k]:
                anchor = mapping[ba[bp[k]]]
                lo = tip[anchor]
                hi = tip[anchor + 1]
            else:
                anchor = -1
                lo = 0
                hi = nt
            found = False
            while cursor[k] < hi - lo:
                i = cursor[k]
                cursor[k] += 1
                t = tnb[lo + i] if anchor >= 0 else i
                if not cnd[q * nt + t] or used[t]:
                    continue
                ok = 1
                for j in range(bp[k], bp[k + 1]):
                    code = bond[mapping[ba[j]] * nt + t]
                    if code == 0 or not ((bm[j] >> code) & 1):
                        ok = 0
                        break
                if ok:
                    mapping[q] = t
                    used[t] = 1
                    found = True
                    break
            if not found:
                cursor[k] = 0
                k -= 1
                continue
            if k == nq - 1:
                results.append(tuple([mapping[i] for i in range(nq)]))
                # stay at this depth and try the next candidate
                continue
            k += 1
            cursor[k] = 0
    finally:
        free(ord_)
        free(cnd)
        free(bp)
        free(ba)
        free(bm)
        free(tip)
        free(tnb)
        free(bond)
        free(mapping)
        free(used)
        free(cursor)
    return results
