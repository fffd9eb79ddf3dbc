"""Reference implementations of the hot loops.

The compiled module ``_ckernels`` must agree with these bit for bit; the
test suite runs both against each other.
"""

from __future__ import annotations

from typing import Sequence

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = 0xFFFFFFFFFFFFFFFF

BACKEND = "python"


def fnv1a64(words: Sequence[int]) -> int:
    """FNV-1a over the little-endian 8-byte encoding of each word."""
    h = FNV_OFFSET
    for w in words:
        w &= MASK64
        for _ in range(8):
            h ^= w & 0xFF
            h = (h * FNV_PRIME) & MASK64
            w >>= 8
    return h


def morgan_environments(
    init: Sequence[int],
    indptr: Sequence[int],
    nbrs: Sequence[int],
    codes: Sequence[int],
    radius: int,
) -> list[int]:
    """Return every environment hash, radius-major then atom order."""
    n = len(init)
    current = [w & MASK64 for w in init]
    out = list(current)
    for r in range(1, radius + 1):
        nxt = []
        for a in range(n):
            pairs = sorted(
                (codes[k], current[nbrs[k]]) for k in range(indptr[a], indptr[a + 1])
            )
            words = [r, current[a]]
            for code, inv in pairs:
                words.append(code)
                words.append(inv)
            nxt.append(fnv1a64(words))
        current = nxt
        out.extend(current)
    return out


def refine_ranks(
    ranks: Sequence[int],
    indptr: Sequence[int],
    nbrs: Sequence[int],
    codes: Sequence[int],
) -> list[int]:
    """Iterate neighbourhood refinement until the partition stops splitting."""
    n = len(ranks)
    cur = list(ranks)
    classes = len(set(cur))
    while True:
        keys = [
            (
                cur[a],
                tuple(sorted((codes[k], cur[nbrs[k]]) for k in range(indptr[a], indptr[a + 1]))),
            )
            for a in range(n)
        ]
        uniq = sorted(set(keys))
        index = {k: i for i, k in enumerate(uniq)}
        new = [index[k] for k in keys]
        if len(uniq) == classes:
            return new
        classes = len(uniq)
        cur = new


def subgraph_matches(
    nq: int,
    nt: int,
    order: Sequence[int],
    cand: Sequence[int],
    back_ptr: Sequence[int],
    back_atom: Sequence[int],
    back_mask: Sequence[int],
    t_indptr: Sequence[int],
    t_nbrs: Sequence[int],
    t_codes: Sequence[int],
) -> list[tuple[int, ...]]:
    """Enumerate injective query->target maps.

    ``order`` is the visiting order of query atoms. For the atom at position
    ``k`` the slice ``back_ptr[k]:back_ptr[k+1]`` lists earlier query atoms it
    must be bonded to (``back_atom``) and the allowed target bond codes as a
    bitmask (``back_mask``, bit ``c`` for code ``c``). ``cand`` is a flattened
    ``nq x nt`` compatibility matrix. Returns maps indexed by query atom.
    """
    if nq == 0:
        return []
    bond = {}
    for a in range(nt):
        for k in range(t_indptr[a], t_indptr[a + 1]):
            bond[(a, t_nbrs[k])] = t_codes[k]
    mapping = [-1] * nq
    used = [False] * nt
    results: list[tuple[int, ...]] = []

    def feasible(k: int, q: int, t: int) -> bool:
        if not cand[q * nt + t] or used[t]:
            return False
        for j in range(back_ptr[k], back_ptr[k + 1]):
            code = bond.get((mapping[back_atom[j]], t), 0)
            if code == 0 or not (back_mask[j] >> code) & 1:
                return False
        return True

    def extend(k: int) -> None:
        if k == nq:
            results.append(tuple(mapping))
            return
        q = order[k]
        if back_ptr[k + 1] > back_ptr[k]:
            anchor = mapping[back_atom[back_ptr[k]]]
            pool = [t_nbrs[i] for i in range(t_indptr[anchor], t_indptr[anchor + 1])]
        else:
            pool = range(nt)
        for t in pool:
            if feasible(k, q, t):
                mapping[q] = t
                used[t] = True
                extend(k + 1)
                used[t] = False
                mapping[q] = -1

    extend(0)
    return results
