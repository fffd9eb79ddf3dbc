"""Ring perception on plain adjacency lists.

``sssr`` returns a minimum cycle basis (Horton candidates reduced by GF(2)
elimination), so the ring count always equals the cyclomatic number.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

Adjacency = Sequence[Sequence[int]]


def bridges(adj: Adjacency) -> set[tuple[int, int]]:
    """Edges whose removal disconnects the graph, as sorted pairs."""
    n = len(adj)
    disc = [-1] * n
    low = [0] * n
    out: set[tuple[int, int]] = set()
    timer = 0
    for root in range(n):
        if disc[root] >= 0:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack: list[tuple[int, int, int]] = [(root, -1, 0)]
        while stack:
            u, parent, i = stack[-1]
            if i < len(adj[u]):
                stack[-1] = (u, parent, i + 1)
                v = adj[u][i]
                if v == parent:
                    continue
                if disc[v] < 0:
                    disc[v] = low[v] = timer
                    timer += 1
                    stack.append((v, u, 0))
                else:
                    low[u] = min(low[u], disc[v])
            else:
                stack.pop()
                if parent >= 0:
                    low[parent] = min(low[parent], low[u])
                    if low[u] > disc[parent]:
                        out.add((min(u, parent), max(u, parent)))
    return out


def components(adj: Adjacency) -> list[list[int]]:
    n = len(adj)
    seen = [False] * n
    out = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    queue.append(v)
        out.append(sorted(comp))
    return out


def _bfs_tree(adj: Adjacency, src: int) -> tuple[list[int], list[int]]:
    n = len(adj)
    dist = [-1] * n
    parent = [-1] * n
    dist[src] = 0
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                parent[v] = u
                queue.append(v)
    return dist, parent


def _path(parent: list[int], v: int) -> list[int]:
    out = [v]
    while parent[v] >= 0:
        v = parent[v]
        out.append(v)
    return out


def _normalize_cycle(cycle: list[int]) -> tuple[int, ...]:
    k = cycle.index(min(cycle))
    rot = cycle[k:] + cycle[:k]
    if len(rot) > 2 and rot[-1] < rot[1]:
        rot = [rot[0]] + rot[:0:-1]
    return tuple(rot)


def sssr(adj: Adjacency) -> list[tuple[int, ...]]:
    """Minimum cycle basis; each ring is an ordered cycle of vertex indices."""
    n = len(adj)
    bridge_set = bridges(adj)
    # Work on the cyclic part only: drop bridges, then isolated vertices vanish.
    cyc_adj = [
        sorted(v for v in adj[u] if (min(u, v), max(u, v)) not in bridge_set) for u in range(n)
    ]
    edges = sorted({(min(u, v), max(u, v)) for u in range(n) for v in cyc_adj[u]})
    if not edges:
        return []
    edge_bit = {e: i for i, e in enumerate(edges)}
    verts = sorted({u for e in edges for u in e})
    n_comp = len([c for c in components(cyc_adj) if len(c) > 1])
    target = len(edges) - len(verts) + n_comp

    candidates: dict[int, tuple[int, ...]] = {}
    for v in verts:
        dist, parent = _bfs_tree(cyc_adj, v)
        for x, y in edges:
            if dist[x] < 0 or dist[y] < 0:
                continue
            px = _path(parent, x)
            py = _path(parent, y)
            if set(px) & set(py) != {v}:
                continue
            # v..x along the tree, then the edge x-y, then y back towards v
            cycle = px[::-1] + py[:-1]
            if len(cycle) < 3:
                continue
            mask = 0
            ring = cycle
            for i in range(len(ring)):
                a, b = ring[i], ring[(i + 1) % len(ring)]
                mask |= 1 << edge_bit[(min(a, b), max(a, b))]
            if mask not in candidates:
                candidates[mask] = _normalize_cycle(ring)

    ordered = sorted(candidates.items(), key=lambda kv: (len(kv[1]), kv[1]))
    basis: dict[int, int] = {}  # pivot bit -> reduced vector
    rings: list[tuple[int, ...]] = []
    for mask, ring in ordered:
        vec = mask
        while vec:
            pivot = vec.bit_length() - 1
            if pivot in basis:
                vec ^= basis[pivot]
            else:
                basis[pivot] = vec
                rings.append(ring)
                break
        if len(rings) == target:
            break
    return rings
