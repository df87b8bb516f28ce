"""Pure-Python embedding enumerator (fallback backend).

Enumerates injective assignments of pattern nodes to host nodes such that
every pattern edge lands on a host edge. This is the innermost loop of rule
matching, constraint checking and isomorphism testing; the compiled backend
in ``_cmatch.pyx`` implements the identical contract.
"""

from __future__ import annotations

from typing import Sequence

BACKEND = "pure"


def enumerate_embeddings(
    cands: Sequence[Sequence[int]],
    pedges: Sequence[tuple[int, int, int]],
    hedges: frozenset[tuple[int, int, int]],
    alias_ok: frozenset[tuple[int, int]],
    limit: int = 0,
) -> list[tuple[int, ...]]:
    """All embeddings as host-index tuples in pattern-node order.

    ``cands[i]`` lists admissible host indices for pattern node ``i``;
    ``pedges`` holds ``(src, tgt, label)`` over pattern indices; ``hedges``
    is the host edge-presence set ``(src, tgt, label)``. Distinct pattern
    nodes get distinct hosts unless their pair is in ``alias_ok``
    (stored as ``(min, max)``). With ``limit == 0`` the full, lexicographically
    sorted result is returned; with ``limit > 0`` the search stops after
    ``limit`` hits (use for existence checks only, ordering is then
    search-dependent).
    """
    n = len(cands)
    if n == 0:
        return [()]
    if any(len(c) == 0 for c in cands):
        return []

    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i, j, _ in pedges:
        if i != j:
            nbrs[i].add(j)
            nbrs[j].add(i)

    # Static order: most constrained first, preferring nodes adjacent to
    # already-ordered ones so edge checks prune early.
    order: list[int] = []
    placed = [False] * n
    for _ in range(n):
        best_key: tuple | None = None
        best_i = -1
        for i in range(n):
            if placed[i]:
                continue
            conn = sum(1 for j in nbrs[i] if placed[j])
            key = (-conn, len(cands[i]), i)
            if best_key is None or key < best_key:
                best_key, best_i = key, i
        placed[best_i] = True
        order.append(best_i)
    pos = {node: d for d, node in enumerate(order)}

    checks: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for i, j, lbl in pedges:
        checks[max(pos[i], pos[j])].append((i, j, lbl))

    assignment = [-1] * n
    used: dict[int, int] = {}
    out: list[tuple[int, ...]] = []

    def dfs(depth: int) -> bool:
        if depth == n:
            out.append(tuple(assignment))
            return limit > 0 and len(out) >= limit
        p = order[depth]
        for h in cands[p]:
            owner = used.get(h)
            if owner is not None and (min(owner, p), max(owner, p)) not in alias_ok:
                continue
            feasible = True
            for i, j, lbl in checks[depth]:
                a = h if i == p else assignment[i]
                b = h if j == p else assignment[j]
                if (a, b, lbl) not in hedges:
                    feasible = False
                    break
            if not feasible:
                continue
            assignment[p] = h
            fresh = owner is None
            if fresh:
                used[h] = p
            stop = dfs(depth + 1)
            assignment[p] = -1
            if fresh:
                del used[h]
            if stop:
                return True
        return False

    dfs(0)
    out.sort()
    return out
