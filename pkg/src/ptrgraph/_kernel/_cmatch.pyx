# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled embedding enumerator.

Same contract as ``_pymatch.enumerate_embeddings``; the DFS runs over flat C
arrays with host edges encoded into a sorted int64 array probed by binary
search.
"""

from libc.stdlib cimport free, malloc

BACKEND = "compiled"


cdef inline bint _member(long long* arr, Py_ssize_t n, long long key) noexcept:
    cdef Py_ssize_t lo = 0, hi = n - 1, mid
    while lo <= hi:
        mid = (lo + hi) >> 1
        if arr[mid] == key:
            return 1
        if arr[mid] < key:
            lo = mid + 1
        else:
            hi = mid - 1
    return 0


cdef struct Ctx:
    int n
    int limit
    int nlabels
    long long nhost
    int* cand_flat
    int* cand_off
    int* order
    int* check_i
    int* check_j
    int* check_l
    int* check_off
    int* assignment
    int* owner          # host -> pattern node owning it, -1 if free
    long long* hkeys
    Py_ssize_t nhkeys
    int* alias_flat     # flattened (min, max) pairs
    int npairs


cdef bint _dfs(Ctx* ctx, int depth, list out):
    cdef int p, h, ci, k, i, j, a, b, own
    cdef long long key
    cdef bint fresh, feasible, stop
    if depth == ctx.n:
        out.append(tuple([ctx.assignment[i] for i in range(ctx.n)]))
        return ctx.limit > 0 and len(out) >= ctx.limit
    p = ctx.order[depth]
    for ci in range(ctx.cand_off[p], ctx.cand_off[p + 1]):
        h = ctx.cand_flat[ci]
        own = ctx.owner[h]
        if own >= 0:
            feasible = 0
            for k in range(ctx.npairs):
                i = ctx.alias_flat[2 * k]
                j = ctx.alias_flat[2 * k + 1]
                if (i == own and j == p) or (i == p and j == own):
                    feasible = 1
                    break
            if not feasible:
                continue
        feasible = 1
        for k in range(ctx.check_off[depth], ctx.check_off[depth + 1]):
            i = ctx.check_i[k]
            j = ctx.check_j[k]
            a = h if i == p else ctx.assignment[i]
            b = h if j == p else ctx.assignment[j]
            key = ((<long long> a) * ctx.nhost + b) * ctx.nlabels + ctx.check_l[k]
            if not _member(ctx.hkeys, ctx.nhkeys, key):
                feasible = 0
                break
        if not feasible:
            continue
        ctx.assignment[p] = h
        fresh = own < 0
        if fresh:
            ctx.owner[h] = p
        stop = _dfs(ctx, depth + 1, out)
        ctx.assignment[p] = -1
        if fresh:
            ctx.owner[h] = -1
        if stop:
            return 1
    return 0


def enumerate_embeddings(cands, pedges, hedges, alias_ok, int limit=0):
    """See ``ptrgraph._kernel._pymatch.enumerate_embeddings``."""
    cdef int n = len(cands)
    if n == 0:
        return [()]
    cand_lists = [sorted(cl) for cl in cands]
    for cl in cand_lists:
        if not cl:
            return []

    # size of the dense host-index space and label space
    cdef long long nhost = 0
    cdef int nlabels = 1
    for cl in cand_lists:
        for h in cl:
            if h + 1 > nhost:
                nhost = h + 1
    for (_i, _j, _l) in pedges:
        if _l + 1 > nlabels:
            nlabels = _l + 1
    for (_a, _b, _l) in hedges:
        if _a + 1 > nhost:
            nhost = _a + 1
        if _b + 1 > nhost:
            nhost = _b + 1
        if _l + 1 > nlabels:
            nlabels = _l + 1

    # static matching order: most-connected-to-placed, then fewest candidates
    nbrs = [set() for _ in range(n)]
    for (_i, _j, _l) in pedges:
        if _i != _j:
            nbrs[_i].add(_j)
            nbrs[_j].add(_i)
    order_py = []
    placed = [False] * n
    for _ in range(n):
        best_key = None
        best_i = -1
        for i_py in range(n):
            if placed[i_py]:
                continue
            conn = 0
            for j_py in nbrs[i_py]:
                if placed[j_py]:
                    conn += 1
            key_py = (-conn, len(cand_lists[i_py]), i_py)
            if best_key is None or key_py < best_key:
                best_key, best_i = key_py, i_py
        placed[best_i] = True
        order_py.append(best_i)
    pos = {node: d for d, node in enumerate(order_py)}
    checks_py = [[] for _ in range(n)]
    for (_i, _j, _l) in pedges:
        d = pos[_i] if pos[_i] > pos[_j] else pos[_j]
        checks_py[d].append((_i, _j, _l))

    hkeys_py = sorted(
        ((<long long> _a) * nhost + _b) * nlabels + _l for (_a, _b, _l) in hedges
    )
    alias_py = sorted(alias_ok)

    cdef Ctx ctx
    ctx.n = n
    ctx.limit = limit
    ctx.nhost = nhost
    ctx.nlabels = nlabels
    ctx.nhkeys = len(hkeys_py)
    ctx.npairs = len(alias_py)

    cdef Py_ssize_t total = 0
    for cl in cand_lists:
        total += len(cl)
    cdef Py_ssize_t ncheck = 0
    for ch in checks_py:
        ncheck += len(ch)

    ctx.cand_flat = <int*> malloc(sizeof(int) * (total if total else 1))
    ctx.cand_off = <int*> malloc(sizeof(int) * (n + 1))
    ctx.order = <int*> malloc(sizeof(int) * n)
    ctx.check_i = <int*> malloc(sizeof(int) * (ncheck if ncheck else 1))
    ctx.check_j = <int*> malloc(sizeof(int) * (ncheck if ncheck else 1))
    ctx.check_l = <int*> malloc(sizeof(int) * (ncheck if ncheck else 1))
    ctx.check_off = <int*> malloc(sizeof(int) * (n + 1))
    ctx.assignment = <int*> malloc(sizeof(int) * n)
    ctx.owner = <int*> malloc(sizeof(int) * (nhost if nhost else 1))
    ctx.hkeys = <long long*> malloc(
        sizeof(long long) * (ctx.nhkeys if ctx.nhkeys else 1)
    )
    ctx.alias_flat = <int*> malloc(sizeof(int) * (2 * ctx.npairs if ctx.npairs else 1))

    cdef int idx
    cdef Py_ssize_t w
    out = []
    try:
        if (ctx.cand_flat == NULL or ctx.cand_off == NULL or ctx.order == NULL
                or ctx.check_i == NULL or ctx.check_j == NULL
                or ctx.check_l == NULL or ctx.check_off == NULL
                or ctx.assignment == NULL or ctx.owner == NULL
                or ctx.hkeys == NULL or ctx.alias_flat == NULL):
            raise MemoryError()
        w = 0
        for idx in range(n):
            ctx.cand_off[idx] = w
            for h in cand_lists[idx]:
                ctx.cand_flat[w] = h
                w += 1
        ctx.cand_off[n] = w
        for idx in range(n):
            ctx.order[idx] = order_py[idx]
            ctx.assignment[idx] = -1
        w = 0
        for idx in range(n):
            ctx.check_off[idx] = w
            for (_i, _j, _l) in checks_py[idx]:
                ctx.check_i[w] = _i
                ctx.check_j[w] = _j
                ctx.check_l[w] = _l
                w += 1
        ctx.check_off[n] = w
        for w in range(<Py_ssize_t> nhost):
            ctx.owner[w] = -1
        for w in range(ctx.nhkeys):
            ctx.hkeys[w] = hkeys_py[w]
        for idx in range(ctx.npairs):
            ctx.alias_flat[2 * idx] = alias_py[idx][0]
            ctx.alias_flat[2 * idx + 1] = alias_py[idx][1]

        _dfs(&ctx, 0, out)
    finally:
        free(ctx.cand_flat)
        free(ctx.cand_off)
        free(ctx.order)
        free(ctx.check_i)
        free(ctx.check_j)
        free(ctx.check_l)
        free(ctx.check_off)
        free(ctx.assignment)
        free(ctx.owner)
        free(ctx.hkeys)
        free(ctx.alias_flat)

    out.sort()
    return out
