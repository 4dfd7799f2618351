"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Selected at import when the extension is unavailable (or when
``PHDIM_PURE_PYTHON=1``). Outputs are identical to the compiled versions.
"""

import heapq

import numpy as np

# rows of the batched min-cofacet scan
_BATCH = 2048


def prim_mst(x, chebyshev=False):
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    ne = max(n - 1, 0)
    lengths = np.empty(ne)
    parent = np.empty(ne, dtype=np.int64)
    child = np.empty(ne, dtype=np.int64)
    if n == 0:
        return lengths, parent, child
    best = np.full(n, np.inf)
    src = np.zeros(n, dtype=np.int64)
    used = np.zeros(n, dtype=bool)
    used[0] = True
    cur = 0
    for step in range(ne):
        diff = x - x[cur]
        if chebyshev:
            d = np.abs(diff).max(axis=1)
        else:
            # coordinate-by-coordinate, the same summation order as the compiled loop
            d = diff[:, 0] * diff[:, 0]
            for c in range(1, x.shape[1]):
                d = d + diff[:, c] * diff[:, c]
        better = (d < best) & ~used
        best[better] = d[better]
        src[better] = cur
        masked = np.where(used, np.inf, best)
        bi = int(np.argmin(masked))
        used[bi] = True
        lengths[step] = best[bi] if chebyshev else np.sqrt(best[bi])
        parent[step] = src[bi]
        child[step] = bi
        cur = bi
    return lengths, parent, child


def kruskal_select(ei, ej, n):
    par = list(range(n))

    def find(a):
        while par[a] != a:
            par[a] = par[par[a]]
            a = par[a]
        return a

    mask = np.zeros(len(ei), dtype=np.uint8)
    merged = 0
    for k, (i, j) in enumerate(zip(np.asarray(ei).tolist(), np.asarray(ej).tolist())):
        if merged == n - 1:
            break
        a, b = find(i), find(j)
        if a != b:
            if a < b:
                par[b] = a
            else:
                par[a] = b
            mask[k] = 1
            merged += 1
    return mask


def pair_counts_below(x, radii):
    x = np.ascontiguousarray(x, dtype=np.float64)
    sq = np.asarray(radii, dtype=np.float64) ** 2
    counts = np.zeros(len(sq), dtype=np.int64)
    n = x.shape[0]
    for start in range(0, n, 512):
        block = x[start:start + 512]
        d = ((block[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
        rows = np.arange(start, start + len(block))[:, None]
        d = d[np.arange(n)[None, :] > rows]
        counts += (d[:, None] < sq[None, :]).sum(axis=0)
    return counts


def _codes(verts, extra, n):
    """Lex code of sorted(verts_row + [extra]) for every row."""
    full = np.sort(np.column_stack([verts, extra]), axis=1).astype(np.int64)
    code = np.zeros(len(full), dtype=np.int64)
    for c in range(full.shape[1]):
        code = code * n + full[:, c]
    return code


def _min_cofacets(R, verts, srank, max_rank, base):
    n = R.shape[0]
    N = len(verts)
    out = np.full(N, -1, dtype=np.int64)
    big = np.iinfo(np.int32).max
    for start in range(0, N, _BATCH):
        v = verts[start:start + _BATCH]
        r = srank[start:start + _BATCH]
        M = np.maximum.reduce([R[v[:, a]] for a in range(v.shape[1])])
        M = np.maximum(M, r[:, None])
        rows = np.arange(len(v))
        for a in range(v.shape[1]):
            M[rows, v[:, a]] = big
        M[M > max_rank] = big
        best = M.min(axis=1)
        ok = best != big
        l = np.argmax(M == best[:, None], axis=1)
        key = best.astype(np.int64) * base + _codes(v, l, n)
        out[start:start + _BATCH] = np.where(ok, key, -1)
    return out


def _cofacet_keys(R, v, rank, max_rank, base, floor_key=-1):
    n = R.shape[0]
    others = np.setdiff1d(np.arange(n), v)
    r = np.maximum(R[v][:, others].max(axis=0), rank)
    keep = r <= max_rank
    others, r = others[keep], r[keep]
    codes = _codes(np.broadcast_to(v, (len(others), len(v))), others, n)
    keys = r.astype(np.int64) * base + codes
    return keys[keys > floor_key].tolist()


def _pop_pivot(heap):
    while heap:
        k = heapq.heappop(heap)
        if heap and heap[0] == k:
            heapq.heappop(heap)
            continue
        heapq.heappush(heap, k)
        return k
    return -1


def rips_reduce(R, verts, srank, cleared, max_rank, base):
    R = np.asarray(R, dtype=np.int32)
    verts = np.asarray(verts, dtype=np.int32)
    srank = np.asarray(srank, dtype=np.int32)
    cleared = np.asarray(cleared, dtype=bool)
    N = len(verts)
    death = np.full(N, -1, dtype=np.int64)
    live = np.flatnonzero(~cleared)
    first = np.full(N, -1, dtype=np.int64)
    if len(live):
        first[live] = _min_cofacets(R, verts[live], srank[live], max_rank, base)
    # owner value: int column index (coboundary regenerated) or stored reduced column
    owner = {}
    slow = steps = 0
    for s in range(N - 1, -1, -1):
        if cleared[s]:
            continue
        key = int(first[s])
        if key < 0:
            continue
        if key not in owner:
            owner[key] = s
            death[s] = key
            continue
        slow += 1
        heap = _cofacet_keys(R, verts[s], srank[s], max_rank, base)
        heapq.heapify(heap)
        pivot = key
        while True:
            if pivot not in owner:
                heapq.heappop(heap)
                col = []
                while heap:
                    k = heapq.heappop(heap)
                    if heap and heap[0] == k:
                        heapq.heappop(heap)
                        continue
                    col.append(k)
                owner[pivot] = col
                death[s] = pivot
                break
            steps += 1
            # the pivot sits alone on top of the heap and cancels with the owner's
            heapq.heappop(heap)
            src = owner[pivot]
            if isinstance(src, list):
                add = src
            else:
                add = _cofacet_keys(R, verts[src], srank[src], max_rank, base, pivot)
            for k in add:
                heapq.heappush(heap, k)
            pivot = _pop_pivot(heap)
            if pivot < 0:
                break
    return death, slow, steps
