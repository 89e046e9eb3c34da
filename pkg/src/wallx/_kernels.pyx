# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled subset scan; same contract as ``_scan_py.connected_betas``."""


cdef extern from *:
    int __builtin_clzll(unsigned long long)


def connected_betas(int nv, adj, edges, wb, we, long long half):
    cdef long long cadj[64]
    cdef long long cwb[64]
    cdef long long cwe[64]
    cdef int eu[512]
    cdef int ev[512]
    cdef int ne = len(edges)
    cdef int v, k
    cdef unsigned long long mask, seen, frontier, new, m, low, limit
    cdef long long b, e
    cdef int cut
    if nv > 62 or ne > 512:
        raise ValueError("graph too large for the compiled kernel")
    for v in range(nv):
        cadj[v] = adj[v]
        cwb[v] = wb[v]
        cwe[v] = we[v]
    for k in range(ne):
        eu[k] = edges[k][0]
        ev[k] = edges[k][1]
    out = []
    limit = (<unsigned long long>1) << nv
    mask = 1
    while mask < limit:
        low = mask & (~mask + 1)
        seen = low
        frontier = low
        while frontier:
            v = 63 - __builtin_clzll(frontier)
            frontier &= ~((<unsigned long long>1) << v)
            new = (<unsigned long long>cadj[v]) & mask & ~seen
            seen |= new
            frontier |= new
        if seen == mask:
            b = 0
            e = 0
            m = mask
            while m:
                v = 63 - __builtin_clzll(m)
                m &= ~((<unsigned long long>1) << v)
                b += cwb[v]
                e += cwe[v]
            cut = 0
            for k in range(ne):
                if ((mask >> eu[k]) & 1) != ((mask >> ev[k]) & 1):
                    cut += 1
            out.append((mask, b + cut * half, e))
        mask += 1
    return out

