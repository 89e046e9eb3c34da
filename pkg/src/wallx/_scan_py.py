"""Pure-Python subset scan used when the compiled kernel is unavailable."""


def connected_betas(nv, adj, edges, wb, we, half):
    """Scaled beta values on every connected nonempty vertex mask.

    ``adj[v]`` is the neighbour bitmask of ``v``; ``wb``/``we`` are the
    integer-scaled per-vertex weights (base and infinitesimal parts) and
    ``half`` the scaled contribution of one cut edge.  Returns a list of
    ``(mask, base, eps)`` triples in increasing mask order.
    """
    out = []
    for mask in range(1, 1 << nv):
        low = mask & -mask
        seen = low
        frontier = low
        while frontier:
            v = frontier.bit_length() - 1
            frontier &= ~(1 << v)
            new = adj[v] & mask & ~seen
            seen |= new
            frontier |= new
        if seen != mask:
            continue
        b = 0
        e = 0
        m = mask
        while m:
            v = m.bit_length() - 1
            m &= ~(1 << v)
            b += wb[v]
            e += we[v]
        cut = 0
        for u, v in edges:
            if (mask >> u & 1) != (mask >> v & 1):
                cut += 1
        out.append((mask, b + cut * half, e))
    return out
