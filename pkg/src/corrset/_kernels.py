"""Compiled inner loops.

Block codes are big-endian: the window ``b_0 b_1 ... b_{k-1}`` has code
``sum(b_j << (k - 1 - j))``.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def cyclic_block_counts(bits, k):
    """Histogram of the ``len(bits)`` cyclic windows of length ``k``."""
    n = bits.shape[0]
    counts = np.zeros(1 << k, np.int64)
    mask = (1 << k) - 1
    code = 0
    for j in range(k):
        code = (code << 1) | bits[j % n]
    for i in range(n):
        counts[code] += 1
        code = ((code << 1) | bits[(i + k) % n]) & mask
    return counts


@numba.njit(cache=True)
def window_codes(bits, k, start, stop, cyclic):
    """Codes of the windows starting at ``start..stop-1``.

    With ``cyclic`` the bits are read as one period of a periodic
    sequence; otherwise every window must fit inside ``bits``.
    """
    n = bits.shape[0]
    out = np.empty(stop - start, np.int64)
    mask = (1 << k) - 1
    code = 0
    for j in range(k):
        code = (code << 1) | bits[(start + j) % n]
    for i in range(start, stop):
        out[i - start] = code
        nxt = i + k
        if cyclic:
            nxt = nxt % n
        elif nxt >= n:
            nxt = n - 1  # value unused: last window already emitted
        code = ((code << 1) | bits[nxt]) & mask
    return out


@numba.njit(cache=True)
def eulerian_word(counts, k, total):
    """Bits of Eulerian circuits covering an edge multiset of the order-(k-1) de Bruijn graph.

    ``counts[w]`` is the multiplicity of the edge ``w`` (a k-block) from
    node ``w >> 1`` to node ``w & (2**(k-1) - 1)``.  Every node must be
    balanced.  Circuits of separate components are concatenated, lowest
    start node first; at each node the 0-edge is taken before the 1-edge.
    ``counts`` is consumed.
    """
    mask = (1 << (k - 1)) - 1
    n_nodes = 1 << (k - 1)
    out = np.empty(total, np.uint8)
    node_stack = np.empty(total + 1, np.int32)
    edge_stack = np.empty(total + 1, np.int8)
    circuit = np.empty(total, np.int8)
    pos = 0
    for start in range(n_nodes):
        if counts[2 * start] + counts[2 * start + 1] == 0:
            continue
        sp = 1
        node_stack[0] = start
        edge_stack[0] = -1
        cp = 0
        while sp > 0:
            u = node_stack[sp - 1]
            if counts[2 * u] > 0:
                counts[2 * u] -= 1
                node_stack[sp] = (2 * u) & mask
                edge_stack[sp] = 0
                sp += 1
            elif counts[2 * u + 1] > 0:
                counts[2 * u + 1] -= 1
                node_stack[sp] = (2 * u + 1) & mask
                edge_stack[sp] = 1
                sp += 1
            else:
                sp -= 1
                if edge_stack[sp] >= 0:
                    circuit[cp] = edge_stack[sp]
                    cp += 1
        for i in range(cp - 1, -1, -1):
            out[pos] = circuit[i]
            pos += 1
    return out[:pos]


@numba.njit(cache=True)
def markov_walk(q1, start, uniforms, k):
    """Bits of a walk on (k-1)-blocks: from node u emit 1 with probability ``q1[u]``."""
    n = uniforms.shape[0]
    mask = (1 << (k - 1)) - 1
    out = np.empty(n, np.uint8)
    u = start
    for i in range(n):
        b = 1 if uniforms[i] < q1[u] else 0
        out[i] = b
        u = ((u << 1) | b) & mask
    return out


@numba.njit(cache=True)
def balance_counts(g, can_up, can_down, k):
    """Make every node of the order-(k-1) de Bruijn multigraph balanced.

    ``g[w]`` is the multiplicity of edge ``w``; an edge may move up by one
    if ``can_up[w]`` and down by one if ``can_down[w]``.  Excess units are
    routed to deficits one at a time along shortest residual paths
    (Ford-Fulkerson with BFS), nodes in ascending order.  ``g`` is
    updated in place; returns False if no balanced assignment exists.
    """
    m = 1 << (k - 1)
    need = np.zeros(m, np.int64)  # in-degree minus out-degree
    for w in range(1 << k):
        need[w & (m - 1)] += g[w]
        need[w >> 1] -= g[w]
    delta = np.zeros(1 << k, np.int8)
    stamp = np.zeros(m, np.int64)
    via = np.empty(m, np.int64)  # edge code used to reach the node
    dirn = np.empty(m, np.int8)  # +1 edge raised, -1 edge lowered
    queue = np.empty(m, np.int64)
    run = 0
    for s in range(m):
        while need[s] > 0:
            run += 1
            stamp[s] = run
            head = 0
            tail = 1
            queue[0] = s
            found = -1
            while head < tail and found < 0:
                u = queue[head]
                head += 1
                for b in range(2):
                    # forward along the out-edge u -> v
                    w = 2 * u + b
                    v = w & (m - 1)
                    if stamp[v] != run and ((delta[w] == 0 and can_up[w]) or delta[w] == -1):
                        stamp[v] = run
                        via[v] = w
                        dirn[v] = 1
                        queue[tail] = v
                        tail += 1
                        if need[v] < 0:
                            found = v
                            break
                    # backward along the in-edge t -> u
                    w = (b << (k - 1)) | u
                    v = w >> 1
                    if stamp[v] != run and ((delta[w] == 0 and can_down[w]) or delta[w] == 1):
                        stamp[v] = run
                        via[v] = w
                        dirn[v] = -1
                        queue[tail] = v
                        tail += 1
                        if need[v] < 0:
                            found = v
                            break
            if found < 0:
                return False
            v = found
            while v != s:
                w = via[v]
                if dirn[v] == 1:
                    delta[w] += 1
                    g[w] += 1
                    v = w >> 1
                else:
                    delta[w] -= 1
                    g[w] -= 1
                    v = w & (m - 1)
            need[s] -= 1
            need[found] += 1
    return True
