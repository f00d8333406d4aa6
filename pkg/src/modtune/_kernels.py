"""Compiled inner loops.

Everything here works on CSR arrays (``indptr``, ``indices``) plus integer
degree vectors. Modularity changes are carried as exact integers: a single
node move changes ``4 m**2 * Q`` by ``2 * num`` with

    num = 2m (a_Y - a_X) - k_l (K_Y - K_X + k_l)

so ties between candidate moves are detected without float noise.
"""

import numpy as np
from numba import njit

SENTINEL = -1


@njit(cache=True)
def subgraph_csr(indptr, indices, members, position):
    """Induced CSR on ``members``; ``position`` maps global -> local (or -1)."""
    n = members.shape[0]
    for a in range(n):
        position[members[a]] = a
    counts = np.zeros(n + 1, dtype=np.int64)
    for a in range(n):
        i = members[a]
        c = 0
        for p in range(indptr[i], indptr[i + 1]):
            if position[indices[p]] >= 0:
                c += 1
        counts[a + 1] = c
    sub_ptr = np.cumsum(counts)
    sub_idx = np.empty(sub_ptr[n], dtype=np.int64)
    for a in range(n):
        i = members[a]
        w = sub_ptr[a]
        for p in range(indptr[i], indptr[i + 1]):
            b = position[indices[p]]
            if b >= 0:
                sub_idx[w] = b
                w += 1
    for a in range(n):
        position[members[a]] = -1
    return sub_ptr, sub_idx


@njit(cache=True)
def bc_matvec(indptr, indices, k, diag, inv2m, shift, x, out):
    kx = 0.0
    for i in range(x.shape[0]):
        kx += k[i] * x[i]
    for i in range(x.shape[0]):
        s = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            s += x[indices[p]]
        out[i] = s - k[i] * kx * inv2m - diag[i] * x[i] + shift * x[i]


@njit(cache=True)
def power_iterate(indptr, indices, k, diag, inv2m, shift, x0, tol, res_tol,
                  max_iters, coarse):
    """Power iteration on ``B^(C) + shift*I``.

    Returns ``(x, lam, norm, residual, iterations, converged)`` where ``lam``
    is the Rayleigh quotient of the shifted operator at ``x`` and ``norm`` is
    ``||(B^(C) + shift) x||``. In coarse mode convergence is judged on the
    norm alone, which settles even when the dominant magnitude is shared by a
    +/- eigenvalue pair.
    """
    n = x0.shape[0]
    x = x0 / np.sqrt(np.dot(x0, x0))
    y = np.empty(n)
    lam_prev = 0.0
    ny_prev = 0.0
    best_res = np.inf
    lam = 0.0
    ny = 0.0
    for it in range(1, max_iters + 1):
        bc_matvec(indptr, indices, k, diag, inv2m, shift, x, y)
        lam = np.dot(x, y)
        ny = np.sqrt(np.dot(y, y))
        if coarse:
            if it > 1 and abs(ny - ny_prev) <= tol * ny:
                return x, lam, ny, _residual(x, y, lam), it, True
        elif (it > 1 and abs(lam - lam_prev) <= tol * max(abs(lam), 1.0)) or it == max_iters:
            # residual only once the eigenvalue has settled
            r = _residual(x, y, lam)
            if r < best_res:
                best_res = r
            if r <= res_tol and it > 1:
                return x, lam, ny, r, it, True
        if ny == 0.0:
            return x, lam, ny, 0.0, it, True
        lam_prev = lam
        ny_prev = ny
        for i in range(n):
            x[i] = y[i] / ny
    return x, lam, ny, best_res, max_iters, False


@njit(cache=True)
def _residual(x, y, lam):
    r = 0.0
    for i in range(x.shape[0]):
        d = y[i] - lam * x[i]
        r += d * d
    return np.sqrt(r)


@njit(cache=True)
def group_affinity(indptr, indices, labels, n_groups):
    n = labels.shape[0]
    aff = np.zeros((n, n_groups), dtype=np.int64)
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            aff[i, labels[indices[p]]] += 1
    return aff


@njit(cache=True)
def kl_pass(indptr, indices, k, two_m, labels, n_groups, seed):
    """One Kernighan-Lin pass over a fixed set of ``n_groups`` groups.

    Every node moves exactly once, always taking the best available move
    (even if negative, uniform choice among exact ties). The labels are then
    rolled back to the best intermediate state. Returns the move trace as
    ``(nodes, from, to, cumulative_num)`` and ``best_index`` (number of moves
    kept); ``cumulative_num[t]`` is the running sum of ``num`` after move t.
    """
    np.random.seed(seed)
    n = labels.shape[0]
    aff = group_affinity(indptr, indices, labels, n_groups)
    K = np.zeros(n_groups, dtype=np.int64)
    for i in range(n):
        K[labels[i]] += k[i]
    moved = np.zeros(n, dtype=np.bool_)
    t_node = np.empty(n, dtype=np.int64)
    t_from = np.empty(n, dtype=np.int64)
    t_to = np.empty(n, dtype=np.int64)
    t_cum = np.empty(n, dtype=np.int64)
    cum = 0
    best_cum = 0
    best_index = 0
    for step in range(n):
        best_num = np.iinfo(np.int64).min
        ties = 0
        pick_l = -1
        pick_b = -1
        for l in range(n):
            if moved[l]:
                continue
            a = labels[l]
            kl = k[l]
            for b in range(n_groups):
                if b == a:
                    continue
                num = two_m * (aff[l, b] - aff[l, a]) - kl * (K[b] - K[a] + kl)
                if num > best_num:
                    best_num = num
                    ties = 1
                    pick_l = l
                    pick_b = b
                elif num == best_num:
                    ties += 1
                    if np.random.randint(0, ties) == 0:
                        pick_l = l
                        pick_b = b
        a = labels[pick_l]
        labels[pick_l] = pick_b
        K[a] -= k[pick_l]
        K[pick_b] += k[pick_l]
        for p in range(indptr[pick_l], indptr[pick_l + 1]):
            j = indices[p]
            aff[j, a] -= 1
            aff[j, pick_b] += 1
        moved[pick_l] = True
        cum += best_num
        t_node[step] = pick_l
        t_from[step] = a
        t_to[step] = pick_b
        t_cum[step] = cum
        if cum > best_cum:
            best_cum = cum
            best_index = step + 1
    for step in range(n - 1, best_index - 1, -1):
        labels[t_node[step]] = t_from[step]
    return t_node, t_from, t_to, t_cum, best_index


@njit(cache=True)
def final_pass(indptr, indices, k, two_m, labels, neighbor_only, seed):
    """One final-tuning sweep over the whole graph.

    Candidate targets for a node are the other existing communities (only
    those of its neighbours when ``neighbor_only``) plus a fresh singleton
    community, unless the node already is a singleton. Fresh communities get
    new ids above the current maximum; ids emptied mid-sweep are left empty,
    the caller compacts. Nodes without any candidate are fixed unmoved and do
    not appear in the trace. Returns ``(nodes, from, to, cumulative_num,
    n_moves, best_index)``.
    """
    np.random.seed(seed)
    n = labels.shape[0]
    cap = n
    for i in range(n):
        if labels[i] + 1 > cap:
            cap = labels[i] + 1
    cap += n + 1
    K = np.zeros(cap, dtype=np.int64)
    size = np.zeros(cap, dtype=np.int64)
    next_id = 0
    for i in range(n):
        K[labels[i]] += k[i]
        size[labels[i]] += 1
        if labels[i] + 1 > next_id:
            next_id = labels[i] + 1
    cnt = np.zeros(cap, dtype=np.int64)
    touched = np.empty(n + 1, dtype=np.int64)
    fixed = np.zeros(n, dtype=np.bool_)
    t_node = np.empty(n, dtype=np.int64)
    t_from = np.empty(n, dtype=np.int64)
    t_to = np.empty(n, dtype=np.int64)
    t_cum = np.empty(n, dtype=np.int64)
    n_moves = 0
    cum = 0
    best_cum = 0
    best_index = 0
    remaining = n
    while remaining > 0:
        best_num = np.iinfo(np.int64).min
        ties = 0
        pick_l = -1
        pick_y = -1
        for l in range(n):
            if fixed[l]:
                continue
            x = labels[l]
            kl = k[l]
            n_touched = 0
            for p in range(indptr[l], indptr[l + 1]):
                c = labels[indices[p]]
                if cnt[c] == 0:
                    touched[n_touched] = c
                    n_touched += 1
                cnt[c] += 1
            a_x = cnt[x]
            has_candidate = False
            if neighbor_only:
                for t in range(n_touched):
                    y = touched[t]
                    if y == x:
                        continue
                    has_candidate = True
                    num = two_m * (cnt[y] - a_x) - kl * (K[y] - K[x] + kl)
                    if num > best_num:
                        best_num = num
                        ties = 1
                        pick_l = l
                        pick_y = y
                    elif num == best_num:
                        ties += 1
                        if np.random.randint(0, ties) == 0:
                            pick_l = l
                            pick_y = y
            else:
                for y in range(next_id):
                    if y == x or size[y] == 0:
                        continue
                    has_candidate = True
                    num = two_m * (cnt[y] - a_x) - kl * (K[y] - K[x] + kl)
                    if num > best_num:
                        best_num = num
                        ties = 1
                        pick_l = l
                        pick_y = y
                    elif num == best_num:
                        ties += 1
                        if np.random.randint(0, ties) == 0:
                            pick_l = l
                            pick_y = y
            if size[x] > 1:
                has_candidate = True
                num = -two_m * a_x - kl * (kl - K[x] + kl)
                if num > best_num:
                    best_num = num
                    ties = 1
                    pick_l = l
                    pick_y = SENTINEL
                elif num == best_num:
                    ties += 1
                    if np.random.randint(0, ties) == 0:
                        pick_l = l
                        pick_y = SENTINEL
            for t in range(n_touched):
                cnt[touched[t]] = 0
            if not has_candidate:
                fixed[l] = True
                remaining -= 1
        if pick_l < 0:
            break
        x = labels[pick_l]
        if pick_y == SENTINEL:
            pick_y = next_id
            next_id += 1
        labels[pick_l] = pick_y
        K[x] -= k[pick_l]
        size[x] -= 1
        K[pick_y] += k[pick_l]
        size[pick_y] += 1
        fixed[pick_l] = True
        remaining -= 1
        cum += best_num
        t_node[n_moves] = pick_l
        t_from[n_moves] = x
        t_to[n_moves] = pick_y
        t_cum[n_moves] = cum
        n_moves += 1
        if cum > best_cum:
            best_cum = cum
            best_index = n_moves
    for step in range(n_moves - 1, best_index - 1, -1):
        labels[t_node[step]] = t_from[step]
    return t_node, t_from, t_to, t_cum, n_moves, best_index


@njit(cache=True)
def enumerate_partitions(indptr, indices, k, two_m):
    """Exhaustive restricted-growth-string search for the maximum of
    ``sum_c (4m e_c - K_c**2)`` (i.e. ``4 m**2 Q``).

    Returns ``(best_labels, best_score, count)``; ties keep the first string
    in lexicographic order.
    """
    n = k.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    prefix_max = np.zeros(n + 1, dtype=np.int64)
    K = np.zeros(n + 1, dtype=np.int64)
    # score[i]: partial score with nodes 0..i-1 placed
    # prefix_max[i]: number of blocks used by nodes 0..i-1
    score = np.zeros(n + 1, dtype=np.int64)
    best = np.zeros(n, dtype=np.int64)
    best_score = np.iinfo(np.int64).min
    count = 0
    i = 0
    while i >= 0:
        if i == n:
            count += 1
            if score[n] > best_score:
                best_score = score[n]
                best[:] = labels
            i -= 1
            continue
        # undo current placement of node i, then advance to next label
        cur = labels[i]
        if cur >= 0:
            K[cur] -= k[i]
        nxt = cur + 1
        if nxt > prefix_max[i]:
            labels[i] = -1
            i -= 1
            continue
        labels[i] = nxt
        a = 0
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j < i and labels[j] == nxt:
                a += 1
        score[i + 1] = score[i] + 2 * two_m * a - (2 * K[nxt] * k[i] + k[i] * k[i])
        K[nxt] += k[i]
        prefix_max[i + 1] = prefix_max[i] + 1 if nxt == prefix_max[i] else prefix_max[i]
        i += 1
    return best, best_score, count


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def sample_connected_gnp(n, p, seed, max_attempts):
    """Rejection-sample G(n, p) until connected.

    Pairs ``(a, b), a < b`` are visited row by row with geometric skips, so
    node ``a`` is complete once row ``a`` is done and a sample with an
    isolated node is abandoned there. Returns ``(u, v, attempts)``;
    ``attempts`` is -1 when ``max_attempts`` were exhausted.
    """
    np.random.seed(seed)
    cap = 16
    u = np.empty(cap, dtype=np.int64)
    v = np.empty(cap, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    parent = np.empty(n, dtype=np.int64)
    log_q = np.log(1.0 - p) if p < 1.0 else -np.inf
    for attempt in range(1, max_attempts + 1):
        m = 0
        deg[:] = 0
        a = 0
        off = -1
        ok = True
        while a < n - 1:
            if p >= 1.0:
                off += 1
            else:
                off += 1 + int(np.floor(np.log(1.0 - np.random.random()) / log_q))
            while a < n - 1 and off >= n - 1 - a:
                off -= n - 1 - a
                if deg[a] == 0:
                    ok = False
                    break
                a += 1
            if not ok or a >= n - 1:
                break
            b = a + 1 + off
            if m == cap:
                cap *= 2
                u = np.resize(u, cap)
                v = np.resize(v, cap)
            u[m] = a
            v[m] = b
            m += 1
            deg[a] += 1
            deg[b] += 1
        if not ok or deg[n - 1] == 0:
            continue
        for i in range(n):
            parent[i] = i
        comps = n
        for t in range(m):
            ra = _find(parent, u[t])
            rb = _find(parent, v[t])
            if ra != rb:
                parent[ra] = rb
                comps -= 1
        if comps == 1:
            return u[:m].copy(), v[:m].copy(), attempt
    return u[:0].copy(), v[:0].copy(), -1


@njit(cache=True)
def sample_connected_gnm(n, m, seed, max_attempts):
    """Rejection-sample G(n, m) until connected. Same return as the G(n, p)
    sampler."""
    np.random.seed(seed)
    u = np.empty(m, dtype=np.int64)
    v = np.empty(m, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    parent = np.empty(n, dtype=np.int64)
    taken = np.zeros((n, n), dtype=np.bool_)
    for attempt in range(1, max_attempts + 1):
        deg[:] = 0
        t = 0
        while t < m:
            a = np.random.randint(0, n)
            b = np.random.randint(0, n)
            if a == b:
                continue
            if a > b:
                a, b = b, a
            if taken[a, b]:
                continue
            taken[a, b] = True
            u[t] = a
            v[t] = b
            deg[a] += 1
            deg[b] += 1
            t += 1
        for t in range(m):
            taken[u[t], v[t]] = False
        ok = True
        for i in range(n):
            if deg[i] == 0:
                ok = False
                break
        if not ok:
            continue
        for i in range(n):
            parent[i] = i
        comps = n
        for t in range(m):
            ra = _find(parent, u[t])
            rb = _find(parent, v[t])
            if ra != rb:
                parent[ra] = rb
                comps -= 1
        if comps == 1:
            return u.copy(), v.copy(), attempt
    return u[:0].copy(), v[:0].copy(), -1
