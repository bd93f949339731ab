"""Pure-Python reference kernels.

Same algorithms and same tie-breaking as the compiled ``_fast`` module; used
when the extension is not built or ``CONVOTE_PURE=1`` is set.
"""
from collections import deque

import numpy as np

TAU = 1e-12


def smo_solve(Q, y, C, tol, rel_tol, max_iter):
    """Minimise 0.5 a'Qa - sum(a) s.t. y'a = 0, 0 <= a <= C.

    ``Q`` is the label-signed Gram matrix (y_i y_j x_i.x_j). Working-set
    selection uses second-order information (max violating pair for i,
    greatest objective decrease for j). Returns ``(alpha, b, n_iter,
    objective_trace)`` where the trace holds the dual objective at the end of
    every pass of ``n`` iterations.
    """
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    QD = np.diag(Q).copy()
    pos = y > 0
    trace = []
    prev_obj = 0.0
    n_iter = 0
    while n_iter < max_iter:
        upper = alpha >= C
        lower = alpha <= 0
        # -y_t G_t over I_up
        in_up = np.where(pos, ~upper, ~lower)
        in_low = np.where(pos, ~lower, ~upper)
        mG = -y * G
        if not in_up.any() or not in_low.any():
            break
        cand = np.where(in_up, mG, -np.inf)
        # last index among maxima
        i = n - 1 - int(np.argmax(cand[::-1]))
        gmax = cand[i]
        gmax2 = np.max(np.where(in_low, -mG, -np.inf))
        if gmax + gmax2 < tol:
            break
        grad_diff = gmax - mG
        quad = QD[i] + QD - 2.0 * y[i] * y * Q[i]
        quad = np.where(quad > 0, quad, TAU)
        ok = in_low & (grad_diff > 0)
        if not ok.any():
            break
        obj_diff = np.where(ok, -(grad_diff * grad_diff) / quad, np.inf)
        j = n - 1 - int(np.argmin(obj_diff[::-1]))

        ai_old, aj_old = alpha[i], alpha[j]
        ai, aj = ai_old, aj_old
        if y[i] != y[j]:
            q = QD[i] + QD[j] + 2.0 * Q[i, j]
            if q <= 0:
                q = TAU
            delta = (-G[i] - G[j]) / q
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
            if diff > 0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            q = QD[i] + QD[j] - 2.0 * Q[i, j]
            if q <= 0:
                q = TAU
            delta = (G[i] - G[j]) / q
            s = ai + aj
            ai -= delta
            aj += delta
            if s > C:
                if ai > C:
                    ai = C
                    aj = s - C
            else:
                if aj < 0:
                    aj = 0.0
                    ai = s
            if s > C:
                if aj > C:
                    aj = C
                    ai = s - C
            else:
                if ai < 0:
                    ai = 0.0
                    aj = s
        alpha[i] = ai
        alpha[j] = aj
        dai = ai - ai_old
        daj = aj - aj_old
        G += Q[i] * dai + Q[j] * daj
        n_iter += 1
        if n_iter % n == 0:
            obj = 0.5 * float(np.dot(alpha, G - 1.0))
            trace.append(obj)
            if rel_tol > 0 and abs(prev_obj - obj) <= rel_tol * max(abs(obj), 1e-300):
                break
            prev_obj = obj
    trace.append(0.5 * float(np.dot(alpha, G - 1.0)))
    return alpha, _bias(alpha, G, y, C), n_iter, trace


def _bias(alpha, G, y, C):
    yG = y * G
    upper = alpha >= C
    lower = alpha <= 0
    free = ~upper & ~lower
    if free.any():
        rho = float(np.mean(yG[free]))
    else:
        pos = y > 0
        ub_mask = (upper & ~pos) | (lower & pos)
        lb_mask = (upper & pos) | (lower & ~pos)
        ub = float(np.min(yG[ub_mask])) if ub_mask.any() else np.inf
        lb = float(np.max(yG[lb_mask])) if lb_mask.any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub) and np.isfinite(lb) else (
            ub if np.isfinite(ub) else lb)
    return -rho


def max_flow(n_nodes, source, sink, tails, heads, cap_fwd, cap_bwd, eps):
    """Dinic's algorithm on an arc list with per-arc forward/backward capacity.

    Returns ``(flow_value, reaches_sink)``; ``reaches_sink[v]`` is true when
    ``v`` can still reach ``sink`` in the residual graph, i.e. ``v`` lies on
    the sink side of the sink-minimal minimum cut.
    """
    m = len(tails)
    # arc 2k: tail->head, arc 2k+1: head->tail
    to = [0] * (2 * m)
    res = [0.0] * (2 * m)
    adj = [[] for _ in range(n_nodes)]
    for k in range(m):
        u, v = int(tails[k]), int(heads[k])
        to[2 * k] = v
        res[2 * k] = float(cap_fwd[k])
        to[2 * k + 1] = u
        res[2 * k + 1] = float(cap_bwd[k])
        adj[u].append(2 * k)
        adj[v].append(2 * k + 1)

    flow = 0.0
    while True:
        level = [-1] * n_nodes
        level[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for a in adj[u]:
                v = to[a]
                if level[v] < 0 and res[a] > eps:
                    level[v] = level[u] + 1
                    queue.append(v)
        if level[sink] < 0:
            break
        ptr = [0] * n_nodes
        while True:
            pushed = _blocking_path(source, sink, adj, to, res, level, ptr, eps)
            if pushed <= 0:
                break
            flow += pushed

    reaches = [False] * n_nodes
    reaches[sink] = True
    queue = deque([sink])
    while queue:
        v = queue.popleft()
        for a in adj[v]:
            u = to[a]
            if not reaches[u] and res[a ^ 1] > eps:
                reaches[u] = True
                queue.append(u)
    return flow, np.array(reaches, dtype=bool)


def _blocking_path(source, sink, adj, to, res, level, ptr, eps):
    # one augmenting path in the level graph, iterative DFS with current-arc pointers
    path = []
    u = source
    while True:
        if u == sink:
            bottleneck = min(res[a] for a in path)
            for a in path:
                res[a] -= bottleneck
                res[a ^ 1] += bottleneck
            return bottleneck
        arcs = adj[u]
        advanced = False
        while ptr[u] < len(arcs):
            a = arcs[ptr[u]]
            v = to[a]
            if res[a] > eps and level[v] == level[u] + 1:
                path.append(a)
                u = v
                advanced = True
                break
            ptr[u] += 1
        if advanced:
            continue
        # dead end: retreat
        level[u] = -1
        if not path:
            return 0.0
        a = path.pop()
        u = to[a ^ 1]
        ptr[u] += 1
