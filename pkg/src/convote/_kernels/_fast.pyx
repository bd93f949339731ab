# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SMO and Dinic kernels; mirrors ``_pure`` step for step."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

from convote._kernels._pure import _bias

cnp.import_array()

cdef double TAU = 1e-12


def smo_solve(Q, y, double C, double tol, double rel_tol, long max_iter):
    cdef double[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0]
    alpha_arr = np.zeros(n)
    G_arr = -np.ones(n)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] G = G_arr
    cdef double[::1] QD = np.ascontiguousarray(np.diag(Q), dtype=np.float64)
    cdef Py_ssize_t t, i, j
    cdef long n_iter = 0
    cdef double gmax, gmax2, mg, gd, q, od, od_min
    cdef double ai, aj, ai_old, aj_old, delta, diff, s, dai, daj
    cdef double obj, prev_obj = 0.0
    cdef bint up, low
    trace = []
    while n_iter < max_iter:
        with nogil:
            gmax = -INFINITY
            gmax2 = -INFINITY
            i = -1
            for t in range(n):
                if yv[t] > 0:
                    up = alpha[t] < C
                    low = alpha[t] > 0
                else:
                    up = alpha[t] > 0
                    low = alpha[t] < C
                mg = -yv[t] * G[t]
                if up and mg >= gmax:
                    gmax = mg
                    i = t
                if low and -mg >= gmax2:
                    gmax2 = -mg
            j = -1
            if i >= 0 and gmax + gmax2 >= tol:
                od_min = INFINITY
                for t in range(n):
                    if yv[t] > 0:
                        low = alpha[t] > 0
                    else:
                        low = alpha[t] < C
                    if not low:
                        continue
                    gd = gmax + yv[t] * G[t]
                    if gd > 0:
                        q = QD[i] + QD[t] - 2.0 * yv[i] * yv[t] * Qv[i, t]
                        if q <= 0:
                            q = TAU
                        od = -(gd * gd) / q
                        if od <= od_min:
                            od_min = od
                            j = t
        if i < 0 or j < 0:
            break
        with nogil:
            ai_old = alpha[i]
            aj_old = alpha[j]
            ai = ai_old
            aj = aj_old
            if yv[i] != yv[j]:
                q = QD[i] + QD[j] + 2.0 * Qv[i, j]
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
                q = QD[i] + QD[j] - 2.0 * Qv[i, j]
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
            for t in range(n):
                G[t] += Qv[i, t] * dai + Qv[j, t] * daj
        n_iter += 1
        if n_iter % n == 0:
            obj = _objective(alpha, G)
            trace.append(obj)
            if rel_tol > 0 and fabs(prev_obj - obj) <= rel_tol * max(fabs(obj), 1e-300):
                break
            prev_obj = obj
    trace.append(_objective(alpha, G))
    return alpha_arr, _bias(alpha_arr, G_arr, np.asarray(yv), C), int(n_iter), trace


cdef double _objective(double[::1] alpha, double[::1] G) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t t
    for t in range(alpha.shape[0]):
        acc += alpha[t] * (G[t] - 1.0)
    return 0.5 * acc


def max_flow(Py_ssize_t n_nodes, Py_ssize_t source, Py_ssize_t sink,
             tails, heads, cap_fwd, cap_bwd, double eps):
    cdef long[::1] tl = np.ascontiguousarray(tails, dtype=np.int64).astype(np.int_)
    cdef long[::1] hd = np.ascontiguousarray(heads, dtype=np.int64).astype(np.int_)
    cdef double[::1] cf = np.ascontiguousarray(cap_fwd, dtype=np.float64)
    cdef double[::1] cb = np.ascontiguousarray(cap_bwd, dtype=np.float64)
    cdef Py_ssize_t m = tl.shape[0]
    cdef Py_ssize_t k, u, v, a, head_q, tail_q, depth
    # CSR adjacency in insertion order, matching the list-of-lists layout of _pure
    deg_arr = np.zeros(n_nodes + 1, dtype=np.int_)
    cdef long[::1] start = deg_arr
    for k in range(m):
        start[tl[k] + 1] += 1
        start[hd[k] + 1] += 1
    for u in range(n_nodes):
        start[u + 1] += start[u]
    fill_arr = np.array(deg_arr[:n_nodes], dtype=np.int_)
    cdef long[::1] fill = fill_arr
    cdef long[::1] arcs = np.zeros(2 * m, dtype=np.int_)
    cdef long[::1] to = np.zeros(2 * m, dtype=np.int_)
    cdef double[::1] res = np.zeros(2 * m)
    for k in range(m):
        u = tl[k]
        v = hd[k]
        to[2 * k] = v
        res[2 * k] = cf[k]
        to[2 * k + 1] = u
        res[2 * k + 1] = cb[k]
        arcs[fill[u]] = 2 * k
        fill[u] += 1
        arcs[fill[v]] = 2 * k + 1
        fill[v] += 1

    cdef long[::1] level = np.zeros(n_nodes, dtype=np.int_)
    cdef long[::1] ptr = np.zeros(n_nodes, dtype=np.int_)
    cdef long[::1] queue = np.zeros(n_nodes, dtype=np.int_)
    cdef long[::1] path = np.zeros(n_nodes + 1, dtype=np.int_)
    cdef double flow = 0.0, bottleneck
    cdef bint advanced
    with nogil:
        while True:
            for u in range(n_nodes):
                level[u] = -1
            level[source] = 0
            head_q = 0
            tail_q = 0
            queue[tail_q] = source
            tail_q += 1
            while head_q < tail_q:
                u = queue[head_q]
                head_q += 1
                for k in range(start[u], start[u + 1]):
                    a = arcs[k]
                    v = to[a]
                    if level[v] < 0 and res[a] > eps:
                        level[v] = level[u] + 1
                        queue[tail_q] = v
                        tail_q += 1
            if level[sink] < 0:
                break
            for u in range(n_nodes):
                ptr[u] = start[u]
            while True:
                depth = 0
                u = source
                bottleneck = -1.0
                while True:
                    if u == sink:
                        bottleneck = res[path[0]]
                        for k in range(1, depth):
                            if res[path[k]] < bottleneck:
                                bottleneck = res[path[k]]
                        for k in range(depth):
                            res[path[k]] -= bottleneck
                            res[path[k] ^ 1] += bottleneck
                        break
                    advanced = False
                    while ptr[u] < start[u + 1]:
                        a = arcs[ptr[u]]
                        v = to[a]
                        if res[a] > eps and level[v] == level[u] + 1:
                            path[depth] = a
                            depth += 1
                            u = v
                            advanced = True
                            break
                        ptr[u] += 1
                    if advanced:
                        continue
                    level[u] = -1
                    if depth == 0:
                        bottleneck = 0.0
                        break
                    depth -= 1
                    a = path[depth]
                    u = to[a ^ 1]
                    ptr[u] += 1
                if bottleneck <= 0:
                    break
                flow += bottleneck

    reaches_arr = np.zeros(n_nodes, dtype=bool)
    cdef cnp.npy_bool[::1] reaches = reaches_arr
    with nogil:
        reaches[sink] = True
        head_q = 0
        tail_q = 0
        queue[tail_q] = sink
        tail_q += 1
        while head_q < tail_q:
            v = queue[head_q]
            head_q += 1
            for k in range(start[v], start[v + 1]):
                a = arcs[k]
                u = to[a]
                if not reaches[u] and res[a ^ 1] > eps:
                    reaches[u] = True
                    queue[tail_q] = u
                    tail_q += 1
    return flow, reaches_arr
