"""Independent reference solutions used only by the tests."""
import itertools

import numpy as np


def enumerate_min_cut(src_cap, sink_cap, links):
    """Exhaustive minimum over all 2**n labellings.

    ``links`` is a list of (u, v, strength); yea pays sink_cap, nay pays src_cap.
    Returns (min_cost, list of optimal labellings as tuples of bools).
    """
    n = len(src_cap)
    best = np.inf
    argmins = []
    for labels in itertools.product((True, False), repeat=n):
        cost = 0.0
        for s in range(n):
            cost += sink_cap[s] if labels[s] else src_cap[s]
        for u, v, w in links:
            if labels[u] != labels[v]:
                cost += w
        if cost < best - 1e-12:
            best, argmins = cost, [labels]
        elif abs(cost - best) <= 1e-12:
            argmins.append(labels)
    return best, argmins


def hard_margin_2d(X, y):
    """Max-margin separator of a separable 2-D set by active-set enumeration.

    Tries every pair (one per class) and every triple of points as the
    support set, keeps the feasible (w, b) of smallest norm.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    best = None

    def consider(w, b):
        nonlocal best
        if np.all(y * (X @ w + b) >= 1 - 1e-9):
            if best is None or w @ w < best[0] @ best[0]:
                best = (w, b)

    for i, j in itertools.combinations(range(n), 2):
        if y[i] == y[j]:
            continue
        p, q = (i, j) if y[i] > 0 else (j, i)
        diff = X[p] - X[q]
        w = 2 * diff / (diff @ diff)
        consider(w, 1 - w @ X[p])
    for idx in itertools.combinations(range(n), 3):
        A = np.array([[y[k] * X[k, 0], y[k] * X[k, 1], y[k]] for k in idx])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        sol = np.linalg.solve(A, np.ones(3))
        consider(sol[:2], sol[2])
    return best


def enumerate_min_cut_fast(src_cap, sink_cap, links):
    """Vectorised twin of ``enumerate_min_cut``: (min_cost, yea mask of every labelling)."""
    n = len(src_cap)
    codes = np.arange(2 ** n)
    yea = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
    cost = np.where(yea, np.asarray(sink_cap), np.asarray(src_cap)).sum(axis=1)
    for u, v, w in links:
        cost = cost + np.where(yea[:, u] != yea[:, v], w, 0.0)
    return float(cost.min()), yea, cost


def ind_formula(d, sigma):
    """Literal three-branch ind(s, Y), vectorised."""
    d = np.asarray(d, dtype=float)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), d.shape)
    out = np.empty_like(d)
    for k in range(d.size):
        x, s = d.flat[k], sigma.flat[k]
        if s == 0:
            out.flat[k] = 1.0 if x > 0 else (0.0 if x < 0 else 0.5)
        elif x > 2 * s:
            out.flat[k] = 1.0
        elif x < -2 * s:
            out.flat[k] = 0.0
        else:
            out.flat[k] = (1 + x / (2 * s)) / 2
    return out


def agr_formula(d, sigma, theta, alpha):
    """Literal three-branch agreement strength, floored at zero."""
    if d < theta:
        return 0.0
    if sigma == 0:
        return alpha
    if d > 4 * sigma:
        return alpha
    return max(0.0, alpha * (d / (4 * sigma)))
