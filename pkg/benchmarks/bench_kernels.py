"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--sizes 200 400]

Reports the best wall time per kernel and backend on synthetic inputs and
checks that both backends return the same answer.
"""
import argparse
import time

import numpy as np

from convote._kernels import _pure

try:
    from convote._kernels import _fast
except ImportError:
    _fast = None


def smo_problem(n, dim=300, seed=0):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=dim)
    X = (rng.random((n, dim)) < 0.05).astype(float)
    X /= np.maximum(np.linalg.norm(X, axis=1, keepdims=True), 1e-12)
    y = np.where(X @ w + 0.3 * rng.normal(size=n) >= 0, 1.0, -1.0)
    Q = (X @ X.T) * np.outer(y, y)
    return (Q, y, 1.0, 1e-3, 1e-6, 100 * n)


def flow_problem(n, links_per_node=4, seed=0):
    rng = np.random.default_rng(seed)
    src, sink = n, n + 1
    idx = np.arange(n)
    u = rng.integers(0, n, n * links_per_node)
    v = rng.integers(0, n, n * links_per_node)
    keep = u != v
    tails = np.concatenate([np.full(n, src), idx, u[keep]]).astype(np.int64)
    heads = np.concatenate([idx, np.full(n, sink), v[keep]]).astype(np.int64)
    p = rng.random(n)
    w = rng.uniform(0, 0.5, keep.sum())
    fwd = np.concatenate([p, 1 - p, w])
    bwd = np.concatenate([np.zeros(2 * n), w])
    return (n + 2, src, sink, tails, heads, fwd, bwd, 1e-13)


def best_time(fn, args, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 400, 800])
    args = ap.parse_args(argv)
    backends = {"python": _pure}
    if _fast is not None:
        backends["compiled"] = _fast
    else:
        print("compiled extension not built; timing the fallback only")

    print(f"{'kernel':10}{'n':>7}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for kernel, make, fn_name in (("smo", smo_problem, "smo_solve"), ("maxflow", flow_problem, "max_flow")):
        for n in args.sizes:
            problem = make(n)
            results = {b: best_time(getattr(mod, fn_name), problem, args.repeat) for b, mod in backends.items()}
            if kernel == "smo" and len(results) == 2:
                a, c = results["python"][1][0], results["compiled"][1][0]
                assert np.allclose(a, c, atol=1e-8), "backends disagree on alpha"
            elif len(results) == 2:
                assert abs(results["python"][1][0] - results["compiled"][1][0]) < 1e-9, "backends disagree on flow"
            row = f"{kernel:10}{n:>7}" + "".join(f"{results[b][0]:>11.4f}s" for b in backends)
            if len(results) == 2:
                row += f"{results['python'][0] / results['compiled'][0]:>9.1f}x"
            print(row)


if __name__ == "__main__":
    main()
