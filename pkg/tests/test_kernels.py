import os
import subprocess
import sys

import numpy as np
import pytest

from convote import _kernels
from convote._kernels import _pure

from conftest import BACKENDS


def _random_network(rng, n):
    m = int(rng.integers(0, n * (n - 1) // 2 + 1))
    tails = rng.integers(0, n + 2, m)
    heads = rng.integers(0, n + 2, m)
    keep = tails != heads
    tails, heads = tails[keep].astype(np.int64), heads[keep].astype(np.int64)
    fwd = rng.uniform(0, 1, len(tails))
    bwd = np.where(rng.random(len(tails)) < 0.5, fwd, 0.0)
    return tails, heads, fwd, bwd


def test_fallback_selected_by_env():
    code = "from convote import _kernels; print(_kernels.BACKEND)"
    env = {**os.environ, "CONVOTE_PURE": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_default_backend_is_compiled_when_built():
    assert _kernels.BACKEND == ("compiled" if "compiled" in BACKENDS else "python")


@pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")
@pytest.mark.parametrize("seed", range(30))
def test_max_flow_backends_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 15))
    args = (n + 2, n, n + 1, *_random_network(rng, n), 1e-13)
    f_py, cut_py = _pure.max_flow(*args)
    f_c, cut_c = BACKENDS["compiled"].max_flow(*args)
    assert f_c == pytest.approx(f_py, abs=1e-12)
    assert np.array_equal(np.asarray(cut_py, dtype=bool), np.asarray(cut_c, dtype=bool))


def test_max_flow_simple_network(backend):
    # s=0, t=3: two disjoint paths of capacity 1 and 2
    tails = np.array([0, 1, 0, 2], dtype=np.int64)
    heads = np.array([1, 3, 2, 3], dtype=np.int64)
    fwd = np.array([1.0, 5.0, 2.0, 2.0])
    flow, reach = _kernels.max_flow(4, 0, 3, tails, heads, fwd, np.zeros(4), 1e-13)
    assert flow == pytest.approx(3.0)
    assert list(np.asarray(reach, dtype=bool)) == [False, True, False, True]
