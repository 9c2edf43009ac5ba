"""Random graph builders shared by the tests."""
import numpy as np

from multignn.graph import from_arrays


def random_multigraph(rng, n, m, loops=False, distinct_ts=True):
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    if not loops and n > 1:
        clash = src == dst
        dst[clash] = (dst[clash] + rng.integers(1, n, clash.sum())) % n
    ts = rng.permutation(m) if distinct_ts else rng.integers(0, max(m // 2, 1), m)
    return from_arrays(n, src, dst, ts)


def random_connected_multigraph(rng, n, d):
    """Random spanning tree with random edge directions plus extra (possibly parallel) edges."""
    src, dst = [], []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        a, b = (u, v) if rng.random() < 0.5 else (v, u)
        src.append(a)
        dst.append(b)
    extra = max(int(n * d / 2) - (n - 1), 0)
    for _ in range(extra):
        a, b = rng.choice(n, 2, replace=False) if n > 1 else (0, 0)
        src.append(int(a))
        dst.append(int(b))
        if rng.random() < 0.2:  # parallel copy
            src.append(int(a))
            dst.append(int(b))
    perm = rng.permutation(n)
    src = perm[np.array(src, dtype=np.int64)] if src else []
    dst = perm[np.array(dst, dtype=np.int64)] if dst else []
    return from_arrays(n, src, dst, rng.permutation(len(src)))
