"""Graph generators for experiments and tests.

All generators are deterministic for a fixed seed and return simple graphs.
"""

from __future__ import annotations

import numpy as np

from .graph import EDGE_DTYPE, VERTEX_DTYPE, Graph
from .rng import rng_from


def path_graph(n: int) -> Graph:
    if n < 0:
        raise ValueError("n must be nonnegative")
    i = np.arange(max(n - 1, 0), dtype=VERTEX_DTYPE)
    return Graph(n, np.column_stack([i, i + 1]), validate=False)


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    i = np.arange(n, dtype=VERTEX_DTYPE)
    return Graph(n, np.column_stack([i, (i + 1) % n]))


def star_graph(d: int) -> Graph:
    """K_{1,d}: center 0, leaves 1..d."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    leaves = np.arange(1, d + 1, dtype=VERTEX_DTYPE)
    edges = np.column_stack([np.zeros(d, dtype=VERTEX_DTYPE), leaves])
    return Graph(d + 1, edges, validate=False)


def complete_graph(n: int) -> Graph:
    iu = np.triu_indices(n, k=1)
    edges = np.column_stack([iu[0], iu[1]]).astype(VERTEX_DTYPE)
    return Graph(n, edges, validate=False)


def complete_bipartite_graph(a: int, b: int) -> Graph:
    left = np.repeat(np.arange(a), b)
    right = np.tile(np.arange(a, a + b), a)
    return Graph(a + b, np.column_stack([left, right]).astype(VERTEX_DTYPE),
                 validate=False)


def _dedupe(n: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    key = lo.astype(np.int64) * n + hi
    _, first = np.unique(key, return_index=True)
    first.sort()
    return np.column_stack([lo[first], hi[first]])


def erdos_renyi(n: int, avg_deg: float, seed) -> Graph:
    """G(n, m) with m = round(n * avg_deg / 2), sampled by rejection."""
    if n < 2 or avg_deg < 0:
        raise ValueError("need n >= 2 and avg_deg >= 0")
    m_target = int(round(n * avg_deg / 2))
    m_target = min(m_target, n * (n - 1) // 2)
    rng = rng_from(seed, 0xE4)
    rows = []
    got = 0
    while got < m_target:
        want = int((m_target - got) * 1.15) + 16
        u = rng.integers(0, n, size=want, dtype=np.int64)
        v = rng.integers(0, n, size=want, dtype=np.int64)
        ok = u != v
        u, v = u[ok], v[ok]
        rows.append(np.column_stack([np.minimum(u, v), np.maximum(u, v)]))
        allp = np.concatenate(rows)
        allp = _dedupe(n, allp[:, 0], allp[:, 1])
        rows = [allp]
        got = allp.shape[0]
    edges = rows[0][:m_target].astype(VERTEX_DTYPE)
    return Graph(n, edges, validate=False)


def random_regular(n: int, d: int, seed) -> Graph:
    """Near-d-regular graph via the configuration model, simplified.

    Self-loops and parallel edges from the pairing are dropped, so a few
    vertices end up slightly below degree d; max degree is at most d.
    """
    if n <= d:
        raise ValueError("need n > d")
    if (n * d) % 2:
        raise ValueError("n * d must be even")
    rng = rng_from(seed, 0x4E)
    stubs = np.repeat(np.arange(n, dtype=VERTEX_DTYPE), d)
    rng.shuffle(stubs)
    u = stubs[0::2]
    v = stubs[1::2]
    ok = u != v
    u, v = u[ok], v[ok]
    edges = _dedupe(n, np.minimum(u, v), np.maximum(u, v)).astype(VERTEX_DTYPE)
    return Graph(n, edges, validate=False)


def star_forest(n: int, d: int) -> Graph:
    """Disjoint stars K_{1,d} packed into n vertices; leftovers isolated."""
    if d < 1:
        raise ValueError("d must be >= 1")
    hubs = n // (d + 1)
    base = np.arange(hubs, dtype=np.int64) * (d + 1)
    centers = np.repeat(base, d)
    leaves = (base[:, None] + np.arange(1, d + 1)).ravel()
    edges = np.column_stack([centers, leaves]).astype(VERTEX_DTYPE)
    return Graph(n, edges, validate=False)


GENERATORS = {
    "path": (path_graph, 1),
    "cycle": (cycle_graph, 1),
    "star": (star_graph, 1),
    "complete": (complete_graph, 1),
    "erdos-renyi": (erdos_renyi, 2),
    "random-regular": (random_regular, 2),
    "star-forest": (star_forest, 2),
}

_SEEDED = {"erdos-renyi", "random-regular"}


def parse_generator_spec(spec: str, seed=0) -> Graph:
    """Build a graph from a spec like "path:1000" or "erdos-renyi:5000,8".

    Numeric arguments are colon-separated from the name and comma-separated
    from each other; the seed only matters for randomized families.
    """
    name, _, argstr = spec.partition(":")
    name = name.strip().lower()
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r}; "
                         f"choose from {sorted(GENERATORS)}")
    fn, arity = GENERATORS[name]
    try:
        args = [float(a) if "." in a else int(a)
                for a in argstr.split(",") if a.strip()]
    except ValueError:
        raise ValueError(f"bad generator arguments in {spec!r}") from None
    if len(args) != arity:
        raise ValueError(f"{name} takes {arity} argument(s), got {len(args)}")
    if name in _SEEDED:
        return fn(*args, seed)
    return fn(*args)
