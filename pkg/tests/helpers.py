"""Shared constructions for the test suite.

The seven-point example space (a path-shaped weighted graph and its minimax
distance matrix) is used throughout; random ultrametric spaces are built as
random dendrograms with ascending merge heights, which guarantees the strong
triangle inequality exactly.
"""

from __future__ import annotations

import numpy as np

from negtype import FiniteMetricSpace, discrete_space, scale_space, validate_metric

EXAMPLE_LABELS = ("a", "b", "c", "d", "e", "f", "g")

EXAMPLE_EDGES = (
    ("a", "b", 2.0),
    ("b", "c", 2.0),
    ("c", "d", 1.0),
    ("c", "e", 3.0),
    ("e", "f", 1.0),
    ("f", "g", 4.0),
)

EXAMPLE_MATRIX = np.array(
    [
        [0, 2, 2, 2, 3, 3, 4],
        [2, 0, 2, 2, 3, 3, 4],
        [2, 2, 0, 1, 3, 3, 4],
        [2, 2, 1, 0, 3, 3, 4],
        [3, 3, 3, 3, 0, 1, 4],
        [3, 3, 3, 3, 1, 0, 4],
        [4, 4, 4, 4, 4, 4, 0],
    ],
    dtype=float,
)


def example_space() -> FiniteMetricSpace:
    return validate_metric(EXAMPLE_LABELS, EXAMPLE_MATRIX)


def line_space() -> FiniteMetricSpace:
    """Three collinear points at unit spacing: strict at p=1, non-strict at
    p=2, not of negative type at p=3."""
    return validate_metric(["u", "v", "w"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])


def random_ultrametric(rng: np.random.Generator, n: int, lo=1.0, hi=2.0) -> FiniteMetricSpace:
    """Random dendrogram metric: merge heights drawn in [lo, hi], ascending."""
    if n == 1:
        return validate_metric(["x1"], np.zeros((1, 1)))
    clusters: list[list[int]] = [[i] for i in range(n)]
    heights = np.sort(rng.uniform(lo, hi, size=n - 1))
    d = np.zeros((n, n))
    for height in heights:
        i, j = sorted(rng.choice(len(clusters), size=2, replace=False))
        for a in clusters[i]:
            for b in clusters[j]:
                d[a, b] = d[b, a] = height
        clusters[i] = clusters[i] + clusters[j]
        del clusters[j]
    return validate_metric([f"x{i + 1}" for i in range(n)], d)


def random_euclidean(rng: np.random.Generator, n: int, dim: int = 3) -> FiniteMetricSpace:
    """Distance matrix of random Gaussian points (strict at p = 1)."""
    points = rng.standard_normal((n, dim))
    diff = points[:, None, :] - points[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return validate_metric([f"x{i + 1}" for i in range(n)], d)


def ultrametric_corpus(seed: int = 20240814, count: int = 100) -> list[FiniteMetricSpace]:
    """Seeded corpus of random ultrametrics with every tenth space discrete."""
    rng = np.random.default_rng(seed)
    corpus = []
    for k in range(count):
        n = int(rng.integers(2, 11))
        if k % 10 == 9:
            scale = float(rng.uniform(0.5, 3.0))
            corpus.append(scale_space(discrete_space(n), scale))
        else:
            corpus.append(random_ultrametric(rng, n))
    return corpus


def random_connected_graph(rng: np.random.Generator, n: int):
    """Random spanning tree plus a few extra edges; weights in [0.5, 4]."""
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((f"v{u}", f"v{v}", float(rng.uniform(0.5, 4.0))))
    extras = int(rng.integers(0, n))
    for _ in range(extras):
        u, v = rng.choice(n, size=2, replace=False)
        edges.append((f"v{u}", f"v{v}", float(rng.uniform(0.5, 4.0))))
    return edges


def tree_path_max_weight(tree_edges, u: str, v: str) -> float:
    """Independent oracle: max edge weight on the unique tree path u -> v."""
    adj: dict[str, list[tuple[str, float]]] = {}
    for a, b, w in tree_edges:
        adj.setdefault(a, []).append((b, w))
        adj.setdefault(b, []).append((a, w))
    stack = [(u, None, 0.0)]
    while stack:
        node, parent, peak = stack.pop()
        if node == v:
            return peak
        for nbr, w in adj.get(node, ()):
            if nbr != parent:
                stack.append((nbr, node, max(peak, w)))
    raise AssertionError(f"no path from {u} to {v}")
