"""Finite metric spaces: validation, transformations, and graph ingestion.

Distances are stored as float64. Validation tolerances are relative to the
diameter so that exact (integer-valued) inputs never produce false rejections
while file-parsed decimals survive round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AsymmetricMatrix,
    DisconnectedGraph,
    LabelCollision,
    NonpositiveExponent,
    NonpositiveOffDiagonal,
    NonpositiveScale,
    NonzeroDiagonal,
    ParseError,
    SinglePoint,
    ToleranceFailure,
    TriangleViolation,
)

#: Relative slack, scaled by the diameter, for triangle and strong-triangle checks.
METRIC_RTOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A labeled point set with a validated symmetric distance matrix."""

    labels: tuple[str, ...]
    dist: np.ndarray
    n: int

    def restrict(self, indices: Sequence[int]) -> "FiniteMetricSpace":
        """Sub-space on the given point indices, in the given order."""
        idx = list(indices)
        sub = self.dist[np.ix_(idx, idx)]
        return validate_metric([self.labels[i] for i in idx], sub)

    def __repr__(self) -> str:  # keep reprs short; matrices can be large
        return f"FiniteMetricSpace(n={self.n}, labels={list(self.labels)!r})"


@dataclass(frozen=True)
class PDistanceMatrix:
    """Entrywise p-th power of a distance matrix, with its source space."""

    p: float
    entries: np.ndarray
    source: FiniteMetricSpace

    @property
    def n(self) -> int:
        return self.source.n


@dataclass(frozen=True)
class SpaceStats:
    diameter: float
    min_positive: float
    ratio: float


@dataclass(frozen=True)
class WeightedGraph:
    """Connected edge-weighted graph with strictly positive weights."""

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    connected: bool = field(default=False)


def validate_metric(labels: Iterable[str], raw_matrix) -> FiniteMetricSpace:
    """Validate a raw square matrix as a metric and build the space.

    Checks, in order: shape, exact symmetry, exact zero diagonal, strictly
    positive off-diagonal entries, and the triangle inequality within a
    relative tolerance of ``METRIC_RTOL * diameter``. Errors name the
    offending indices.
    """
    labels = tuple(str(x) for x in labels)
    if len(set(labels)) != len(labels):
        raise LabelCollision("duplicate point labels")
    d = np.asarray(raw_matrix, dtype=np.float64)
    n = len(labels)
    if d.ndim != 2 or d.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got shape {d.shape}")
    if not np.isfinite(d).all():
        raise ValueError("distance matrix contains non-finite entries")

    neq = np.argwhere(d != d.T)
    if neq.size:
        i, j = map(int, neq[0])
        raise AsymmetricMatrix(i, j)
    bad_diag = np.flatnonzero(np.diag(d) != 0.0)
    if bad_diag.size:
        raise NonzeroDiagonal(int(bad_diag[0]))
    off = ~np.eye(n, dtype=bool)
    bad_off = np.argwhere((d <= 0.0) & off)
    if bad_off.size:
        i, j = map(int, bad_off[0])
        raise NonpositiveOffDiagonal(i, j)

    if n >= 3:
        tol = METRIC_RTOL * float(d.max())
        # d[i,j] <= d[i,k] + d[k,j] for all triples, vectorized over k
        slack = d[:, None, :] + d.T[None, :, :] - d[:, :, None]  # (i, j, k)
        viol = np.argwhere(slack < -tol)
        if viol.size:
            i, j, k = map(int, viol[0])
            raise TriangleViolation(i, j, k)

    return FiniteMetricSpace(labels=labels, dist=_freeze(d), n=n)


def p_distance_matrix(space: FiniteMetricSpace, p: float) -> PDistanceMatrix:
    """Entrywise p-th power of the distance matrix (p > 0)."""
    if not p > 0:
        raise NonpositiveExponent(f"exponent must be positive, got {p}")
    with np.errstate(over="ignore"):
        entries = space.dist**p
    if not np.isfinite(entries).all():
        raise ValueError(f"distance powers overflow at exponent {p}")
    if space.n > 1 and (entries[~np.eye(space.n, dtype=bool)] == 0.0).any():
        raise ValueError(f"distance powers underflow to zero at exponent {p}")
    return PDistanceMatrix(p=float(p), entries=_freeze(entries), source=space)


def discrete_space(n: int, scale: float = 1.0) -> FiniteMetricSpace:
    """The n-point space with every off-diagonal distance equal to ``scale``."""
    if n < 1:
        raise ValueError(f"need at least one point, got {n}")
    if not scale > 0:
        raise NonpositiveScale(f"scale must be positive, got {scale}")
    d = np.full((n, n), float(scale))
    np.fill_diagonal(d, 0.0)
    return validate_metric([f"x{i + 1}" for i in range(n)], d)


def scale_space(space: FiniteMetricSpace, alpha: float) -> FiniteMetricSpace:
    """The space with every distance multiplied by ``alpha`` (> 0)."""
    if not alpha > 0:
        raise NonpositiveScale(f"scale must be positive, got {alpha}")
    return validate_metric(space.labels, space.dist * float(alpha))


def is_ultrametric(space: FiniteMetricSpace) -> bool:
    """Whether d(x, y) <= max(d(x, z), d(z, y)) holds for all triples."""
    d = space.dist
    if space.n < 3:
        return True
    tol = METRIC_RTOL * float(d.max())
    peaks = np.maximum(d[:, None, :], d.T[None, :, :])  # (i, j, k)
    return bool((peaks >= d[:, :, None] - tol).all())


def space_stats(space: FiniteMetricSpace) -> SpaceStats:
    """Diameter, minimum nonzero distance, and their ratio."""
    if space.n < 2:
        raise SinglePoint("statistics are undefined for a single point")
    off = space.dist[~np.eye(space.n, dtype=bool)]
    diameter = float(off.max())
    min_positive = float(off.min())
    return SpaceStats(diameter, min_positive, diameter / min_positive)


# ------------------------------------------------------------------ graphs ----

def build_graph(
    edges: Iterable[tuple[str, str, float]],
    vertices: Iterable[str] | None = None,
) -> WeightedGraph:
    """Assemble a weighted graph; vertices default to first-appearance order."""
    edge_list: list[tuple[str, str, float]] = []
    seen: dict[str, int] = {}
    order: list[str] = []
    if vertices is not None:
        for v in vertices:
            v = str(v)
            if v not in seen:
                seen[v] = len(order)
                order.append(v)
    for u, v, w in edges:
        u, v, w = str(u), str(v), float(w)
        if u == v:
            raise ValueError(f"self-loop at vertex {u!r}")
        if not w > 0:
            raise ValueError(f"edge ({u}, {v}) has nonpositive weight {w}")
        for x in (u, v):
            if x not in seen:
                seen[x] = len(order)
                order.append(x)
        edge_list.append((u, v, w))
    if not order:
        raise ValueError("graph has no vertices")
    connected = _count_components(order, edge_list) == 1
    return WeightedGraph(tuple(order), tuple(edge_list), connected)


def _count_components(vertices: list[str], edges: list[tuple[str, str, float]]) -> int:
    index = {v: i for i, v in enumerate(vertices)}
    parent = list(range(len(vertices)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    comps = len(vertices)
    for u, v, _ in edges:
        ru, rv = find(index[u]), find(index[v])
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps


def ultrametric_from_graph(graph: WeightedGraph) -> FiniteMetricSpace:
    """Minimax-path distances of a connected weighted graph.

    d(u, v) is the minimum over all walks joining u and v of the largest edge
    weight on the walk. It is computed on a minimum spanning tree, whose
    unique paths realize the minimax values; the result is an ultrametric.
    """
    if not graph.connected:
        raise DisconnectedGraph("minimax distances need a connected graph")
    n = len(graph.vertices)
    index = {v: i for i, v in enumerate(graph.vertices)}
    if n == 1:
        return validate_metric(graph.vertices, np.zeros((1, 1)))

    # Kruskal with a deterministic ordering.
    ranked = sorted(
        graph.edges, key=lambda e: (e[2], index[e[0]], index[e[1]])
    )
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    tree: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    used = 0
    for u, v, w in ranked:
        iu, iv = index[u], index[v]
        ru, rv = find(iu), find(iv)
        if ru == rv:
            continue
        parent[ru] = rv
        tree[iu].append((iv, w))
        tree[iv].append((iu, w))
        used += 1
        if used == n - 1:
            break

    d = np.zeros((n, n))
    for s in range(n):
        # DFS from s carrying the running maximum edge weight.
        stack = [(s, 0.0)]
        seen = {s}
        while stack:
            node, peak = stack.pop()
            for nbr, w in tree[node]:
                if nbr in seen:
                    continue
                seen.add(nbr)
                top = w if w > peak else peak
                d[s, nbr] = top
                stack.append((nbr, top))

    d = np.maximum(d, d.T)  # DFS fills each row; enforce exact symmetry
    space = validate_metric(graph.vertices, d)
    if not is_ultrametric(space):
        raise ToleranceFailure("minimax distances failed the ultrametric check")
    return space


# ------------------------------------------------------------- text formats ----

def parse_matrix_text(text: str) -> tuple[list[str], np.ndarray]:
    """Parse the matrix file format.

    An optional ``labels: a b c ...`` line may precede or follow the count
    line; then come ``n`` whitespace-separated rows. ``#`` starts a comment.
    """
    labels: list[str] | None = None
    n: int | None = None
    rows: list[list[float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("labels:"):
            if labels is not None:
                raise ParseError(lineno, "duplicate labels line")
            labels = line[len("labels:"):].split()
            continue
        if n is None:
            try:
                n = int(line)
            except ValueError:
                raise ParseError(lineno, f"expected point count, got {line!r}") from None
            if n < 1:
                raise ParseError(lineno, "point count must be at least 1")
            continue
        try:
            row = [float(tok) for tok in line.split()]
        except ValueError:
            raise ParseError(lineno, f"bad matrix row: {line!r}") from None
        if len(row) != n:
            raise ParseError(lineno, f"expected {n} entries, found {len(row)}")
        rows.append(row)
        if len(rows) > n:
            raise ParseError(lineno, "more rows than the declared count")
    if n is None:
        raise ParseError(0, "missing point count")
    if len(rows) != n:
        raise ParseError(0, f"expected {n} rows, found {len(rows)}")
    if labels is None:
        labels = [f"x{i + 1}" for i in range(n)]
    elif len(labels) != n:
        raise ParseError(0, f"{len(labels)} labels for {n} points")
    return labels, np.asarray(rows)


def parse_edge_list_text(text: str) -> WeightedGraph:
    """Parse ``u v w`` edge lines; ``#`` starts a comment."""
    edges: list[tuple[str, str, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(lineno, f"expected 'u v w', got {line!r}")
        u, v, wtok = parts
        try:
            w = float(wtok)
        except ValueError:
            raise ParseError(lineno, f"bad weight {wtok!r}") from None
        if not w > 0:
            raise ParseError(lineno, f"weight must be positive, got {w}")
        if u == v:
            raise ParseError(lineno, f"self-loop at {u!r}")
        edges.append((u, v, w))
    if not edges:
        raise ParseError(0, "edge list is empty")
    return build_graph(edges)
