"""Ultrametric pipeline: decomposition, recursive bounds, coteries, limits.

An ultrametric space of diameter D splits into two nonempty parts with all
cross-distances equal to D; recursing yields a tree whose leaf blocks have
an exact closed-form gap. Walking the tree accumulates two-sided bounds on
the reciprocal gap, and the minimum-distance clusters (coteries) determine
the large-exponent limit of the normalized gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import gamma_discrete
from .errors import NegativeEntry, NotSymmetric, NotUltrametric, SinglePoint
from .metric import FiniteMetricSpace, is_ultrametric
from .spectral import refined_solve


def strictly_ultrametric_check(a) -> bool:
    """Whether every entry dominates the min over detours and the diagonal
    strictly dominates its row.

    Comparisons are exact; inputs are constructed, not parsed.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if (a != a.T).any():
        raise NotSymmetric("matrix is not exactly symmetric")
    if (a < 0).any():
        raise NegativeEntry("matrix has a negative entry")
    detours = np.minimum(a[:, None, :], a.T[None, :, :])  # [i, j, k] -> min(a[i,k], a[k,j])
    if not (a[:, :, None] >= detours).all():
        return False
    off_max = np.where(np.eye(n, dtype=bool), -np.inf, a).max(axis=1)
    return bool((np.diag(a) > off_max).all())


@dataclass(frozen=True)
class UltrametricTree:
    """Recursive diameter split; ``split_distance`` is the node's diameter."""

    labels: tuple[str, ...]
    indices: tuple[int, ...]
    split_distance: float
    children: tuple["UltrametricTree", "UltrametricTree"] | None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def size(self) -> int:
        return len(self.indices)

    def serialize(self) -> str:
        if self.is_leaf:
            return f"[{' '.join(self.labels)} @ {_fmt(self.split_distance)}]"
        left, right = self.children
        return f"(split={_fmt(self.split_distance)} {left.serialize()} {right.serialize()})"

    def walk(self):
        yield self
        if self.children is not None:
            for child in self.children:
                yield from child.walk()


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _require_ultrametric(space: FiniteMetricSpace) -> None:
    if not is_ultrametric(space):
        raise NotUltrametric("the space does not satisfy the strong triangle inequality")


def decompose(space: FiniteMetricSpace, full_split: bool = False) -> UltrametricTree:
    """Recursive diameter-split tree of an ultrametric space.

    At each non-leaf node the points partition into maximal balls of radius
    strictly below the node diameter; one side of the split is the largest
    such ball (ties broken toward the one containing the smallest index) and
    the other is its complement, so cross-distances all equal the diameter.
    Children are ordered by their smallest point index. Recursion stops at
    singletons and at discrete blocks, whose gap is known exactly; with
    ``full_split`` discrete blocks keep splitting down to singletons.
    """
    _require_ultrametric(space)
    d = space.dist

    def build(indices: list[int]) -> UltrametricTree:
        labels = tuple(space.labels[i] for i in indices)
        if len(indices) == 1:
            return UltrametricTree(labels, tuple(indices), 0.0, None)
        sub = d[np.ix_(indices, indices)]
        off = sub[~np.eye(len(indices), dtype=bool)]
        delta = float(off.max())
        if not full_split and float(off.min()) == delta:
            return UltrametricTree(labels, tuple(indices), delta, None)

        # Maximal strict balls partition the node (ultrametric equivalence).
        assigned = [False] * len(indices)
        classes: list[list[int]] = []
        for pos in range(len(indices)):
            if assigned[pos]:
                continue
            members = [q for q in range(len(indices)) if sub[pos, q] < delta]
            for q in members:
                assigned[q] = True
            classes.append(members)
        largest = max(classes, key=len)
        rest = sorted(q for cls in classes if cls is not largest for q in cls)
        side_a = [indices[q] for q in largest]
        side_b = [indices[q] for q in rest]
        if side_b[0] < side_a[0]:
            side_a, side_b = side_b, side_a
        return UltrametricTree(
            labels, tuple(indices), delta, (build(side_a), build(side_b))
        )

    return build(list(range(space.n)))


@dataclass(frozen=True)
class SplitTerm:
    labels: tuple[str, ...]
    size: int
    split_distance: float
    alpha_cap: float
    alpha_exact: float
    denominator: float
    child_sizes: tuple[int, int]
    child_diameters: tuple[float, float]


@dataclass(frozen=True)
class LeafTerm:
    labels: tuple[str, ...]
    size: int
    distance: float
    gamma: float
    reciprocal: float


@dataclass(frozen=True)
class RecursiveGapBounds:
    """Accumulated two-sided bounds on the reciprocal gap."""

    lower_reciprocal: float
    upper_reciprocal: float
    splits: tuple[SplitTerm, ...]
    leaves: tuple[LeafTerm, ...]

    @property
    def gamma_lower(self) -> float:
        return 1.0 / self.upper_reciprocal

    @property
    def gamma_upper(self) -> float:
        return np.inf if self.lower_reciprocal == 0.0 else 1.0 / self.lower_reciprocal


def recursive_gap_bounds(
    space: FiniteMetricSpace, p: float, full_split: bool = False
) -> RecursiveGapBounds:
    """Walk the decomposition tree accumulating reciprocal gap bounds.

    Leaf blocks contribute their exact reciprocal gap to both sides
    (singletons contribute zero). Each split adds, to the upper reciprocal
    only, the cap size/diameter**p of its correction term; the sharper exact
    term and its denominator are reported per level.
    """
    if space.n < 2:
        raise SinglePoint("gap bounds need at least two points")
    tree = decompose(space, full_split=full_split)
    splits: list[SplitTerm] = []
    leaves: list[LeafTerm] = []
    lower = 0.0
    alpha_sum = 0.0
    for node in tree.walk():
        if node.is_leaf:
            if node.size == 1:
                leaves.append(LeafTerm(node.labels, 1, 0.0, np.inf, 0.0))
            else:
                gamma = node.split_distance**p * gamma_discrete(node.size)
                leaves.append(
                    LeafTerm(node.labels, node.size, node.split_distance, gamma, 1.0 / gamma)
                )
                lower += 1.0 / gamma
            continue
        left, right = node.children
        delta_p = node.split_distance**p
        denominator = 2.0 * delta_p
        for child in (left, right):
            if child.size > 1:
                denominator -= (child.size - 1) / child.size * child.split_distance**p
        alpha_exact = 2.0 / denominator
        alpha_cap = node.size / delta_p
        alpha_sum += alpha_cap
        splits.append(
            SplitTerm(
                labels=node.labels,
                size=node.size,
                split_distance=node.split_distance,
                alpha_cap=alpha_cap,
                alpha_exact=alpha_exact,
                denominator=denominator,
                child_sizes=(left.size, right.size),
                child_diameters=(left.split_distance, right.split_distance),
            )
        )
    return RecursiveGapBounds(
        lower_reciprocal=lower,
        upper_reciprocal=lower + alpha_sum,
        splits=tuple(splits),
        leaves=tuple(leaves),
    )


@dataclass(frozen=True)
class CoterieSet:
    alpha: float
    coteries: tuple[tuple[str, ...], ...]
    e: int


def coteries(space: FiniteMetricSpace) -> CoterieSet:
    """All distinct minimum-distance balls holding at least two points.

    In an ultrametric space closed balls of the minimum positive radius are
    pairwise disjoint or equal, so deduplication by point set is exact.
    """
    _require_ultrametric(space)
    if space.n < 2:
        raise SinglePoint("coteries need at least two points")
    d = space.dist
    off = d[~np.eye(space.n, dtype=bool)]
    alpha = float(off.min())
    seen: set[tuple[int, ...]] = set()
    groups: list[tuple[int, ...]] = []
    for i in range(space.n):
        ball = tuple(int(j) for j in np.flatnonzero(d[i] <= alpha))
        if len(ball) >= 2 and ball not in seen:
            seen.add(ball)
            groups.append(ball)
    return CoterieSet(
        alpha=alpha,
        coteries=tuple(tuple(space.labels[j] for j in ball) for ball in groups),
        e=len(groups),
    )


def asymptotic_gap_limit(space: FiniteMetricSpace) -> float:
    """Large-exponent limit of the gap normalized by the minimum distance.

    The reciprocal limit is the sum of the reciprocal discrete-space gaps of
    the coterie sizes.
    """
    cots = coteries(space)
    return 1.0 / sum(1.0 / gamma_discrete(len(ball)) for ball in cots.coteries)


@dataclass(frozen=True)
class UltrametricDiagnostics:
    inverse_entries_positive: bool
    mp_bound_satisfied: bool
    m_p: float
    bound: float
    min_inverse_entry: float


def mp_ultrametric_properties(space: FiniteMetricSpace, p: float) -> UltrametricDiagnostics:
    """Check positivity of the inverse row sums and the M_p diameter bound.

    Both hold for every finite ultrametric space; this is a first-class
    numerical diagnostic, not only a test helper.
    """
    _require_ultrametric(space)
    if space.n < 2:
        raise SinglePoint("diagnostics need at least two points")
    entries = space.dist**p
    b = refined_solve(entries, np.ones(space.n))
    m_p = 1.0 / float(b.sum())
    diameter = float(space.dist.max())
    bound = (space.n - 1) / space.n * diameter**p
    tol = max(1e-10, 1e-12 * bound)
    return UltrametricDiagnostics(
        inverse_entries_positive=bool((b > 0).all()),
        mp_bound_satisfied=bool(m_p <= bound + tol),
        m_p=m_p,
        bound=bound,
        min_inverse_entry=float(b.min()),
    )
