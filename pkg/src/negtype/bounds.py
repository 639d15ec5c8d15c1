"""Closed-form and spectral bounds on the gap, and related identities.

Two distinct combinatorial coefficients share the same floor/ceiling shape
and are easy to confuse, so both get named functions: ``gamma_discrete`` is
the exact gap of the discrete n-point space, and ``gamma_xi`` is its
complement to one, used by the exponent-enlargement formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import inf, log

import numpy as np

from . import gap as gap_mod
from .errors import (
    NonzeroDiagonal,
    NotStrict,
    TooFewPoints,
    TooManyPoints,
    ZeroGap,
)
from .metric import FiniteMetricSpace, PDistanceMatrix, space_stats

#: Row sums are considered constant when their spread is below this, relatively.
ROW_SUM_RTOL = 1e-9

_AVERAGING_CAP = 20


def gamma_discrete(n: int) -> float:
    """Exact gap of the discrete n-point space: half of (1/floor + 1/ceil).

    Equals 2/n for even n and 2/(n - 1/n) for odd n, independent of the
    exponent.
    """
    if n < 2:
        raise TooFewPoints(f"need at least two points, got {n}")
    return 0.5 * (1.0 / (n // 2) + 1.0 / ((n + 1) // 2))


def gamma_xi(n: int) -> float:
    """The coefficient 1 - gamma_discrete(n) used by xi_enlargement."""
    return 1.0 - gamma_discrete(n)


def upper_bound_mean(space: FiniteMetricSpace, p: float) -> float:
    """Mean off-diagonal p-distance times the discrete-space gap.

    An upper bound on the gap of any space of p-negative type; tight exactly
    on discrete spaces.
    """
    n = space.n
    if n < 2:
        raise TooFewPoints("the mean bound needs at least two points")
    off = space.dist[~np.eye(n, dtype=bool)] ** p
    return float(off.mean()) * gamma_discrete(n)


@dataclass(frozen=True)
class DiameterBound:
    value: float
    tight: bool


def upper_bound_diameter(space: FiniteMetricSpace, p: float) -> DiameterBound:
    """Diameter^p times the discrete-space gap, with a tightness flag.

    Tight if and only if every off-diagonal distance equals the diameter.
    """
    n = space.n
    if n < 2:
        raise TooFewPoints("the diameter bound needs at least two points")
    off = space.dist[~np.eye(n, dtype=bool)]
    diameter = float(off.max())
    tight = bool((off == diameter).all())
    return DiameterBound(value=diameter**p * gamma_discrete(n), tight=tight)


@dataclass(frozen=True)
class GapBounds:
    lower: float
    upper: float
    lower_provenance: str
    upper_provenance: str
    row_sum_factor: float | None = None
    constant_row_sum: bool | None = None


def spectral_bounds(
    dp: PDistanceMatrix, cert: gap_mod.NegTypeCertificate | None = None
) -> GapBounds:
    """Sandwich the gap between eigenvalue expressions (strict spaces only).

    The lower bound is |lambda_{n-1}| * gamma_discrete(n) scaled by the
    row-sum factor lambda_n / (n * M_p); the upper bound is |lambda_{n-1}|.
    The factor is at most one, with equality exactly when the p-distance
    matrix has constant row sums.
    """
    if cert is None:
        cert = gap_mod.certify(dp)
    if not cert.strict:
        raise NotStrict("spectral bounds require strict p-negative type")
    n = dp.n
    if n < 2:
        raise TooFewPoints("spectral bounds need at least two points")
    lam_penult = cert.lambda_penultimate
    lam_max = cert.lambda_max
    factor = lam_max / (n * cert.m_p)
    lower = factor * abs(lam_penult) * gamma_discrete(n)
    row_sums = dp.entries.sum(axis=1)
    spread = float(row_sums.max() - row_sums.min())
    constant = spread <= ROW_SUM_RTOL * max(1.0, float(np.abs(row_sums).max()))
    return GapBounds(
        lower=lower,
        upper=abs(lam_penult),
        lower_provenance="row-sum-scaled spectral lower bound",
        upper_provenance="penultimate eigenvalue magnitude",
        row_sum_factor=factor,
        constant_row_sum=constant,
    )


@dataclass(frozen=True)
class XiResult:
    """Length of the exponent interval above p on which strictness persists."""

    xi: float
    gamma_xi_n: float
    gamma: float
    diameter: float
    ratio: float
    n: int
    exponent_mode: str


def xi_enlargement(
    space: FiniteMetricSpace,
    p: float,
    gamma: float,
    exponent_mode: str = "product",
) -> XiResult:
    """Exponent-enlargement length from the gap, the diameter, and the ratio.

    ``exponent_mode`` selects how the diameter term in the logarithm's
    argument is read: "product" uses diameter**p * gamma_xi(n) and "power"
    uses diameter**(p * gamma_xi(n)); the two readings coincide only in
    special cases, and "product" is the default. A distance ratio of one
    (all distances equal) makes the interval unbounded. A zero gap gives a
    zero-length interval; negative gaps are rejected.
    """
    if space.n < 3:
        raise TooFewPoints("the enlargement formula needs at least three points")
    if gamma < 0:
        raise ZeroGap(f"gap must be nonnegative, got {gamma}")
    if exponent_mode not in ("product", "power"):
        raise ValueError(f"unknown exponent mode {exponent_mode!r}")
    stats = space_stats(space)
    g_xi = gamma_xi(space.n)
    if stats.ratio == 1.0:
        xi = inf
    else:
        if exponent_mode == "product":
            denom = stats.diameter**p * g_xi
        else:
            denom = stats.diameter ** (p * g_xi)
        xi = log(1.0 + gamma / denom) / log(stats.ratio)
    return XiResult(
        xi=xi,
        gamma_xi_n=g_xi,
        gamma=gamma,
        diameter=stats.diameter,
        ratio=stats.ratio,
        n=space.n,
        exponent_mode=exponent_mode,
    )


@dataclass(frozen=True)
class AveragingIdentity:
    lhs: float
    rhs: float
    parity: str
    sample_count: int
    mean_off_diagonal: float


def averaging_identity(b) -> AveragingIdentity:
    """Average the form over balanced sign vectors and compare to closed form.

    For even n the vectors have entries in {-1, 1} with exactly n/2 ones and
    the average equals -n times the mean off-diagonal entry. For odd
    n = 2m + 1 the negative entries are -1 - 1/m, there are m + 1 ones, and
    the average equals -(m + 1) n / m times the mean off-diagonal entry.
    Both sides are returned for equality testing; this is a test oracle, so
    the enumeration is direct and capped.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {b.shape}")
    n = b.shape[0]
    if n < 2:
        raise TooFewPoints("need at least two points")
    if n > _AVERAGING_CAP:
        raise TooManyPoints(n, _AVERAGING_CAP)
    bad = np.flatnonzero(np.diag(b) != 0.0)
    if bad.size:
        raise NonzeroDiagonal(int(bad[0]))

    mean_off = float(b[~np.eye(n, dtype=bool)].mean())
    if n % 2 == 0:
        m = n // 2
        ones_count, low_value = m, -1.0
        rhs = -n * mean_off
        parity = "even"
    else:
        m = n // 2
        ones_count, low_value = m + 1, -1.0 - 1.0 / m
        rhs = -((m + 1) * n / m) * mean_off
        parity = "odd"

    supports = list(combinations(range(n), ones_count))
    x = np.full((len(supports), n), low_value)
    for row, support in enumerate(supports):
        x[row, list(support)] = 1.0
    lhs = float(np.einsum("ij,ij->i", x @ b, x).mean())
    return AveragingIdentity(
        lhs=lhs, rhs=rhs, parity=parity, sample_count=len(supports), mean_off_diagonal=mean_off
    )
