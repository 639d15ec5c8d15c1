"""Negative-type certification and the exact gap.

A finite metric space (X, d) has p-negative type when the quadratic form of
its p-distance matrix is nonpositive on the zero-sum hyperplane F0, and
strict p-negative type when the form vanishes only at zero there. The gap
``gamma`` is the largest constant C with

    (C / 2) * (sum_i |a_i|)**2  +  sum_ij a_i a_j d(x_i, x_j)**p  <=  0

over all zero-sum weight vectors a. For strict spaces the gap equals
``2 / beta`` where beta maximizes the quadratic form of the "hat" matrix

    hat(A) = (A^-1 1)(A^-1 1)^T / (A^-1 1 | 1)  -  A^-1

over sign vectors z in {-1, 1}^n. This module certifies the type class,
computes the constant M_p = sup over the sum-one hyperplane of the form,
builds the hat matrix, and maximizes over sign vectors exhaustively, with an
independent projected-descent oracle as a cross-check.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from math import inf

import numpy as np

from . import spectral
from .errors import (
    NotInF0,
    NotNegativeType,
    NotStrict,
    ToleranceFailure,
    TooManyPoints,
)
from .metric import PDistanceMatrix, is_ultrametric

DEFAULT_ENUMERATION_CAP = 24

_CHUNK_BITS = 15  # sign vectors are enumerated in chunks of 2**_CHUNK_BITS


class Classification(Enum):
    NOT_NEGATIVE_TYPE = "NotNegativeType"
    NEGATIVE_TYPE_NON_STRICT = "NegativeTypeNonStrict"
    STRICT_NEGATIVE_TYPE = "StrictNegativeType"


class GapMethod(Enum):
    SIGN_ENUMERATION = "SignEnumeration"
    DEFINITION_ZERO = "DefinitionZero"
    SINGLE_POINT = "SinglePoint"


@dataclass(frozen=True)
class NegTypeCertificate:
    """Spectral and solvability evidence for the type classification."""

    classification: Classification
    lambda_penultimate: float | None
    lambda_max: float | None
    b: np.ndarray | None
    b_dot_one: float | None
    m_p: float
    m_p_reason: str | None
    u_p: np.ndarray | None
    witness: np.ndarray | None
    boundary_warning: bool
    zero_tol: float

    @property
    def strict(self) -> bool:
        return self.classification is Classification.STRICT_NEGATIVE_TYPE


@dataclass(frozen=True)
class GapResult:
    gamma: float
    beta: float
    z_star: np.ndarray | None
    method: GapMethod


@dataclass(frozen=True)
class OracleResult:
    gamma: float
    minimizer: np.ndarray
    restarts: int
    iterations: int


def _f0_witness(dp: np.ndarray) -> np.ndarray:
    """Best-effort zero-sum vector with a positive quadratic form value."""
    n = dp.shape[0]
    proj = np.eye(n) - np.full((n, n), 1.0 / n)
    spectrum = spectral.sym_eigen(proj @ dp @ proj)
    w = spectrum.eigenvectors[:, -1]
    w = w - w.mean()
    norm = np.abs(w).sum()
    return w / norm if norm > 0 else w


def certify(dp: PDistanceMatrix) -> NegTypeCertificate:
    """Classify (strict) p-negative type with supporting evidence.

    Spaces of one point are strict by convention (M_p = 0, u_p = 1). For
    ultrametric sources strictness holds for every exponent, so they are
    certified directly; eigenvalue sign tests at the norm-scaled tolerance
    would misclassify them for large p, where the relevant eigenvalues are
    tiny relative to the matrix norm. All other inputs are classified by the
    spectral conditions: negative type needs a single positive eigenvalue and
    a solution b of D_p b = 1 with (b | 1) >= 0; strictness additionally
    needs nonsingularity and (b | 1) > 0.
    """
    n = dp.n
    if n == 1:
        return NegTypeCertificate(
            classification=Classification.STRICT_NEGATIVE_TYPE,
            lambda_penultimate=None,
            lambda_max=None,
            b=None,
            b_dot_one=None,
            m_p=0.0,
            m_p_reason=None,
            u_p=np.ones(1),
            witness=None,
            boundary_warning=False,
            zero_tol=spectral.zero_tolerance(0.0),
        )

    entries = dp.entries
    spectrum = spectral.sym_eigen(entries)
    lam = spectrum.eigenvalues
    ztol = spectrum.zero_tol
    lam_penult = float(lam[-2])
    lam_max = float(lam[-1])

    if is_ultrametric(dp.source):
        b = spectral.refined_solve(entries, np.ones(n))
        b_dot_one = float(b.sum())
        if not b_dot_one > 0:
            raise ToleranceFailure("ultrametric solve produced a nonpositive (b | 1)")
        u_p = b / b_dot_one
        m_p = 1.0 / b_dot_one
        _check_u_p(entries, u_p, m_p)
        return NegTypeCertificate(
            classification=Classification.STRICT_NEGATIVE_TYPE,
            lambda_penultimate=lam_penult,
            lambda_max=lam_max,
            b=b,
            b_dot_one=b_dot_one,
            m_p=m_p,
            m_p_reason=None,
            u_p=u_p,
            witness=None,
            boundary_warning=False,
            zero_tol=ztol,
        )

    if not (lam_max > ztol and lam_penult <= ztol):
        # more than one significantly positive eigenvalue (or none)
        return _not_negative_type(entries, lam_penult, lam_max, ztol)

    nonsingular = bool(np.abs(lam).min() > ztol)
    if nonsingular:
        b = spectral.refined_solve(entries, np.ones(n))
        residual_ok = True
    else:
        result = spectral.solve_sym(entries, np.ones(n))
        b = result.solution
        residual_ok = result.residual <= ztol * np.sqrt(n)
    if not residual_ok:
        # 1 is not in the range of D_p, so no valid b exists
        return _not_negative_type(entries, lam_penult, lam_max, ztol)
    b_dot_one = float(b.sum())

    if b_dot_one < -ztol:
        return _not_negative_type(entries, lam_penult, lam_max, ztol, b=b, b_dot_one=b_dot_one)

    strict_spectrum = lam_penult < -ztol and nonsingular
    if strict_spectrum and b_dot_one > ztol:
        u_p = b / b_dot_one
        m_p = 1.0 / b_dot_one
        _check_u_p(entries, u_p, m_p)
        return NegTypeCertificate(
            classification=Classification.STRICT_NEGATIVE_TYPE,
            lambda_penultimate=lam_penult,
            lambda_max=lam_max,
            b=b,
            b_dot_one=b_dot_one,
            m_p=m_p,
            m_p_reason=None,
            u_p=u_p,
            witness=None,
            boundary_warning=False,
            zero_tol=ztol,
        )

    # Negative type but not certifiably strict. Near-zero (b | 1) is the
    # conservative boundary case; M_p is infinite exactly when (b | 1) ~ 0.
    boundary = strict_spectrum and abs(b_dot_one) <= ztol
    if b_dot_one > ztol:
        m_p, reason = 1.0 / b_dot_one, None
    else:
        m_p, reason = inf, "(b | 1) is zero within tolerance"
    return NegTypeCertificate(
        classification=Classification.NEGATIVE_TYPE_NON_STRICT,
        lambda_penultimate=lam_penult,
        lambda_max=lam_max,
        b=b,
        b_dot_one=b_dot_one,
        m_p=m_p,
        m_p_reason=reason,
        u_p=None,
        witness=None,
        boundary_warning=boundary,
        zero_tol=ztol,
    )


def _not_negative_type(entries, lam_penult, lam_max, ztol, b=None, b_dot_one=None):
    return NegTypeCertificate(
        classification=Classification.NOT_NEGATIVE_TYPE,
        lambda_penultimate=lam_penult,
        lambda_max=lam_max,
        b=b,
        b_dot_one=b_dot_one,
        m_p=inf,
        m_p_reason="not of p-negative type",
        u_p=None,
        witness=_f0_witness(entries),
        boundary_warning=False,
        zero_tol=ztol,
    )


def _check_u_p(entries: np.ndarray, u_p: np.ndarray, m_p: float) -> None:
    scale = max(abs(m_p), 1e-300)
    if float(np.abs(entries @ u_p - m_p).max()) > 1e-8 * scale:
        raise ToleranceFailure("u_p residual exceeds 1e-8 relative")
    if abs(float(u_p.sum()) - 1.0) > 1e-10:
        raise ToleranceFailure("u_p does not lie on the sum-one hyperplane")


def m_constant(dp: PDistanceMatrix, cert: NegTypeCertificate | None = None) -> float:
    """M_p: the supremum of the form over sum-one weights (may be inf)."""
    if cert is None:
        cert = certify(dp)
    return cert.m_p


def hat_matrix(dp: PDistanceMatrix, cert: NegTypeCertificate | None = None) -> np.ndarray:
    """The rank-one-corrected negative inverse whose sign maximum gives the gap.

    Requires a strict space (nonsingular matrix with (D_p^-1 1 | 1) > 0).
    The result annihilates the all-ones vector.
    """
    if cert is None:
        cert = certify(dp)
    if not cert.strict:
        raise NotStrict("hat matrix is defined only for strict p-negative type")
    if dp.n == 1:
        return np.zeros((1, 1))
    inv = spectral.refined_inverse(dp.entries)
    b = cert.b if cert.b is not None else spectral.refined_solve(dp.entries, np.ones(dp.n))
    hat = np.outer(b, b) / b.sum() - inv
    hat = 0.5 * (hat + hat.T)
    scale = max(float(np.abs(hat).max()), 1e-300)
    if float(np.abs(hat @ np.ones(dp.n)).max()) > 1e-8 * scale * dp.n:
        raise ToleranceFailure("hat matrix does not annihilate the all-ones vector")
    return hat


def _thread_count(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("NEGTYPE_THREADS", "").strip()
        if not env:
            return 1
        threads = int(env)
    if threads == 0:
        return os.cpu_count() or 1
    return max(1, threads)


def _sign_chunk(hat: np.ndarray, start: int, stop: int) -> tuple[float, int]:
    """Max of (hat z | z) over canonical sign vectors numbered [start, stop)."""
    n = hat.shape[0]
    ks = np.arange(start, stop, dtype=np.uint64)
    shifts = np.arange(n - 2, -1, -1, dtype=np.uint64)  # first coordinate is the MSB
    bits = (ks[:, None] >> shifts[None, :]) & np.uint64(1)
    z = np.empty((len(ks), n))
    z[:, 0] = 1.0
    z[:, 1:] = 1.0 - 2.0 * bits.astype(np.float64)
    values = ((z @ hat) * z).sum(axis=1)
    best = float(values.max())
    ties = np.flatnonzero(values == best)
    return best, start + int(ties[-1])


def _z_from_index(n: int, k: int) -> np.ndarray:
    z = np.ones(n)
    for j in range(n - 1):
        if (k >> (n - 2 - j)) & 1:
            z[j + 1] = -1.0
    return z


def gap_exact(
    dp: PDistanceMatrix,
    cap: int = DEFAULT_ENUMERATION_CAP,
    cert: NegTypeCertificate | None = None,
    threads: int | None = None,
) -> GapResult:
    """Exact gap by exhaustive sign-vector maximization.

    Fixing the first sign to +1 halves the search (z and -z give equal
    values). Ties are broken toward the lexicographically smallest sign
    vector, independently of chunking or thread count. Non-strict spaces of
    negative type report exactly 0; single points are unbounded.
    """
    if cert is None:
        cert = certify(dp)
    n = dp.n
    if n == 1:
        return GapResult(gamma=inf, beta=0.0, z_star=np.ones(1), method=GapMethod.SINGLE_POINT)
    if cert.classification is Classification.NOT_NEGATIVE_TYPE:
        raise NotNegativeType("the gap is defined only for p-negative type spaces")
    if cert.classification is Classification.NEGATIVE_TYPE_NON_STRICT:
        return GapResult(gamma=0.0, beta=inf, z_star=None, method=GapMethod.DEFINITION_ZERO)
    if n > cap:
        raise TooManyPoints(n, cap)

    hat = hat_matrix(dp, cert)
    total = 1 << (n - 1)
    chunk = 1 << _CHUNK_BITS
    ranges = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    workers = _thread_count(threads)
    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: _sign_chunk(hat, *r), ranges))
    else:
        results = [_sign_chunk(hat, *r) for r in ranges]

    best, best_k = results[0]
    for value, k in results[1:]:
        if value > best or (value == best and k > best_k):
            best, best_k = value, k
    if not best > 0:
        raise ToleranceFailure("sign maximization returned a nonpositive maximum on a strict space")
    return GapResult(
        gamma=2.0 / best,
        beta=best,
        z_star=_z_from_index(n, best_k),
        method=GapMethod.SIGN_ENUMERATION,
    )


def gap_definition_check(dp: PDistanceMatrix, gamma: float, x) -> bool:
    """Whether the defining inequality holds at ``gamma`` for zero-sum ``x``."""
    x = np.asarray(x, dtype=np.float64)
    norm1 = float(np.abs(x).sum())
    if norm1 == 0.0:
        raise NotInF0("x must be nonzero")
    if abs(float(x.sum())) > 1e-12 * norm1:
        raise NotInF0("x does not lie on the zero-sum hyperplane")
    lhs = 0.5 * gamma * norm1**2 + float(x @ dp.entries @ x)
    return lhs <= 1e-12 * norm1**2 * max(1.0, gamma)


def gap_numeric_oracle(
    dp: PDistanceMatrix,
    restarts: int = 200,
    seed: int = 0,
    max_iterations: int = 600,
    cert: NegTypeCertificate | None = None,
) -> OracleResult:
    """Independent gap estimate by projected descent, avoiding the hat matrix.

    Minimizes the normalized form -(D_p x | x) / |x|_1^2 over the zero-sum
    hyperplane: restarts are drawn from a seeded uniform sphere, projected by
    mean subtraction, renormalized in the 1-norm, and descended with a
    backtracking step size. Twice the best minimum found is an upper bound on
    the gap up to solver tolerance, and converges to it given enough
    restarts on small spaces.
    """
    if cert is None:
        cert = certify(dp)
    if not cert.strict:
        raise NotStrict("the numeric oracle requires a strict space")
    entries = dp.entries
    n = dp.n
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((restarts, n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    x -= x.mean(axis=1, keepdims=True)
    x /= np.abs(x).sum(axis=1, keepdims=True)

    def value(v: np.ndarray) -> np.ndarray:
        return -np.einsum("ij,ij->i", v @ entries, v)

    f = value(x)
    step = np.full(restarts, 0.25)
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        grad = -2.0 * (x @ entries) - 2.0 * f[:, None] * np.sign(x)
        grad -= grad.mean(axis=1, keepdims=True)
        grad_sq = np.einsum("ij,ij->i", grad, grad)
        if grad_sq.max() < 1e-24:
            break
        cand = x - step[:, None] * grad
        cand -= cand.mean(axis=1, keepdims=True)
        cand /= np.abs(cand).sum(axis=1, keepdims=True)
        f_cand = value(cand)
        accepted = f_cand < f - 1e-4 * step * grad_sq
        x[accepted] = cand[accepted]
        f[accepted] = f_cand[accepted]
        step[accepted] *= 1.3
        step[~accepted] *= 0.5
        np.maximum(step, 1e-17, out=step)
    best = int(np.argmin(f))
    return OracleResult(
        gamma=2.0 * float(f[best]),
        minimizer=x[best].copy(),
        restarts=restarts,
        iterations=iterations,
    )
