"""Spectrum of the memoryless-learner transition matrix.

The matrix has ``T[i, i] = a_i`` and ``T[i, j] = (1 - a_i) / (n - 1)``
off the diagonal, with ``a_1 = 1``.  Its eigenvalues are
``1 - n/(n-1) * mu`` where ``mu`` runs over the roots of ``x p'(x)`` and
``p(x) = x * prod(x - x_i)`` has the gaps as roots.  So the second largest
eigenvalue comes from the smallest positive root of ``p'``, which is found
here by bisection on the logarithmic derivative of ``p``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .distributions import LearnerInstance

__all__ = [
    "DegenerateSpectrumError",
    "LearnerInstance",
    "SpectralSummary",
    "build_transition_matrix",
    "char_poly_identity_residual",
    "smallest_derivative_root",
    "harmonic_mean",
    "second_eigenvalue",
    "dense_eigenvalues",
    "eigen_constant_C",
    "eigenvectors",
    "summarize",
]

CHAR_POLY_CAP = 64
ROOT_RTOL = 1e-14
SHIFT = 1e-12
INVERSE_ITERATION_TOL = 1e-12
INVERSE_ITERATION_MAXITER = 100
MIN_SEPARATION = 1e-8


class DegenerateSpectrumError(ValueError):
    """Second eigenvalue is not separated from the rest of the spectrum."""


def _gaps(gaps) -> np.ndarray:
    x = np.asarray(gaps, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("need at least one gap")
    if np.any(~(x > 0)):
        raise ValueError("gaps must be strictly positive")
    return x


def build_transition_matrix(inst: LearnerInstance) -> np.ndarray:
    n = inst.n
    x = np.concatenate(([0.0], inst.x))
    T = np.repeat((x / (n - 1))[:, None], n, axis=1)
    np.fill_diagonal(T, 1.0 - x)
    return T


def char_poly_identity_residual(inst: LearnerInstance, cap: int = CHAR_POLY_CAP) -> float:
    """Normalised coefficient gap between ``det(z I - B)`` and ``z p'(z) / n``.

    ``B = (n-1)/n (I - T)``.  Both polynomials are monic of degree ``n``; the
    returned value is the largest absolute coefficient difference divided by
    the largest coefficient magnitude.
    """
    n = inst.n
    if n > cap:
        raise ValueError(f"n={n} exceeds coefficient-expansion cap {cap}")
    B = (n - 1) / n * (np.eye(n) - build_transition_matrix(inst))
    pb = np.real(np.poly(B))
    p = np.poly(np.concatenate(([0.0], inst.x)))
    rhs = np.append(np.polyder(p) / n, 0.0)
    scale = max(np.max(np.abs(pb)), np.max(np.abs(rhs)))
    return float(np.max(np.abs(pb - rhs)) / scale)


def log_derivative(mu: float, gaps: np.ndarray) -> float:
    """``p'(mu)/p(mu) = 1/mu + sum 1/(mu - x_i)``."""
    return 1.0 / mu + float(np.sum(1.0 / (mu - gaps)))


def smallest_derivative_root(gaps, rtol: float = ROOT_RTOL) -> float:
    """Smallest positive root of ``p'`` for ``p(z) = z * prod(z - x_i)``.

    The log-derivative decreases from ``+inf`` to ``-inf`` on ``(0, min x)``,
    so plain bisection converges to the unique root there.  Ties among the
    gaps need no special handling.
    """
    x = _gaps(gaps)
    xmin = float(x.min())
    lo, hi = xmin * 2.0**-60, xmin * (1.0 - 2.0**-52)
    if not (log_derivative(lo, x) > 0 > log_derivative(hi, x)):
        raise ArithmeticError("log-derivative does not change sign on (0, min gap)")
    tol = rtol * xmin
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if log_derivative(mid, x) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def harmonic_mean(gaps) -> float:
    x = _gaps(gaps)
    return x.size / float(np.sum(1.0 / x))


def second_eigenvalue(inst: LearnerInstance) -> float:
    n = inst.n
    return 1.0 - n / (n - 1) * smallest_derivative_root(inst.x)


def dense_eigenvalues(T: np.ndarray) -> np.ndarray:
    """All eigenvalues of ``T`` (real parts) in decreasing order.

    Only meant for cross-checks on small matrices.
    """
    ev = np.linalg.eigvals(T)
    return np.sort(ev.real)[::-1]


def _inverse_iteration(lu, A, start, left, tol, maxiter):
    v = start / np.max(np.abs(start))
    trans = 1 if left else 0
    M = A.T if left else A
    for _ in range(maxiter):
        y = lu_solve(lu, v, trans=trans)
        v = y / y[np.argmax(np.abs(y))]
        if np.max(np.abs(M @ v)) <= tol:
            # one polishing step removes the O(shift) residue left after the first hit
            y = lu_solve(lu, v, trans=trans)
            return y / y[np.argmax(np.abs(y))]
    raise ArithmeticError(f"inverse iteration did not converge in {maxiter} steps")


def eigenvectors(inst: LearnerInstance, lam: float | None = None,
                 tol: float = INVERSE_ITERATION_TOL,
                 maxiter: int = INVERSE_ITERATION_MAXITER):
    """Right and left eigenvectors for the second eigenvalue.

    Returned pair ``(v, w)`` satisfies ``T v = lam v``, ``w T = lam w`` and
    ``w @ v == 1``.
    """
    n = inst.n
    mu = smallest_derivative_root(inst.x)
    if lam is None:
        lam = 1.0 - n / (n - 1) * mu
    # every other root of p' is >= min gap
    if n / (n - 1) * (inst.x.min() - mu) < MIN_SEPARATION:
        raise DegenerateSpectrumError("second eigenvalue is (nearly) repeated")
    T = build_transition_matrix(inst)
    A = T - lam * np.eye(n)
    lu = lu_factor(T - (lam + SHIFT) * np.eye(n))
    start = np.random.default_rng(0).standard_normal(n)
    v = _inverse_iteration(lu, A, start, False, tol, maxiter)
    w = _inverse_iteration(lu, A, start, True, tol, maxiter)
    w = w / (w @ v)
    return v, w


def eigen_constant_C(inst: LearnerInstance) -> float:
    """Amplitude ``C`` in ``1 - Q11(N) ~ C * lambda_star**N``.

    ``C = -sum(v) * w[0] / n`` with the uniform starting distribution.
    """
    v, w = eigenvectors(inst)
    return float(-np.sum(v) * w[0] / inst.n)


@dataclass(frozen=True)
class SpectralSummary:
    n: int
    lambda_star: float
    mu_star: float
    H: float
    C: float
    bound_lo_ok: bool
    bound_hi_ok: bool


def summarize(inst: LearnerInstance, with_C: bool = True) -> SpectralSummary:
    n = inst.n
    mu = smallest_derivative_root(inst.x)
    H = harmonic_mean(inst.x)
    lam = 1.0 - n / (n - 1) * mu
    C = float("nan")
    if with_C:
        try:
            C = eigen_constant_C(inst)
        except DegenerateSpectrumError:
            pass
    scaled = (n - 1) * mu
    slack = (n - 1) * ROOT_RTOL * inst.x.min() + 4 * np.finfo(float).eps * H
    return SpectralSummary(
        n=n,
        lambda_star=lam,
        mu_star=mu,
        H=H,
        C=C,
        bound_lo_ok=bool(0.5 * H <= scaled + slack),
        bound_hi_ok=bool(scaled <= H + slack),
    )
