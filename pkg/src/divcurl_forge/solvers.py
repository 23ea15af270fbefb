r"""Solvers
===========

Krylov kernels shared by the grid complex, the operator pairs and the
div-curl diagnostics. Operators are passed as callables so that sparse
matrices, products of sparse matrices and matrix-free maps all work. Inner
products are weighted by a diagonal Gram vector: every operator handled here
is self-adjoint with respect to that weight, not necessarily as a matrix.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError

logger = logging.getLogger(__name__)

Apply = Callable[[NDArray[np.float64]], NDArray[np.float64]]


@dataclass(frozen=True)
class SolverInfo:
    r"""Convergence information of an iterative solve."""

    niter: int
    success: bool
    res_norm: float


def weighted_dot(
    x: NDArray[np.float64], y: NDArray[np.float64], gram: NDArray[np.float64]
) -> float:
    r"""Weighted dot.

    :param x:
    :type x: NDArray[np.float64]
    :param y:
    :type y: NDArray[np.float64]
    :param gram: diagonal of the Gram matrix
    :type gram: NDArray[np.float64]
    :rtype: float
    """
    return float(np.dot(x * gram, y))


def project_out(
    x: NDArray[np.float64],
    basis: NDArray[np.float64] | None,
    gram: NDArray[np.float64],
) -> NDArray[np.float64]:
    r"""Remove the components of ``x`` along an orthonormal basis.

    :param x:
    :type x: NDArray[np.float64]
    :param basis: columns orthonormal for ``gram``, or None
    :type basis: NDArray[np.float64] | None
    :param gram:
    :type gram: NDArray[np.float64]
    :rtype: NDArray[np.float64]
    """
    if basis is None or basis.shape[1] == 0:
        return x
    return x - basis @ (basis.T @ (gram * x))


def conjugate_gradient(
    apply: Apply,
    b: NDArray[np.float64],
    gram: NDArray[np.float64],
    deflation: NDArray[np.float64] | None = None,
    tol: float = 1e-8,
    maxiter: int | None = None,
    raise_on_failure: bool = True,
) -> tuple[NDArray[np.float64], SolverInfo]:
    r"""Deflated conjugate gradient for a positive semi-definite system.

    The right hand side and every iterate are kept orthogonal to
    ``deflation`` (the known kernel), so the iteration converges to the
    minimum-norm solution. Stops when ``‖r‖ <= tol * ‖b‖``.

    :param apply: operator, self-adjoint for ``gram``
    :type apply: Apply
    :param b:
    :type b: NDArray[np.float64]
    :param gram: diagonal Gram weights
    :type gram: NDArray[np.float64]
    :param deflation: orthonormal kernel basis as columns
    :type deflation: NDArray[np.float64] | None
    :param tol:
    :type tol: float
    :param maxiter:
    :type maxiter: int | None
    :param raise_on_failure:
    :type raise_on_failure: bool
    :rtype: tuple[NDArray[np.float64], SolverInfo]
    """
    n = b.shape[0]
    maxiter = maxiter or max(10 * n, 100)
    b = project_out(b, deflation, gram)
    x = np.zeros_like(b)
    b_norm = np.sqrt(weighted_dot(b, b, gram))
    if b_norm == 0.0:
        return x, SolverInfo(0, True, 0.0)
    r = b.copy()
    p = r.copy()
    rr = weighted_dot(r, r, gram)
    threshold = (tol * b_norm) ** 2
    niter = 0
    while niter < maxiter and rr > threshold:
        ap = project_out(apply(p), deflation, gram)
        pap = weighted_dot(p, ap, gram)
        if pap <= 0.0:
            break
        alpha = rr / pap
        x += alpha * p
        r -= alpha * ap
        rr_new = weighted_dot(r, r, gram)
        p = r + (rr_new / rr) * p
        rr = rr_new
        niter += 1
    res_norm = float(np.sqrt(rr))
    info = SolverInfo(niter, rr <= threshold, res_norm)
    logger.debug(
        "cg: n=%d niter=%d res=%.3e success=%s",
        n,
        niter,
        res_norm,
        info.success,
    )
    if not info.success and raise_on_failure:
        raise ConvergenceError(
            "conjugate gradient did not converge", niter, res_norm
        )
    return project_out(x, deflation, gram), info


def lanczos_inverse_sqrt_norm(
    apply: Apply,
    v: NDArray[np.float64],
    gram: NDArray[np.float64],
    steps: int = 5,
) -> float:
    r"""Approximate ``‖A^{-1/2} v‖`` by a short Lanczos recurrence.

    ``A`` must be self-adjoint and positive-definite for ``gram``. The
    Krylov space of dimension ``steps`` gives ``‖v‖ ‖f(T) e₁‖`` with
    ``f(t) = t^{-1/2}`` evaluated on the tridiagonal projection ``T``.

    :param apply:
    :type apply: Apply
    :param v:
    :type v: NDArray[np.float64]
    :param gram:
    :type gram: NDArray[np.float64]
    :param steps:
    :type steps: int
    :rtype: float
    """
    v_norm = np.sqrt(weighted_dot(v, v, gram))
    if v_norm == 0.0:
        return 0.0
    q = v / v_norm
    q_prev = np.zeros_like(q)
    alphas: list[float] = []
    betas: list[float] = []
    beta = 0.0
    for _ in range(steps):
        w = apply(q) - beta * q_prev
        alpha = weighted_dot(q, w, gram)
        w -= alpha * q
        alphas.append(alpha)
        beta = np.sqrt(weighted_dot(w, w, gram))
        # invariant subspace reached
        if beta <= 1e-14 * abs(alpha):
            break
        betas.append(beta)
        q_prev, q = q, w / beta
    diagonal = np.array(alphas)
    off = np.array(betas[: len(alphas) - 1])
    if diagonal.size == 1:
        if diagonal[0] <= 0.0:
            raise ConvergenceError(
                "Lanczos met a non-positive Ritz value", 1, 0.0
            )
        return float(v_norm / np.sqrt(diagonal[0]))
    theta, s = eigh_tridiagonal(diagonal, off)
    if theta.min() <= 0.0:
        raise ConvergenceError(
            "Lanczos met a non-positive Ritz value",
            diagonal.size,
            float(theta.min()),
        )
    coefficients = s @ (s[0] / np.sqrt(theta))
    return float(v_norm * np.linalg.norm(coefficients))
