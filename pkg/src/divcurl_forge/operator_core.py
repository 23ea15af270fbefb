r"""Operator core
=================

Finite-dimensional operator pairs ``S: H → Y`` and ``T: H → Z``. Each of
``H``, ``Y``, ``Z`` carries a diagonal Gram matrix; adjoints are taken with
respect to them, so ``S† = G_H⁻¹ Sᵀ G_Y``. A positive-definite weight
``E`` stands in for the compact embedding ``H ⋐ H̃`` through
``‖h‖_H̃ = ‖E h‖_H``.
"""

import logging
import os
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy import io, sparse
from scipy.sparse.linalg import eigsh

from . import RANK_GAP, RANK_TOL, SOLVER_TOL
from .errors import ShapeMismatchError, SingularOperatorError
from .grid_complex import (
    PeriodicGrid,
    codifferential_matrix,
    d_matrix,
    harmonic_basis,
    laplacian_matrix,
    mass_vector,
)
from .solvers import SolverInfo, conjugate_gradient
from .utils import fit_order

logger = logging.getLogger(__name__)

DENSE_LIMIT = 5000
Mode = Literal["auto", "dense", "iterative"]


def _vector(values, size: int, name: str) -> NDArray[np.float64]:
    if values is None:
        result = np.ones(size)
    else:
        result = np.asarray(values, dtype=np.float64).ravel()
    if result.shape != (size,):
        raise ShapeMismatchError(f"{name} needs {size} entries")
    if np.any(result <= 0):
        raise SingularOperatorError(f"{name} must be positive")
    result.flags.writeable = False
    return result


@dataclass(frozen=True, eq=False)
class OperatorPair:
    r"""Two linear maps out of a common inner-product space."""

    S: sparse.csr_matrix
    T: sparse.csr_matrix
    embed_weight: sparse.csr_matrix | None = None
    gram_H: NDArray[np.float64] | None = field(default=None, repr=False)
    gram_Y: NDArray[np.float64] | None = field(default=None, repr=False)
    gram_Z: NDArray[np.float64] | None = field(default=None, repr=False)
    # orthonormal bases of ker S† and ker T†, used to deflate solves
    deflation_Y: NDArray[np.float64] | None = field(default=None, repr=False)
    deflation_Z: NDArray[np.float64] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        r"""Normalize storage and check shapes.

        :rtype: None
        """
        S = sparse.csr_matrix(self.S, dtype=np.float64)
        T = sparse.csr_matrix(self.T, dtype=np.float64)
        if S.shape[1] != T.shape[1]:
            raise ShapeMismatchError(
                f"S acts on {S.shape[1]} unknowns but T on {T.shape[1]}"
            )
        dim_H = S.shape[1]
        weight = (
            sparse.identity(dim_H, format="csr")
            if self.embed_weight is None
            else sparse.csr_matrix(self.embed_weight, dtype=np.float64)
        )
        if weight.shape != (dim_H, dim_H):
            raise ShapeMismatchError(
                f"embed_weight must be {dim_H}x{dim_H}, got {weight.shape}"
            )
        off_diagonal = weight - sparse.diags(weight.diagonal())
        if off_diagonal.count_nonzero() == 0 and np.any(
            weight.diagonal() <= 0
        ):
            raise SingularOperatorError("embed_weight must be positive")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "embed_weight", weight)
        object.__setattr__(
            self, "gram_H", _vector(self.gram_H, dim_H, "gram_H")
        )
        object.__setattr__(
            self, "gram_Y", _vector(self.gram_Y, S.shape[0], "gram_Y")
        )
        object.__setattr__(
            self, "gram_Z", _vector(self.gram_Z, T.shape[0], "gram_Z")
        )

    @classmethod
    def from_grid(
        cls,
        grid: PeriodicGrid,
        q: int = 1,
        embed_weight: sparse.spmatrix | None = None,
    ) -> "OperatorPair":
        r"""The pair ``S = δ``, ``T = d`` on ``q``-cochains of a torus.

        The default weight is the diagonal of ``(I + Δ_q)^{-1/2}``.

        :param grid:
        :type grid: PeriodicGrid
        :param q:
        :type q: int
        :param embed_weight:
        :type embed_weight: sparse.spmatrix | None
        :rtype: "OperatorPair"
        """
        if embed_weight is None:
            diagonal = laplacian_matrix(grid, q).diagonal()
            embed_weight = sparse.diags(1 / np.sqrt(1 + diagonal))
        return cls(
            codifferential_matrix(grid, q),
            d_matrix(grid, q),
            embed_weight,
            mass_vector(grid, q),
            mass_vector(grid, q - 1),
            mass_vector(grid, q + 1),
            harmonic_basis(grid, 0) if q == 1 else None,
            harmonic_basis(grid, grid.dim) if q + 1 == grid.dim else None,
        )

    @property
    def dim_H(self) -> int:
        r"""Dim H.

        :rtype: int
        """
        return self.S.shape[1]

    @property
    def dim_Y(self) -> int:
        r"""Dim Y.

        :rtype: int
        """
        return self.S.shape[0]

    @property
    def dim_Z(self) -> int:
        r"""Dim Z.

        :rtype: int
        """
        return self.T.shape[0]

    def adjoint_S(self) -> sparse.csr_matrix:
        r"""``S† = G_H⁻¹ Sᵀ G_Y``.

        :rtype: sparse.csr_matrix
        """
        return (
            sparse.diags(1 / self.gram_H)
            @ self.S.T
            @ sparse.diags(self.gram_Y)
        ).tocsr()

    def adjoint_T(self) -> sparse.csr_matrix:
        r"""``T† = G_H⁻¹ Tᵀ G_Z``.

        :rtype: sparse.csr_matrix
        """
        return (
            sparse.diags(1 / self.gram_H)
            @ self.T.T
            @ sparse.diags(self.gram_Z)
        ).tocsr()

    def scaled(self) -> tuple[sparse.csr_matrix, ...]:
        r"""``S``, ``T`` and ``E`` in coordinates orthonormal for the Grams.

        :rtype: tuple[sparse.csr_matrix, ...]
        """
        to_h = sparse.diags(1 / np.sqrt(self.gram_H))
        from_h = sparse.diags(np.sqrt(self.gram_H))
        return (
            (sparse.diags(np.sqrt(self.gram_Y)) @ self.S @ to_h).tocsr(),
            (sparse.diags(np.sqrt(self.gram_Z)) @ self.T @ to_h).tocsr(),
            (from_h @ self.embed_weight @ to_h).tocsr(),
        )

    def norm_H(self, h: NDArray[np.float64]) -> float:
        r"""Norm H.

        :param h:
        :type h: NDArray[np.float64]
        :rtype: float
        """
        return float(np.sqrt(np.dot(h * self.gram_H, h)))

    def norm_Y(self, y: NDArray[np.float64]) -> float:
        r"""Norm Y.

        :param y:
        :type y: NDArray[np.float64]
        :rtype: float
        """
        return float(np.sqrt(np.dot(y * self.gram_Y, y)))

    def norm_Z(self, z: NDArray[np.float64]) -> float:
        r"""Norm Z.

        :param z:
        :type z: NDArray[np.float64]
        :rtype: float
        """
        return float(np.sqrt(np.dot(z * self.gram_Z, z)))

    def inner_H(self, u: NDArray[np.float64], v: NDArray[np.float64]) -> float:
        r"""Inner H.

        :param u:
        :type u: NDArray[np.float64]
        :param v:
        :type v: NDArray[np.float64]
        :rtype: float
        """
        return float(np.dot(u * self.gram_H, v))

    def _check_vector(self, h: NDArray[np.float64], name: str) -> None:
        if np.shape(h) != (self.dim_H,):
            raise ShapeMismatchError(
                f"{name} must have {self.dim_H} entries, got {np.shape(h)}"
            )


def check_orthogonality(p: OperatorPair) -> float:
    r"""``max(‖S T†‖_max, ‖T S†‖_max)``; zero certifies ``S∘T† = 0``.

    :param p:
    :type p: OperatorPair
    :rtype: float
    """
    values = [
        abs(p.S @ p.adjoint_T()).max(),
        abs(p.T @ p.adjoint_S()).max(),
    ]
    return float(max(values))


def generalized_laplacian(p: OperatorPair) -> sparse.csr_matrix:
    r"""Block-diagonal ``SS† ⊕ TT†`` acting on ``Y ⊕ Z``.

    :param p:
    :type p: OperatorPair
    :rtype: sparse.csr_matrix
    """
    return sparse.block_diag(
        (p.S @ p.adjoint_S(), p.T @ p.adjoint_T()), format="csr"
    )


@dataclass(frozen=True)
class KernelBasis:
    r"""Orthonormal basis of ``ker S ∩ ker T`` with rank diagnostics."""

    vectors: NDArray[np.float64] = field(repr=False)
    singular_values: NDArray[np.float64] = field(repr=False)
    threshold: float
    gap_ratio: float
    ambiguous: bool
    certification: float

    def __len__(self) -> int:
        return self.vectors.shape[1]


def _resolve_mode(p: OperatorPair, mode: Mode) -> Mode:
    if mode == "auto":
        return "dense" if p.dim_H <= DENSE_LIMIT else "iterative"
    return mode


def kernel_basis(
    p: OperatorPair, tol: float = RANK_TOL, mode: Mode = "auto"
) -> KernelBasis:
    r"""Kernel of the stacked map ``h ↦ (Sh, Th)``.

    Dense mode takes a full SVD and keeps the right singular vectors whose
    singular value is at most ``tol`` times the largest. Iterative mode
    finds the smallest eigenpairs of ``S†S + T†T`` by shift-invert
    Lanczos, widening the search until one singular value ``‖(S, T) v‖``
    clears the same relative test. A singular-value gap below
    ``RANK_GAP`` marks the rank decision as ambiguous and warns.

    :param p:
    :type p: OperatorPair
    :param tol:
    :type tol: float
    :param mode:
    :type mode: Mode
    :rtype: KernelBasis
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    S, T, _ = p.scaled()
    stacked = sparse.vstack([S, T]).tocsr()
    if _resolve_mode(p, mode) == "dense":
        _, sigma, vt = np.linalg.svd(stacked.toarray(), full_matrices=True)
        sigma = np.concatenate([sigma, np.zeros(p.dim_H - sigma.size)])
        top = sigma.max(initial=0.0)
        sigma_max = top
        threshold = tol * top
        keep = sigma <= threshold
        vectors = vt[keep].T
        spectrum = sigma
    else:
        normal = (stacked.T @ stacked).tocsc()
        top_eig = eigsh(normal, k=1, which="LA", return_eigenvectors=False)[0]
        if top_eig <= 0:
            raise SingularOperatorError("S and T vanish, use dense mode")
        sigma_max = float(np.sqrt(top_eig))
        top = sigma_max
        threshold = tol * sigma_max
        count = min(p.dim_H - 1, 12)
        while True:
            _, eigenvectors = eigsh(
                normal, k=count, sigma=-1e-2 * top_eig, which="LM"
            )
            # σ_i = ‖(S, T) v_i‖
            spectrum = np.linalg.norm(stacked @ eigenvectors, axis=0)
            order = np.argsort(spectrum)
            spectrum = spectrum[order]
            eigenvectors = eigenvectors[:, order]
            if spectrum[-1] > threshold or count == p.dim_H - 1:
                break
            count = min(2 * count, p.dim_H - 1)
        keep = spectrum <= threshold
        vectors = eigenvectors[:, keep]
        if keep.all():
            # the one direction left out is the top singular vector
            spectrum = np.append(spectrum, sigma_max)
    below = spectrum[spectrum <= threshold]
    above = spectrum[spectrum > threshold]
    if above.size == 0:
        gap_ratio = np.inf
    else:
        gap_ratio = float(above.min() / max(below.max(initial=0.0), threshold))
    ambiguous = gap_ratio < RANK_GAP
    if ambiguous:
        warnings.warn(
            f"kernel rank decision is ambiguous: gap ratio {gap_ratio:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
    h_vectors = vectors / np.sqrt(p.gram_H)[:, None]
    if vectors.shape[1] and top > 0:
        certification = float(
            np.max(
                np.linalg.norm(S @ vectors, axis=0)
                + np.linalg.norm(T @ vectors, axis=0)
            )
            / sigma_max
        )
    else:
        certification = 0.0
    logger.info(
        "kernel_basis: dim_H=%d kernel=%d gap=%.3g",
        p.dim_H,
        h_vectors.shape[1],
        gap_ratio,
    )
    return KernelBasis(
        h_vectors,
        np.asarray(spectrum),
        float(threshold),
        float(gap_ratio),
        bool(ambiguous),
        certification,
    )


@dataclass(frozen=True)
class DecompositionResult:
    r"""``u = kernel_part + S†a + T†b``."""

    kernel_part: NDArray[np.float64] = field(repr=False)
    a: NDArray[np.float64] = field(repr=False)
    b: NDArray[np.float64] = field(repr=False)
    residual: float
    infos: tuple[SolverInfo, SolverInfo]


def decompose_element(
    p: OperatorPair,
    u: NDArray[np.float64],
    tol: float = SOLVER_TOL,
    maxiter: int | None = None,
) -> DecompositionResult:
    r"""Split ``u`` along ``ker(S⊕T) ⊕ ran(S†) ⊕ ran(T†)``.

    ``a`` and ``b`` are the minimum-norm solutions of ``SS†a = Su`` and
    ``TT†b = Tu``. The residual is ``‖S k‖ + ‖T k‖`` for the kernel part
    ``k``; the three parts reassemble ``u`` by construction.

    :param p:
    :type p: OperatorPair
    :param u:
    :type u: NDArray[np.float64]
    :param tol:
    :type tol: float
    :param maxiter:
    :type maxiter: int | None
    :rtype: DecompositionResult
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    u = np.asarray(u, dtype=np.float64)
    p._check_vector(u, "u")
    adjoint_S = p.adjoint_S()
    adjoint_T = p.adjoint_T()
    a, info_a = conjugate_gradient(
        lambda y: p.S @ (adjoint_S @ y),
        p.S @ u,
        p.gram_Y,
        p.deflation_Y,
        tol=tol,
        maxiter=maxiter,
    )
    b, info_b = conjugate_gradient(
        lambda z: p.T @ (adjoint_T @ z),
        p.T @ u,
        p.gram_Z,
        p.deflation_Z,
        tol=tol,
        maxiter=maxiter,
    )
    kernel_part = u - adjoint_S @ a - adjoint_T @ b
    residual = p.norm_Y(p.S @ kernel_part) + p.norm_Z(p.T @ kernel_part)
    return DecompositionResult(kernel_part, a, b, residual, (info_a, info_b))


def coercivity_constant(p: OperatorPair, mode: Mode = "auto") -> float:
    r"""Smallest ``C`` with ``‖h‖ ≤ C ‖(Sh, Th, Eh)‖`` on all of ``H``.

    This is ``1 / σ_min`` of the stacked map. Since the Euclidean norm of the
    stack is bounded by the sum norm, ``C`` also satisfies
    ``‖h‖ ≤ C (‖Sh‖ + ‖Th‖ + ‖h‖_H̃)``.

    :param p:
    :type p: OperatorPair
    :param mode: only dense evaluation is implemented
    :type mode: Mode
    :rtype: float
    """
    if _resolve_mode(p, mode) != "dense":
        raise ShapeMismatchError(
            f"coercivity_constant needs dim_H <= {DENSE_LIMIT}, "
            f"got {p.dim_H}"
        )
    S, T, E = p.scaled()
    weight_sigma = np.linalg.svd(E.toarray(), compute_uv=False)
    if weight_sigma.min() <= 1e-14 * weight_sigma.max():
        raise SingularOperatorError("embed_weight is singular")
    stacked = sparse.vstack([S, T, E]).toarray()
    sigma = np.linalg.svd(stacked, compute_uv=False)
    return float(1 / sigma.min())


def certify_coercivity(
    p: OperatorPair, constant: float, samples: int = 10_000, seed: int = 0
) -> float:
    r"""Largest ``‖h‖ / (C (‖Sh‖ + ‖Th‖ + ‖Eh‖))`` over random samples.

    A value at most ``1 + 1e-8`` certifies ``constant``.

    :param p:
    :type p: OperatorPair
    :param constant:
    :type constant: float
    :param samples:
    :type samples: int
    :param seed:
    :type seed: int
    :rtype: float
    """
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((p.dim_H, samples))
    sqrt_h = np.sqrt(p.gram_H)[:, None]
    norm_h = np.linalg.norm(sqrt_h * h, axis=0)
    norm_s = np.linalg.norm(np.sqrt(p.gram_Y)[:, None] * (p.S @ h), axis=0)
    norm_t = np.linalg.norm(np.sqrt(p.gram_Z)[:, None] * (p.T @ h), axis=0)
    norm_e = np.linalg.norm(sqrt_h * (p.embed_weight @ h), axis=0)
    return float(np.max(norm_h / (constant * (norm_s + norm_t + norm_e))))


@dataclass(frozen=True)
class PairingRow:
    r"""One sequence index of a compensated pairing test."""

    index: int
    pairing: float
    gap: float
    s_defect: float
    t_defect: float
    embed_defect: float


@dataclass(frozen=True)
class ConvergenceReport:
    r"""Rows of a compensated pairing test and the fitted gap order."""

    rows: tuple[PairingRow, ...]
    order: float | None
    limit_pairing: float

    columns = (
        "index",
        "pairing",
        "gap",
        "s_defect",
        "t_defect",
        "embed_defect",
    )

    def table(self) -> list[tuple[float, ...]]:
        r"""Table.

        :rtype: list[tuple[float, ...]]
        """
        return [
            tuple(getattr(row, name) for name in self.columns)
            for row in self.rows
        ]


def compensated_pairing_test(
    p: OperatorPair,
    u_seq: list[NDArray[np.float64]],
    v_seq: list[NDArray[np.float64]],
    limits: tuple[NDArray[np.float64], NDArray[np.float64]],
    schedule: list[float] | None = None,
) -> ConvergenceReport:
    r"""Track ``⟨u^ε, v^ε⟩`` against ``⟨ū, v̄⟩`` along a sequence.

    The ``s_defect`` and ``t_defect`` columns describe how far ``{Su}`` and
    ``{Tv}`` are from their limits; they are reported, never judged. The
    order is fitted against ``schedule`` (``1 / (index + 1)`` by default).

    :param p:
    :type p: OperatorPair
    :param u_seq:
    :type u_seq: list[NDArray[np.float64]]
    :param v_seq:
    :type v_seq: list[NDArray[np.float64]]
    :param limits:
    :type limits: tuple[NDArray[np.float64], NDArray[np.float64]]
    :param schedule:
    :type schedule: list[float] | None
    :rtype: ConvergenceReport
    """
    if len(u_seq) != len(v_seq):
        raise ShapeMismatchError("u and v sequences differ in length")
    if len(u_seq) < 3:
        raise ShapeMismatchError("a pairing test needs at least 3 entries")
    if schedule is None:
        schedule = [1 / (k + 1) for k in range(len(u_seq))]
    if len(schedule) != len(u_seq):
        raise ShapeMismatchError("schedule and sequences differ in length")
    u_bar, v_bar = limits
    for h in (*u_seq, *v_seq, u_bar, v_bar):
        p._check_vector(np.asarray(h), "sequence entry")
    limit_pairing = p.inner_H(u_bar, v_bar)
    rows = []
    for index, (u, v) in enumerate(zip(u_seq, v_seq, strict=True)):
        pairing = p.inner_H(u, v)
        rows.append(
            PairingRow(
                index,
                pairing,
                abs(pairing - limit_pairing),
                p.norm_Y(p.S @ (u - u_bar)),
                p.norm_Z(p.T @ (v - v_bar)),
                p.norm_H(p.embed_weight @ (u - u_bar)),
            )
        )
    order = fit_order(schedule, [row.gap for row in rows], abs(limit_pairing))
    return ConvergenceReport(tuple(rows), order, limit_pairing)


def save_pair(p: OperatorPair, directory: str | os.PathLike) -> None:
    r"""Write the pair as Matrix Market files.

    :param p:
    :type p: OperatorPair
    :param directory:
    :type directory: str | os.PathLike
    :rtype: None
    """
    os.makedirs(directory, exist_ok=True)
    matrices = {
        "S": p.S,
        "T": p.T,
        "embed_weight": p.embed_weight,
        "gram_H": sparse.diags(p.gram_H),
        "gram_Y": sparse.diags(p.gram_Y),
        "gram_Z": sparse.diags(p.gram_Z),
    }
    for name, matrix in matrices.items():
        io.mmwrite(
            os.path.join(directory, f"{name}.mtx"), sparse.coo_matrix(matrix)
        )


def load_pair(directory: str | os.PathLike) -> OperatorPair:
    r"""Read a pair written by :func:`save_pair`.

    :param directory:
    :type directory: str | os.PathLike
    :rtype: OperatorPair
    """
    matrices = {
        name: sparse.csr_matrix(
            io.mmread(os.path.join(directory, f"{name}.mtx"))
        )
        for name in ("S", "T", "embed_weight", "gram_H", "gram_Y", "gram_Z")
    }
    return OperatorPair(
        matrices["S"],
        matrices["T"],
        matrices["embed_weight"],
        matrices["gram_H"].diagonal(),
        matrices["gram_Y"].diagonal(),
        matrices["gram_Z"].diagonal(),
    )
