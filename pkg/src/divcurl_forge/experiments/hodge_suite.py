r"""Hodge suite
===============

Exactness of the grid complex, adjointness of ``d`` and ``δ``, the first
Betti number of the torus, the generalized Laplacian of the grid pair and
the Hodge decomposition of a random 1-cochain.
"""

import logging

import numpy as np
from scipy import sparse

from ..grid_complex import (
    Cochain,
    PeriodicGrid,
    adjointness_defect,
    codifferential_matrix,
    d_matrix,
    exterior_derivative,
    hodge_decompose,
    l2_inner,
    laplacian_matrix,
)
from ..operator_core import (
    OperatorPair,
    decompose_element,
    generalized_laplacian,
    kernel_basis,
)
from . import Outcome, Table

logger = logging.getLogger(__name__)

COLUMNS = ("check", "dim", "n", "degree", "value", "tolerance")


def _random(
    grid: PeriodicGrid, q: int, rng: np.random.Generator
) -> Cochain:
    return Cochain(grid, q, rng.standard_normal(grid.cell_count(q)))


def _relative(a: sparse.spmatrix, b: sparse.spmatrix) -> float:
    scale = max(abs(b).max(), 1.0)
    difference = abs(a - b)
    return float(difference.max() / scale) if difference.nnz else 0.0


def laplacian_identity(grid: PeriodicGrid) -> float:
    r"""Entrywise distance between ``SS† ⊕ TT†`` of the 1-cochain pair and
    the Hodge Laplacian terms assembled from ``d`` and ``δ``.

    :param grid:
    :type grid: PeriodicGrid
    :rtype: float
    """
    p = OperatorPair.from_grid(grid, 1)
    if grid.dim == 2:
        top = laplacian_matrix(grid, 2)
    else:
        top = d_matrix(grid, 1) @ codifferential_matrix(grid, 2)
    expected = sparse.block_diag(
        (laplacian_matrix(grid, 0), top), format="csr"
    )
    return _relative(generalized_laplacian(p), expected)


def run(config: dict) -> Outcome:
    r"""Run.

    :param config:
    :type config: dict
    :rtype: Outcome
    """
    grid_config = config["grid"]
    params = config["params"]
    tolerances = config["tolerances"]
    rng = np.random.default_rng(config["seed"])
    identity = tolerances["identity"]
    rows = []

    chain = adjoint = 0.0
    for dim in grid_config["dims"]:
        for n in grid_config["ns"]:
            grid = PeriodicGrid.uniform(dim, n)
            for q in range(dim - 1):
                c = _random(grid, q, rng)
                value = exterior_derivative(exterior_derivative(c)).norm()
                value /= c.norm()
                chain = max(chain, value)
                rows.append(("dd", dim, n, q, value, identity))
            for q in range(dim):
                value = adjointness_defect(
                    _random(grid, q, rng), _random(grid, q + 1, rng)
                )
                adjoint = max(adjoint, value)
                rows.append(("adjointness", dim, n, q, value, identity))

    topology = True
    for dim in grid_config["dims"]:
        for n in params["topology_ns"]:
            basis = kernel_basis(
                OperatorPair.from_grid(PeriodicGrid.uniform(dim, n), 1),
                tolerances["rank"],
            )
            topology &= len(basis) == dim and not basis.ambiguous
            rows.append(
                ("betti", dim, n, 1, float(len(basis)), tolerances["rank"])
            )
            rows.append(
                ("rank_gap", dim, n, 1, basis.gap_ratio, tolerances["rank"])
            )

    laplacian = 0.0
    n = params["laplacian_n"]
    for dim in grid_config["dims"]:
        value = laplacian_identity(PeriodicGrid.uniform(dim, n))
        laplacian = max(laplacian, value)
        rows.append(("laplacian", dim, n, 1, value, identity))

    dim, n = params["decomposition_dim"], params["decomposition_n"]
    grid = PeriodicGrid.uniform(dim, n)
    c = _random(grid, 1, rng)
    result = hodge_decompose(c, tolerances["solver"])
    energy = c.norm() ** 2
    orthogonality = max(
        abs(l2_inner(result.exact, result.coexact)),
        abs(l2_inner(result.exact, result.h)),
        abs(l2_inner(result.coexact, result.h)),
    )
    orthogonality /= energy
    pair_split = decompose_element(
        OperatorPair.from_grid(grid, 1), c.values, tolerances["solver"]
    )
    agreement = c.like(pair_split.kernel_part - result.h.values).norm()
    agreement /= c.norm()
    decomposition = tolerances["decomposition"]
    for check, value in (
        ("reassembly", result.reassembly_residual),
        ("orthogonality", orthogonality),
        ("harmonic", result.harmonic_defect),
        ("harmonic_laplacian", result.laplacian_residual),
        ("pair_agreement", agreement),
    ):
        rows.append((check, dim, n, 1, value, decomposition))
    logger.info(
        "hodge_suite: dd=%.3e adjoint=%.3e laplacian=%.3e",
        chain,
        adjoint,
        laplacian,
    )
    return Outcome(
        "hodge_suite",
        {
            "chain": chain <= identity,
            "adjointness": adjoint <= identity,
            "topology": topology,
            "laplacian_identity": laplacian <= identity,
            "decomposition": max(
                result.reassembly_residual,
                orthogonality,
                result.harmonic_defect,
                result.laplacian_residual,
            )
            <= decomposition,
            "solver_converged": all(info.success for info in result.infos),
        },
        {"checks": Table(COLUMNS, rows)},
        {
            "dd": chain,
            "adjointness": adjoint,
            "laplacian": laplacian,
            "reassembly": result.reassembly_residual,
            "orthogonality": orthogonality,
            "harmonic_laplacian": result.laplacian_residual,
            "pair_agreement": agreement,
            "iterations": [info.niter for info in result.infos],
        },
    )
