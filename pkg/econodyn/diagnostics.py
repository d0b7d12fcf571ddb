"""
Health checks on the coefficient matrix A(t) along a time grid:
contractivity, invertibility and conditioning, and the Perron-Frobenius
prerequisites (nonnegativity, irreducibility).
"""

import logging

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.csgraph as csgraph

from .errors import InvalidArgumentError
from .models import HealthReport, NodeRecord

logger = logging.getLogger("econodyn")

DET_RTOL = 1e-12


def _records(grid):
    return [NodeRecord(t=float(t)) for t in grid.nodes]


def check_contractive(system, grid):
    """``‖A(t)‖∞`` at each node; contractive iff every norm is below 1."""
    matrices = system.matrices(grid.nodes)
    norms = np.max(np.sum(np.abs(matrices), axis=2), axis=1)
    records = _records(grid)
    for record, norm in zip(records, norms):
        record.inf_norm = float(norm)
    contractive = bool(np.all(norms < 1.0))
    messages = []
    if not contractive:
        worst = int(np.argmax(norms))
        messages.append(
            f"‖A(t)‖∞ = {norms[worst]:.6g} >= 1 at t = {grid.nodes[worst]:.6g}; "
            "the static iteration is not contractive"
        )
    return HealthReport(records=records, contractive=contractive, messages=messages)


def check_invertibility(system, grid, cond_threshold=1e8):
    """Determinant and 2-norm condition number of A(t) at each node.

    A node counts as invertible when ``|det A| > 1e-12 · ‖A‖∞ⁿ``; singular
    nodes get an infinite condition number.
    """
    if not cond_threshold > 1:
        raise InvalidArgumentError("cond_threshold must exceed 1")
    matrices = system.matrices(grid.nodes)
    size = matrices.shape[1]
    dets = np.linalg.det(matrices)
    scales = np.max(np.sum(np.abs(matrices), axis=2), axis=1) ** size
    invertible = np.abs(dets) > DET_RTOL * scales
    with np.errstate(all="ignore"):
        conditions = np.where(invertible, np.linalg.cond(matrices), np.inf)

    records = _records(grid)
    for record, det, condition in zip(records, dets, conditions):
        record.det = float(det)
        record.condition_estimate = float(condition)
    report = HealthReport(
        records=records,
        invertible_everywhere=bool(np.all(invertible)),
        well_conditioned=bool(np.all(conditions < cond_threshold)),
        metadata={"cond_threshold": cond_threshold},
    )
    if not report.invertible_everywhere:
        where = grid.nodes[~invertible]
        report.messages.append(
            f"det A(t) vanishes at {where.size} node(s), first at t = {where[0]:.6g}"
        )
    elif not report.well_conditioned:
        report.messages.append(
            f"A(t) is ill-conditioned (max condition {np.max(conditions):.3e} "
            f">= {cond_threshold:.1e})"
        )
    return report


def check_perron_frobenius(system, grid):
    """Nonnegativity of A(t) on the grid and strong connectivity of its digraph.

    Participant ``j`` feeds ``i`` (edge ``j → i``) when ``a_ij(t) > 0`` at
    some node; A is irreducible when that digraph is strongly connected.
    """
    matrices = system.matrices(grid.nodes)
    nonnegative = bool(np.all(matrices >= 0.0))
    feeds = np.any(matrices > 0.0, axis=0)
    graph = sparse.csr_matrix(feeds.T.astype(float))
    count, labels = csgraph.connected_components(graph, directed=True, connection="strong")
    report = HealthReport(
        nonnegative=nonnegative,
        irreducible=bool(count == 1),
        metadata={"components": int(count), "component_labels": labels.tolist()},
    )
    if not nonnegative:
        report.messages.append("A(t) has negative entries on the grid")
    if count != 1:
        report.messages.append(
            f"The participant digraph splits into {count} strongly connected components"
        )
    return report


def diagnose(system, grid, cond_threshold=1e8):
    """All three checks merged into one :class:`HealthReport`."""
    contractive = check_contractive(system, grid)
    invertibility = check_invertibility(system, grid, cond_threshold=cond_threshold)
    connectivity = check_perron_frobenius(system, grid)

    records = []
    for norm, health in zip(contractive.records, invertibility.records):
        records.append(
            NodeRecord(
                t=norm.t,
                inf_norm=norm.inf_norm,
                det=health.det,
                condition_estimate=health.condition_estimate,
            )
        )
    report = HealthReport(
        records=records,
        contractive=contractive.contractive,
        invertible_everywhere=invertibility.invertible_everywhere,
        well_conditioned=invertibility.well_conditioned,
        nonnegative=connectivity.nonnegative,
        irreducible=connectivity.irreducible,
        messages=contractive.messages + invertibility.messages + connectivity.messages,
        metadata={**invertibility.metadata, **connectivity.metadata, "participants": system.n},
    )
    for message in report.messages:
        logger.warning(message)
    return report
