"""Orthonormal eigenspace bases split into scale-N localized vectors (one
group per N-cell) and a non-localized remainder.

Localization is detected numerically: the localized subspace for a cell is
the nullspace of the restriction of the eigenspace to the vertices outside
that cell.  Orthonormality is with respect to the quadrature inner product,
which is uniform on interior vertices, so plain-coordinate linear algebra can
be rescaled by the square root of the common weight.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .decimation import eigenfunctions_at_level
from .laplacian import cached_dense_spectrum
from .topology import interior_weight, level_topology, word_str

NONLOCALIZED = "nonlocalized"

SV_THRESHOLD = 1e-8  # singular values below this count as vanishing outside


@dataclass(frozen=True)
class EigenspaceBasis:
    descriptor: object
    level: int  # sampling level m_q
    vectors: np.ndarray  # (n_interior, d), orthonormal in the quadrature ip
    tags: tuple  # per column: an N-cell word, or NONLOCALIZED
    scale: int  # localization scale N (or None)
    warning: str = ""

    @property
    def dimension(self):
        return self.vectors.shape[1]

    @property
    def localized_count(self):
        return sum(1 for t in self.tags if t != NONLOCALIZED)

    @property
    def nonlocalized_count(self):
        return sum(1 for t in self.tags if t == NONLOCALIZED)

    def localized_count_for_cell(self, cell):
        return sum(1 for t in self.tags if t == cell)


def _weight(m_q):
    return interior_weight(m_q)


def eigenspace_vectors(desc, m_q, method="extension"):
    """Raw (not yet localized) eigenspace sampled on the interior of V_{m_q}.

    The extension path solves densely at the generation of birth and extends
    downward; the dense path solves at m_q directly and selects the
    eigenvalue cluster.  Both return plain-coordinate matrices, columns
    linearly independent.
    """
    topo = level_topology(m_q)
    if method == "extension":
        full = eigenfunctions_at_level(desc, m_q)
        return full[topo.interior_indices]
    if method == "dense":
        evals, evecs = cached_dense_spectrum(m_q)
        gamma = desc.gamma_at(m_q)
        sel = np.abs(evals - gamma) < 1e-6
        if int(sel.sum()) != desc.multiplicity:
            raise AssertionError("dense eigenspace dimension mismatch")
        return evecs[:, sel]
    raise ValueError(f"unknown method {method!r}")


def orthonormalize(vectors, m_q):
    """Quadrature-orthonormal basis of the column span."""
    w = _weight(m_q)
    q, r = np.linalg.qr(np.sqrt(w) * vectors)
    if np.min(np.abs(np.diag(r))) < 1e-12 * np.max(np.abs(np.diag(r))):
        raise ValueError("input columns are numerically dependent")
    return q / np.sqrt(w)


@lru_cache(maxsize=None)
def _interior_cell_rows_cached(m_q, scale):
    topo = level_topology(m_q)
    cells = {}
    for row, idx in enumerate(topo.interior_indices):
        for cell in topo.cells_of_vertex(idx, scale):
            cells.setdefault(cell, []).append(row)
    return {c: np.array(rows) for c, rows in sorted(cells.items())}


def _interior_cell_rows(topo, scale):
    """For each scale-cell, the interior-row positions inside its closure."""
    return _interior_cell_rows_cached(topo.m, scale)


def localize_basis(raw, desc, m_q, scale):
    """Split an eigenspace into per-cell localized vectors plus a remainder.

    Localized columns come first, grouped by cell in address order; every
    localized column vanishes outside its cell, and the whole output spans
    the same subspace as `raw`.
    """
    topo = level_topology(m_q)
    w = _weight(m_q)
    basis = np.sqrt(w) * orthonormalize(raw, m_q)  # plain-orthonormal copy
    d = basis.shape[1]

    warning = ""
    if scale >= desc.birth:
        warning = "localization scale is not below the generation of birth"

    n_rows = basis.shape[0]
    cell_rows = _interior_cell_rows(topo, scale)
    localized_cols = []
    tags = []
    # the nullspace of the outside restriction B_out is the eigenvalue-zero
    # space of B_out' B_out = I - B_in' B_in; working with the small Gram
    # matrix B_in' B_in avoids a large SVD per cell.  Zero singular values of
    # B_out appear as eigenvalues ~ machine epsilon, genuine ones are O(1).
    eig_threshold = max(SV_THRESHOLD**2, 64 * d * np.finfo(float).eps)
    for cell, rows in cell_rows.items():
        gram_in = basis[rows].T @ basis[rows]
        evals, evecs = np.linalg.eigh(gram_in)
        null = evecs[:, (1.0 - evals) <= eig_threshold]
        if null.shape[1]:
            localized_cols.append(basis @ null)
            tags.extend([cell] * null.shape[1])

    if localized_cols:
        loc = np.hstack(localized_cols)
        # complement of the localized coefficients within the eigenspace
        coeffs = basis.T @ loc
        _, sing, vt = np.linalg.svd(coeffs.T, full_matrices=True)
        comp = vt[len(sing):].T if coeffs.shape[1] < d else vt[(sing <= SV_THRESHOLD)].T
        nonloc = basis @ comp
    else:
        loc = np.zeros((n_rows, 0))
        nonloc = basis

    vectors = np.hstack([loc, nonloc]) / np.sqrt(w)
    tags = tuple(tags) + (NONLOCALIZED,) * nonloc.shape[1]
    return EigenspaceBasis(
        descriptor=desc,
        level=m_q,
        vectors=vectors,
        tags=tags,
        scale=scale,
        warning=warning,
    )


def plain_basis(desc, m_q, method="extension"):
    """Orthonormal eigenspace basis with no localization split."""
    vecs = orthonormalize(eigenspace_vectors(desc, m_q, method=method), m_q)
    return EigenspaceBasis(
        descriptor=desc,
        level=m_q,
        vectors=vecs,
        tags=(NONLOCALIZED,) * vecs.shape[1],
        scale=None,
    )


def gram_matrix(basis):
    w = _weight(basis.level)
    return w * basis.vectors.T @ basis.vectors


def orthonormality_check(basis):
    """Max deviation of the quadrature Gram matrix from the identity."""
    g = gram_matrix(basis)
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))


def principal_angle_gap(a, b, m_q):
    """Largest principal-angle sine between the column spans of a and b."""
    w = _weight(m_q)
    qa = np.linalg.qr(np.sqrt(w) * a)[0]
    qb = np.linalg.qr(np.sqrt(w) * b)[0]
    # sine computed from the projection residual, accurate near zero angle
    ra = qb - qa @ (qa.T @ qb)
    rb = qa - qb @ (qb.T @ qa)
    return float(max(np.linalg.norm(ra, 2), np.linalg.norm(rb, 2)))


def max_outside_value(basis, column):
    """Largest |value| of the column at vertices outside its tagged cell."""
    tag = basis.tags[column]
    if tag == NONLOCALIZED:
        raise ValueError("column is not localized")
    topo = level_topology(basis.level)
    rows = _interior_cell_rows(topo, basis.scale)[tag]
    outside = np.setdiff1d(np.arange(basis.vectors.shape[0]), rows)
    return float(np.max(np.abs(basis.vectors[outside, column])))


def export_basis_csv(basis, path, header_lines=()):
    topo = level_topology(basis.level)
    interior = topo.interior_indices
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        wr = csv.writer(fh)
        wr.writerow(["vertex_id", "column", "value", "tag"])
        for c in range(basis.dimension):
            tag = basis.tags[c]
            tag_s = tag if tag == NONLOCALIZED else word_str(tag)
            for row, idx in enumerate(interior):
                wr.writerow([int(idx), c, repr(float(basis.vectors[row, c])), tag_s])
