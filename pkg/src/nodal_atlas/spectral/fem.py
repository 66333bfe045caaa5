"""Piecewise-linear finite elements for the Neumann and mixed Laplacian.

The weak form needs no boundary terms for Neumann conditions, so the
stiffness matrix is the plain P1 Dirichlet-energy matrix.  Dirichlet
conditions are imposed by deleting the constrained degrees of freedom.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from ..errors import MeshError, SpectralError
from .mesh import DIRICHLET, Mesh

ZERO_TOL = 1e-8
GAP_TOL = 1e-2


def element_matrices(mesh: Mesh):
    """Local stiffness and consistent mass matrices, shape ``(m, 3, 3)``."""
    x = mesh.nodes[mesh.triangles]
    area = mesh.areas
    if np.any(area <= 1e-14):
        raise MeshError("degenerate triangle in assembly")
    b = np.stack([x[:, 1, 1] - x[:, 2, 1], x[:, 2, 1] - x[:, 0, 1], x[:, 0, 1] - x[:, 1, 1]], 1)
    c = np.stack([x[:, 2, 0] - x[:, 1, 0], x[:, 0, 0] - x[:, 2, 0], x[:, 1, 0] - x[:, 0, 0]], 1)
    Ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4 * area[:, None, None])
    Me = area[:, None, None] / 12.0 * (np.ones((3, 3)) + np.eye(3))
    return Ke, Me


def assemble(mesh: Mesh) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """Global stiffness ``K`` and mass ``M`` in CSR format."""
    Ke, Me = element_matrices(mesh)
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_nodes
    K = sparse.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sparse.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    K.sort_indices()
    M.sort_indices()
    return K, M


@dataclass(frozen=True, eq=False)
class EigenResult:
    """Ascending eigenpairs with mass-normalised eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    orthogonality: float
    mesh: Mesh | None = None

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    @property
    def mu2(self) -> float:
        return float(self.eigenvalues[1])

    def vector(self, i: int) -> np.ndarray:
        return self.eigenvectors[:, i]


def _deterministic_start(n: int) -> np.ndarray:
    # fixed, non-symmetric start vector so ARPACK is reproducible
    return 1.0 + 0.5 * np.sin(0.7 * np.arange(n) + 0.3)


def _shift(K, M) -> float:
    d = K.diagonal() / np.maximum(M.diagonal(), 1e-300)
    return -1e-3 * float(np.median(d))


def _solve(K, M, k, sigma, maxiter):
    n = K.shape[0]
    if n <= max(k + 2, 40):
        from scipy.linalg import eigh
        w, V = eigh(K.toarray(), M.toarray())
        return w[:k], V[:, :k]
    try:
        return eigsh(K.tocsc(), k=k, M=M.tocsc(), sigma=sigma, which="LM",
                     v0=_deterministic_start(n), maxiter=maxiter, tol=0.0)
    except ArpackNoConvergence as exc:
        raise SpectralError(f"eigensolver did not converge: {exc}") from exc
    except RuntimeError as exc:
        raise SpectralError(f"factorisation failed: {exc}") from exc


def _finish(K, M, w, V, mesh, constant_first: bool) -> EigenResult:
    order = np.argsort(w, kind="stable")
    w, V = np.array(w[order]), np.array(V[:, order])
    if constant_first:
        # deflate: replace the null vector by the exact constant and
        # project it out of the others
        one = np.ones(K.shape[0])
        one /= np.sqrt(one @ (M @ one))
        V[:, 0] = one
        w[0] = float(one @ (K @ one))
        for j in range(1, V.shape[1]):
            V[:, j] -= (one @ (M @ V[:, j])) * one
    # mass-orthonormalise (Gram-Schmidt twice for stability)
    for _ in range(2):
        for j in range(V.shape[1]):
            for i in range(j):
                V[:, j] -= (V[:, i] @ (M @ V[:, j])) * V[:, i]
            V[:, j] /= np.sqrt(V[:, j] @ (M @ V[:, j]))
    for j in range(1 if constant_first else 0, V.shape[1]):
        w[j] = float(V[:, j] @ (K @ V[:, j]))
    # fix an arbitrary but deterministic sign: largest-magnitude entry positive
    for j in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, j])))
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    R = K @ V - (M @ V) * w[None, :]
    res = np.linalg.norm(R, axis=0) / np.linalg.norm(V, axis=0)
    G = V.T @ (M @ V)
    orth = float(np.max(np.abs(G - np.eye(V.shape[1]))))
    return EigenResult(w, V, res, orth, mesh)


def smallest_eigenpairs(K, M, k: int = 4, mesh: Mesh | None = None,
                        maxiter: int | None = None) -> EigenResult:
    """The ``k`` smallest eigenpairs of the Neumann problem ``K u = mu M u``.

    Uses shift-invert Lanczos with a small negative shift, so the
    singular stiffness matrix is never factorised, and then deflates the
    constant mode explicitly.

    Raises
    ------
    SpectralError
        ``k < 2``, non-convergence, or a first eigenvalue that is not zero.
    """
    if k < 2:
        raise SpectralError("need at least two eigenpairs")
    if k >= K.shape[0]:
        raise SpectralError(f"k={k} is not smaller than the number of nodes {K.shape[0]}")
    w, V = _solve(K, M, k, _shift(K, M), maxiter)
    if abs(np.min(w)) > max(ZERO_TOL, 1e-6 * abs(np.max(w))):
        raise SpectralError(f"smallest eigenvalue {np.min(w):.3e} is not zero")
    return _finish(K, M, w, V, mesh, constant_first=True)


def dirichlet_nodes(mesh: Mesh, edges=None) -> np.ndarray:
    """Nodes constrained by the given boundary markers.

    ``edges`` may be a collection of integer markers (polygon edge
    indices, or ``DIRICHLET`` for cut interfaces) or an ``(k, 2)`` array of
    node pairs.  ``None`` selects every ``DIRICHLET``-marked edge.
    """
    if edges is None:
        return mesh.boundary_nodes([DIRICHLET])
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return np.unique(arr.astype(np.int64))
    return mesh.boundary_nodes(arr.astype(np.int64).ravel())


def mixed_eigenpairs(mesh: Mesh, dirichlet_edges=None, k: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Smallest eigenpairs with Dirichlet conditions on the given edges.

    Returns ``(values, vectors)`` with vectors extended by zero to every
    mesh node.
    """
    fixed = dirichlet_nodes(mesh, dirichlet_edges)
    if len(fixed) == 0:
        raise SpectralError("no Dirichlet nodes selected")
    free = np.setdiff1d(np.arange(mesh.n_nodes), fixed)
    if len(free) == 0:
        raise SpectralError("every node is constrained")
    K, M = assemble(mesh)
    Kf = K[free][:, free]
    Mf = M[free][:, free]
    k = min(k, len(free) - 1) if len(free) > 1 else 1
    if len(free) <= max(k + 2, 40):
        from scipy.linalg import eigh
        w, V = eigh(Kf.toarray(), Mf.toarray())
        w, V = w[:k], V[:, :k]
    else:
        try:
            w, V = eigsh(Kf.tocsc(), k=k, M=Mf.tocsc(), sigma=0.0, which="LM",
                         v0=_deterministic_start(len(free)), tol=0.0)
        except (ArpackNoConvergence, RuntimeError) as exc:
            raise SpectralError(f"mixed eigensolve failed: {exc}") from exc
    res = _finish(Kf, Mf, w, V, None, constant_first=False)
    full = np.zeros((mesh.n_nodes, k))
    full[free] = res.eigenvectors
    return res.eigenvalues, full


def mixed_first_eigenvalue(mesh: Mesh, dirichlet_edges=None) -> float:
    """Smallest eigenvalue with Dirichlet conditions on ``dirichlet_edges``."""
    w, _ = mixed_eigenpairs(mesh, dirichlet_edges, 1)
    if not w[0] > 0:
        raise SpectralError(f"mixed eigenvalue {w[0]:.3e} is not positive")
    return float(w[0])


def multiplicity_estimate(ev: EigenResult, gap_tol: float = GAP_TOL) -> int:
    """1 or 2 depending on whether ``mu3`` sits within ``gap_tol * mu2``.

    A second eigenvalue can only be simple or double, so the answer is
    clamped to 2 with a warning when ``mu4`` is close as well.
    """
    mu = ev.eigenvalues
    if len(mu) < 3:
        raise SpectralError("need at least three eigenvalues")
    close = lambda j: mu[j] - mu[1] <= gap_tol * mu[1]
    if not close(2):
        return 1
    if len(mu) > 3 and close(3):
        warnings.warn("mu2, mu3 and mu4 all within the gap tolerance; reporting 2",
                      RuntimeWarning, stacklevel=2)
    return 2
