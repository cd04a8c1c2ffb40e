"""Dense reference implementations of Kemeny's constant and its perturbations.

Everything here is O(n^3) and meant for graphs up to DENSE_THRESHOLD nodes:
it serves as the oracle for the banded solver and as the small-graph route.
Eigenvalues always come from a symmetric eigensolver applied to
D^-1/2 A D^-1/2, which is similar to P = D^-1 A.
"""
import weakref

import numpy as np
import scipy.linalg as la
from scipy.sparse.csgraph import connected_components

from core.errors import NumericalBreakdownError
from core.graph import adjacency_matrix, require_connected
from db.models import INFINITE, DenseSpectralData, WeightedGraph
from utils.config import DENSE_THRESHOLD
from utils.logger import get_logger

log = get_logger("kemenytool.spectral")


def _check_size(g: WeightedGraph, dense_threshold: int) -> None:
    if g.n > dense_threshold:
        raise ValueError(
            f"dense route limited to n <= {dense_threshold} (graph has {g.n} nodes)"
        )


def modified_laplacian(A: np.ndarray, d: np.ndarray) -> np.ndarray:
    """S = D - A + d d^T / ||d||_1 for a dense adjacency matrix."""
    return np.diag(d) - A + np.outer(d, d) / d.sum()


# lives as long as its graph
_dense_cache = weakref.WeakKeyDictionary()


def dense_data(g: WeightedGraph, dense_threshold: int = DENSE_THRESHOLD) -> DenseSpectralData:
    _check_size(g, dense_threshold)
    data = _dense_cache.get(g)
    if data is None:
        data = _dense_cache[g] = _dense_data(g)
    return data


def _dense_data(g: WeightedGraph) -> DenseSpectralData:
    require_connected(g)
    A = adjacency_matrix(g).toarray()
    d = g.degrees.copy()
    S = modified_laplacian(A, d)
    try:
        S_inv = la.cho_solve(la.cho_factor(S), np.eye(g.n))
    except la.LinAlgError as exc:
        raise NumericalBreakdownError(f"modified Laplacian is not positive definite: {exc}") from exc
    S_inv = (S_inv + S_inv.T) / 2
    dh = 1.0 / np.sqrt(d)
    M = S_inv @ (d[:, None] * S_inv)
    return DenseSpectralData(
        degrees=d,
        P=A / d[:, None],
        S=S,
        H=dh[:, None] * S * dh[None, :],
        S_inv=S_inv,
        eig_P=la.eigvalsh(dh[:, None] * A * dh[None, :]),
        eig_S=la.eigvalsh(S),
        eig_M=la.eigvalsh((M + M.T) / 2),
    )


def kemeny_via_trace(g: WeightedGraph, v=None, dense_threshold: int = DENSE_THRESHOLD) -> float:
    """trace((I - P + 1 v^T)^-1) - 1 for a probability vector v (default: stationary)."""
    data = dense_data(g, dense_threshold)
    n = g.n
    if v is None:
        v = data.degrees / data.degrees.sum()
    v = np.asarray(v, dtype=float)
    if v.shape != (n,) or np.any(v < 0) or abs(v.sum() - 1.0) > 1e-12:
        raise ValueError("v must be a nonnegative vector of length n summing to 1")
    M = np.eye(n) - data.P + np.outer(np.ones(n), v)
    try:
        inv = la.inv(M)
    except la.LinAlgError as exc:
        raise NumericalBreakdownError(f"I - P + 1 v^T is singular: {exc}") from exc
    return float(np.trace(inv) - 1.0)


def kemeny_via_S(g: WeightedGraph, dense_threshold: int = DENSE_THRESHOLD) -> float:
    """trace(D^1/2 S^-1 D^1/2) - 1."""
    data = dense_data(g, dense_threshold)
    return float(data.degrees @ np.diag(data.S_inv) - 1.0)


def kemeny_via_eigs(g: WeightedGraph, dense_threshold: int = DENSE_THRESHOLD) -> float:
    """Sum of 1 / (1 - lambda_i) over the n-1 eigenvalues of P below 1."""
    data = dense_data(g, dense_threshold)
    return _kemeny_from_spectrum(data.eig_P)


def _kemeny_from_spectrum(eig: np.ndarray) -> float:
    return float(np.sum(1.0 / (1.0 - eig[:-1])))


def dense_solve(g: WeightedGraph, rhs, dense_threshold: int = DENSE_THRESHOLD) -> np.ndarray:
    """S^-1 rhs through the dense inverse."""
    return dense_data(g, dense_threshold).S_inv @ np.asarray(rhs, dtype=float)


def dense_alpha_beta(g: WeightedGraph, p: int, q: int,
                     dense_threshold: int = DENSE_THRESHOLD) -> tuple:
    """(w^T S^-1 w, w^T S^-1 D S^-1 w) with w = e_p - e_q."""
    data = dense_data(g, dense_threshold)
    x = data.S_inv[:, p] - data.S_inv[:, q]
    return float(x[p] - x[q]), float(x @ (data.degrees * x))


def perturbed_kemeny_direct(g: WeightedGraph, p: int, q: int, t: float, weighted: bool = True,
                            dense_threshold: int = DENSE_THRESHOLD):
    """Kemeny's constant of the chain with A + t*a_pq*w w^T (t*w w^T if unweighted).

    Computed from scratch through the spectrum of the perturbed graph. Returns
    INFINITE when the perturbation disconnects the graph.
    """
    _check_size(g, dense_threshold)
    require_connected(g)
    if p == q:
        raise ValueError("p and q must differ")
    step = t * (g.weight(p, q) if weighted else 1.0)
    A = adjacency_matrix(g).toarray()
    A[p, q] -= step
    A[q, p] -= step
    A[p, p] += step
    A[q, q] += step
    off = A - np.diag(np.diag(A))
    if np.any(off < 0):
        raise ValueError(f"perturbation t={t} makes the weight of ({p}, {q}) negative")
    count, _ = connected_components(off > 0, directed=False)
    if count > 1:
        log.debug("Perturbation t=%g of (%d, %d) disconnects the graph", t, p, q)
        return INFINITE
    d = g.degrees
    dh = 1.0 / np.sqrt(d)
    return _kemeny_from_spectrum(la.eigvalsh(dh[:, None] * A * dh[None, :]))


def mu_bar_bounds(g: WeightedGraph, dense_threshold: int = DENSE_THRESHOLD) -> tuple:
    """Three (lower, upper) brackets that contain every mu_bar(p, q), p != q."""
    data = dense_data(g, dense_threshold)
    d = data.degrees
    eig_P = data.eig_P
    zeta = data.eig_M
    inv_nu_sq = 1.0 / data.eig_S ** 2
    by_m = (2 * zeta.min(), 2 * zeta.max())
    by_s = (2 * d.min() * inv_nu_sq.min(), 2 * d.max() * inv_nu_sq.max())
    if g.n > 1:
        low_gamma = min(1.0 / (1.0 - eig_P[0]) ** 2, 1.0)
        high_gamma = max(1.0 / (1.0 - eig_P[-2]) ** 2, 1.0)
    else:
        low_gamma = high_gamma = 1.0
    by_p = (2 * (1.0 / d).min() * low_gamma, 2 * (1.0 / d).max() * high_gamma)
    return by_m, by_s, by_p


def filtered_cf_bounds(g: WeightedGraph, a: float, dense_threshold: int = DENSE_THRESHOLD) -> tuple:
    """Interval containing the filtered measure of a cut-edge with weight a."""
    eig_P = dense_data(g, dense_threshold).eig_P
    low = 2.0 / a * min(1.0, 1.0 / (1.0 - eig_P[0]))
    high = 2.0 / a * max(1.0, 1.0 / (1.0 - eig_P[-2]))
    return low, high
