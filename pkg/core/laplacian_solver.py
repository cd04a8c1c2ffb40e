"""Banded Cholesky solver for S x = w_pq, S = L + d d^T / ||d||_1.

Preprocessing (once per graph): reorder for small bandwidth b, factor the
leading (n-1)x(n-1) block of the Laplacian, L_{n-1} = R^T R, then compute the
tail column v (R^T v = L[:n-1, n-1]), the vector z (R^T z = d[:n-1]) and
rho = z.v - d_n.

Processing (per right-hand side): y = R^-T w[:n-1], x_n = (z.y - sigma)/rho,
x[:n-1] = R^-1 (y - x_n v), where sigma = 1^T w (zero for w = e_p - e_q).
Because w_pq has p leading zeros, the first triangular solve only touches the
trailing n-p rows.

All arrays inside a SolverContext are in the reordered (permuted) numbering.
The public functions take and return the graph's own node indices.
"""
import math
import time

import numpy as np
import scipy.linalg as la
from scipy.linalg.lapack import dtbtrs

from core.errors import NumericalBreakdownError
from core.graph import laplacian_matrix, reorder_for_bandwidth
from db.models import RegularizedFactor, SolverContext, WeightedGraph
from utils.config import DENSE_THRESHOLD, PIVOT_RTOL
from utils.logger import get_logger

log = get_logger("kemenytool.solver")

ROUTES = ("auto", "banded", "dense")


# ---------------------------------------------------------------------------
# Banded storage helpers
# ---------------------------------------------------------------------------

def _laplacian_band(g: WeightedGraph, u: int) -> np.ndarray:
    """Upper banded storage of the full Laplacian: band[u + i - j, j] = L[i, j]."""
    band = np.zeros((u + 1, g.n))
    band[u] = g.degrees - np.array([g.loops.get(i, 0.0) for i in range(g.n)])
    rows, cols, w = g.edge_arrays
    band[u - (cols - rows), cols] = -w
    return band


def _tbtrs(R: np.ndarray, rhs: np.ndarray, trans: str) -> np.ndarray:
    block = np.asarray(rhs, dtype=float).reshape(rhs.shape[0], -1)
    x, info = dtbtrs(R, block, uplo="U", trans=trans, diag="N")
    if info != 0:
        raise NumericalBreakdownError(f"triangular band solve failed (info={info})")
    return x.reshape(rhs.shape)


def _solve_upper(R: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve R x = rhs."""
    return _tbtrs(R, rhs, "N")


def _solve_lower(R: np.ndarray, rhs: np.ndarray, start: int = 0) -> np.ndarray:
    """Solve R^T y = rhs where rhs[:start] == 0; only the trailing block is touched.

    The trailing principal block of R is R[:, start:] in band storage; the
    entries above row *start* in its first columns are never read.
    """
    out = np.zeros(rhs.shape)
    if start >= R.shape[1]:
        return out
    out[start:] = _tbtrs(R[:, start:], rhs[start:], "T")
    return out


def _check_pivots(R: np.ndarray, diag0: np.ndarray) -> None:
    pivots = R[-1] ** 2
    limit = PIVOT_RTOL * float(diag0.max())
    bad = np.flatnonzero(pivots <= limit)
    if bad.size:
        raise NumericalBreakdownError(
            f"Cholesky pivot {pivots[bad[0]]:.3e} at position {int(bad[0])} is below "
            f"{limit:.3e}; the graph is disconnected or severely ill-conditioned"
        )


def _cholesky_banded_gth(band: np.ndarray, row_sums: np.ndarray) -> np.ndarray:
    """Upper banded Cholesky of an M-matrix with each pivot rebuilt from row sums.

    *row_sums* are the (nonnegative) row sums of the matrix. Each pivot is
    taken as row excess plus the magnitude of the remaining off-diagonal
    entries, so no step subtracts nearly equal quantities.
    """
    u = band.shape[0] - 1
    m = band.shape[1]
    rows = np.zeros((m, u + 1))         # rows[i, k] = A[i, i + k]
    for k in range(u + 1):
        rows[: m - k, k] = band[u - k, k:]
    excess = np.asarray(row_sums, dtype=float).copy()
    limit = PIVOT_RTOL * float(band[u].max())
    factor = np.zeros_like(rows)
    for i in range(m):
        off = rows[i, 1:]
        pivot = excess[i] - off.sum()
        if pivot <= limit:
            raise NumericalBreakdownError(
                f"Cholesky pivot {pivot:.3e} at position {i} is below {limit:.3e}"
            )
        root = math.sqrt(pivot)
        scaled = off / root
        factor[i, 0] = root
        factor[i, 1:] = scaled
        for j in range(min(u, m - 1 - i)):
            rows[i + 1 + j, : u - j] -= scaled[j] * scaled[j:]
            excess[i + 1 + j] -= off[j] * excess[i] / pivot
    R = np.zeros_like(band)
    for k in range(u + 1):
        R[u - k, k:] = factor[: m - k, k]
    return R


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------

def preprocess(
    g: WeightedGraph,
    gth: bool = False,
    route: str = "auto",
    dense_threshold: int = DENSE_THRESHOLD,
) -> SolverContext:
    """Reorder g and build the reusable solver state.

    route="auto" picks the banded factorization unless b > n/2 and the graph
    is small enough for a dense Cholesky of S.
    """
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}; expected one of {ROUTES}")
    if g.n < 2:
        raise ValueError("the solver needs a graph with at least two nodes")
    started = time.perf_counter()
    relabeled, perm, b = reorder_for_bandwidth(g)
    n = g.n
    m = n - 1
    d = g.degrees[perm.forward]
    d_norm = g.total_weight
    if route == "auto":
        route = "dense" if (b > n / 2 and n <= dense_threshold) else "banded"

    if route == "dense":
        band = _laplacian_band(relabeled, min(b - 1, n - 1))
        S_dense = laplacian_matrix(relabeled).toarray() + np.outer(d, d) / d_norm
        try:
            factor = la.cho_factor(S_dense, check_finite=False)
        except la.LinAlgError as exc:
            raise NumericalBreakdownError(f"dense Cholesky of S failed: {exc}") from exc
        log.info("Solver route dense: n=%d, b=%d (%.3fs)", n, b, time.perf_counter() - started)
        return SolverContext(
            n=n, perm=perm, b=b, d=d, d_norm=d_norm, route="dense",
            L_band=band, S_factor=factor, gth=gth,
        )

    u_full = min(b - 1, n - 1)
    band = _laplacian_band(relabeled, u_full)
    u = min(u_full, m - 1)
    lead = band[u_full - u:, :m]
    tail = np.zeros(m)
    for k in range(1, u_full + 1):
        tail[n - 1 - k] = band[u_full - k, n - 1]

    if gth:
        R = _cholesky_banded_gth(lead, -tail)
    else:
        try:
            R = la.cholesky_banded(lead, lower=False, check_finite=False)
        except la.LinAlgError as exc:
            raise NumericalBreakdownError(f"banded Cholesky of L_(n-1) failed: {exc}") from exc
    _check_pivots(R, lead[-1])

    first = max(0, m - u_full)          # tail[:first] == 0
    v = _solve_lower(R, tail, first)
    z = _solve_lower(R, d[:m], 0)
    rho = float(z @ v - d[m])
    if rho == 0.0 or not math.isfinite(rho):
        raise NumericalBreakdownError(f"bordered system is singular (rho={rho})")

    log.info(
        "Solver route banded%s: n=%d, b=%d (%.3fs)",
        " (GTH)" if gth else "", n, b, time.perf_counter() - started,
    )
    return SolverContext(
        n=n, perm=perm, b=b, d=d, d_norm=d_norm, route="banded",
        R=R, v=v, z=z, rho=rho, L_band=band, gth=gth,
    )


def dense_factor(ctx: SolverContext) -> np.ndarray:
    """R_{n-1} as a dense upper triangular matrix (permuted numbering)."""
    if ctx.route != "banded":
        raise ValueError("dense_factor needs a banded context")
    u = ctx.R.shape[0] - 1
    m = ctx.n - 1
    R = np.zeros((m, m))
    for k in range(u + 1):
        R[np.arange(m - k), np.arange(k, m)] = ctx.R[u - k, k:]
    return R


# ---------------------------------------------------------------------------
# Processing
# ---------------------------------------------------------------------------

def _check_pair(ctx: SolverContext, p: int, q: int) -> None:
    if p == q:
        raise ValueError("p and q must differ")
    for node in (p, q):
        if not 0 <= node < ctx.n:
            raise ValueError(f"node {node} out of range 0..{ctx.n - 1}")


def _permuted_pairs(ctx: SolverContext, pairs) -> tuple:
    """Permuted (P, Q) index arrays with P < Q."""
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= ctx.n):
        raise ValueError(f"node index out of range 0..{ctx.n - 1}")
    P = ctx.perm.inverse[arr[:, 0]]
    Q = ctx.perm.inverse[arr[:, 1]]
    return np.minimum(P, Q), np.maximum(P, Q)


def _solve_permuted_block(ctx: SolverContext, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Columns x_i = S^-1 (e_P[i] - e_Q[i]) in permuted numbering, P < Q."""
    n = ctx.n
    k = P.size
    cols = np.arange(k)
    if ctx.route == "dense":
        W = np.zeros((n, k))
        W[P, cols] = 1.0
        W[Q, cols] = -1.0
        return la.cho_solve(ctx.S_factor, W, check_finite=False)
    m = n - 1
    W = np.zeros((m, k))
    W[P, cols] = 1.0
    inner = Q < m
    W[Q[inner], cols[inner]] = -1.0
    start = int(P.min())
    Y = _solve_lower(ctx.R, W, start)
    xn = (ctx.z[start:] @ Y[start:]) / ctx.rho
    X = np.empty((n, k))
    X[:m] = _solve_upper(ctx.R, Y - np.outer(ctx.v, xn))
    X[m] = xn
    return X


def solve_pair(ctx: SolverContext, p: int, q: int) -> np.ndarray:
    """x with S x = e_p - e_q, in the graph's own numbering."""
    _check_pair(ctx, p, q)
    P, Q = int(ctx.perm.inverse[p]), int(ctx.perm.inverse[q])
    sign = 1.0
    if P > Q:
        P, Q, sign = Q, P, -1.0
    X = _solve_permuted_block(ctx, np.array([P]), np.array([Q]))
    x = X[ctx.perm.inverse, 0]
    return sign * x


def solve_rhs(ctx: SolverContext, F) -> np.ndarray:
    """S^-1 F for a vector or a block of columns, in the graph's own numbering."""
    F = np.asarray(F, dtype=float)
    vector = F.ndim == 1
    Fp = F.reshape(ctx.n, -1)[ctx.perm.forward]
    if ctx.route == "dense":
        X = la.cho_solve(ctx.S_factor, Fp, check_finite=False)
    else:
        m = ctx.n - 1
        sigma = Fp.sum(axis=0)
        shifted = Fp[:m] - np.outer(ctx.d[:m], sigma) / ctx.d_norm
        Y = _solve_lower(ctx.R, shifted, 0)
        xn = (ctx.z @ Y - sigma) / ctx.rho
        X = np.empty_like(Fp)
        X[:m] = _solve_upper(ctx.R, Y - np.outer(ctx.v, xn))
        X[m] = xn
    X = X[ctx.perm.inverse]
    return X[:, 0] if vector else X


def degrees(ctx: SolverContext) -> np.ndarray:
    """Degree vector in the graph's own numbering."""
    return ctx.d if ctx.perm.is_identity else ctx.d[ctx.perm.inverse]


def quadratic_forms_block(ctx: SolverContext, pairs, compensated: bool = False) -> tuple:
    """(alpha, beta) arrays for a block of pairs.

    beta is accumulated over nodes in ascending index order; *compensated*
    switches to math.fsum.
    """
    P, Q = _permuted_pairs(ctx, pairs)
    if np.any(P == Q):
        raise ValueError("p and q must differ")
    X = _solve_permuted_block(ctx, P, Q)
    cols = np.arange(P.size)
    alpha = X[P, cols] - X[Q, cols]
    Xo = X if ctx.perm.is_identity else X[ctx.perm.inverse]
    weighted_sq = degrees(ctx)[:, None] * Xo * Xo
    if compensated:
        beta = np.array([math.fsum(weighted_sq[:, j]) for j in range(P.size)])
    else:
        beta = np.add.reduce(weighted_sq, axis=0)
    return alpha, beta


def quadratic_forms(ctx: SolverContext, p: int, q: int, compensated: bool = False) -> tuple:
    """(alpha, beta) = (w^T S^-1 w, w^T S^-1 D S^-1 w) for w = e_p - e_q."""
    _check_pair(ctx, p, q)
    alpha, beta = quadratic_forms_block(ctx, [(p, q)], compensated)
    return float(alpha[0]), float(beta[0])


def kemeny_banded(ctx: SolverContext, block: int = 256) -> float:
    """sum_i d_i (S^-1)_ii - 1 through column solves."""
    d = degrees(ctx)
    total = 0.0
    for start in range(0, ctx.n, block):
        stop = min(start + block, ctx.n)
        E = np.zeros((ctx.n, stop - start))
        E[np.arange(start, stop), np.arange(stop - start)] = 1.0
        X = solve_rhs(ctx, E)
        total += float(d[start:stop] @ X[np.arange(start, stop), np.arange(stop - start)])
    return total - 1.0



# ---------------------------------------------------------------------------
# Edge sweep: alpha and beta for every in-band pair in O(n b^2)
# ---------------------------------------------------------------------------

def _laplacian_blocks(ctx: SolverContext) -> tuple:
    """Block-tridiagonal view of the permuted Laplacian with blocks of size u = b - 1.

    Returns (diag, upper, d): diag[k] = L[k, k], upper[k] = L[k, k+1] and d[k]
    the degrees of block k. The last block is padded with decoupled unit rows
    of zero degree.
    """
    band = ctx.L_band
    u = band.shape[0] - 1
    n = ctx.n
    blocks = -(-n // u)
    diag = np.zeros((blocks, u, u))
    upper = np.zeros((blocks - 1, u, u))
    for k in range(u + 1):
        j = np.arange(k, n)
        val = band[u - k, k:]
        bi, ri = np.divmod(j - k, u)
        bj, rj = np.divmod(j, u)
        same = bi == bj
        diag[bi[same], ri[same], rj[same]] = val[same]
        diag[bi[same], rj[same], ri[same]] = val[same]
        upper[bi[~same], ri[~same], rj[~same]] = val[~same]
    pad = np.arange(n, blocks * u)
    diag[pad // u, pad % u, pad % u] = 1.0
    d = np.zeros(blocks * u)
    d[:n] = ctx.d
    return diag, upper, d.reshape(blocks, u)


def _one_sided(diag: np.ndarray, coupling: np.ndarray, d: np.ndarray) -> tuple:
    """Fold the blocks before each block k into three small matrices.

    coupling[k] = L[k, k+1] in walk order. For a potential y that is harmonic
    on blocks 0..k-1:
      E[k]  is the Schur term those blocks add to L[k, k],
      sum_{i before k} d_i (y_i - c)^2 = (y_k - c)^T Q[k] (y_k - c),
      sum_{i before k} d_i y_i = m[k] . y_k.
    """
    blocks, u, _ = diag.shape
    E = np.zeros_like(diag)
    Q = np.zeros_like(diag)
    m = np.zeros((blocks, u))
    T = diag[0]
    for k in range(1, blocks):
        B = coupling[k - 1]
        K = -np.linalg.solve(T, B)      # y_{k-1} = K y_k
        E[k] = -B.T @ K
        Q[k] = K.T @ (Q[k - 1] + np.diag(d[k - 1])) @ K
        m[k] = K.T @ (m[k - 1] + d[k - 1])
        T = diag[k] - E[k]
    return E, Q, m


def band_quadratic_forms(ctx: SolverContext, pairs) -> tuple:
    """(alpha, beta) arrays for pairs lying within the half-bandwidth of the reordering.

    Works on the Laplacian instead of S: any y with L y = w gives
    alpha = w^T y and beta = sum_i d_i (y_i - c)^2 with c = d^T y / ||d||_1.
    One sweep in each direction condenses the graph onto every pair of
    neighbouring blocks; each pair is solved on its two-block window and beta
    is assembled from nonnegative terms only.
    """
    P, Q = _permuted_pairs(ctx, pairs)
    if np.any(P == Q):
        raise ValueError("p and q must differ")
    u = ctx.L_band.shape[0] - 1
    if np.any(Q - P > u):
        raise ValueError(f"pair lies outside the half-bandwidth {u} of the reordered graph")
    alpha = np.zeros(P.size)
    beta = np.zeros(P.size)
    if not P.size:
        return alpha, beta
    started = time.perf_counter()
    diag, upper, d = _laplacian_blocks(ctx)
    blocks = diag.shape[0]
    EL, QL, mL = _one_sided(diag, upper, d)
    ER, QR, mR = (a[::-1] for a in _one_sided(
        diag[::-1], upper[::-1].transpose(0, 2, 1), d[::-1]))

    window = np.minimum(P // u, blocks - 2)
    order = np.argsort(window, kind="stable")
    bounds = np.flatnonzero(np.diff(window[order])) + 1
    Lw = np.empty((2 * u, 2 * u))
    for group in np.split(order, bounds):
        i = int(window[group[0]])
        Lw[:u, :u] = diag[i] - EL[i]
        Lw[:u, u:] = upper[i]
        Lw[u:, :u] = upper[i].T
        Lw[u:, u:] = diag[i + 1] - ER[i + 1]
        cols = np.arange(group.size)
        W = np.zeros((2 * u, group.size))
        W[P[group] - i * u, cols] = 1.0
        W[Q[group] - i * u, cols] = -1.0
        # window node 0 is grounded; L restricted to the rest is positive definite
        Y = np.zeros_like(W)
        Y[1:] = np.linalg.solve(Lw[1:, 1:], W[1:])
        yi, yj = Y[:u], Y[u:]
        c = ((mL[i] + d[i]) @ yi + (d[i + 1] + mR[i + 1]) @ yj) / ctx.d_norm
        ci, cj = yi - c, yj - c
        left = QL[i] + np.diag(d[i])
        right = QR[i + 1] + np.diag(d[i + 1])
        alpha[group] = (W * Y).sum(axis=0)
        beta[group] = ((left @ ci) * ci).sum(axis=0) + ((right @ cj) * cj).sum(axis=0)
    log.info("Edge sweep: %d pairs over %d blocks (%.3fs)",
             P.size, blocks, time.perf_counter() - started)
    return alpha, beta


# ---------------------------------------------------------------------------
# Regularized systems S_r = S + rD
# ---------------------------------------------------------------------------

def regularized_factor(ctx: SolverContext, r: float) -> RegularizedFactor:
    if not r > 0:
        raise ValueError("regularization r must be > 0")
    key = ("regularized", float(r))
    if key not in ctx.cache:
        ctx.cache[key] = _regularized_factor(ctx, float(r))
    return ctx.cache[key]


def _regularized_factor(ctx: SolverContext, r: float) -> RegularizedFactor:
    band = ctx.L_band.copy()
    band[-1] += r * ctx.d
    try:
        K = la.cholesky_banded(band, lower=False, check_finite=False)
    except la.LinAlgError as exc:
        raise NumericalBreakdownError(f"Cholesky of L + rD failed: {exc}") from exc
    K_inv_d = la.cho_solve_banded((K, False), ctx.d, check_finite=False)
    log.debug("Factored S + %gD", r)
    return RegularizedFactor(r=r, K=K, K_inv_d=K_inv_d, denom=ctx.d_norm + float(ctx.d @ K_inv_d))


def regularized_solve(ctx: SolverContext, r: float, F) -> np.ndarray:
    """(S + rD)^-1 F in the graph's own numbering (Sherman-Morrison on L + rD)."""
    rf = regularized_factor(ctx, r)
    F = np.asarray(F, dtype=float)
    vector = F.ndim == 1
    Fp = F.reshape(ctx.n, -1)[ctx.perm.forward]
    Y = la.cho_solve_banded((rf.K, False), Fp, check_finite=False)
    X = Y - np.outer(rf.K_inv_d, ctx.d @ Y) / rf.denom
    X = X[ctx.perm.inverse]
    return X[:, 0] if vector else X
