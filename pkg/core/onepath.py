"""Closed forms for tridiagonal (one-path) chains."""
import numpy as np
import scipy.sparse as sp

from db.models import OnePathSpec, WeightedGraph
from utils.config import LOG_SPACE_MIN_N
from utils.logger import get_logger

log = get_logger("kemenytool.onepath")


def unit_path_spec(n: int) -> OnePathSpec:
    """Random walk on the unweighted path with n nodes."""
    if n < 2:
        raise ValueError("a one-path chain needs n >= 2")
    lam = [1.0] + [0.5] * (n - 2)
    nu = [0.5] * (n - 2) + [1.0]
    return OnePathSpec(lam=lam, nu=nu)


def spec_from_graph(g: WeightedGraph) -> OnePathSpec:
    """Chain of a graph whose edges are exactly {i, i+1}; loops become holding mass."""
    if g.n < 2:
        raise ValueError("a one-path chain needs n >= 2")
    expected = [(i, i + 1) for i in range(g.n - 1)]
    if sorted(g.weights.keys()) != expected:
        raise ValueError("graph is not a path 0-1-...-(n-1) in node order")
    d = g.degrees
    lam = [g.weight(i, i + 1) / d[i] for i in range(g.n - 1)]
    nu = [g.weight(i - 1, i) / d[i] for i in range(1, g.n)]
    return OnePathSpec(lam=lam, nu=nu)


def onepath_to_graph(spec: OnePathSpec) -> WeightedGraph:
    """Reversible weights a_{i,i+1} = pi_i lam_i and loops pi_i theta_i, scaled so the lightest edge is 1."""
    pi = stationary(spec)
    edge_w = pi[:-1] * np.asarray(spec.lam)
    scale = 1.0 / edge_w.min()
    theta = np.clip(np.asarray(spec.theta), 0.0, None)
    edges = [(i, i + 1, float(edge_w[i] * scale)) for i in range(spec.n - 1)]
    loops = {i: float(pi[i] * theta[i] * scale) for i in range(spec.n) if theta[i] > 0}
    return WeightedGraph.from_edges(spec.n, edges, loops=loops)


def transition_matrix(spec: OnePathSpec) -> sp.csr_array:
    """Tridiagonal P with P[i, i+1] = lam_i, P[i, i-1] = nu_i, P[i, i] = theta_i."""
    if spec.n == 1:
        return sp.csr_array(np.ones((1, 1)))
    return sp.diags_array([spec.nu, spec.theta, spec.lam], offsets=[-1, 0, 1]).tocsr()


def stationary(spec: OnePathSpec) -> np.ndarray:
    """pi_i proportional to prod_{l < i} lam_l / nu_{l+1}."""
    lam = np.asarray(spec.lam)
    nu = np.asarray(spec.nu)
    if spec.n > LOG_SPACE_MIN_N:
        logs = np.concatenate([[0.0], np.cumsum(np.log(lam) - np.log(nu))])
        pi = np.exp(logs - logs.max())
    else:
        pi = np.concatenate([[1.0], np.cumprod(lam / nu)])
    return pi / pi.sum()


def _edge_terms(spec: OnePathSpec) -> np.ndarray:
    """sigma_k (1 - sigma_k) / (lam_k pi_k) for k = 0..n-2."""
    pi = stationary(spec)
    head = np.cumsum(pi)[:-1]
    tail = np.cumsum(pi[::-1])[::-1][1:]     # 1 - sigma_k without cancellation
    return head * tail / (np.asarray(spec.lam) * pi[:-1])


def kemeny_onepath(spec: OnePathSpec) -> float:
    return float(np.sum(_edge_terms(spec)))


def mu_onepath(spec: OnePathSpec, q: int) -> float:
    """Centrality of edge {q, q+1}, with q counted from 1 as in the chain's edge numbering."""
    if not 1 <= q <= spec.n - 1:
        raise ValueError(f"edge index q={q} out of range 1..{spec.n - 1}")
    return float(_edge_terms(spec)[q - 1])


def mu_profile(spec: OnePathSpec) -> np.ndarray:
    """All edge centralities, edge {q, q+1} at position q-1."""
    return _edge_terms(spec)


def unit_path_mu(n: int, q: int) -> float:
    """(2q-1)(2n-2q-1) / (2(n-1)) for the unweighted path."""
    if not 1 <= q <= n - 1:
        raise ValueError(f"edge index q={q} out of range 1..{n - 1}")
    return (2 * q - 1) * (2 * n - 2 * q - 1) / (2 * (n - 1))
