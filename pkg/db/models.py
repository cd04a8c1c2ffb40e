"""Plain dataclasses used across db, core, and cli layers."""
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

import numpy as np


class _Infinite:
    """Marker for a quantity that diverges (disconnected chain, cut-edge removal)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITE"

    def __str__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (_Infinite, ())


INFINITE = _Infinite()


def is_infinite(value) -> bool:
    return value is INFINITE


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected weighted graph on nodes 0..n-1 with optional self-loops.

    Off-diagonal weights are stored once per unordered pair, keyed (p, q) with
    p < q. Absent pairs have weight 0. *labels* are the external node ids used
    in every file and console output (1-based by default).
    """
    n: int
    weights: Mapping = field(default_factory=dict)
    loops: Mapping = field(default_factory=dict)
    labels: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a graph needs at least one node")
        weights = {}
        for (p, q), w in self.weights.items():
            if not (0 <= p < q < self.n):
                raise ValueError(f"edge key ({p}, {q}) must satisfy 0 <= p < q < n")
            w = float(w)
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"edge ({p}, {q}) has nonpositive weight {w}")
            weights[(int(p), int(q))] = w
        loops = {}
        for p, w in self.loops.items():
            if not 0 <= p < self.n:
                raise ValueError(f"loop node {p} out of range")
            w = float(w)
            if not (w >= 0 and math.isfinite(w)):
                raise ValueError(f"loop at {p} has negative weight {w}")
            if w > 0:
                loops[int(p)] = w
        labels = tuple(self.labels) if self.labels else tuple(range(1, self.n + 1))
        if len(labels) != self.n or len(set(labels)) != self.n:
            raise ValueError("labels must be n distinct identifiers")
        object.__setattr__(self, "weights", MappingProxyType(dict(sorted(weights.items()))))
        object.__setattr__(self, "loops", MappingProxyType(dict(sorted(loops.items()))))
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable,
        loops: Optional[Mapping] = None,
        labels: Optional[Iterable] = None,
    ) -> "WeightedGraph":
        """Build from (p, q) or (p, q, w) tuples; a pair listed twice is an error."""
        weights: dict = {}
        loop_weights = dict(loops or {})
        for edge in edges:
            p, q = int(edge[0]), int(edge[1])
            w = float(edge[2]) if len(edge) > 2 else 1.0
            if p == q:
                if p in loop_weights:
                    raise ValueError(f"loop at {p} listed twice")
                loop_weights[p] = w
                continue
            key = (p, q) if p < q else (q, p)
            if key in weights:
                raise ValueError(f"parallel edge {key}")
            weights[key] = w
        return cls(n=n, weights=weights, loops=loop_weights, labels=tuple(labels or ()))

    @property
    def m(self) -> int:
        return len(self.weights)

    @cached_property
    def edge_list(self) -> list:
        """Sorted (p, q, w) triples with p < q."""
        return [(p, q, w) for (p, q), w in self.weights.items()]

    @cached_property
    def edge_arrays(self) -> tuple:
        """(rows, cols, weights) numpy arrays of the off-diagonal edges, p < q."""
        if not self.weights:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty.copy(), np.zeros(0)
        keys = np.array(list(self.weights.keys()), dtype=np.int64)
        return keys[:, 0], keys[:, 1], np.fromiter(self.weights.values(), dtype=float)

    @cached_property
    def degrees(self) -> np.ndarray:
        """d = A·1; a loop of weight w adds w once to its node."""
        rows, cols, w = self.edge_arrays
        d = np.zeros(self.n)
        np.add.at(d, rows, w)
        np.add.at(d, cols, w)
        for p, lw in self.loops.items():
            d[p] += lw
        return d

    @cached_property
    def _label_index(self) -> dict:
        return {label: i for i, label in enumerate(self.labels)}

    @property
    def total_weight(self) -> float:
        """||d||_1, exactly rounded so it does not depend on node order."""
        return math.fsum(self.degrees)

    def weight(self, p: int, q: int) -> float:
        if p == q:
            return self.loops.get(p, 0.0)
        key = (p, q) if p < q else (q, p)
        return self.weights.get(key, 0.0)

    def has_edge(self, p: int, q: int) -> bool:
        key = (p, q) if p < q else (q, p)
        return key in self.weights

    def label(self, i: int):
        return self.labels[i]

    def index_of(self, label) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise ValueError(f"unknown node {label!r}") from None


@dataclass(frozen=True, eq=False)
class NodePermutation:
    forward: np.ndarray   # new index -> old index
    inverse: np.ndarray   # old index -> new index

    @classmethod
    def from_forward(cls, forward) -> "NodePermutation":
        forward = np.asarray(forward, dtype=np.int64)
        inverse = np.empty_like(forward)
        inverse[forward] = np.arange(forward.size)
        return cls(forward=forward, inverse=inverse)

    @classmethod
    def identity(cls, n: int) -> "NodePermutation":
        return cls.from_forward(np.arange(n))

    @cached_property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.forward, np.arange(self.forward.size)))


@dataclass(frozen=True, eq=False)
class DenseSpectralData:
    """Dense matrices and spectra of a connected graph (oracle scale only)."""
    degrees: np.ndarray
    P: np.ndarray         # D^-1 A
    S: np.ndarray         # L + d d^T / ||d||_1
    H: np.ndarray         # D^-1/2 S D^-1/2
    S_inv: np.ndarray
    eig_P: np.ndarray     # ascending, last entry 1
    eig_S: np.ndarray
    eig_M: np.ndarray     # eigenvalues of S^-1 D S^-1


@dataclass(frozen=True, eq=False)
class SolverContext:
    """Frozen preprocessing state of the banded solver, in permuted order.

    Banded arrays use LAPACK upper storage: ab[u + i - j, j] = R[i, j]. R is
    the factor of the leading (n-1)x(n-1) Laplacian block; the dense route
    keeps a cho_factor of S instead.
    """
    n: int
    perm: NodePermutation
    b: int
    d: np.ndarray               # degrees in permuted order
    d_norm: float               # ||d||_1
    route: str                  # "banded" | "dense"
    R: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None
    rho: float = 0.0
    L_band: Optional[np.ndarray] = None  # upper band of the full Laplacian
    S_factor: Optional[tuple] = None     # scipy cho_factor of S (dense route)
    gth: bool = False
    cache: dict = field(default_factory=dict, repr=False)   # regularized factors, bridges


@dataclass(frozen=True, eq=False)
class RegularizedFactor:
    """Factorization of S_r = S + rD = (L + rD) + d d^T / ||d||_1, permuted order.

    L + rD is banded and positive definite; the rank-one term is applied
    through the Sherman-Morrison formula with K^-1 d precomputed.
    """
    r: float
    K: np.ndarray                    # cholesky_banded factor of L + rD
    K_inv_d: np.ndarray
    denom: float                     # ||d||_1 + d^T K^-1 d


@dataclass(frozen=True)
class PairAnalysis:
    p: int
    q: int
    a: float          # a_pq, 0 for a non-edge
    alpha: float      # w^T S^-1 w
    beta: float       # w^T S^-1 D S^-1 w
    is_bridge: bool = False

    @property
    def pair(self) -> tuple:
        return (self.p, self.q)


@dataclass(frozen=True)
class OnePathSpec:
    """Tridiagonal chain: lam[i] = P[i, i+1] (i = 0..n-2), nu[i-1] = P[i, i-1] (i = 1..n-1)."""
    lam: tuple
    nu: tuple

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lam)
        nu = tuple(float(x) for x in self.nu)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "nu", nu)
        if len(lam) != len(nu):
            raise ValueError("lam and nu must both have n-1 entries")
        if not all(0 < x <= 1 for x in lam + nu):
            raise ValueError("transition probabilities must lie in (0, 1]")
        if any(t < -1e-12 for t in self.theta):
            raise ValueError("lam and nu leave negative loop mass")

    @property
    def n(self) -> int:
        return len(self.lam) + 1

    @property
    def theta(self) -> tuple:
        """Loop masses: theta_0 = 1-lam_0, theta_i = 1-lam_i-nu_i, theta_{n-1} = 1-nu_{n-1}."""
        n = self.n
        if n == 1:
            return (1.0,)
        out = [1.0 - self.lam[0]]
        for i in range(1, n - 1):
            out.append(1.0 - self.lam[i] - self.nu[i - 1])
        out.append(1.0 - self.nu[n - 2])
        return tuple(out)


@dataclass(frozen=True)
class ScoreTable:
    """Scores over a pair universe. Entries are (p, q, score), p < q, sorted by pair."""
    measure_id: str
    universe: str                 # "edges" | "non-edges" | "all-pairs"
    entries: tuple
    sort_direction: str           # "ascending" | "descending"
    labels: tuple = ()
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        entries = tuple(sorted((int(p), int(q), float(s)) for p, q, s in self.entries))
        seen = set()
        for p, q, s in entries:
            if (p, q) in seen:
                raise ValueError(f"duplicate pair ({p}, {q}) in score table")
            if not math.isfinite(s):
                raise ValueError(f"non-finite score for pair ({p}, {q})")
            seen.add((p, q))
        if self.sort_direction not in ("ascending", "descending"):
            raise ValueError(f"bad sort direction {self.sort_direction!r}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def pairs(self) -> list:
        return [(p, q) for p, q, _ in self.entries]

    @property
    def scores(self) -> np.ndarray:
        return np.array([s for _, _, s in self.entries])

    def label_pair(self, p: int, q: int) -> tuple:
        if not self.labels:
            return (p + 1, q + 1)
        return (self.labels[p], self.labels[q])


@dataclass(frozen=True)
class SensitivityReport:
    n: int
    zeta_formula: float
    zeta_pair_mean: Optional[float] = None   # mean of mu_bar over all n^2 ordered pairs


@dataclass
class RunConfig:
    """Parameters of one CLI run."""
    subcommand: str
    input_path: Optional[str] = None
    input_format: str = "edgelist"     # edgelist | mtx
    out_path: Optional[str] = None
    output_format: str = "csv"         # csv | json
    normalization: str = "none"        # none | linear | sqrt-linear
    histogram_bins: int = 50
    histogram_path: Optional[str] = None
    r_values: tuple = ()
    dense_threshold: int = 2000
    jobs: int = 1
    gth: bool = False
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.histogram_bins < 1:
            raise ValueError("histogram_bins must be >= 1")
        if any(r <= 0 for r in self.r_values):
            raise ValueError("regularization values r must be > 0")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass
class RunRecord:
    id: Optional[int]
    subcommand: str
    input_path: str
    input_sha256: str
    started_at: str
    finished_at: Optional[str] = None
    status: str = "running"     # running | completed | failed | error
    n: int = 0
    m: int = 0
    bandwidth: int = 0
    route: str = ""
    error_message: str = ""
