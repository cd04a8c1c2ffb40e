"""Named graph families (star, path, cycle, trees) and random test graphs."""
import networkx as nx
import numpy as np

from db.models import WeightedGraph

FAMILIES = ("star", "path", "cycle", "tree")


def from_networkx(G: nx.Graph, weight: str = "weight") -> WeightedGraph:
    """Convert a networkx graph; nodes are taken in sorted order and labelled 1..n."""
    nodes = sorted(G.nodes())
    index = {node: i for i, node in enumerate(nodes)}
    edges = []
    loops = {}
    for u, v, data in G.edges(data=True):
        w = float(data.get(weight, 1.0))
        if u == v:
            loops[index[u]] = w
        else:
            edges.append((index[u], index[v], w))
    return WeightedGraph.from_edges(len(nodes), edges, loops=loops)


def star(n: int) -> WeightedGraph:
    """Star on n nodes; node 0 (label 1) is the centre."""
    return from_networkx(nx.star_graph(n - 1))


def path(n: int) -> WeightedGraph:
    return from_networkx(nx.path_graph(n))


def cycle(n: int) -> WeightedGraph:
    return from_networkx(nx.cycle_graph(n))


def binary_tree(n: int) -> WeightedGraph:
    """Complete binary tree on n nodes in breadth-first numbering."""
    return from_networkx(nx.Graph((i, (i - 1) // 2) for i in range(1, n)) if n > 1 else nx.empty_graph(1))


def family(name: str, n: int) -> WeightedGraph:
    builders = {"star": star, "path": path, "cycle": cycle, "tree": binary_tree}
    try:
        return builders[name](n)
    except KeyError:
        raise ValueError(f"unknown family {name!r}; expected one of {FAMILIES}") from None


def random_tree(n: int, seed: int = 0, weighted: bool = False) -> WeightedGraph:
    rng = np.random.default_rng(seed)
    if n == 1:
        return WeightedGraph(n=1)
    T = nx.from_prufer_sequence(rng.integers(0, n, size=n - 2).tolist())
    return _with_weights(T, rng, weighted)


def random_connected(n: int, p: float = 0.3, seed: int = 0, weighted: bool = True) -> WeightedGraph:
    """G(n, p) united with a random spanning tree, so the result is always connected."""
    rng = np.random.default_rng(seed)
    G = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)))
    if n > 1:
        G.add_edges_from(nx.from_prufer_sequence(rng.integers(0, n, size=n - 2).tolist()).edges())
    return _with_weights(G, rng, weighted)


def _with_weights(G: nx.Graph, rng: np.random.Generator, weighted: bool) -> WeightedGraph:
    for u, v in sorted(G.edges()):
        G[u][v]["weight"] = float(rng.uniform(0.5, 2.0)) if weighted else 1.0
    return from_networkx(G)
