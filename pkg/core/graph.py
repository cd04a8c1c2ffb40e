"""Graph-core operations: matrices, connectivity, bridges and bandwidth reordering."""
import networkx as nx
import numpy as np
import scipy.sparse as sp
from networkx.utils import reverse_cuthill_mckee_ordering
from scipy.sparse.csgraph import connected_components

from core.errors import DisconnectedGraphError
from db.models import NodePermutation, WeightedGraph
from utils.logger import get_logger

log = get_logger("kemenytool.graph")


def adjacency_matrix(g: WeightedGraph) -> sp.csr_array:
    """Symmetric sparse A, loops on the diagonal."""
    rows, cols, w = g.edge_arrays
    loop_nodes = np.fromiter(g.loops.keys(), dtype=np.int64, count=len(g.loops))
    loop_w = np.fromiter(g.loops.values(), dtype=float, count=len(g.loops))
    r = np.concatenate([rows, cols, loop_nodes])
    c = np.concatenate([cols, rows, loop_nodes])
    data = np.concatenate([w, w, loop_w])
    return sp.csr_array((data, (r, c)), shape=(g.n, g.n))


def laplacian_matrix(g: WeightedGraph) -> sp.csr_array:
    """L = D - A. Loops cancel, so L only sees off-diagonal weights."""
    return (sp.diags_array(g.degrees) - adjacency_matrix(g)).tocsr()


def to_networkx(g: WeightedGraph, with_loops: bool = False) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_weighted_edges_from(g.edge_list)
    if with_loops:
        G.add_weighted_edges_from((p, p, w) for p, w in g.loops.items())
    return G


def components(g: WeightedGraph) -> list:
    """Connected components as sorted lists of node indices, ordered by smallest node."""
    if g.n == 1:
        return [[0]]
    count, labels = connected_components(adjacency_matrix(g), directed=False)
    groups = [[] for _ in range(count)]
    for node, comp in enumerate(labels):
        groups[comp].append(node)
    return sorted(groups, key=lambda grp: grp[0])


def is_connected(g: WeightedGraph) -> bool:
    return len(components(g)) == 1


def require_connected(g: WeightedGraph) -> None:
    """Raise DisconnectedGraphError naming a component cut off from node 1."""
    comps = components(g)
    if len(comps) == 1:
        return
    separated = [g.label(i) for i in comps[1]]
    preview = ", ".join(str(x) for x in separated[:10])
    if len(separated) > 10:
        preview += ", ..."
    raise DisconnectedGraphError(
        f"graph has {len(comps)} connected components; "
        f"nodes {{{preview}}} are separated from node {g.label(0)}",
        component=separated,
    )


def bridges(g: WeightedGraph) -> frozenset:
    """Edges whose removal disconnects g, as (p, q) pairs with p < q."""
    require_connected(g)
    found = nx.bridges(to_networkx(g))
    return frozenset((min(p, q), max(p, q)) for p, q in found)


def bandwidth(g: WeightedGraph) -> int:
    """Half-bandwidth b = 1 + max |i - j| over edges (1 for an edgeless graph)."""
    rows, cols, _ = g.edge_arrays
    if rows.size == 0:
        return 1
    return int(np.max(cols - rows)) + 1


def permute_graph(g: WeightedGraph, perm: NodePermutation) -> WeightedGraph:
    """Relabel nodes so that new node i is old node perm.forward[i]; labels travel along."""
    inv = perm.inverse
    weights = {}
    for (p, q), w in g.weights.items():
        a, b = int(inv[p]), int(inv[q])
        weights[(a, b) if a < b else (b, a)] = w
    loops = {int(inv[p]): w for p, w in g.loops.items()}
    labels = tuple(g.labels[i] for i in perm.forward)
    h = WeightedGraph(n=g.n, weights=weights, loops=loops, labels=labels)
    # d moves with its nodes instead of being re-summed
    h.__dict__["degrees"] = g.degrees[perm.forward]
    return h


def reorder_for_bandwidth(g: WeightedGraph) -> tuple:
    """Reverse Cuthill-McKee relabeling from a pseudo-peripheral node.

    Returns (relabeled graph, permutation, half-bandwidth).
    """
    require_connected(g)
    order = list(reverse_cuthill_mckee_ordering(to_networkx(g)))
    perm = NodePermutation.from_forward(order)
    if perm.is_identity:
        relabeled = g
    else:
        relabeled = permute_graph(g, perm)
    b = bandwidth(relabeled)
    log.debug("Reordered %d nodes: bandwidth %d -> %d", g.n, bandwidth(g), b)
    return relabeled, perm, b
