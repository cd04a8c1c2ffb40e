import numpy as np
import pytest

from core import centrality, families, onepath
from core import laplacian_solver as solver
from core.spectral import kemeny_via_eigs, kemeny_via_S
from db.models import OnePathSpec, WeightedGraph


def test_unit_path_matches_parabola():
    spec = onepath.unit_path_spec(6)
    assert np.allclose(onepath.mu_profile(spec), [0.9, 2.1, 2.5, 2.1, 0.9])
    for q in range(1, 6):
        assert onepath.mu_onepath(spec, q) == pytest.approx(onepath.unit_path_mu(6, q))


def test_kemeny_of_unit_paths():
    assert onepath.kemeny_onepath(onepath.unit_path_spec(2)) == pytest.approx(0.5)
    assert onepath.kemeny_onepath(onepath.unit_path_spec(3)) == pytest.approx(1.5)
    assert onepath.kemeny_onepath(onepath.unit_path_spec(40)) == pytest.approx(
        kemeny_via_eigs(families.path(40)), rel=1e-10)


def test_stationary_vector_is_invariant():
    spec = OnePathSpec(lam=[0.7, 0.2, 0.5, 0.9], nu=[0.3, 0.4, 0.1, 0.6])
    pi = onepath.stationary(spec)
    P = onepath.transition_matrix(spec)
    assert np.allclose(P.sum(axis=1), 1.0)
    assert np.allclose(P.T @ pi, pi)
    assert pi.sum() == pytest.approx(1.0)


def test_log_space_stationary_agrees():
    spec = OnePathSpec(lam=[0.5] * 1500, nu=[0.45] * 1500)
    pi = onepath.stationary(spec)
    assert np.all(np.isfinite(pi))
    assert pi.sum() == pytest.approx(1.0)
    assert pi[1] / pi[0] == pytest.approx(0.5 / 0.45)


def test_random_chain_agrees_with_general_solver():
    rng = np.random.default_rng(4)
    n = 15
    lam = rng.uniform(0.1, 0.5, size=n - 1)
    nu = rng.uniform(0.1, 0.5, size=n - 1)
    spec = OnePathSpec(lam=lam, nu=nu)
    g = onepath.onepath_to_graph(spec)
    assert g.m == n - 1
    ctx = solver.preprocess(g)
    analyses = centrality.analyze_pairs(ctx, g, [(i, i + 1) for i in range(n - 1)])
    mus = [centrality.mu(pa) for pa in analyses]
    assert np.allclose(mus, onepath.mu_profile(spec), rtol=1e-9)
    assert onepath.kemeny_onepath(spec) == pytest.approx(kemeny_via_eigs(g), rel=1e-9)


def test_spec_from_graph_round_trip():
    g = WeightedGraph.from_edges(4, [(0, 1, 2.0), (1, 2, 1.0), (2, 3, 3.0)], loops={1: 0.5})
    spec = onepath.spec_from_graph(g)
    assert spec.lam[0] == pytest.approx(1.0)
    assert spec.theta[1] == pytest.approx(0.5 / 3.5)
    assert onepath.kemeny_onepath(spec) == pytest.approx(kemeny_via_eigs(g), rel=1e-10)


def test_spec_from_graph_rejects_non_paths(c10):
    with pytest.raises(ValueError):
        onepath.spec_from_graph(c10)


@pytest.mark.parametrize("lam, nu", [
    ([0.5, 0.6], [0.5]),          # lengths differ
    ([0.0, 0.5], [0.5, 0.5]),     # zero transition
    ([0.8, 0.6], [0.5, 0.5]),     # middle loop mass negative
])
def test_invalid_specs(lam, nu):
    with pytest.raises(ValueError):
        OnePathSpec(lam=lam, nu=nu)


def test_edge_index_range():
    spec = onepath.unit_path_spec(5)
    with pytest.raises(ValueError):
        onepath.mu_onepath(spec, 0)
    with pytest.raises(ValueError):
        onepath.mu_onepath(spec, 5)
    with pytest.raises(ValueError):
        onepath.unit_path_spec(1)



def test_general_pipeline_matches_parabola():
    for n in range(2, 51):
        g = families.path(n)
        ctx = solver.preprocess(g)
        expected = [onepath.unit_path_mu(n, q) for q in range(1, n)]
        swept = [centrality.mu(pa) for pa in centrality.analyze_edges(ctx, g)]
        solved = [centrality.mu(pa) for pa in
                  centrality.analyze_pairs(ctx, g, [(i, i + 1) for i in range(n - 1)])]
        assert swept == pytest.approx(expected, rel=1e-8)
        assert solved == pytest.approx(expected, rel=1e-8)


def test_middle_edge_is_most_central():
    for n in range(2, 51):
        profile = onepath.mu_profile(onepath.unit_path_spec(n))
        assert int(np.argmax(profile)) + 1 in {n // 2, (n + 1) // 2}


@pytest.mark.parametrize("seed", range(20))
def test_closed_form_kemeny_on_random_chains(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 40))
    spec = OnePathSpec(lam=rng.uniform(0.05, 0.5, n - 1), nu=rng.uniform(0.05, 0.5, n - 1))
    expected = kemeny_via_S(onepath.onepath_to_graph(spec))
    assert onepath.kemeny_onepath(spec) == pytest.approx(expected, rel=1e-9)
