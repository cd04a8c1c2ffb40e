import numpy as np
import pytest

from core import families
from core import laplacian_solver as solver
from core.parallel import PairBatchRunner
from core.sensitivity import global_sensitivity, sensitivity_curve
from core.spectral import dense_data


def test_single_edge(k2):
    report = global_sensitivity(solver.preprocess(k2), k2)
    assert report.n == 2
    assert report.zeta_formula == pytest.approx(0.125)
    assert report.zeta_pair_mean == pytest.approx(0.25)


def test_path_of_three(p3):
    report = global_sensitivity(solver.preprocess(p3, route="banded"), p3)
    assert report.zeta_formula == pytest.approx(3.5 / 9)
    assert report.zeta_pair_mean == pytest.approx(7 / 9)


@pytest.mark.parametrize("seed", [0, 1])
def test_formula_against_dense_matrix(seed):
    g = families.random_connected(25, seed=seed)
    data = dense_data(g)
    M = data.S_inv @ np.diag(data.degrees) @ data.S_inv
    expected = (g.n * np.trace(M) - M.sum()) / g.n ** 2
    report = global_sensitivity(solver.preprocess(g, route="banded"), g,
                                runner=PairBatchRunner(jobs=2))
    assert report.zeta_formula == pytest.approx(expected, rel=1e-10)
    assert report.zeta_pair_mean == pytest.approx(2 * report.zeta_formula, rel=1e-10)


def test_pair_mean_is_optional(c10):
    report = global_sensitivity(solver.preprocess(c10), c10, with_pair_mean=False)
    assert report.zeta_pair_mean is None
    assert report.zeta_formula > 0


def test_curves():
    star = sensitivity_curve("star", range(10, 41, 10))
    assert list(star.columns) == ["family", "n", "zeta"]
    assert list(star["n"]) == [10, 20, 30, 40]
    path = sensitivity_curve("path", [10, 20, 30], with_pair_mean=True)
    assert path["zeta"].is_monotonic_increasing
    assert np.allclose(path["zeta_pair_mean"], 2 * path["zeta"], rtol=1e-10)
    # star curve is flat compared to the path
    assert star["zeta"].max() / star["zeta"].min() < path["zeta"].max() / path["zeta"].min()


def test_curve_rejects_unknown_family():
    with pytest.raises(ValueError):
        sensitivity_curve("wheel", [10])


def test_family_curves_over_ten_to_a_hundred():
    sizes = list(range(10, 101, 10))
    curves = {name: sensitivity_curve(name, sizes, with_pair_mean=True)
              for name in ("star", "path", "cycle")}
    for frame in curves.values():
        assert np.allclose(frame["zeta_pair_mean"], 2 * frame["zeta"], rtol=1e-10, atol=0)
    for name in ("path", "cycle"):
        assert np.all(np.diff(curves[name]["zeta"].to_numpy()) > 0)
    # star: zeta = ((n - 1)^2 - 1/2) / n^2, nearly flat
    n = np.array(sizes, dtype=float)
    star = curves["star"]["zeta"].to_numpy()
    assert np.allclose(star, ((n - 1) ** 2 - 0.5) / n ** 2, rtol=1e-10, atol=0)
    assert star.max() / star.min() < 1.25
