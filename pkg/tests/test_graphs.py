"""Graph container, Laplacian, Dirichlet energy, generators, and file format."""

from __future__ import annotations

import numpy as np
import pytest

import graphfb as gf
from graphfb.errors import InputError, NumericalError
from graphfb.graphs import as_signal
from conftest import dirichlet_double_sum

PATH3_LAPLACIAN = np.array(
    [
        [1.0, -1.0, 0.0],
        [-1.0, 2.0, -1.0],
        [0.0, -1.0, 1.0],
    ]
)


def test_laplacian_path3(path3):
    np.testing.assert_allclose(gf.laplacian(path3), PATH3_LAPLACIAN, atol=0)


def test_laplacian_complete4():
    g = gf.generate("complete", 4)
    expected = 4.0 * np.eye(4) - np.ones((4, 4))
    np.testing.assert_allclose(gf.laplacian(g), expected, atol=0)


def test_laplacian_row_sums_zero():
    g = gf.generate("random_geometric", 25, seed=3)
    l_matrix = gf.laplacian(g)
    np.testing.assert_allclose(l_matrix.sum(axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(l_matrix, l_matrix.T, atol=0)


def test_dirichlet_path3_frozen(path3):
    # f = (0, 1, 2): both unit edges contribute 1.
    assert gf.dirichlet_energy(gf.laplacian(path3), np.array([0.0, 1.0, 2.0])) == pytest.approx(2.0, abs=1e-12)


def test_dirichlet_ring4_frozen(ring4):
    # Alternating +-1/2 signal: four edges, each difference 1, energy 4.
    f = np.array([0.5, -0.5, 0.5, -0.5])
    assert gf.dirichlet_energy(gf.laplacian(ring4), f) == pytest.approx(4.0, abs=1e-12)


def test_dirichlet_matches_double_sum_oracle():
    rng = np.random.default_rng(11)
    for seed in range(5):
        g = gf.generate("random_geometric", 15, seed=seed)
        f = rng.standard_normal(g.n)
        expected = dirichlet_double_sum(g, f)
        got = gf.dirichlet_energy(gf.laplacian(g), f)
        assert got == pytest.approx(expected, rel=1e-10)


def test_dirichlet_constant_is_zero():
    g = gf.generate("ring", 7)
    assert gf.dirichlet_energy(gf.laplacian(g), np.full(7, 3.3)) == pytest.approx(0.0, abs=1e-12)


def test_check_laplacian_accepts_valid():
    g = gf.generate("grid", 9)
    report = gf.check_laplacian(gf.laplacian(g))
    assert all(v <= 1e-10 for v in report.values())


def test_check_laplacian_rejects_asymmetric():
    bad = np.array([[1.0, -1.0], [0.0, 1.0]])
    with pytest.raises(NumericalError):
        gf.check_laplacian(bad)


def test_check_laplacian_rejects_positive_offdiag():
    bad = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(NumericalError):
        gf.check_laplacian(bad)


def test_check_laplacian_rejects_nonzero_rowsum():
    bad = np.array([[2.0, -1.0], [-1.0, 2.0]])
    with pytest.raises(NumericalError):
        gf.check_laplacian(bad)


# -- Graph construction contracts ------------------------------------------


def test_graph_rejects_self_loop():
    with pytest.raises(InputError):
        gf.Graph(3, ((0, 0, 1.0), (0, 1, 1.0), (1, 2, 1.0)))


def test_graph_rejects_nonpositive_weight():
    with pytest.raises(InputError):
        gf.Graph(2, ((0, 1, 0.0),))
    with pytest.raises(InputError):
        gf.Graph(2, ((0, 1, -2.0),))


def test_graph_rejects_out_of_range_vertex():
    with pytest.raises(InputError):
        gf.Graph(2, ((0, 2, 1.0),))


def test_graph_rejects_disconnected():
    with pytest.raises(InputError):
        gf.Graph(4, ((0, 1, 1.0), (2, 3, 1.0)))


def test_graph_rejects_duplicate_edge():
    with pytest.raises(InputError):
        gf.Graph(2, ((0, 1, 1.0), (1, 0, 2.0)))


def test_weight_matrix_symmetric():
    g = gf.Graph(3, ((0, 1, 2.0), (1, 2, 0.5)))
    w = g.weight_matrix
    assert w[0, 1] == w[1, 0] == 2.0
    assert w[1, 2] == w[2, 1] == 0.5
    assert w[0, 2] == 0.0


def test_degrees():
    g = gf.Graph(3, ((0, 1, 2.0), (1, 2, 0.5)))
    np.testing.assert_allclose(g.degrees, [2.0, 2.5, 0.5])


# -- Generators --------------------------------------------------------------


def test_generate_ring_structure():
    g = gf.generate("ring", 5)
    assert g.n == 5
    assert len(g.edges) == 5
    assert g.coords is not None and g.coords.shape == (5, 2)


def test_generate_path_structure():
    g = gf.generate("path", 5)
    assert len(g.edges) == 4


def test_generate_grid_structure():
    g = gf.generate("grid", 12)
    # 3 rows of 4: inner grid edges only.
    assert g.n == 12
    assert g.coords.shape == (12, 2)
    assert len(g.edges) == 3 * 3 + 2 * 4


def test_generate_complete_edge_count():
    g = gf.generate("complete", 6)
    assert len(g.edges) == 15


def test_generate_random_geometric_deterministic():
    a = gf.generate("random_geometric", 20, seed=4)
    b = gf.generate("random_geometric", 20, seed=4)
    assert a.edges == b.edges
    np.testing.assert_array_equal(a.coords, b.coords)
    c = gf.generate("random_geometric", 20, seed=5)
    assert a.edges != c.edges or not np.array_equal(a.coords, c.coords)


def test_generate_random_geometric_connected_weights():
    g = gf.generate("random_geometric", 40, seed=9)
    assert all(w > 0 for _, _, w in g.edges)
    assert all(w <= 1.0 + 1e-12 for _, _, w in g.edges)


def test_generate_rejects_unknown_kind():
    with pytest.raises(InputError):
        gf.generate("torus", 10)


def test_generate_rejects_tiny_ring():
    with pytest.raises(InputError):
        gf.generate("ring", 2)


# -- Edge list file format ----------------------------------------------------


def test_parse_format_round_trip():
    g = gf.Graph(4, ((0, 1, 1.5), (1, 2, 1.0), (2, 3, 1.0 / 3.0)))
    text = gf.format_graph(g)
    g2, signal = gf.parse_graph(text)
    assert signal is None
    assert g2.n == g.n
    assert g2.edges == g.edges


def test_parse_graph_with_signal_block():
    text = "0 1 1.0\n1 2 2.0\n%signal\n0 0.5\n1 -1.5\n2 2.5\n"
    g, signal = gf.parse_graph(text)
    assert g.n == 3
    np.testing.assert_allclose(signal, [0.5, -1.5, 2.5])


def test_format_graph_with_signal_round_trip():
    g = gf.Graph(3, ((0, 1, 1.0), (1, 2, 1.0)))
    sig = np.array([0.1, 0.2, 0.3])
    g2, sig2 = gf.parse_graph(gf.format_graph(g, sig))
    np.testing.assert_array_equal(sig2, sig)
    assert g2.edges == g.edges


def test_parse_graph_ignores_comments_and_merges_duplicates():
    text = "# a comment\n0 1 1.0\n# another\n1 0 1.0\n1 2 1.0\n"
    g, _ = gf.parse_graph(text)
    assert len(g.edges) == 2


def test_parse_graph_rejects_conflicting_duplicate():
    text = "0 1 1.0\n1 0 2.0\n1 2 1.0\n"
    with pytest.raises(InputError):
        gf.parse_graph(text)


def test_parse_graph_default_weight_is_one():
    g, _ = gf.parse_graph("0 1\n1 2\n")
    assert g.edges == ((0, 1, 1.0), (1, 2, 1.0))


def test_parse_graph_rejects_malformed_line():
    with pytest.raises(InputError):
        gf.parse_graph("0\n")
    with pytest.raises(InputError):
        gf.parse_graph("0 one 1.0\n")
    with pytest.raises(InputError):
        gf.parse_graph("0 1 2 3\n")


def test_parse_graph_rejects_empty():
    with pytest.raises(InputError):
        gf.parse_graph("")


def test_read_write_graph_file(tmp_path):
    g = gf.generate("random_geometric", 12, seed=2)
    path = tmp_path / "g.txt"
    gf.write_graph_file(str(path), g)
    g2, _ = gf.read_graph_file(str(path))
    assert g2.n == g.n
    for (i, j, w), (i2, j2, w2) in zip(g.edges, g2.edges):
        assert (i, j) == (i2, j2)
        assert w == pytest.approx(w2, rel=0, abs=0)  # %.17g round-trips exactly


def test_as_signal_validates_length():
    with pytest.raises(InputError):
        as_signal([1.0, 2.0], 3)
    out = as_signal([1, 2, 3], 3)
    assert out.dtype == float
