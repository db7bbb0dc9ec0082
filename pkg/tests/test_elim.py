import numpy as np
import pytest

from src.elim import eliminate, elim_correct, elim_restrict, select_low_degree
from src.errors import LaplacianError
from src.grids import generate_grid, generate_random_graph
from src.laplacian import EdgeList, build_laplacian


def star(leaves):
    return build_laplacian(EdgeList.from_tuples(leaves + 1, [(0, k, 1.0) for k in range(1, leaves + 1)]))


def test_low_degree_set_is_independent():
    L = generate_random_graph('erdos', 300, seed=11, average_degree=3.0)
    f = select_low_degree(L)
    assert f.size > 0
    assert np.all((L.degree[f] >= 1) & (L.degree[f] <= 4))
    assert L.W[f][:, f].nnz == 0


def test_low_degree_greedy_order():
    path = generate_grid('path', 6)
    # Ascending greedy: 0 taken, 1 blocked, 2 taken, ...
    assert list(select_low_degree(path)) == [0, 2, 4]


def test_schur_complement_of_path():
    reduced, transfer, eliminated = eliminate(generate_grid('path', 3), max_stages=1)
    assert eliminated
    # Nodes 0 and 2 removed, node 1 left alone
    assert reduced.n == 1
    assert list(transfer.c_nodes) == [1]


def test_star_leaves_eliminated():
    reduced, transfer, eliminated = eliminate(star(6), max_stages=1)
    assert eliminated
    assert list(transfer.c_nodes) == [0]
    assert reduced.m == 0


def test_schur_complement_matches_dense():
    L = generate_random_graph('connected', 120, seed=8, average_degree=2.5, weighted=True)
    reduced, transfer, eliminated = eliminate(L, max_stages=1)
    assert eliminated
    A = L.todense()
    c = transfer.c_nodes
    f = np.setdiff1d(np.arange(L.n), c)
    S = A[np.ix_(c, c)] - A[np.ix_(c, f)] @ np.linalg.solve(A[np.ix_(f, f)], A[np.ix_(f, c)])
    np.testing.assert_allclose(reduced.todense(), S, atol=1e-12)


def test_reduced_system_is_exact():
    L = generate_random_graph('connected', 200, seed=6, average_degree=2.5)
    reduced, transfer, eliminated = eliminate(L)
    assert eliminated
    b = np.zeros(L.n)
    b[0], b[-1] = 1.0, -1.0
    b_c = elim_restrict(transfer, b)
    x_c = np.linalg.lstsq(reduced.todense(), b_c, rcond=None)[0]
    x = elim_correct(transfer, x_c, b)
    np.testing.assert_allclose(L.A @ x, b, atol=1e-9)


def test_isolated_nodes_form_z_set():
    L = build_laplacian(EdgeList.from_tuples(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]))
    reduced, transfer, _ = eliminate(L, max_stages=1)
    stage = transfer.stages[0]
    assert list(stage.z_set) == [3, 4]
    assert 3 not in transfer.c_nodes and 4 not in transfer.c_nodes


def test_grid_checkerboard_eliminated():
    L = generate_grid('fivepoint', 16, 16)
    reduced, transfer, eliminated = eliminate(L, max_stages=1)
    assert eliminated
    assert reduced.n == 128
    i, j = transfer.c_nodes % 16, transfer.c_nodes // 16
    assert np.all((i + j) % 2 == 1)


def test_stage_skipped_when_too_few_candidates():
    L = generate_grid('biharmonic', 12, 12)
    reduced, transfer, eliminated = eliminate(L)
    assert not eliminated
    assert reduced is L
    assert transfer.n_fine == transfer.n_coarse == L.n


def test_restrict_checks_length():
    _, transfer, _ = eliminate(star(3))
    with pytest.raises(LaplacianError):
        elim_restrict(transfer, np.zeros(2))
    with pytest.raises(LaplacianError):
        elim_correct(transfer, np.zeros(5), np.zeros(4))


@pytest.mark.parametrize('second_weight, expected', [(0.5, True), (-0.95, False)])
def test_cancelling_pivot_not_eliminated(second_weight, expected):
    # Node 6 hangs off a complete graph; with -0.95 its diagonal is 0.05 against |w| sum 1.95
    edges = [(u, v, 1.0) for u in range(6) for v in range(u + 1, 6)]
    edges += [(6, 0, 1.0), (6, 1, second_weight)]
    L = build_laplacian(EdgeList.from_tuples(7, edges))
    reduced, transfer, eliminated = eliminate(L)
    assert eliminated is expected
    assert (6 in transfer.c_nodes) is not expected
