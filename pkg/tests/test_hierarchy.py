import numpy as np
import pytest

from src.config import SetupOptions
from src.errors import SingularCoarsestError
from src.grids import generate_grid, generate_random_graph
from src.hierarchy import (AGG, DIRECT, ELIM, FINEST, RELAX, Level, assign_cycle_params, augmented_matrix,
                           build_hierarchy, factor_augmented)
from src.laplacian import EdgeList, build_laplacian


@pytest.fixture(scope='module')
def grid_hierarchy():
    return build_hierarchy(generate_grid('fivepoint', 64, 64))


def test_levels_shrink(grid_hierarchy):
    h = grid_hierarchy
    assert h.levels[0].kind == FINEST
    assert h.num_levels >= 3
    sizes = [level.A.n for level in h.levels]
    assert all(a > b for a, b in zip(sizes, sizes[1:]))
    assert sizes[-1] <= 150 or h.coarsest_solver == RELAX


def test_grid_starts_with_elimination(grid_hierarchy):
    assert grid_hierarchy.levels[1].kind == ELIM
    assert any(level.kind == AGG for level in grid_hierarchy.levels)


def test_no_consecutive_elimination_levels(grid_hierarchy):
    kinds = [level.kind for level in grid_hierarchy.levels]
    assert all(not (a == ELIM and b == ELIM) for a, b in zip(kinds, kinds[1:]))


def test_coarse_levels_are_laplacians(grid_hierarchy):
    for level in grid_hierarchy.levels:
        assert level.A.row_sum_defect() < 1e-10
        assert abs(level.A.A - level.A.A.T).max() < 1e-10


def test_cycle_parameters(grid_hierarchy):
    levels = grid_hierarchy.levels
    for level, nxt in zip(levels, levels[1:]):
        if nxt.kind == ELIM:
            assert (level.gamma, level.nu_pre, level.nu_post) == (1.0, 0, 0)
        else:
            assert 1.0 <= level.gamma <= 2.0
            assert (level.nu_pre, level.nu_post) == (1, 2)
    assert levels[-1].gamma == 0.0


def test_edge_complexity_and_table(grid_hierarchy):
    h = grid_hierarchy
    assert 1.0 < h.edge_complexity() < 6.0
    table = h.level_table()
    assert [row['level'] for row in table] == list(range(1, h.num_levels + 1))
    assert table[0]['n'] == 64 * 64


def test_setup_is_reproducible():
    L = generate_grid('fivepoint', 24, 24)
    first = build_hierarchy(L, SetupOptions(seed=3))
    second = build_hierarchy(L, SetupOptions(seed=3))
    assert [lv.A.n for lv in first.levels] == [lv.A.n for lv in second.levels]
    for a, b in zip(first.levels[1:], second.levels[1:]):
        if a.kind == AGG:
            np.testing.assert_array_equal(a.transfer.seed_of, b.transfer.seed_of)


def test_small_graph_is_single_level():
    h = build_hierarchy(generate_grid('path', 2))
    assert h.num_levels == 1
    assert h.n_components == 1


def test_fast_relaxation_stops_setup():
    # Complete graph: one sweep already removes almost all error
    n = 200
    edges = [(u, v, 1.0) for u in range(n) for v in range(u + 1, n)]
    h = build_hierarchy(build_laplacian(EdgeList.from_tuples(n, edges)))
    assert h.num_levels == 1
    assert h.coarsest_solver == RELAX


def test_direct_coarsest_solver_factorized(grid_hierarchy):
    h = grid_hierarchy
    if h.coarsest_solver == DIRECT:
        assert h.coarsest_lu is not None
        assert h.levels[-1].A.n <= 150


def test_zero_modes(three_blocks):
    h = build_hierarchy(three_blocks, SetupOptions(coarsest_size=30))
    U = h.zero_modes.toarray()
    assert U.shape == (three_blocks.n, 3)
    np.testing.assert_allclose(three_blocks.A @ U, 0.0, atol=1e-12)


def test_augmented_matrix_layout():
    L = build_laplacian(EdgeList.from_tuples(3, [(0, 1, 1.0)]))
    M = augmented_matrix(L, np.array([0, 0, 1]), 2)
    assert M.shape == (5, 5)
    np.testing.assert_array_equal(M[:3, 3:], [[1, 0], [1, 0], [0, 1]])
    np.testing.assert_array_equal(M[3:, 3:], 0.0)


def test_wrong_components_make_coarsest_singular():
    L = build_laplacian(EdgeList.from_tuples(4, [(0, 1, 1.0), (2, 3, 1.0)]))
    with pytest.raises(SingularCoarsestError):
        factor_augmented(L, np.zeros(4, dtype=np.int64), 1)


def test_cycle_index_rules():
    def level(kind, m):
        n = m + 1
        return Level(kind=kind, A=generate_grid('path', n))

    levels = [level(FINEST, 1000), level(AGG, 500), level(AGG, 50), level(AGG, 20)]
    assign_cycle_params(levels, gamma=1.5, guard=0.7)
    assert levels[0].gamma == 1.5
    assert levels[1].gamma == 1.5
    assert levels[2].gamma == pytest.approx(min(2.0, 0.7 * 50 / 20))
    printed = [level(FINEST, 1000), level(AGG, 500), level(AGG, 50), level(AGG, 20)]
    assign_cycle_params(printed, gamma=1.5, guard=0.7, rule='printed')
    assert printed[2].gamma == 1.0


def test_random_graph_hierarchy():
    L = generate_random_graph('powerlaw', 3000, seed=2)
    h = build_hierarchy(L)
    assert h.n_components == 1
    assert h.levels[-1].A.n <= 150 or h.coarsest_solver == RELAX


@pytest.mark.parametrize('kind', ['anisorot-agnostic', 'anisorot-misaligned', 'stretched-fe', 'biharmonic'])
def test_negative_weight_coarsening_keeps_shrinking(kind):
    h = build_hierarchy(generate_grid(kind, 48, 48))
    for level, nxt in zip(h.levels, h.levels[1:]):
        if nxt.kind == AGG:
            assert nxt.A.n <= 0.7 * level.A.n
    assert h.num_levels <= 16
    assert h.levels[-1].A.n <= 150 or h.coarsest_solver == RELAX
