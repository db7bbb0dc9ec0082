import numpy as np
import pytest

from conftest import pseudo_inverse_solution
from src.agg import AggregateAssignment, affinity, aggregation_stage, compute_affinities
from src.components import connected_components
from src.config import SetupOptions, SolveOptions
from src.cycle import orthogonalize_zero_modes, recombine, solve
from src.elim import eliminate, elim_correct, elim_restrict
from src.grids import generate_grid, generate_random_graph
from src.hierarchy import build_hierarchy
from src.laplacian import EdgeList, build_laplacian
from src.relax import generate_test_vectors

TIGHT = SolveOptions(tolerance=1e-10)


def a_norm(A, x):
    return float(np.sqrt(max(x @ (A @ x), 0.0)))


def st_rhs(n):
    b = np.zeros(n)
    b[0], b[-1] = 1.0, -1.0
    return b


def with_negative_edges(L, rng, count=2):
    """Add negative edges between non-adjacent pairs, each scaled to a quarter of the inverse resistance."""
    A = L.todense()
    pinv = np.linalg.pinv(A)
    edges = L.edges().as_tuples()
    present = {(u, v) for u, v, _ in edges}
    added = 0
    while added < count:
        u, v = sorted(rng.choice(L.n, size=2, replace=False))
        if (u, v) in present:
            continue
        d = np.zeros(L.n)
        d[u], d[v] = 1.0, -1.0
        resistance = d @ pinv @ d
        edges.append((int(u), int(v), -0.25 / resistance))
        present.add((u, v))
        added += 1
    return build_laplacian(EdgeList.from_tuples(L.n, edges))


def check_against_oracle(L, b):
    h = build_hierarchy(L)
    x, report = solve(h, b, options=TIGHT)
    assert report.converged
    A = L.todense()
    expected = pseudo_inverse_solution(A, b, h.components)
    assert a_norm(A, x - expected) <= 1e-6 * a_norm(A, expected)


@pytest.mark.parametrize('seed', range(30))
def test_matches_pseudo_inverse_on_random_graphs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 61))
    L = generate_random_graph('connected', n, seed=seed, weighted=True)
    b = rng.uniform(-1, 1, n)
    check_against_oracle(L, b - b.mean())


@pytest.mark.parametrize('seed', range(10))
def test_matches_pseudo_inverse_with_negative_weights(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(20, 61))
    L = with_negative_edges(generate_random_graph('connected', n, seed=100 + seed, weighted=True), rng)
    assert L.W.data.min() < 0
    assert np.linalg.eigvalsh(L.todense()).min() > -1e-10
    b = rng.uniform(-1, 1, n)
    check_against_oracle(L, b - b.mean())


@pytest.mark.parametrize('seed', range(30))
def test_elimination_is_exact(seed):
    rng = np.random.default_rng(seed)
    L = generate_random_graph('erdos', int(rng.integers(20, 61)), seed=seed, average_degree=2.5)
    reduced, transfer, _ = eliminate(L)
    labels, count = connected_components(L)
    b = rng.uniform(-1, 1, L.n)
    b -= (np.bincount(labels, weights=b, minlength=count) / np.bincount(labels, minlength=count))[labels]
    x_c = np.linalg.lstsq(reduced.todense(), elim_restrict(transfer, b), rcond=None)[0]
    x = elim_correct(transfer, x_c, b)
    assert np.abs(b - L.A @ x).max() <= 1e-10 * np.abs(b).max()


@pytest.mark.parametrize('seed', range(20))
def test_components_match_search_on_fragmented_graphs(seed):
    L = generate_random_graph('erdos', 40 + 5 * seed, seed=seed, average_degree=1.3)
    h = build_hierarchy(L, SetupOptions(coarsest_size=8))
    labels, count = connected_components(L)
    assert h.n_components == count
    np.testing.assert_array_equal(h.components, labels)


def test_affinity_properties():
    rng = np.random.default_rng(0)
    for _ in range(200):
        x, y = rng.normal(size=6), rng.normal(size=6)
        c = affinity(x, y)
        assert 0.0 <= c <= 1.0 + 1e-12
        assert c == pytest.approx(affinity(y, x), abs=1e-12)
        assert affinity(3.5 * x, -0.2 * y) == pytest.approx(c, abs=1e-12)
        assert affinity(x, x) == pytest.approx(1.0, abs=1e-12)


def test_assignments_have_no_chains():
    for seed in range(20):
        L = generate_random_graph('connected', 150, seed=seed, weighted=True)
        tvs = generate_test_vectors(L, 8, 3, seed=seed)
        X = tvs.X.copy()
        assignment = AggregateAssignment.initial(L.n)
        amap = compute_affinities(L, X)
        aggregation_stage(assignment, L, amap, X, 0.9)
        aggregation_stage(assignment, L, amap, X, 0.54)
        assert assignment.is_legal()


def test_recombination_and_constraints_randomized():
    rng = np.random.default_rng(1)
    L = generate_grid('fivepoint', 10, 10)
    labels = np.zeros(L.n, dtype=np.int64)
    for _ in range(200):
        b = rng.uniform(-1, 1, L.n)
        b -= b.mean()
        x = rng.uniform(-1, 1, L.n)
        saved = [rng.uniform(-1, 1, L.n) for _ in range(int(rng.integers(1, 3)))]
        y = recombine(L, b, x, saved)
        assert np.linalg.norm(b - L.A @ y) <= np.linalg.norm(b - L.A @ x) + 1e-12
        target = np.array([rng.normal()])
        orthogonalize_zero_modes(y, labels, target)
        assert y.sum() == pytest.approx(target[0], abs=1e-10)


def test_setup_and_solve_deterministic():
    L = generate_random_graph('powerlaw', 1500, seed=4)
    first, second = build_hierarchy(L), build_hierarchy(L)
    assert [lv.A.m for lv in first.levels] == [lv.A.m for lv in second.levels]
    _, r1 = solve(first, st_rhs(L.n))
    _, r2 = solve(second, st_rhs(L.n))
    assert r1.residual_history == r2.residual_history


def test_coarse_operator_energy_identity():
    L = generate_grid('fivepoint', 40, 40)
    h = build_hierarchy(L)
    rng = np.random.default_rng(2)
    for fine, coarse in zip(h.levels, h.levels[1:]):
        if coarse.kind != 'agg':
            continue
        y = rng.uniform(-1, 1, coarse.A.n)
        Py = coarse.transfer.P @ y
        assert y @ (coarse.A.A @ y) == pytest.approx(Py @ (fine.A.A @ Py), rel=1e-10)
        assert coarse.A.m <= fine.A.m


def test_poisson_64_convergence():
    L = generate_grid('fivepoint', 64, 64)
    h = build_hierarchy(L)
    _, flat = solve(h, st_rhs(L.n), options=SolveOptions(correction='flat'))
    _, adaptive = solve(h, st_rhs(L.n), options=SolveOptions(correction='adaptive'))
    assert flat.converged and flat.cycles <= 25
    assert flat.acf <= 0.40
    assert adaptive.converged
    assert adaptive.acf <= 0.25


@pytest.mark.parametrize('kind', ['anisorot-agnostic', 'anisorot-misaligned', 'stretched-fe', 'biharmonic'])
def test_negative_weight_grids_converge_at_48(kind):
    L = generate_grid(kind, 48, 48)
    _, report = solve(build_hierarchy(L), st_rhs(L.n), options=SolveOptions(correction='adaptive'))
    assert not report.diverged
    assert report.converged
    assert report.acf <= 0.85


@pytest.mark.slow
def test_poisson_128_convergence():
    L = generate_grid('fivepoint', 128, 128)
    h = build_hierarchy(L)
    _, flat = solve(h, st_rhs(L.n), options=SolveOptions(correction='flat'))
    _, adaptive = solve(h, st_rhs(L.n), options=SolveOptions(correction='adaptive'))
    assert flat.converged and flat.cycles <= 25
    assert flat.acf <= 0.40
    assert adaptive.acf <= 0.25


@pytest.mark.slow
def test_poisson_mesh_independence():
    acfs = []
    for size in (64, 128, 256):
        L = generate_grid('fivepoint', size, size)
        _, report = solve(build_hierarchy(L), st_rhs(L.n), options=SolveOptions(correction='flat'))
        acfs.append(report.acf)
    assert max(acfs) - min(acfs) <= 0.15


@pytest.mark.slow
@pytest.mark.parametrize('kind', ['anisorot-agnostic', 'anisorot-misaligned', 'stretched-fe', 'biharmonic'])
def test_negative_weight_grids_converge(kind):
    L = generate_grid(kind, 128, 128)
    _, report = solve(build_hierarchy(L), st_rhs(L.n), options=SolveOptions(correction='adaptive'))
    assert report.converged
    assert report.acf <= 0.85


@pytest.mark.slow
@pytest.mark.parametrize('L', [
    pytest.param(lambda: generate_grid('fivepoint', 128, 128), id='poisson-128'),
    pytest.param(lambda: generate_random_graph('powerlaw', 20000, seed=1), id='powerlaw-20000'),
])
def test_hierarchy_storage(L):
    h = build_hierarchy(L())
    assert h.edge_complexity() <= 4.0


@pytest.mark.slow
def test_time_per_edge_is_flat():
    # Compile the kernels before timing
    solve(build_hierarchy(generate_grid('fivepoint', 16, 16)), st_rhs(256))
    per_edge = []
    for size in (64, 128, 256, 512):
        L = generate_grid('fivepoint', size, size)
        h = build_hierarchy(L)
        _, report = solve(h, st_rhs(L.n), options=SolveOptions(correction='adaptive'))
        per_edge.append(h.setup_time / L.m + 10 * report.t_solve_per_edge_per_figure)
    assert max(per_edge) <= 2.5 * min(per_edge)
