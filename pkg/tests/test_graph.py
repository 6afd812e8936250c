import numpy as np
import pytest

from hodlrkit import (
    BlockGraphView,
    EmptySelectionError,
    SparsePattern,
    boundary_vertices,
    distance_index,
    select_by_depth,
)


def path_graph(n):
    edges = [(i, i + 1) for i in range(n - 1)]
    rows, cols = zip(*edges)
    return SparsePattern.from_edges(n, rows, cols)


def grid5x5():
    """5x5 grid, vertex id = col * 5 + row; grid-column c holds ids 5c..5c+4."""
    rows, cols = [], []
    for c in range(5):
        for r in range(5):
            v = c * 5 + r
            if r + 1 < 5:
                rows.append(v)
                cols.append(v + 1)
            if c + 1 < 5:
                rows.append(v)
                cols.append(v + 5)
    return SparsePattern.from_edges(25, rows, cols)


def test_pattern_is_symmetric_sorted_unique():
    p = SparsePattern.from_edges(4, [0, 2, 0], [1, 1, 1])
    for v in range(4):
        nbrs = p.neighbors(v)
        assert np.all(np.diff(nbrs) > 0)
        for u in nbrs:
            assert v in p.neighbors(int(u))
    assert list(p.neighbors(1)) == [0, 2]


def test_pattern_drops_self_loops():
    p = SparsePattern.from_edges(3, [0, 1], [0, 2], values=[5.0, -1.0])
    assert p.degree(0) == 0
    assert p.diagonal[0] == 5.0


def test_boundary_single_crossing_edge():
    p = path_graph(4)
    view = BlockGraphView(p, [0, 1], [2, 3])
    assert list(boundary_vertices(view, "row")) == [1]
    assert list(boundary_vertices(view, "col")) == [2]


def test_boundary_disconnected_components():
    p = SparsePattern.from_edges(4, [0, 2], [1, 3])
    view = BlockGraphView(p, [0, 1], [2, 3])
    assert boundary_vertices(view, "row").size == 0
    assert boundary_vertices(view, "col").size == 0


def test_boundary_grid_split():
    # left two grid-columns vs right three: the crossing edges all touch column 1
    view = BlockGraphView(grid5x5(), np.arange(10), np.arange(10, 25))
    assert list(boundary_vertices(view, "row")) == [5, 6, 7, 8, 9]
    assert list(boundary_vertices(view, "col")) == [10, 11, 12, 13, 14]


def test_distance_path():
    p = path_graph(5)
    view = BlockGraphView(p, [0, 1, 2], [3, 4])
    d = distance_index(view, "row")
    assert list(d) == [2.0, 1.0, 0.0]


def test_distance_empty_boundary_is_unreachable():
    p = SparsePattern.from_edges(4, [0, 2], [1, 3])
    view = BlockGraphView(p, [0, 1], [2, 3])
    assert np.all(np.isinf(distance_index(view, "row")))


def test_distance_grid_layers():
    view = BlockGraphView(grid5x5(), np.arange(10), np.arange(10, 25))
    d = distance_index(view, "row")
    assert np.all(d[:5] == 1.0)   # grid-column 0
    assert np.all(d[5:] == 0.0)   # grid-column 1


def test_select_depth_zero_on_path():
    p = path_graph(5)
    view = BlockGraphView(p, [0, 1, 2], [3, 4])
    row_sel, col_sel = select_by_depth(view, 0)
    assert list(row_sel) == [2]
    assert list(col_sel) == [0]  # position of vertex 3 in the column list


def test_select_exhaustive_depth():
    p = path_graph(5)
    view = BlockGraphView(p, [0, 1, 2], [3, 4])
    row_sel, col_sel = select_by_depth(view, 10)
    assert list(row_sel) == [2, 1, 0]  # layer order: d=0, d=1, d=2
    assert list(col_sel) == [0, 1]


def test_select_grid_depth_one():
    view = BlockGraphView(grid5x5(), np.arange(10), np.arange(10, 25))
    row_sel, _ = select_by_depth(view, 1)
    assert row_sel.size == 10
    assert list(row_sel[:5]) == [5, 6, 7, 8, 9]   # boundary layer first
    assert list(row_sel[5:]) == [0, 1, 2, 3, 4]


def test_select_empty_raises():
    p = SparsePattern.from_edges(4, [0, 2], [1, 3])
    view = BlockGraphView(p, [0, 1], [2, 3])
    with pytest.raises(EmptySelectionError):
        select_by_depth(view, 3)


def test_select_monotone_in_depth(rng):
    p, view = random_view(rng, 60)
    prev = set()
    for depth in range(5):
        try:
            row_sel, _ = select_by_depth(view, depth)
        except EmptySelectionError:
            continue
        cur = set(int(i) for i in row_sel)
        assert prev <= cur
        prev = cur


def test_select_deterministic(rng):
    _, view = random_view(rng, 80)
    a = select_by_depth(view, 2)
    b = select_by_depth(view, 2)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def random_view(rng, n, p_edge=0.05):
    mask = rng.random((n, n)) < p_edge
    rows, cols = np.nonzero(np.triu(mask, 1))
    pattern = SparsePattern.from_edges(n, rows, cols)
    perm = rng.permutation(n)
    half = n // 2
    return pattern, BlockGraphView(pattern, perm[:half], perm[half:])


def brute_force_distance(pattern, side_verts, other_verts):
    """Floyd-Warshall on the induced side subgraph, then min over boundary."""
    side_verts = np.asarray(side_verts)
    k = side_verts.size
    pos = {int(v): i for i, v in enumerate(side_verts)}
    other = set(int(v) for v in other_verts)
    dist = np.full((k, k), np.inf)
    np.fill_diagonal(dist, 0.0)
    boundary = []
    for i, v in enumerate(side_verts):
        crosses = False
        for u in pattern.neighbors(int(v)):
            if int(u) in pos:
                dist[i, pos[int(u)]] = 1.0
            if int(u) in other:
                crosses = True
        if crosses:
            boundary.append(i)
    for t in range(k):
        dist = np.minimum(dist, dist[:, [t]] + dist[[t], :])
    if not boundary:
        return np.full(k, np.inf)
    return dist[:, boundary].min(axis=1)


def test_bfs_matches_brute_force(rng):
    for _ in range(10):
        n = int(rng.integers(10, 120))
        pattern, view = random_view(rng, n, p_edge=3.0 / n)
        for side in ("row", "col"):
            got = distance_index(view, side)
            want = brute_force_distance(pattern, view.side(side), view.other(side))
            assert np.array_equal(got, want)


def test_distance_lipschitz_along_edges(rng):
    pattern, view = random_view(rng, 100, p_edge=0.04)
    d = distance_index(view, "row")
    pos = {int(v): i for i, v in enumerate(view.row_verts)}
    for v in view.row_verts:
        for u in pattern.neighbors(int(v)):
            if int(u) in pos:
                a, b = d[pos[int(v)]], d[pos[int(u)]]
                if np.isfinite(a) and np.isfinite(b):
                    assert abs(a - b) <= 1.0


def test_view_rejects_overlap():
    p = path_graph(4)
    with pytest.raises(ValueError):
        BlockGraphView(p, [0, 1], [1, 2])
