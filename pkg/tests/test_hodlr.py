import numpy as np
import pytest

from conftest import cached_front
from hodlrkit import (
    BlockAccessor,
    CompressionConfig,
    DimensionMismatchError,
    SingularLeafError,
    SingularSchurError,
    apply,
    build_tree,
    factorize,
    kernel_matrix,
    residual_norm,
    solve,
)


def kernel_accessor(n, shift=5.0, kind="inv-distance"):
    return BlockAccessor.from_matrix(kernel_matrix(n, kind, shift=shift))


def test_tree_single_leaf():
    tree = build_tree(8, 8)
    assert len(tree.nodes) == 1
    assert tree.nodes[0].is_leaf


def test_tree_power_of_two():
    tree = build_tree(8, 2)
    assert len(tree.nodes) == 7
    leaves = [n for n in tree.nodes if n.is_leaf]
    assert all(n.size == 2 for n in leaves)
    assert tree.depth == 2


def test_tree_halving_rule():
    tree = build_tree(100, 30)
    root = tree.nodes[0]
    left, right = tree.nodes[root.left], tree.nodes[root.right]
    assert (left.size, right.size) == (50, 50)
    assert all(n.size <= 30 for n in tree.nodes if n.is_leaf)
    assert {tree.nodes[left.left].size, tree.nodes[left.right].size} == {25}


def test_tree_odd_split_puts_smaller_child_last():
    tree = build_tree(7, 3)
    root = tree.nodes[0]
    assert tree.nodes[root.left].size == 4
    assert tree.nodes[root.right].size == 3


def test_tree_children_partition_contiguously():
    tree = build_tree(97, 10)
    for node in tree.nodes:
        if node.is_leaf:
            continue
        left, right = tree.nodes[node.left], tree.nodes[node.right]
        assert (left.lo, right.hi) == (node.lo, node.hi)
        assert left.hi == right.lo
        assert abs(left.size - right.size) <= 1


def test_block_diagonal_front_has_rank_zero(rng):
    blocks = [rng.standard_normal((16, 16)) + 16 * np.eye(16) for _ in range(4)]
    a = np.zeros((64, 64))
    for k, blk in enumerate(blocks):
        a[16 * k:16 * (k + 1), 16 * k:16 * (k + 1)] = blk
    acc = BlockAccessor.from_matrix(a)
    fact, report = factorize(acc, build_tree(64, 16), CompressionConfig(scheme="svd", tol=1e-10))
    assert all(entry["max_rank"] == 0 for entry in report.ranks_per_level)
    b = rng.standard_normal((64, 2))
    x = solve(fact, b)
    want = np.vstack([np.linalg.solve(blk, b[16 * k:16 * (k + 1)])
                      for k, blk in enumerate(blocks)])
    assert np.linalg.norm(x - want) <= 1e-12 * np.linalg.norm(want)


def test_shifted_kernel_solve_residual(rng):
    n = 64
    a = np.eye(n) + 0.1 * kernel_matrix(n, "inv-distance")
    acc = BlockAccessor.from_matrix(a)
    fact, _ = factorize(acc, build_tree(n, 16), CompressionConfig(scheme="svd", tol=1e-12))
    b = rng.standard_normal((n, 1))
    x = solve(fact, b)
    assert residual_norm(acc, x, b) <= 1e-10


def test_bdlr_parameter_regimes_factorize():
    problem = cached_front((12, 12, 12), 0, 6)
    acc = problem.accessor()
    tree = build_tree(problem.n, 32)
    for tol, depth in ((1e-1, 1), (1e-3, 3), (1e-5, 5)):
        fact, _ = factorize(acc, tree, CompressionConfig(scheme="bdlr", tol=tol, depth=depth))
        x = solve(fact, problem.rhs)
        assert np.all(np.isfinite(x))


def test_identity_solve(rng):
    acc = BlockAccessor.from_matrix(np.eye(40))
    fact, _ = factorize(acc, build_tree(40, 8), CompressionConfig(scheme="svd", tol=1e-10))
    b = rng.standard_normal((40, 3))
    assert np.allclose(solve(fact, b), b, atol=1e-13)


def test_solve_matches_dense_lu(rng):
    n = 256
    acc = kernel_accessor(n)
    fact, _ = factorize(acc, build_tree(n, 64), CompressionConfig(scheme="svd", tol=1e-12))
    b = rng.standard_normal((n, 2))
    x = solve(fact, b)
    want = np.linalg.solve(acc.materialize(), b)
    assert np.linalg.norm(x - want) <= 1e-9 * np.linalg.norm(want)


def test_solve_vector_and_matrix_rhs(rng):
    n = 48
    acc = kernel_accessor(n)
    fact, _ = factorize(acc, build_tree(n, 16), CompressionConfig(scheme="svd", tol=1e-13))
    b = rng.standard_normal(n)
    assert solve(fact, b).shape == (n,)
    assert solve(fact, b[:, None]).shape == (n, 1)


def test_solve_dimension_mismatch(rng):
    acc = kernel_accessor(16)
    fact, _ = factorize(acc, build_tree(16, 8), CompressionConfig(scheme="svd", tol=1e-13))
    with pytest.raises(DimensionMismatchError):
        solve(fact, rng.standard_normal(17))


def test_exact_compression_equivalence(rng):
    for n in (96, 200, 512):
        a = kernel_matrix(n, "exp-decay", shift=3.0)
        a += 0.01 * (lambda e: e + e.T)(rng.standard_normal((n, n)))
        a += n * 0.05 * np.eye(n)
        acc = BlockAccessor.from_matrix(a)
        fact, _ = factorize(acc, build_tree(n, 64), CompressionConfig(scheme="svd", tol=1e-14))
        b = rng.standard_normal(n)
        x = solve(fact, b)
        want = np.linalg.solve(a, b)
        assert np.linalg.norm(x - want) <= 1e-9 * np.linalg.norm(want)


def test_report_residual_matches_dense(rng):
    problem = cached_front((9, 9, 9), 0, 4)
    acc = problem.accessor()
    fact, report = factorize(acc, build_tree(problem.n, 16),
                             CompressionConfig(scheme="bdlr", tol=1e-3, depth=3))
    x = solve(fact, problem.rhs)
    report.residual = residual_norm(acc, x, problem.rhs)
    dense = problem.front
    want = np.linalg.norm(dense @ x - problem.rhs) / np.linalg.norm(problem.rhs)
    assert abs(report.residual - want) <= 1e-13


def test_d_block_columns_match_sibling_rank():
    problem = cached_front((100, 21), 1, 10)
    fact, _ = factorize(problem.accessor(), build_tree(problem.n, 16),
                        CompressionConfig(scheme="svd", tol=1e-8))
    for slot in fact.tree.internal_nodes():
        cpl = fact.couplings[slot]
        assert cpl.d_left.shape[1] == cpl.v_upper.shape[1]
        assert cpl.d_right.shape[1] == cpl.v_lower.shape[1]
        assert cpl.schur_lu.n == cpl.rank_upper + cpl.rank_lower


def test_rank_decay_root_to_leaf():
    problem = cached_front((16, 16, 16), 0, 8)
    _, report = factorize(problem.accessor(), build_tree(problem.n, 16),
                          CompressionConfig(scheme="svd", tol=1e-6))
    maxima = [e["max_rank"] for e in sorted(report.ranks_per_level, key=lambda e: e["level"])]
    pairs = list(zip(maxima, maxima[1:]))
    ok = sum(1 for a, b in pairs if a >= b)
    assert ok >= 0.8 * len(pairs)


def test_threads_give_bit_identical_factors():
    problem = cached_front((100, 21), 1, 10)
    acc = problem.accessor()
    tree = build_tree(problem.n, 16)
    cfg = CompressionConfig(scheme="bdlr", tol=1e-3, depth=3)
    fa, _ = factorize(acc, tree, cfg, threads=1)
    fb, _ = factorize(acc, tree, cfg, threads=4)
    for slot in range(len(tree.nodes)):
        a, b = fa.couplings[slot], fb.couplings[slot]
        assert (a is None) == (b is None)
        if a is not None:
            assert np.array_equal(a.d_left, b.d_left)
            assert np.array_equal(a.d_right, b.d_right)
            assert np.array_equal(a.schur_lu.lu, b.schur_lu.lu)
        la, lb = fa.leaf_lus[slot], fb.leaf_lus[slot]
        assert (la is None) == (lb is None)
        if la is not None:
            assert np.array_equal(la.lu, lb.lu)


def test_singular_leaf_raises():
    a = np.eye(8)
    a[2:4, 2:4] = 0.0  # second leaf block of the left half is singular
    acc = BlockAccessor.from_matrix(a)
    with pytest.raises(SingularLeafError):
        factorize(acc, build_tree(8, 2), CompressionConfig(scheme="svd", tol=1e-12))


def test_singular_schur_raises():
    acc = BlockAccessor.from_matrix(np.ones((2, 2)))
    with pytest.raises(SingularSchurError):
        factorize(acc, build_tree(2, 1), CompressionConfig(scheme="svd", tol=1e-12))


def test_apply_basics(rng):
    a = rng.standard_normal((32, 32))
    acc = BlockAccessor.from_matrix(a)
    assert np.array_equal(apply(BlockAccessor.from_matrix(np.eye(5)), np.ones((5, 2))),
                          np.ones((5, 2)))
    assert np.array_equal(apply(BlockAccessor.from_matrix(np.zeros((4, 4))),
                                np.ones(4)), np.zeros(4))
    e3 = np.zeros(32)
    e3[3] = 1.0
    assert np.array_equal(apply(acc, e3), a[:, 3])
    with pytest.raises(DimensionMismatchError):
        apply(acc, np.ones(31))
