from collections import Counter
from math import log2

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagexplain.proxy import DecisionTree, gain_ratio, grow_tree, train_c45


def _entropy(labels):
    n = len(labels)
    return -sum(c / n * log2(c / n) for c in Counter(labels).values()) if n else 0.0


def brute_gain_ratio(X, y, f, thr):
    left = [lab for row, lab in zip(X, y) if row[f] <= thr]
    right = [lab for row, lab in zip(X, y) if row[f] > thr]
    if not left or not right:
        return 0.0
    n = len(y)
    gain = _entropy(list(y)) - len(left) / n * _entropy(left) - len(right) / n * _entropy(right)
    split_info = _entropy(["l"] * len(left) + ["r"] * len(right))
    return max(gain, 0.0) / split_info


small_data = st.integers(1, 20).flatmap(
    lambda n: st.tuples(
        st.lists(st.lists(st.integers(0, 4), min_size=3, max_size=3), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
    )
)


@settings(max_examples=300, deadline=None)
@given(small_data)
def test_gain_ratio_matches_brute_force(data):
    X, y = data
    Xa = np.array(X, dtype=float)
    for f in range(3):
        for thr in sorted({row[f] for row in X}) + [-1.0]:
            got = gain_ratio(Xa, y, f, thr)
            assert abs(got - brute_gain_ratio(X, y, f, thr)) <= 1e-9
            assert 0.0 <= got <= 1.0 + 1e-12


def test_gain_ratio_perfect_boolean_split():
    X = np.array([[1.0], [1.0], [0.0], [0.0]])
    assert gain_ratio(X, [1, 1, 0, 0], 0, 0.5) == pytest.approx(1.0, abs=1e-12)


def test_gain_ratio_constant_feature():
    X = np.full((6, 1), 3.0)
    assert gain_ratio(X, [1, 0, 1, 0, 1, 1], 0, 3.0) == 0.0


def test_gain_ratio_pure_dataset():
    X = np.arange(5, dtype=float).reshape(-1, 1)
    assert gain_ratio(X, [1] * 5, 0, 2.0) == 0.0


def test_gain_ratio_empty_dataset():
    with pytest.raises(ValueError):
        gain_ratio(np.zeros((0, 2)), [], 0, 0.0)


def _rows_at(tree, X):
    """Training row indices reaching each node."""
    out = {0: np.arange(len(X))}
    for i, node in enumerate(tree.nodes):
        if node.is_leaf or i not in out:
            continue
        rows = out[i]
        left = X[rows, node.feature] <= node.threshold
        out[node.left] = rows[left]
        out[node.right] = rows[~left]
    return out


@settings(max_examples=150, deadline=None)
@given(small_data)
def test_split_optimality_and_stored_gain(data):
    X, y = data
    Xa = np.array(X, dtype=float)
    ya = np.array(y)
    tree = grow_tree(Xa, ya, lam=0.0, max_depth=4)
    for i, rows in _rows_at(tree, Xa).items():
        node = tree.nodes[i]
        assert node.counts == (int((ya[rows] == 0).sum()), int((ya[rows] == 1).sum()))
        if node.is_leaf:
            continue
        Xs, ys = Xa[rows], ya[rows]
        assert abs(node.gain_ratio - gain_ratio(Xs, ys, node.feature, node.threshold)) <= 1e-12
        best = max(
            brute_gain_ratio(Xs.tolist(), ys.tolist(), f, v) for f in range(3) for v in set(Xs[:, f])
        )
        assert node.gain_ratio >= best - 1e-12


def test_midpoint_threshold():
    X = np.array([[1.0], [2.0], [4.0], [8.0]])
    tree = train_c45(X, [0, 0, 1, 1], lam=0.5)
    assert tree.root.feature == 0 and tree.root.threshold == 3.0
    assert tree.predict(X).tolist() == [0, 0, 1, 1]


def test_high_lambda_gives_single_leaf(pipeline_result):
    from dagexplain.features import to_arrays

    X, y, _, _ = to_arrays(pipeline_result.datasets[0])
    tree = train_c45(X, y, lam=0.99)
    assert len(tree.nodes) == 1 and tree.root.is_leaf


def test_single_class_single_leaf():
    X = np.random.default_rng(0).random((30, 7))
    tree = train_c45(X, np.zeros(30, dtype=int))
    assert len(tree.nodes) == 1
    assert tree.predict(X).tolist() == [0] * 30


def test_lambda_bounds():
    X = np.zeros((2, 1))
    with pytest.raises(ValueError):
        train_c45(X, [0, 1], lam=1.0)
    with pytest.raises(ValueError):
        train_c45(X, [0, 1], lam=-0.1)


def test_max_depth_respected():
    rng = np.random.default_rng(1)
    X = rng.random((300, 5))
    y = (rng.random(300) < 0.5).astype(int)
    for depth in (0, 1, 3):
        assert grow_tree(X, y, max_depth=depth).depth <= depth


def test_leaf_tie_predicts_positive():
    X = np.zeros((2, 1))
    tree = train_c45(X, [0, 1])
    assert tree.root.counts == (1, 1) and tree.predict(X).tolist() == [1, 1]


def test_branch_conditions_and_round_trip():
    rng = np.random.default_rng(5)
    X = rng.integers(0, 5, (80, 3)).astype(float)
    y = ((X[:, 0] > 2) ^ (X[:, 1] > 3)).astype(int)
    tree = grow_tree(X, y, lam=0.0, max_depth=3)
    back = DecisionTree.from_dict(tree.to_dict())
    assert back.to_dict() == tree.to_dict()
    assert (back.predict(X) == tree.predict(X)).all()
    for leaf in tree.leaves():
        conds = tree.branch_conditions(leaf)
        assert len(conds) == tree.nodes[leaf].depth
    for x, leaf in zip(X, tree.apply(X)):
        assert tree.path(x)[-1] == leaf
