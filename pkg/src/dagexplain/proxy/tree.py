"""Binary decision trees grown greedily by gain ratio (C4.5 style) with a lambda cut-off."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import kernels


@dataclass
class TreeNode:
    counts: tuple[int, int]  # (class 0, class 1) training counts
    depth: int
    feature: int = -1
    threshold: float = float("nan")
    gain_ratio: float = 0.0
    left: int = -1  # x[feature] <= threshold
    right: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    @property
    def prediction(self) -> int:
        # ties go to class 1 (positive / PN)
        return int(self.counts[1] >= self.counts[0])

    @property
    def n(self) -> int:
        return self.counts[0] + self.counts[1]

    @property
    def positive_fraction(self) -> float:
        return self.counts[1] / self.n if self.n else 0.0


@dataclass
class DecisionTree:
    nodes: list[TreeNode]
    n_features: int

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes)

    def leaves(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if n.is_leaf]

    def path(self, x) -> list[int]:
        """Node indices visited from the root to the leaf for one sample."""
        i = 0
        out = [0]
        while not self.nodes[i].is_leaf:
            node = self.nodes[i]
            i = node.left if x[node.feature] <= node.threshold else node.right
            out.append(i)
        return out

    def apply(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        leaf = np.zeros(len(X), dtype=np.int64)
        todo = [(0, np.arange(len(X)))]
        while todo:
            i, rows = todo.pop()
            node = self.nodes[i]
            if node.is_leaf:
                leaf[rows] = i
                continue
            go_left = X[rows, node.feature] <= node.threshold
            todo.append((node.left, rows[go_left]))
            todo.append((node.right, rows[~go_left]))
        return leaf

    def predict(self, X) -> np.ndarray:
        preds = np.array([n.prediction for n in self.nodes], dtype=np.int64)
        return preds[self.apply(X)]

    def branch_conditions(self, leaf: int) -> list[tuple[int, float, bool]]:
        """``(feature, threshold, went_left)`` tests leading to ``leaf``."""
        parent = {}
        for i, n in enumerate(self.nodes):
            if not n.is_leaf:
                parent[n.left] = (i, True)
                parent[n.right] = (i, False)
        conds = []
        while leaf in parent:
            i, went_left = parent[leaf]
            conds.append((self.nodes[i].feature, self.nodes[i].threshold, went_left))
            leaf = i
        return conds[::-1]

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "nodes": [
                {
                    "feature_index": n.feature,
                    "threshold": None if n.is_leaf else n.threshold,
                    "gain_ratio": n.gain_ratio,
                    "children": [n.left, n.right] if not n.is_leaf else [],
                    "leaf_counts": list(n.counts),
                    "depth": n.depth,
                }
                for n in self.nodes
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        nodes = []
        for rec in d["nodes"]:
            children = rec.get("children") or [-1, -1]
            nodes.append(
                TreeNode(
                    counts=tuple(int(c) for c in rec["leaf_counts"]),
                    depth=int(rec["depth"]),
                    feature=int(rec["feature_index"]),
                    threshold=float("nan") if rec["threshold"] is None else float(rec["threshold"]),
                    gain_ratio=float(rec["gain_ratio"]),
                    left=int(children[0]),
                    right=int(children[1]),
                )
            )
        return cls(nodes, int(d["n_features"]))


def gain_ratio(X, y, feature: int, threshold: float) -> float:
    """Gain ratio of splitting ``(X, y)`` on ``X[:, feature] <= threshold``.

    Zero for degenerate splits (one side empty) and for pure datasets.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise ValueError("gain ratio of an empty dataset")
    left = X[:, feature] <= threshold
    l1 = int(y[left].sum())
    r1 = int(y[~left].sum())
    return kernels.gain_ratio_counts(int(left.sum()) - l1, l1, int((~left).sum()) - r1, r1)


def grow_tree(
    X,
    y,
    lam: float = 0.0,
    max_depth: int = 5,
    feature_sampler: Callable[[], np.ndarray] | None = None,
    min_samples_split: int = 2,
    criterion: str = "gain_ratio",
) -> DecisionTree:
    """Greedy top-down induction.

    Splits are chosen by ``criterion`` ("gain_ratio" or "gain").  A node
    becomes a leaf when it is pure, at ``max_depth``, too small, or when its
    best split scores ``<= lam``.  ``feature_sampler`` (random forests)
    returns the candidate feature indices for each node; by default every
    feature is tried.  Each split stores its gain ratio whatever the
    criterion.
    """
    if criterion not in ("gain_ratio", "gain"):
        raise ValueError(f"unknown criterion {criterion!r}")
    use_gr = criterion == "gain_ratio"
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    n_features = X.shape[1]
    all_features = np.arange(n_features, dtype=np.int64)
    nodes: list[TreeNode] = []

    def build(rows: np.ndarray, depth: int) -> int:
        ys = y[rows]
        c1 = int(ys.sum())
        idx = len(nodes)
        nodes.append(TreeNode((len(rows) - c1, c1), depth))
        if c1 == 0 or c1 == len(rows) or depth >= max_depth or len(rows) < min_samples_split:
            return idx
        feats = all_features if feature_sampler is None else feature_sampler()
        f, thr, score = kernels.best_split(X[rows], ys, feats, use_gr)
        if f < 0 or score <= lam:
            return idx
        go_left = X[rows, f] <= thr
        node = nodes[idx]
        node.feature, node.threshold = f, thr
        if use_gr:
            node.gain_ratio = score
        else:
            l1 = int(ys[go_left].sum())
            r1 = c1 - l1
            nl = int(go_left.sum())
            node.gain_ratio = kernels.gain_ratio_counts(nl - l1, l1, len(rows) - nl - r1, r1)
        node.left = build(rows[go_left], depth + 1)
        node.right = build(rows[~go_left], depth + 1)
        return idx

    build(np.arange(len(y)), 0)
    return DecisionTree(nodes, n_features)


def train_c45(X, y, lam: float = 0.5, max_depth: int = 5) -> DecisionTree:
    """Initial approximation tree over the seven job features."""
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda must be in [0, 1), got {lam}")
    if max_depth < 0:
        raise ValueError(f"max_depth must be >= 0, got {max_depth}")
    return grow_tree(X, y, lam=lam, max_depth=max_depth)
