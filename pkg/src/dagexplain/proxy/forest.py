"""Small random forest over concatenated job pairs, with per-tree decision paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..features import FEATURE_NAMES, N_FEATURES
from .pairing import NP, PN, PAIR_CLASS_NAMES, PairedInstance, pairs_to_arrays
from .tree import DecisionTree, grow_tree

MAX_TREES = 20


class ForestError(ValueError):
    pass


@dataclass
class RandomForest:
    trees: list[DecisionTree]
    max_depth: int
    seed: int
    max_features: int
    bootstrap: bool = True

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def pn_votes(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.sum([t.predict(X) == PN for t in self.trees], axis=0)

    def pn_fraction(self, X) -> np.ndarray:
        """Fraction of trees voting PN; the score used for ROC curves."""
        return self.pn_votes(X) / self.n_trees

    def predict(self, X) -> np.ndarray:
        votes = self.pn_votes(X)
        # a tied vote counts as PN
        return np.where(2 * votes >= self.n_trees, PN, NP)

    def to_dict(self) -> dict:
        return {
            "kind": "random_forest",
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "seed": self.seed,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForest":
        trees = [DecisionTree.from_dict(t) for t in d["trees"]]
        if len(trees) > MAX_TREES:
            raise ForestError(f"forest file holds {len(trees)} trees; at most {MAX_TREES} allowed")
        return cls(trees, int(d["max_depth"]), int(d["seed"]), int(d["max_features"]), bool(d.get("bootstrap", True)))


def train_rf(
    pairs,
    n_trees: int = 15,
    max_depth: int = 9,
    seed: int = 0,
    max_features: int | None = None,
    bootstrap: bool = True,
) -> RandomForest:
    """Bagged information-gain trees with per-node feature subsampling.

    ``pairs`` is a list of :class:`PairedInstance` or an ``(X, y)`` tuple.
    Tree ``k`` draws from ``numpy.random.default_rng(seed + k)``, so training
    order does not matter.
    """
    if not 1 <= n_trees <= MAX_TREES:
        raise ForestError(f"n_trees must be in [1, {MAX_TREES}], got {n_trees}")
    if max_depth < 1:
        raise ForestError(f"max_depth must be >= 1, got {max_depth}")
    if isinstance(pairs, tuple):
        X, y = pairs
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
    else:
        X, y = pairs_to_arrays(pairs)
    if len(np.unique(y)) < 2:
        raise ForestError("training pairs must contain both PN and NP")
    n, n_feat = X.shape
    if max_features is None:
        max_features = max(1, int(round(math.sqrt(n_feat))))
    if not 1 <= max_features <= n_feat:
        raise ForestError(f"max_features must be in [1, {n_feat}], got {max_features}")

    trees = []
    for k in range(n_trees):
        rng = np.random.default_rng(seed + k)
        rows = rng.integers(0, n, n) if bootstrap else np.arange(n)

        def sampler(rng=rng):
            return np.sort(rng.choice(n_feat, max_features, replace=False))

        trees.append(
            grow_tree(
                X[rows], y[rows], lam=0.0, max_depth=max_depth, feature_sampler=sampler, criterion="gain"
            )
        )
    return RandomForest(trees, max_depth, seed, max_features, bootstrap)


def classify_pair(forest: RandomForest, pair_values) -> tuple[int, float]:
    """``(pair_class, winning vote fraction)`` for one concatenated pair."""
    votes = int(forest.pn_votes(np.asarray(pair_values, dtype=float).reshape(1, -1))[0])
    if 2 * votes >= forest.n_trees:
        return PN, votes / forest.n_trees
    return NP, (forest.n_trees - votes) / forest.n_trees


@dataclass(frozen=True)
class PathStep:
    tree_id: int
    feature_index: int  # 0-13 in the concatenated pair
    threshold: float
    went_left: bool  # value <= threshold

    @property
    def half(self) -> str:
        """Which job of the pair the test looked at: the left slot or the right one."""
        return "left" if self.feature_index < N_FEATURES else "right"

    @property
    def job_feature(self) -> int:
        return self.feature_index % N_FEATURES

    def describe(self, value: float) -> str:
        op = "<=" if self.went_left else ">"
        name = FEATURE_NAMES[self.job_feature]
        return f"{self.half}.f{self.job_feature}({name})={value:g} {op} {self.threshold:g}"


@dataclass(frozen=True)
class DecisionPath:
    tree_id: int
    steps: tuple[PathStep, ...]
    leaf: int
    predicted: int
    leaf_counts: tuple[int, int] = field(default=(0, 0))

    def replay(self, tree: DecisionTree, pair_values) -> int:
        """Walk ``tree`` following only the recorded tests; returns the leaf reached."""
        i = 0
        for step in self.steps:
            node = tree.nodes[i]
            if node.feature != step.feature_index or node.threshold != step.threshold:
                raise ValueError(f"path step does not match tree {self.tree_id} node {i}")
            went_left = pair_values[step.feature_index] <= step.threshold
            if went_left != step.went_left:
                raise ValueError(f"pair takes the other branch at tree {self.tree_id} node {i}")
            i = node.left if went_left else node.right
        return i

    def to_dict(self, pair_values=None) -> dict:
        out = {
            "tree": self.tree_id,
            "predicted": PAIR_CLASS_NAMES[self.predicted],
            "leaf_counts": {"NP": self.leaf_counts[0], "PN": self.leaf_counts[1]},
            "steps": [
                {
                    "feature_index": s.feature_index,
                    "half": s.half,
                    "job_feature": s.job_feature,
                    "threshold": s.threshold,
                    "went_left": s.went_left,
                }
                for s in self.steps
            ],
        }
        if pair_values is not None:
            out["explanation"] = [s.describe(pair_values[s.feature_index]) for s in self.steps]
        return out


def decision_paths(forest: RandomForest, pair_values) -> list[DecisionPath]:
    x = np.asarray(pair_values, dtype=float)
    out = []
    for k, tree in enumerate(forest.trees):
        nodes = tree.path(x)
        steps = tuple(
            PathStep(k, tree.nodes[a].feature, tree.nodes[a].threshold, b == tree.nodes[a].left)
            for a, b in zip(nodes, nodes[1:])
        )
        leaf = tree.nodes[nodes[-1]]
        out.append(DecisionPath(k, steps, nodes[-1], leaf.prediction, leaf.counts))
    return out


def feature_usage(paths: list[DecisionPath]) -> dict[int, int]:
    """How many paths test each job feature (0-6), counting either half."""
    usage = {f: 0 for f in range(N_FEATURES)}
    for p in paths:
        for f in {s.job_feature for s in p.steps}:
            usage[f] += 1
    return usage


__all__ = [
    "MAX_TREES",
    "DecisionPath",
    "ForestError",
    "PairedInstance",
    "PathStep",
    "RandomForest",
    "classify_pair",
    "decision_paths",
    "feature_usage",
    "train_rf",
]
