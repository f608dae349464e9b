"""Pairing-and-comparing: turn imbalanced per-stage job instances into balanced pair classes."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..features import N_FEATURES, LabeledInstance, to_arrays
from .tree import DecisionTree

PN, NP = 1, 0
PAIR_CLASS_NAMES = {PN: "PN", NP: "NP"}


@dataclass(frozen=True)
class PairedInstance:
    values: tuple[float, ...]  # left job's 7 features, then the right job's
    pair_class: int  # PN: left is the scheduled job; NP: right is
    stage: int
    left_job: int
    right_job: int

    def mirrored(self) -> "PairedInstance":
        v = self.values
        return PairedInstance(
            v[N_FEATURES:] + v[:N_FEATURES],
            NP if self.pair_class == PN else PN,
            self.stage,
            self.right_job,
            self.left_job,
        )


def concat_features(left, right) -> tuple[float, ...]:
    return tuple(float(v) for v in left) + tuple(float(v) for v in right)


def group_by_stage(instances: Iterable[LabeledInstance]) -> dict[int, list[LabeledInstance]]:
    groups: dict[int, list[LabeledInstance]] = defaultdict(list)
    for inst in instances:
        groups[inst.stage].append(inst)
    return dict(sorted(groups.items()))


def pair_instances(instances: Iterable[LabeledInstance], max_neg: int = 5) -> list[PairedInstance]:
    """Pair each stage's positive with up to ``max_neg`` negatives (lowest job ids first).

    Every sampled negative yields one PN and one mirrored NP pair, so the two
    classes are always balanced.
    """
    if max_neg < 1:
        raise ValueError(f"max_neg must be >= 1, got {max_neg}")
    out = []
    for stage, group in group_by_stage(instances).items():
        pos = [i for i in group if i.label == 1]
        if len(pos) != 1:
            raise ValueError(f"stage {stage} has {len(pos)} positive instances, expected 1")
        p = pos[0]
        negs = sorted((i for i in group if i.label == 0), key=lambda i: i.job_id)[:max_neg]
        for n in negs:
            pn = PairedInstance(concat_features(p.features, n.features), PN, stage, p.job_id, n.job_id)
            out.append(pn)
            out.append(pn.mirrored())
    return out


def pairs_to_arrays(pairs: Sequence[PairedInstance]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([p.values for p in pairs], dtype=float).reshape(-1, 2 * N_FEATURES)
    y = np.array([p.pair_class for p in pairs], dtype=np.int64)
    return X, y


def mixed_leaves(tree: DecisionTree, purity: float = 0.95) -> set[int]:
    """Leaves holding positives that are not explained by the tree alone.

    A leaf is settled when at least ``purity`` of its training instances are
    positive, or when it holds no positive at all.
    """
    out = set()
    for i in tree.leaves():
        node = tree.nodes[i]
        if node.counts[1] > 0 and node.positive_fraction < purity:
            out.add(i)
    return out


def route_to_forest(
    tree: DecisionTree, instances: Sequence[LabeledInstance], purity: float = 0.95
) -> list[LabeledInstance]:
    """Instances of the stages whose scheduled job lands in a mixed leaf.

    Only instances that themselves land in a mixed leaf are kept, so the
    forest compares jobs the tree could not tell apart.
    """
    instances = list(instances)
    if not instances:
        return []
    X, _, _, _ = to_arrays(instances)
    leaf = tree.apply(X)
    mixed = mixed_leaves(tree, purity)
    in_mixed = np.isin(leaf, list(mixed))
    stages = {inst.stage for inst, m in zip(instances, in_mixed) if m and inst.label == 1}
    return [inst for inst, m in zip(instances, in_mixed) if m and inst.stage in stages]
