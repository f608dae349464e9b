"""Task-level explanation: how often each classical task rule reproduces the policy's node choice."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .features import LOCALITY
from .policy import RULES, rule_choice
from .proxy.tree import DecisionTree
from .simulator import SimConfig, Trace, replay
from .workload import Workload


@dataclass(frozen=True)
class AlignmentReport:
    branch: str
    accuracy: dict[str, float]
    best: str
    n_decisions: int

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "accuracy": dict(self.accuracy),
            "best": self.best,
            "decisions": self.n_decisions,
        }


def rule_choices(
    workload: Workload, trace: Trace, n_executors: int, cfg: SimConfig | None = None
) -> dict[int, dict[str, int]]:
    """Per stage, the node each rule would pick inside the job the policy chose.

    The job states are rebuilt by replaying the trace against its workload.
    """
    out: dict[int, dict[str, int]] = {}

    def record(decision, active):
        js = active[decision.chosen_job]
        out[decision.stage] = {r: rule_choice(r, js) for r in RULES}

    replay(workload, trace, n_executors, cfg, on_decision=record)
    return out


def _format_condition(feature: int, threshold: float, went_left: bool) -> str:
    if feature == LOCALITY and 0.0 <= threshold < 1.0:
        return "locality=false" if went_left else "locality=true"
    op = "<=" if went_left else ">"
    return f"f{feature}{op}{threshold:g}"


def branch_label(tree: DecisionTree, leaf: int) -> str:
    conds = tree.branch_conditions(leaf)
    if not conds:
        return "all"
    return " & ".join(_format_condition(*c) for c in conds)


def tree_branches(tree: DecisionTree, trace: Trace) -> dict[int, str]:
    """Stage -> label of the tree leaf that the scheduled job's features fall into."""
    if not trace.decisions:
        return {}
    X = np.array([d.features_of(d.chosen_job).as_floats() for d in trace.decisions])
    leaves = tree.apply(X)
    labels = {leaf: branch_label(tree, leaf) for leaf in set(leaves.tolist())}
    return {d.stage: labels[int(leaf)] for d, leaf in zip(trace.decisions, leaves)}


def align_rules(
    trace: Trace,
    branch_assignment: Mapping[int, str] | Callable[[int], str],
    choices: Mapping[int, Mapping[str, int]],
) -> list[AlignmentReport]:
    """Per branch, the fraction of decisions where each rule picks the node that was run.

    ``choices`` comes from :func:`rule_choices`.  Branches without decisions
    are left out; reports are sorted by branch label.
    """
    branch_of = branch_assignment if callable(branch_assignment) else branch_assignment.__getitem__
    hits: dict[str, dict[str, int]] = defaultdict(lambda: {r: 0 for r in RULES})
    totals: dict[str, int] = defaultdict(int)
    for d in trace.decisions:
        b = branch_of(d.stage)
        totals[b] += 1
        for r in RULES:
            hits[b][r] += int(choices[d.stage][r] == d.chosen_node)
    reports = []
    for b in sorted(totals):
        acc = {r: hits[b][r] / totals[b] for r in RULES}
        # ties resolve in RULES order
        best = max(RULES, key=lambda r: (acc[r], -RULES.index(r)))
        reports.append(AlignmentReport(b, acc, best, totals[b]))
    return reports


def align_with_tree(
    workload: Workload,
    trace: Trace,
    tree: DecisionTree,
    n_executors: int,
    cfg: SimConfig | None = None,
) -> list[AlignmentReport]:
    return align_rules(trace, tree_branches(tree, trace), rule_choices(workload, trace, n_executors, cfg))
