"""Scheduling policies: the classical task rules and the locality-first reference policy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import critical_path, smallest_ready_node
from .state import ContractViolation, ExecutorState, JobRuntimeState, ready_nodes

RULES = ("snf", "cps", "fcfs")
KINDS = ("reference",) + RULES + ("random",)


def rule_choice(rule: str, job_state: JobRuntimeState) -> int:
    """Node the given task rule would run next inside one job.

    snf   ready node with the least remaining run time
    cps   first ready node along the current critical path, else snf
    fcfs  ready node that became ready earliest
    Ties always go to the lowest node id.
    """
    ready = ready_nodes(job_state)
    if not ready:
        raise ContractViolation(f"job {job_state.job_id} has no ready node")
    if rule == "snf":
        return smallest_ready_node(job_state)
    if rule == "cps":
        path, _, _ = critical_path(job_state)
        ready_set = set(ready)
        for n in path:
            if n in ready_set:
                return n
        return smallest_ready_node(job_state)
    if rule == "fcfs":
        return min(ready, key=lambda n: (job_state.node_ready_time[n], n))
    raise ValueError(f"unknown rule {rule!r}")


def _job_key(rule: str, js: JobRuntimeState):
    """Per-job ordering key for the rule-driven policies; lower wins."""
    if rule == "snf":
        return js.node_runtime(smallest_ready_node(js))
    if rule == "cps":
        # most critical job first
        return -critical_path(js)[1]
    n = rule_choice("fcfs", js)
    return js.node_ready_time[n]


@dataclass
class PolicyRef:
    """Which policy to run, plus its knobs.

    ``warmup_aware`` toggles the locality branch of the reference policy and
    ``epsilon`` makes it pick a uniformly random candidate with that
    probability (seeded by ``seed``).
    """

    kind: str = "reference"
    seed: int | None = None
    warmup_aware: bool = True
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "random" and self.seed is None:
            raise ValueError("random policy needs a seed")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.epsilon > 0 and self.seed is None:
            raise ValueError("epsilon noise needs a seed")
        self.reset()

    def reset(self) -> None:
        self._rng = np.random.default_rng(self.seed) if self.seed is not None else None

    def decide(
        self, candidates: Sequence[JobRuntimeState], executor: ExecutorState, now: float = 0.0
    ) -> tuple[int, int]:
        return decide(self, candidates, executor, now)


def decide(
    policy: PolicyRef,
    candidates: Sequence[JobRuntimeState],
    executor: ExecutorState,
    now: float = 0.0,
) -> tuple[int, int]:
    """Pick ``(job_id, node_id)``; the node is always ready in the chosen job."""
    if not candidates:
        raise ContractViolation("decide called with no candidates")
    cands = sorted(candidates, key=lambda js: js.job_id)

    kind = policy.kind
    if kind == "random" or (policy.epsilon > 0 and policy._rng.random() < policy.epsilon):
        js = cands[int(policy._rng.integers(len(cands)))]
        ready = ready_nodes(js)
        return js.job_id, ready[int(policy._rng.integers(len(ready)))]

    if kind == "reference":
        if policy.warmup_aware:
            for js in cands:
                if js.job_id == executor.bound_job:
                    return js.job_id, rule_choice("fcfs", js)
        js = min(cands, key=lambda j: (_job_key("snf", j), j.job_id))
        return js.job_id, smallest_ready_node(js)

    js = min(cands, key=lambda j: (_job_key(kind, j), j.job_id))
    return js.job_id, rule_choice(kind, js)
