"""Node-split perturbation: split one task node into parallel siblings and measure the JCT effect."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .policy import PolicyRef
from .simulator import SimConfig, simulate
from .workload import JobDag, TaskNode, Workload, validate_dag


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class SplitPlan:
    node_id: int
    parts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(int(p) for p in self.parts))

    def to_dict(self) -> dict:
        return {"node_id": self.node_id, "parts": list(self.parts)}

    @classmethod
    def from_dict(cls, d: dict) -> "SplitPlan":
        try:
            return cls(int(d["node_id"]), tuple(d["parts"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise PlanError(f"malformed plan {d!r}: {exc}") from exc


def check_plan(job: JobDag, plan: SplitPlan) -> None:
    if not 0 <= plan.node_id < len(job.nodes):
        raise PlanError(f"job {job.id} has no node {plan.node_id}")
    if len(plan.parts) < 2:
        raise PlanError("a split needs at least two parts")
    if any(p < 1 for p in plan.parts):
        raise PlanError(f"every part needs >= 1 task, got {list(plan.parts)}")
    n = job.nodes[plan.node_id].num_tasks
    if sum(plan.parts) != n:
        raise PlanError(f"parts sum to {sum(plan.parts)}, node {plan.node_id} has {n} tasks")


def split_node(job: JobDag, plan: SplitPlan) -> JobDag:
    """Replace one node by ``len(plan.parts)`` siblings with the same per-task duration.

    The first part keeps the original node id, the others are appended as
    new ids.  Every part inherits all incoming and outgoing edges of the
    original node; siblings are not connected to each other.
    """
    check_plan(job, plan)
    target = job.nodes[plan.node_id]
    nodes = list(job.nodes)
    nodes[plan.node_id] = TaskNode(target.id, plan.parts[0], target.per_task_duration)
    new_ids = [plan.node_id]
    for k, tasks in enumerate(plan.parts[1:]):
        nid = len(job.nodes) + k
        nodes.append(TaskNode(nid, tasks, target.per_task_duration))
        new_ids.append(nid)

    edges = set()
    for p, c in job.edges:
        ps = new_ids if p == plan.node_id else [p]
        cs = new_ids if c == plan.node_id else [c]
        for a in ps:
            for b in cs:
                edges.add((a, b))
    out = JobDag(job.id, job.arrival_time, tuple(nodes), tuple(sorted(edges)))
    problems = validate_dag(out)
    if problems:
        raise PlanError("split produced an invalid DAG: " + "; ".join(problems))
    return out


def maximal_split_plan(job: JobDag, node_id: int | None = None, remainder: int = 1) -> SplitPlan:
    """Split everything but ``remainder`` tasks of a node into 1-task nodes.

    Defaults to the largest source node (ties: lowest id), the node that is
    ready on arrival and competes for executors first.
    """
    if node_id is None:
        sources = [n for n in job.nodes if not job.parents[n.id]]
        node_id = max(sources, key=lambda n: (n.num_tasks, -n.id)).id
    n = job.nodes[node_id].num_tasks
    if n < 2:
        raise PlanError(f"node {node_id} has a single task; nothing to split")
    remainder = min(max(remainder, 1), n - 1)
    return SplitPlan(node_id, (remainder,) + (1,) * (n - remainder))


@dataclass(frozen=True)
class VariantResult:
    variant: str
    jct: float
    normalized: float

    def to_dict(self) -> dict:
        return {"variant": self.variant, "jct": self.jct, "normalized": self.normalized}


@dataclass(frozen=True)
class PerturbationResult:
    target: int
    variants: tuple[VariantResult, ...]

    @property
    def original_jct(self) -> float:
        return self.variants[0].jct

    def to_list(self) -> list[dict]:
        return [v.to_dict() for v in self.variants]


def with_target(background: Workload, target: JobDag) -> Workload:
    jobs = [j for j in background.jobs if j.id != target.id] + [target]
    jobs.sort(key=lambda j: (j.arrival_time, j.id))
    return Workload(tuple(jobs), background.seed)


def perturbation_experiment(
    background: Workload,
    target: JobDag,
    plans: Sequence[SplitPlan],
    policy: PolicyRef,
    n_executors: int,
    cfg: SimConfig | None = None,
) -> PerturbationResult:
    """JCT of the target job, original and once per plan, against the same background.

    A job in ``background`` with the target's id is replaced by the target.
    """
    variants = [("original", target)] + [
        (f"plan-{k + 1}", split_node(target, plan)) for k, plan in enumerate(plans)
    ]
    results = []
    base = None
    for name, job in variants:
        trace, _ = simulate(with_target(background, job), n_executors, policy, cfg)
        arrival, finish = trace.job_completion[job.id]
        jct = finish - arrival
        if base is None:
            base = jct
        results.append(VariantResult(name, jct, jct / base))
    return PerturbationResult(target.id, tuple(results))


def plans_from_json(text: str) -> list[SplitPlan]:
    data = json.loads(text)
    if isinstance(data, dict):
        data = [data]
    return [SplitPlan.from_dict(d) for d in data]
