"""Mutable runtime state shared by the simulator, the policies and the feature extractors."""

from __future__ import annotations

from dataclasses import dataclass, field

from .workload import JobDag


class ContractViolation(RuntimeError):
    """An operation was called outside its precondition."""


@dataclass
class ExecutorState:
    id: int
    bound_job: int | None = None
    busy_until: float = 0.0


@dataclass
class JobRuntimeState:
    job: JobDag
    tasks_remaining: list[int] = field(default_factory=list)
    tasks_unfinished: list[int] = field(default_factory=list)
    node_ready_time: list[float | None] = field(default_factory=list)
    # bumped on every mutation so feature vectors can be cached per job
    version: int = 0

    @classmethod
    def fresh(cls, job: JobDag) -> "JobRuntimeState":
        counts = [n.num_tasks for n in job.nodes]
        ready = [job.arrival_time if not job.parents[i] else None for i in range(len(counts))]
        return cls(job, list(counts), list(counts), ready)

    @property
    def job_id(self) -> int:
        return self.job.id

    def node_runtime(self, node_id: int) -> float:
        """Sequential run time of the node's unfinished replicates."""
        return self.tasks_unfinished[node_id] * self.job.nodes[node_id].per_task_duration

    def is_ready(self, node_id: int) -> bool:
        if self.tasks_remaining[node_id] <= 0:
            return False
        return all(self.tasks_unfinished[p] == 0 for p in self.job.parents[node_id])

    @property
    def finished(self) -> bool:
        return not any(self.tasks_unfinished)

    def start_task(self, node_id: int) -> None:
        if not self.is_ready(node_id):
            raise ContractViolation(f"node {node_id} of job {self.job_id} is not ready")
        self.tasks_remaining[node_id] -= 1
        self.version += 1

    def finish_task(self, node_id: int, now: float) -> None:
        self.tasks_unfinished[node_id] -= 1
        self.version += 1
        if self.tasks_unfinished[node_id] == 0:
            for c in self.job.children[node_id]:
                if self.node_ready_time[c] is None and all(
                    self.tasks_unfinished[p] == 0 for p in self.job.parents[c]
                ):
                    self.node_ready_time[c] = now


def ready_nodes(job_state: JobRuntimeState) -> list[int]:
    """Nodes whose parents have all completed and that still have unscheduled replicates."""
    return [i for i in range(len(job_state.job.nodes)) if job_state.is_ready(i)]
