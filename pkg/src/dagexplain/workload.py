"""DAG job workloads: data types, a layered random-DAG generator and the JSON file format."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np


class WorkloadError(ValueError):
    """Bad generator parameters or a malformed workload file."""


@dataclass(frozen=True)
class TaskNode:
    id: int
    num_tasks: int
    per_task_duration: float

    @property
    def run_time(self) -> float:
        # sequential-execution estimate over all replicates
        return self.num_tasks * self.per_task_duration


@dataclass(frozen=True)
class JobDag:
    id: int
    arrival_time: float
    nodes: tuple[TaskNode, ...]
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    @cached_property
    def parents(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for p, c in self.edges:
            out[c].append(p)
        return tuple(tuple(sorted(set(ps))) for ps in out)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for p, c in self.edges:
            out[p].append(c)
        return tuple(tuple(sorted(set(cs))) for cs in out)

    @property
    def total_tasks(self) -> int:
        return sum(n.num_tasks for n in self.nodes)

    @property
    def total_work(self) -> float:
        return sum(n.run_time for n in self.nodes)


@dataclass(frozen=True)
class Workload:
    jobs: tuple[JobDag, ...]
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "jobs", tuple(self.jobs))

    def job(self, job_id: int) -> JobDag:
        for j in self.jobs:
            if j.id == job_id:
                return j
        raise KeyError(job_id)


@dataclass(frozen=True)
class DagShapeParams:
    """Bounds for the layered random-DAG generator (inclusive)."""

    min_nodes: int = 2
    max_nodes: int = 10
    min_tasks: int = 1
    max_tasks: int = 50
    min_duration: float = 0.5
    max_duration: float = 20.0
    edge_prob: float = 0.3

    def check(self) -> None:
        if self.min_nodes < 1 or self.min_nodes > self.max_nodes:
            raise WorkloadError(f"bad node count range [{self.min_nodes}, {self.max_nodes}]")
        if self.min_tasks < 1 or self.min_tasks > self.max_tasks:
            raise WorkloadError(f"bad task count range [{self.min_tasks}, {self.max_tasks}]")
        if self.min_duration <= 0 or self.min_duration > self.max_duration:
            raise WorkloadError(
                f"bad duration range [{self.min_duration}, {self.max_duration}]"
            )
        if not 0.0 <= self.edge_prob <= 1.0:
            raise WorkloadError(f"edge_prob must be in [0, 1], got {self.edge_prob}")


def validate_dag(job: JobDag) -> list[str]:
    """Return human-readable violations; an empty list means the job is well formed."""
    violations = []
    n = len(job.nodes)
    if n == 0:
        violations.append("job has no nodes")
    for i, node in enumerate(job.nodes):
        if node.id != i:
            violations.append(f"node ids not contiguous: position {i} holds id {node.id}")
        if node.num_tasks < 1:
            violations.append(f"task-count: node {node.id} has num_tasks={node.num_tasks}")
        if not node.per_task_duration > 0:
            violations.append(
                f"duration: node {node.id} has per_task_duration={node.per_task_duration}"
            )
    bad_edge = False
    for p, c in job.edges:
        if not (0 <= p < n and 0 <= c < n):
            violations.append(f"edge ({p}, {c}) references a missing node")
            bad_edge = True
        elif p == c:
            violations.append(f"cycle: self-loop on node {p}")
            bad_edge = True
    if not bad_edge and topological_order(job) is None:
        violations.append("cycle: dependency graph is not acyclic")
    return violations


def topological_order(job: JobDag) -> list[int] | None:
    """Kahn's algorithm; ``None`` when the graph has a cycle."""
    n = len(job.nodes)
    indeg = [0] * n
    succ: list[set[int]] = [set() for _ in range(n)]
    for p, c in set(job.edges):
        if c not in succ[p]:
            succ[p].add(c)
            indeg[c] += 1
    frontier = sorted(i for i in range(n) if indeg[i] == 0)
    order = []
    while frontier:
        v = frontier.pop(0)
        order.append(v)
        for c in sorted(succ[v]):
            indeg[c] -= 1
            if indeg[c] == 0:
                frontier.append(c)
        frontier.sort()
    return order if len(order) == n else None


def _random_dag(rng: np.random.Generator, job_id: int, arrival: float, shape: DagShapeParams) -> JobDag:
    n = int(rng.integers(shape.min_nodes, shape.max_nodes + 1))
    n_levels = int(rng.integers(1, n + 1))
    # every level gets at least one node; the rest are spread at random
    level_of = list(range(n_levels)) + list(rng.integers(0, n_levels, n - n_levels))
    level_of.sort()
    levels: list[list[int]] = [[] for _ in range(n_levels)]
    for node_id, lv in enumerate(level_of):
        levels[lv].append(node_id)

    edges = set()
    for lv in range(1, n_levels):
        earlier = [v for l in levels[:lv] for v in l]
        for c in levels[lv]:
            # one guaranteed parent in the previous level keeps the layering tight
            edges.add((int(rng.choice(levels[lv - 1])), c))
            for p in earlier:
                if rng.random() < shape.edge_prob:
                    edges.add((p, c))

    nodes = []
    for i in range(n):
        tasks = int(rng.integers(shape.min_tasks, shape.max_tasks + 1))
        dur = round(float(rng.uniform(shape.min_duration, shape.max_duration)), 2)
        dur = max(dur, shape.min_duration)
        nodes.append(TaskNode(i, tasks, dur))
    return JobDag(job_id, arrival, tuple(nodes), tuple(sorted(edges)))


def generate_workload(
    seed: int,
    n_jobs: int,
    mean_interarrival: float = 25.0,
    shape: DagShapeParams | None = None,
) -> Workload:
    """Random layered DAG jobs arriving as a Poisson stream, first arrival at t=0."""
    if n_jobs < 1:
        raise WorkloadError(f"n_jobs must be >= 1, got {n_jobs}")
    if not mean_interarrival > 0:
        raise WorkloadError(f"mean_interarrival must be > 0, got {mean_interarrival}")
    shape = shape or DagShapeParams()
    shape.check()

    rng = np.random.default_rng(seed)
    gaps = rng.exponential(mean_interarrival, n_jobs - 1)
    arrivals = np.concatenate([[0.0], np.cumsum(gaps)])
    jobs = [_random_dag(rng, i, float(arrivals[i]), shape) for i in range(n_jobs)]
    return Workload(tuple(jobs), seed)


def interarrival_gaps(workload: Workload) -> np.ndarray:
    return np.diff([j.arrival_time for j in workload.jobs])


def job_to_dict(job: JobDag) -> dict:
    return {
        "id": job.id,
        "arrival_time": job.arrival_time,
        "nodes": [
            {"id": n.id, "num_tasks": n.num_tasks, "per_task_duration": n.per_task_duration}
            for n in job.nodes
        ],
        "edges": [[p, c] for p, c in job.edges],
    }


def job_from_dict(d: dict) -> JobDag:
    try:
        nodes = tuple(
            TaskNode(int(n["id"]), int(n["num_tasks"]), float(n["per_task_duration"]))
            for n in d["nodes"]
        )
        edges = tuple((int(p), int(c)) for p, c in d.get("edges", []))
        return JobDag(int(d["id"]), float(d["arrival_time"]), nodes, edges)
    except (KeyError, TypeError, ValueError) as exc:
        raise WorkloadError(f"malformed job record: {exc}") from exc


def workload_to_json(workload: Workload) -> str:
    payload = {"seed": workload.seed, "jobs": [job_to_dict(j) for j in workload.jobs]}
    return json.dumps(payload, indent=1) + "\n"


def workload_from_json(text: str, validate: bool = True) -> Workload:
    try:
        payload = json.loads(text)
        jobs = [job_from_dict(j) for j in payload["jobs"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise WorkloadError(f"malformed workload file: {exc}") from exc
    jobs.sort(key=lambda j: (j.arrival_time, j.id))
    if validate:
        check_jobs(jobs)
    return Workload(tuple(jobs), payload.get("seed"))


def check_jobs(jobs: Iterable[JobDag]) -> None:
    seen = set()
    for job in jobs:
        if job.id in seen:
            raise WorkloadError(f"duplicate job id {job.id}")
        seen.add(job.id)
        problems = validate_dag(job)
        if problems:
            raise WorkloadError(f"job {job.id}: " + "; ".join(problems))


def save_workload(workload: Workload, path) -> None:
    with open(path, "w") as fh:
        fh.write(workload_to_json(workload))


def load_workload(path) -> Workload:
    with open(path) as fh:
        return workload_from_json(fh.read())
