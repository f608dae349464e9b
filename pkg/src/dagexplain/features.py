"""The seven interpretable job features and the labelled per-stage datasets built from traces.

Index mapping used everywhere (datasets, trees, decision paths):

    0 cp_runtime    run time along the critical path
    1 cp_tasks      task replicates along the critical path
    2 job_runtime   run time of all unfinished work in the job
    3 job_tasks     unfinished task replicates in the job
    4 srn_runtime   run time of the smallest ready node
    5 srn_tasks     task replicates of the smallest ready node
    6 locality      job is the one last served by the free executor

Run times assume the replicates of a node execute one after another and only
count unfinished replicates (queued or still running).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, NamedTuple

import numpy as np

from .state import ContractViolation, ExecutorState, JobRuntimeState, ready_nodes

if TYPE_CHECKING:
    from .simulator import Trace

FEATURE_NAMES = (
    "cp_runtime",
    "cp_tasks",
    "job_runtime",
    "job_tasks",
    "srn_runtime",
    "srn_tasks",
    "locality",
)
N_FEATURES = len(FEATURE_NAMES)
LOCALITY = 6


class FeatureVector(NamedTuple):
    cp_runtime: float
    cp_tasks: int
    job_runtime: float
    job_tasks: int
    srn_runtime: float
    srn_tasks: int
    locality: bool

    def as_floats(self) -> list[float]:
        return [float(v) for v in self]


@dataclass(frozen=True)
class LabeledInstance:
    stage: int
    job_id: int
    features: FeatureVector
    label: int  # 1 = positive (scheduled), 0 = negative


def critical_path(job_state: JobRuntimeState) -> tuple[list[int], float, int]:
    """Longest chain of unfinished nodes by remaining run time.

    Ties go to the lowest node id at every step, so the path is deterministic.
    """
    job = job_state.job
    unfinished = [i for i, u in enumerate(job_state.tasks_unfinished) if u > 0]
    if not unfinished:
        raise ContractViolation(f"job {job.id} has no unfinished node")
    alive = set(unfinished)
    best: dict[int, float] = {}
    nxt: dict[int, int | None] = {}
    # node ids are not guaranteed topological, so walk a reverse topological order
    for v in reversed(_topo(job, alive)):
        tail, choice = 0.0, None
        for c in job.children[v]:
            if c in alive and (choice is None or best[c] > tail):
                tail, choice = best[c], c
        best[v] = job_state.node_runtime(v) + tail
        nxt[v] = choice

    start = max(unfinished, key=lambda v: (best[v], -v))
    path = [start]
    while nxt[path[-1]] is not None:
        path.append(nxt[path[-1]])
    runtime = math.fsum(job_state.node_runtime(v) for v in path)
    tasks = sum(job_state.tasks_unfinished[v] for v in path)
    return path, runtime, tasks


def _topo(job, alive: set[int]) -> list[int]:
    indeg = {v: sum(1 for p in job.parents[v] if p in alive) for v in alive}
    frontier = sorted(v for v, d in indeg.items() if d == 0)
    order = []
    while frontier:
        v = frontier.pop()
        order.append(v)
        for c in job.children[v]:
            if c in alive:
                indeg[c] -= 1
                if indeg[c] == 0:
                    frontier.append(c)
    return order


def smallest_ready_node(job_state: JobRuntimeState) -> int:
    ready = ready_nodes(job_state)
    if not ready:
        raise ContractViolation(f"job {job_state.job_id} has no ready node")
    return min(ready, key=lambda n: (job_state.node_runtime(n), n))


def job_features(job_state: JobRuntimeState) -> tuple:
    """Features 0-5, which depend on the job state only (not on the executor)."""
    _, cp_rt, cp_tasks = critical_path(job_state)
    job = job_state.job
    job_rt = math.fsum(job_state.node_runtime(i) for i in range(len(job.nodes)))
    job_tasks = sum(job_state.tasks_unfinished)
    srn = smallest_ready_node(job_state)
    return (
        cp_rt,
        cp_tasks,
        job_rt,
        job_tasks,
        job_state.node_runtime(srn),
        job_state.tasks_unfinished[srn],
    )


def extract_features(job_state: JobRuntimeState, executor: ExecutorState) -> FeatureVector:
    return FeatureVector(*job_features(job_state), executor.bound_job == job_state.job_id)


def build_stage_dataset(trace: "Trace") -> list[LabeledInstance]:
    """One labelled instance per (decision stage, candidate job), ordered by (stage, job id)."""
    out = []
    for d in trace.decisions:
        for job_id, fv in sorted(d.candidates, key=lambda c: c[0]):
            out.append(LabeledInstance(d.stage, job_id, fv, int(job_id == d.chosen_job)))
    return out


def to_arrays(instances: Iterable[LabeledInstance]):
    """``(X, y, stage, job)`` numpy arrays for model training."""
    instances = list(instances)
    X = np.array([inst.features.as_floats() for inst in instances], dtype=float).reshape(
        -1, N_FEATURES
    )
    y = np.array([inst.label for inst in instances], dtype=np.int64)
    stage = np.array([inst.stage for inst in instances], dtype=np.int64)
    job = np.array([inst.job_id for inst in instances], dtype=np.int64)
    return X, y, stage, job


CSV_HEADER = ["stage", "job", "f0", "f1", "f2", "f3", "f4", "f5", "f6", "label"]


def dataset_to_csv(instances: Iterable[LabeledInstance]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for inst in instances:
        f = inst.features
        w.writerow(
            [
                inst.stage,
                inst.job_id,
                repr(float(f.cp_runtime)),
                int(f.cp_tasks),
                repr(float(f.job_runtime)),
                int(f.job_tasks),
                repr(float(f.srn_runtime)),
                int(f.srn_tasks),
                int(bool(f.locality)),
                inst.label,
            ]
        )
    return buf.getvalue()


def dataset_from_csv(text: str) -> list[LabeledInstance]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_HEADER:
        raise ValueError(f"unexpected dataset header {reader.fieldnames}")
    out = []
    for row in reader:
        fv = FeatureVector(
            float(row["f0"]),
            int(row["f1"]),
            float(row["f2"]),
            int(row["f3"]),
            float(row["f4"]),
            int(row["f5"]),
            bool(int(row["f6"])),
        )
        out.append(LabeledInstance(int(row["stage"]), int(row["job"]), fv, int(row["label"])))
    return out
