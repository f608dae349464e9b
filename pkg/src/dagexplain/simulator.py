"""Discrete-event simulation of DAG jobs on executors that run one task replicate at a time.

Events at the same instant are handled in a fixed order: task completions,
then job arrivals, then one scheduler invocation per free executor (lowest
executor id first) for as long as some job has a ready node.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .features import FeatureVector, job_features
from .policy import PolicyRef
from .state import ContractViolation, ExecutorState, JobRuntimeState, ready_nodes
from .workload import Workload, check_jobs


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    warmup_delay: float = 3.0

    def __post_init__(self):
        if self.warmup_delay < 0:
            raise SimulationError(f"warmup_delay must be >= 0, got {self.warmup_delay}")


@dataclass(frozen=True)
class Decision:
    stage: int
    time: float
    executor_id: int
    candidates: tuple[tuple[int, FeatureVector], ...]
    chosen_job: int
    chosen_node: int

    def features_of(self, job_id: int) -> FeatureVector:
        for j, fv in self.candidates:
            if j == job_id:
                return fv
        raise KeyError(f"job {job_id} is not a candidate at stage {self.stage}")


@dataclass(frozen=True)
class Interval:
    executor_id: int
    job_id: int
    node_id: int
    start: float
    end: float


@dataclass(frozen=True)
class Trace:
    decisions: tuple[Decision, ...]
    job_completion: dict[int, tuple[float, float]]
    jobs_in_system: tuple[tuple[float, int], ...] = ()
    # per-replicate execution record; only present for traces produced here
    intervals: tuple[Interval, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.jobs_in_system and self.job_completion:
            object.__setattr__(self, "jobs_in_system", jobs_in_system(self.job_completion))


@dataclass(frozen=True)
class Metrics:
    avg_jct: float
    time_averaged_jobs: float
    makespan: float
    n_decisions: int

    def as_dict(self) -> dict:
        return {
            "avg_jct": self.avg_jct,
            "time_averaged_jobs": self.time_averaged_jobs,
            "makespan": self.makespan,
            "n_decisions": self.n_decisions,
        }


def jobs_in_system(job_completion: dict[int, tuple[float, float]]) -> tuple[tuple[float, int], ...]:
    """Step function ``[(t, count), ...]``: ``count`` jobs are present from ``t`` to the next point."""
    delta: dict[float, int] = {}
    for arrival, finish in job_completion.values():
        delta[arrival] = delta.get(arrival, 0) + 1
        delta[finish] = delta.get(finish, 0) - 1
    steps = []
    count = 0
    for t in sorted(delta):
        count += delta[t]
        steps.append((t, count))
    return tuple(steps)


def time_averaged_jobs(trace: Trace, horizon: float | None = None) -> float:
    """``(1/t_T) * sum_k (t_k - t_{k-1}) * J_k`` over the jobs-in-system step function.

    ``t_T`` defaults to the last job finish time; the system is empty before
    the first step point.
    """
    if horizon is None:
        if not trace.job_completion:
            raise SimulationError("trace has no completed jobs")
        horizon = max(f for _, f in trace.job_completion.values())
    if not horizon > 0:
        raise SimulationError(f"zero-length horizon ({horizon})")
    steps = list(trace.jobs_in_system)
    area = []
    for k, (t, count) in enumerate(steps):
        if t >= horizon:
            break
        end = steps[k + 1][0] if k + 1 < len(steps) else horizon
        area.append((min(end, horizon) - max(t, 0.0)) * count)
    return math.fsum(area) / horizon


def compute_metrics(trace: Trace) -> Metrics:
    jcts = [f - a for a, f in trace.job_completion.values()]
    return Metrics(
        avg_jct=math.fsum(jcts) / len(jcts),
        time_averaged_jobs=time_averaged_jobs(trace),
        makespan=max(f for _, f in trace.job_completion.values()),
        n_decisions=len(trace.decisions),
    )


# heap event kinds; lower sorts first at equal time
_COMPLETION, _ARRIVAL = 0, 1

DecideFn = Callable[[Sequence[JobRuntimeState], ExecutorState, float], "tuple[int, int]"]


def simulate(
    workload: Workload,
    n_executors: int,
    policy: PolicyRef | DecideFn,
    cfg: SimConfig | None = None,
    on_decision: Callable[[Decision, dict[int, JobRuntimeState]], None] | None = None,
) -> tuple[Trace, Metrics]:
    """Run every job of ``workload`` to completion.

    ``policy`` is either a :class:`PolicyRef` (reset before the run so the
    result is reproducible) or any callable with the same ``decide`` shape.
    ``on_decision`` sees each decision together with the job states *before*
    the chosen replicate is started.
    """
    cfg = cfg or SimConfig()
    if n_executors < 1:
        raise SimulationError(f"n_executors must be >= 1, got {n_executors}")
    if not workload.jobs:
        raise SimulationError("empty workload")
    check_jobs(workload.jobs)
    if isinstance(policy, PolicyRef):
        policy.reset()
        decide_fn = policy.decide
    else:
        decide_fn = policy

    executors = [ExecutorState(i) for i in range(n_executors)]
    free = set(range(n_executors))
    active: dict[int, JobRuntimeState] = {}
    completion: dict[int, tuple[float, float]] = {}
    # job id -> (state version, features 0-5)
    feature_cache: dict[int, tuple[int, tuple]] = {}
    decisions: list[Decision] = []
    intervals: list[Interval] = []
    running: dict[int, tuple[int, int, float]] = {}

    events: list[tuple] = []
    for idx, job in enumerate(workload.jobs):
        heapq.heappush(events, (job.arrival_time, _ARRIVAL, idx, idx))

    def features_for(js: JobRuntimeState, ex: ExecutorState) -> FeatureVector:
        cached = feature_cache.get(js.job_id)
        if cached is None or cached[0] != js.version:
            cached = (js.version, job_features(js))
            feature_cache[js.job_id] = cached
        return FeatureVector(*cached[1], ex.bound_job == js.job_id)

    while events:
        now = events[0][0]
        while events and events[0][0] == now:
            _, kind, key, payload = heapq.heappop(events)
            if kind == _COMPLETION:
                job_id, node_id, start = running.pop(key)
                js = active[job_id]
                js.finish_task(node_id, now)
                intervals.append(Interval(key, job_id, node_id, start, now))
                free.add(key)
                if js.finished:
                    completion[job_id] = (js.job.arrival_time, now)
                    del active[job_id]
                    feature_cache.pop(job_id, None)
            else:
                job = workload.jobs[payload]
                active[job.id] = JobRuntimeState.fresh(job)

        for ex_id in sorted(free):
            cands = [js for _, js in sorted(active.items()) if ready_nodes(js)]
            if not cands:
                break
            ex = executors[ex_id]
            job_id, node_id = decide_fn(cands, ex, now)
            js = active.get(job_id)
            if js is None or not any(c is js for c in cands) or not js.is_ready(node_id):
                raise ContractViolation(
                    f"policy chose ({job_id}, {node_id}) which is not a ready candidate"
                )
            decision = Decision(
                stage=len(decisions),
                time=now,
                executor_id=ex_id,
                candidates=tuple((c.job_id, features_for(c, ex)) for c in cands),
                chosen_job=job_id,
                chosen_node=node_id,
            )
            if on_decision is not None:
                on_decision(decision, active)
            decisions.append(decision)

            duration = js.job.nodes[node_id].per_task_duration
            if ex.bound_job != job_id:
                duration += cfg.warmup_delay
            js.start_task(node_id)
            ex.bound_job = job_id
            ex.busy_until = now + duration
            free.discard(ex_id)
            running[ex_id] = (job_id, node_id, now)
            heapq.heappush(events, (ex.busy_until, _COMPLETION, ex_id, None))

    if active:
        raise SimulationError(f"jobs {sorted(active)} never completed")
    completion = dict(sorted(completion.items()))
    trace = Trace(tuple(decisions), completion, intervals=tuple(intervals))
    return trace, compute_metrics(trace)


class ReplayPolicy:
    """Replays the ``(job, node)`` choices of a recorded trace, checking time and executor."""

    def __init__(self, decisions: Sequence[Decision], tol: float = 1e-6):
        self.decisions = list(decisions)
        self.pos = 0
        self.tol = tol

    def __call__(self, candidates, executor, now):
        if self.pos >= len(self.decisions):
            raise SimulationError("replay ran past the end of the recorded trace")
        d = self.decisions[self.pos]
        self.pos += 1
        if d.executor_id != executor.id or abs(d.time - now) > self.tol:
            raise SimulationError(
                f"replay diverged at stage {d.stage}: recorded executor {d.executor_id} "
                f"at t={d.time}, simulated executor {executor.id} at t={now}"
            )
        return d.chosen_job, d.chosen_node


def replay(
    workload: Workload,
    trace: Trace,
    n_executors: int,
    cfg: SimConfig | None = None,
    on_decision=None,
) -> Trace:
    """Re-run a recorded trace against its workload so per-decision job states can be inspected."""
    trace2, _ = simulate(workload, n_executors, ReplayPolicy(trace.decisions), cfg, on_decision)
    return trace2


# ---- trace files (JSON lines) ----


def decision_to_dict(d: Decision) -> dict:
    return {
        "stage": d.stage,
        "time": d.time,
        "executor": d.executor_id,
        "chosen_job": d.chosen_job,
        "chosen_node": d.chosen_node,
        "candidates": [
            {"job": j, "features": [*fv[:6], int(bool(fv[6]))]} for j, fv in d.candidates
        ],
    }


def decision_from_dict(rec: dict) -> Decision:
    cands = []
    for c in rec["candidates"]:
        f = c["features"]
        if len(f) != 7:
            raise ValueError(f"stage {rec.get('stage')}: expected 7 features, got {len(f)}")
        fv = FeatureVector(
            float(f[0]), int(f[1]), float(f[2]), int(f[3]), float(f[4]), int(f[5]), bool(f[6])
        )
        cands.append((int(c["job"]), fv))
    return Decision(
        stage=int(rec["stage"]),
        time=float(rec["time"]),
        executor_id=int(rec["executor"]),
        candidates=tuple(cands),
        chosen_job=int(rec["chosen_job"]),
        chosen_node=int(rec["chosen_node"]),
    )


def trace_to_jsonl(trace: Trace) -> str:
    lines = [json.dumps(decision_to_dict(d)) for d in trace.decisions]
    completions = {str(j): [a, f] for j, (a, f) in trace.job_completion.items()}
    lines.append(json.dumps({"completions": completions}))
    return "\n".join(lines) + "\n"


def trace_from_jsonl(lines: Iterable[str]) -> Trace:
    decisions = []
    completion: dict[int, tuple[float, float]] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            if "completions" in rec:
                completion = {
                    int(j): (float(a), float(f)) for j, (a, f) in rec["completions"].items()
                }
            else:
                decisions.append(decision_from_dict(rec))
        except (ValueError, KeyError, TypeError) as exc:
            raise SimulationError(f"trace line {lineno}: {exc}") from exc
    return Trace(tuple(decisions), dict(sorted(completion.items())))


def check_trace(trace: Trace) -> list[str]:
    """Structural problems of a (possibly externally produced) trace."""
    problems = []
    prev = None
    for d in trace.decisions:
        ids = [j for j, _ in d.candidates]
        if ids.count(d.chosen_job) != 1:
            problems.append(f"stage {d.stage}: chosen job {d.chosen_job} appears {ids.count(d.chosen_job)} times among candidates")
        if len(set(ids)) != len(ids):
            problems.append(f"stage {d.stage}: duplicate candidate jobs")
        if prev is not None and (d.time, d.stage) < prev:
            problems.append(f"stage {d.stage}: decisions not sorted by (time, stage)")
        prev = (d.time, d.stage)
    for j, (a, f) in trace.job_completion.items():
        if f < a:
            problems.append(f"job {j}: finish {f} before arrival {a}")
    return problems


def save_trace(trace: Trace, path) -> None:
    with open(path, "w") as fh:
        fh.write(trace_to_jsonl(trace))


def load_trace(path) -> Trace:
    with open(path) as fh:
        return trace_from_jsonl(fh)
