import pytest

from dagexplain.pipeline import PipelineConfig, run_pipeline
from dagexplain.state import JobRuntimeState
from dagexplain.workload import JobDag, TaskNode, Workload


def make_job(node_list, edges=(), job_id=0, arrival=0.0):
    """``node_list`` is a list of ``(num_tasks, per_task_duration)`` per node."""
    nodes = tuple(TaskNode(i, t, d) for i, (t, d) in enumerate(node_list))
    return JobDag(job_id, arrival, nodes, tuple(edges))


def make_workload(*jobs):
    return Workload(tuple(sorted(jobs, key=lambda j: (j.arrival_time, j.id))), None)


def state_of(job, finished=(), unfinished=None):
    """Job state with the listed nodes fully completed."""
    js = JobRuntimeState.fresh(job)
    for n in finished:
        for _ in range(job.nodes[n].num_tasks):
            js.start_task(n)
            js.finish_task(n, 1.0)
    if unfinished:
        for n, count in unfinished.items():
            js.tasks_unfinished[n] = count
            js.tasks_remaining[n] = min(js.tasks_remaining[n], count)
    return js


@pytest.fixture(scope="session")
def pipeline_result():
    return run_pipeline(PipelineConfig())
