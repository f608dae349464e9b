import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagexplain.workload import (
    DagShapeParams,
    WorkloadError,
    generate_workload,
    interarrival_gaps,
    topological_order,
    validate_dag,
    workload_from_json,
    workload_to_json,
)

from conftest import make_job


def test_single_job_arrives_at_zero():
    w = generate_workload(7, 1)
    assert len(w.jobs) == 1
    assert w.jobs[0].arrival_time == 0.0


def test_mean_gap_near_25_seconds():
    gaps = interarrival_gaps(generate_workload(7, 100, 25.0))
    assert 20.0 <= gaps.mean() <= 30.0


def test_same_seed_same_bytes():
    a = workload_to_json(generate_workload(3, 20, 25.0))
    b = workload_to_json(generate_workload(3, 20, 25.0))
    assert a == b
    assert a != workload_to_json(generate_workload(4, 20, 25.0))


def test_gap_mean_converges():
    gaps = interarrival_gaps(generate_workload(11, 10001, 25.0, DagShapeParams(2, 2, 1, 1)))
    # 3 sigma band for the mean of 10000 exponential(25) samples
    assert abs(gaps.mean() - 25.0) <= 3 * 25.0 / np.sqrt(len(gaps))


@pytest.mark.parametrize(
    "shape",
    [
        DagShapeParams(min_nodes=5, max_nodes=4),
        DagShapeParams(min_tasks=10, max_tasks=3),
        DagShapeParams(min_duration=5.0, max_duration=1.0),
        DagShapeParams(min_duration=0.0),
    ],
)
def test_bad_shape_bounds(shape):
    with pytest.raises(WorkloadError):
        generate_workload(1, 5, 25.0, shape)


@pytest.mark.parametrize("n_jobs,mean", [(0, 25.0), (5, 0.0), (5, -1.0)])
def test_bad_parameters(n_jobs, mean):
    with pytest.raises(WorkloadError):
        generate_workload(1, n_jobs, mean)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_generated_dags_are_valid(seed):
    w = generate_workload(seed, 5, 25.0)
    arrivals = [j.arrival_time for j in w.jobs]
    assert arrivals == sorted(arrivals)
    for job in w.jobs:
        assert validate_dag(job) == []
        assert topological_order(job) is not None
        shape = DagShapeParams()
        assert shape.min_nodes <= len(job.nodes) <= shape.max_nodes
        for n in job.nodes:
            assert shape.min_tasks <= n.num_tasks <= shape.max_tasks
            assert shape.min_duration <= n.per_task_duration <= shape.max_duration


def test_validate_single_node():
    assert validate_dag(make_job([(3, 1.0)])) == []


def test_validate_cycle():
    problems = validate_dag(make_job([(1, 1.0), (1, 1.0)], [(0, 1), (1, 0)]))
    assert len(problems) == 1 and "cycle" in problems[0]


def test_validate_task_count():
    problems = validate_dag(make_job([(1, 1.0), (0, 1.0)], [(0, 1)]))
    assert len(problems) == 1 and "task-count" in problems[0]


def test_validate_missing_endpoint_and_bad_duration():
    problems = validate_dag(make_job([(1, -2.0)], [(0, 3)]))
    assert any("missing" in p for p in problems)
    assert any("duration" in p for p in problems)


def test_json_round_trip_field_names():
    w = generate_workload(5, 3)
    text = workload_to_json(w)
    payload = json.loads(text)
    assert set(payload) == {"seed", "jobs"}
    assert set(payload["jobs"][0]) == {"id", "arrival_time", "nodes", "edges"}
    assert set(payload["jobs"][0]["nodes"][0]) == {"id", "num_tasks", "per_task_duration"}
    assert workload_from_json(text) == w


def test_loader_rejects_cyclic_job():
    payload = {
        "seed": None,
        "jobs": [
            {
                "id": 0,
                "arrival_time": 0.0,
                "nodes": [
                    {"id": 0, "num_tasks": 1, "per_task_duration": 1.0},
                    {"id": 1, "num_tasks": 1, "per_task_duration": 1.0},
                ],
                "edges": [[0, 1], [1, 0]],
            }
        ],
    }
    with pytest.raises(WorkloadError):
        workload_from_json(json.dumps(payload))
