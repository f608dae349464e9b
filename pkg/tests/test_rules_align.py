import math

import numpy as np
import pytest

from dagexplain.policy import RULES, PolicyRef, rule_choice
from dagexplain.rules_align import AlignmentReport, align_rules, branch_label, rule_choices
from dagexplain.simulator import replay, simulate
from dagexplain.state import ContractViolation, ready_nodes
from dagexplain.workload import DagShapeParams, generate_workload

from conftest import make_job, make_workload, state_of


def test_snf_example():
    job = make_job([(10, 1.0), (1, 1.0), (3, 1.0)], [(0, 1)])
    assert rule_choice("snf", state_of(job)) == 2


def test_cps_example():
    job = make_job([(1, 1.0), (1, 5.0), (1, 2.0), (1, 1.0)], [(0, 1), (0, 2), (1, 3), (2, 3)])
    assert rule_choice("cps", state_of(job, finished=[0])) == 1


def test_cps_falls_back_to_snf():
    # critical path 0 -> 1 but node 0 is fully dispatched, so only node 2 is ready
    job = make_job([(2, 5.0), (1, 5.0), (1, 1.0)], [(0, 1)])
    js = state_of(job)
    js.start_task(0)
    js.start_task(0)
    assert ready_nodes(js) == [2]
    assert rule_choice("cps", js) == 2


def test_fcfs_example():
    job = make_job([(1, 1.0), (1, 1.0), (1, 1.0)], [(0, 1), (0, 2)])
    js = state_of(job, finished=[0])
    js.node_ready_time[1], js.node_ready_time[2] = 4.0, 9.0
    assert rule_choice("fcfs", js) == 1
    js.node_ready_time[1] = 9.0
    assert rule_choice("fcfs", js) == 1  # tie -> lowest id


@pytest.mark.parametrize("rule", RULES)
def test_rule_requires_ready_node(rule):
    job = make_job([(1, 1.0), (1, 1.0)], [(0, 1)])
    js = state_of(job)
    js.start_task(0)
    with pytest.raises(ContractViolation):
        rule_choice(rule, js)


def test_unknown_rule():
    with pytest.raises(ValueError):
        rule_choice("lifo", state_of(make_job([(1, 1.0)])))


SHAPE = DagShapeParams(max_nodes=7, max_tasks=10)


@pytest.mark.parametrize("rule", RULES)
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_self_alignment(rule, seed):
    w = generate_workload(seed, 8, 15.0, SHAPE)
    trace, _ = simulate(w, 3, PolicyRef(rule))
    choices = rule_choices(w, trace, 3)
    (report,) = align_rules(trace, lambda s: "all", choices)
    assert report.accuracy[rule] == 1.0
    assert report.n_decisions == len(trace.decisions)


@pytest.mark.parametrize("rule", RULES)
def test_rules_always_pick_ready_nodes(rule):
    w = generate_workload(4, 6, 15.0, SHAPE)
    trace, _ = simulate(w, 2, PolicyRef("random", seed=4))

    def check(decision, active):
        for js in active.values():
            if ready_nodes(js):
                assert rule_choice(rule, js) in ready_nodes(js)

    replay(w, trace, 2, on_decision=check)


def test_accuracy_matches_brute_force_recount():
    w = generate_workload(5, 8, 15.0, SHAPE)
    trace, _ = simulate(w, 3, PolicyRef("random", seed=5))
    choices = rule_choices(w, trace, 3)
    branch = {d.stage: "odd" if d.stage % 3 else "third" for d in trace.decisions}
    reports = {r.branch: r for r in align_rules(trace, branch, choices)}
    for b in ("odd", "third"):
        decisions = [d for d in trace.decisions if branch[d.stage] == b]
        for rule in RULES:
            hits = sum(1 for d in decisions if choices[d.stage][rule] == d.chosen_node)
            assert reports[b].accuracy[rule] == hits / len(decisions)
        assert reports[b].accuracy[reports[b].best] == max(reports[b].accuracy.values())


def test_empty_branch_omitted():
    w = make_workload(make_job([(2, 1.0)]))
    trace, _ = simulate(w, 1, PolicyRef())
    reports = align_rules(trace, lambda s: "only", rule_choices(w, trace, 1))
    assert [r.branch for r in reports] == ["only"]


def test_random_policy_near_chance():
    # three independent wide nodes per job: mostly three ready nodes per decision
    jobs = [
        make_job([(30, 1.0 + j % 3), (30, 2.5), (30, 4.0 - j % 2)], job_id=j, arrival=20.0 * j)
        for j in range(12)
    ]
    w = make_workload(*jobs)
    trace, _ = simulate(w, 3, PolicyRef("random", seed=17))
    inv_ready = []
    replay(w, trace, 3, on_decision=lambda d, act: inv_ready.append(1 / len(ready_nodes(act[d.chosen_job]))))
    expected = float(np.mean(inv_ready))
    band = 4 * math.sqrt(sum(p * (1 - p) for p in inv_ready)) / len(inv_ready)
    (report,) = align_rules(trace, lambda s: "all", rule_choices(w, trace, 3))
    assert 0.3 < expected < 0.4
    for rule in RULES:
        assert abs(report.accuracy[rule] - expected) <= band


def test_reference_branches(pipeline_result):
    reports = {r.branch: r for r in pipeline_result.alignment}
    assert reports["locality=true"].best == "fcfs"
    assert reports["locality=true"].accuracy["fcfs"] >= 0.95
    assert reports["locality=false"].best == "snf"
    assert reports["locality=false"].accuracy["snf"] >= 0.95


def test_report_dict_shape():
    r = AlignmentReport("all", {"snf": 0.5, "cps": 0.25, "fcfs": 0.5}, "snf", 4)
    assert r.to_dict() == {
        "branch": "all",
        "accuracy": {"snf": 0.5, "cps": 0.25, "fcfs": 0.5},
        "best": "snf",
        "decisions": 4,
    }


def test_branch_label_root_only(pipeline_result):
    tree = pipeline_result.tree
    assert tree.root.feature == 6
    assert branch_label(tree, tree.root.right).startswith("locality=true")
