import json
from fractions import Fraction as F

import pytest

from stsched.baselines import brute_force_opt
from stsched.cli import main
from stsched.io import FormatError, instance_from_json, instance_to_json, schedule_from_json, schedule_to_json
from stsched.schedule import check_time_constraint

SAMPLE = {"b": 2, "machines": 1, "epsilon": "1/4",
          "jobs": [{"id": "a", "size": "1/2"}, {"id": "b", "size": "1/2"}, {"id": "c", "size": "0.5"}]}


@pytest.fixture
def sample(tmp_path):
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(SAMPLE))
    return path


def test_instance_round_trip():
    inst, eps = instance_from_json(SAMPLE)
    assert inst.n == 3 and inst.B == 2 and eps.inv == 4
    assert instance_from_json(instance_to_json(inst, eps)) == (inst, eps)


@pytest.mark.parametrize("bad", [
    [],
    {"b": 2, "machines": 1},
    {"b": 2, "machines": 1, "jobs": [{"id": "a"}]},
    {"b": 1, "machines": 1, "jobs": []},
    {"b": 2, "machines": 1, "jobs": [{"id": "a", "size": "-1"}]},
    {"b": 2, "machines": 1, "jobs": [{"id": "a", "size": "x"}]},
    {"b": True, "machines": 1, "jobs": []},
])
def test_malformed_instances(bad):
    with pytest.raises(FormatError):
        instance_from_json(bad)


def test_schedule_json_checks_coverage():
    inst, _ = instance_from_json(SAMPLE)
    with pytest.raises(FormatError, match="every job"):
        schedule_from_json([{"id": "a", "machine": 0, "start": "0"}], inst)
    with pytest.raises(FormatError, match="out of range"):
        schedule_from_json([{"id": "a", "machine": 3, "start": "0"}], inst)


def test_solve_ls_output_validates(sample, tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["solve", str(sample), "--algo", "ls", "--out", str(out)]) == 0
    inst, _ = instance_from_json(SAMPLE)
    s = schedule_from_json(json.loads(out.read_text()), inst)
    assert check_time_constraint(s, 2).ok


def test_validate_oracle_output(sample, tmp_path, capsys):
    inst, _ = instance_from_json(SAMPLE)
    s, _ = brute_force_opt(inst)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(schedule_to_json(s)))
    assert main(["validate", str(sample), str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["time_constraint"]["ok"] and report["makespan"] == "2"


def test_validate_rejects_infeasible(sample, tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps([{"id": k, "machine": 0, "start": str(F(i, 2))} for i, k in enumerate("abc")]))
    assert main(["validate", str(sample), str(path)]) == 1
    assert not json.loads(capsys.readouterr().out)["time_constraint"]["ok"]


def test_malformed_input_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{")
    assert main(["solve", str(path)]) == 2
    assert main(["solve", str(tmp_path / "missing.json")]) == 2
    assert main(["solve", "--algo", "nope", str(path)]) == 2


def test_eptas_with_dumps(sample, tmp_path, capsys):
    out, pools, milp, plan = (tmp_path / n for n in ("s.json", "p.json", "m.txt", "plan.json"))
    assert main(["solve", str(sample), "--algo", "eptas", "--out", str(out), "--dump-pools", str(pools),
                 "--dump-milp", str(milp), "--dump-plan", str(plan)]) == 0
    assert "containers" in json.loads(pools.read_text())
    assert "machines:" in milp.read_text()
    assert json.loads(plan.read_text())[0]["machine"] == 0


def test_oracle_cap_exits_1(sample, capsys):
    assert main(["solve", str(sample), "--algo", "bruteforce", "--caps-oracle-jobs", "2"]) == 1


def test_transform_nice(sample, tmp_path, capsys):
    inst, _ = instance_from_json(SAMPLE)
    s, _ = brute_force_opt(inst)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(schedule_to_json(s)))
    assert main(["transform-nice", str(sample), str(path)]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 3


def test_bench_header(capsys):
    assert main(["bench", "--seed", "3", "--count", "2", "--algos", "ls,lpt"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "instance,algo,makespan,opt,ratio,ms"
    assert len(lines) == 5
