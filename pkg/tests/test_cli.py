"""Command-line interface: output shapes, determinism, exit codes."""

import io
import json

import pytest

from openride.cli import main
from openride.numeric import DEFAULT_TOLERANCE, tolerance


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def lb_instance(tmp_path, capsys):
    """The four-request half-line file for alpha = 1.2, epsilon = 0.01."""
    code, out, _ = run(
        capsys, "lower-bound", "--alpha", "1.2", "--epsilon", "0.01", "--emit-instance"
    )
    assert code == 0
    path = tmp_path / "inst.json"
    path.write_text(out)
    return str(path)


def test_lower_bound_emit_instance_shape(lb_instance):
    obj = json.loads(open(lb_instance).read())
    assert obj["metric"] == {"type": "halfline"}
    assert obj["capacity"] == 1
    assert len(obj["requests"]) == 4
    assert obj["requests"][-1] == {"a": 2.8, "b": 2.8, "t": 4.8}


def test_lower_bound_report(capsys):
    code, out, _ = run(capsys, "lower-bound", "--alpha", "1.2", "--epsilon", "0.01")
    assert code == 0
    obj = json.loads(out)
    assert obj["ratio"] == pytest.approx(2.4075)
    assert obj["predicted"] == pytest.approx(2.4075)
    assert obj["alpha"] == 1.2 and obj["epsilon"] == 0.01


def test_lower_bound_domain_error(capsys):
    code, out, err = run(capsys, "lower-bound", "--alpha", "1.5")
    assert code == 1
    assert out == ""
    assert err.startswith("error:")


def test_ratio_json(capsys, lb_instance):
    code, out, _ = run(
        capsys, "ratio", "--instance", lb_instance, "--algo", "lazy", "--alpha", "1.2"
    )
    assert code == 0
    obj = json.loads(out)
    assert obj == {
        "algo": "lazy",
        "alpha": 1.2,
        "completion": 11.556,
        "opt": 4.8,
        "ratio": 2.4075,
    }


def test_ratio_csv(capsys, lb_instance):
    code, out, _ = run(
        capsys,
        "ratio", "--instance", lb_instance, "--algo", "lazy", "--alpha", "1.2",
        "--format", "csv", "--precision", "3",
    )
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == "algo,alpha,completion,opt,ratio"
    assert lines[1] == "lazy,1.2,11.556,4.8,2.408"
    assert lines[2] == ""


def test_simulate_json_and_csv(capsys, lb_instance):
    code, out, _ = run(
        capsys, "simulate", "--instance", lb_instance, "--algo", "lazy", "--alpha", "1.2"
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["algo"] == "lazy" and obj["alpha"] == 1.2
    assert obj["completion"] == pytest.approx(11.556)
    assert len(obj["schedules"]) == 2
    assert obj["schedules"][0]["t"] == pytest.approx(4.776)
    assert any(ev["kind"] == "arrival" for ev in obj["events"])

    code, out, _ = run(
        capsys,
        "simulate", "--instance", lb_instance, "--algo", "lazy", "--alpha", "1.2",
        "--format", "csv",
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "index,start,length,interrupted,requests"
    assert lines[1] == "1,4.776,3.98,False,3"
    assert lines[2] == "2,8.756,2.8,False,1"


def test_simulate_reads_stdin(capsys, monkeypatch, lb_instance):
    monkeypatch.setattr("sys.stdin", io.StringIO(open(lb_instance).read()))
    code, out, _ = run(
        capsys, "simulate", "--instance", "-", "--algo", "replan"
    )
    assert code == 0
    assert json.loads(out)["algo"] == "replan"


def test_opt_value_and_cutoff(capsys, lb_instance):
    code, out, _ = run(capsys, "opt", "--instance", lb_instance)
    assert code == 0
    obj = json.loads(out)
    assert obj["value"] == pytest.approx(4.8)
    assert obj["schedule"]["start"] == 0.0
    assert obj["schedule"]["actions"][0][0] == "load"

    code, out, _ = run(capsys, "opt", "--instance", lb_instance, "--upto", "0")
    assert json.loads(out)["value"] == pytest.approx(3.98)

    code, out, _ = run(capsys, "opt", "--instance", lb_instance, "--format", "csv")
    assert out.split("\n")[0] == "value,actions"


def test_missing_instance_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["simulate", "--algo", "lazy", "--alpha", "1.2"])
    assert ei.value.code == 2


def test_lazy_without_alpha_is_usage_error(capsys, lb_instance):
    with pytest.raises(SystemExit) as ei:
        main(["simulate", "--instance", lb_instance, "--algo", "lazy"])
    assert ei.value.code == 2


def test_unreadable_instance(capsys):
    code, out, err = run(
        capsys, "ratio", "--instance", "/no/such/file.json", "--algo", "ignore"
    )
    assert code == 1
    assert err.startswith("error: cannot read instance")


def test_invalid_instance_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out, err = run(capsys, "opt", "--instance", str(bad))
    assert code == 1
    assert "invalid JSON" in err


def test_sweep_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--grid", "1:2:0.5")
    assert code == 0
    rows = json.loads(out)
    assert [r["alpha"] for r in rows] == [1.0, 1.5, 2.0]
    assert rows[0]["bound"] == pytest.approx(2.5)
    assert rows[0]["source"] == "2+1/(2*alpha)"
    assert rows[2]["source"] == "1+alpha"


def test_sweep_csv_stable(capsys):
    _, first, _ = run(capsys, "sweep", "--grid", "0:1:0.25", "--format", "csv")
    _, second, _ = run(capsys, "sweep", "--grid", "0:1:0.25", "--format", "csv")
    assert first == second
    lines = first.strip().split("\n")
    assert lines[0] == "alpha,bound,source"
    assert len(lines) == 6  # header plus five grid points


def test_bad_grid(capsys):
    for grid in ("2:1:0.1", "1:2:-0.5", "nonsense"):
        code, _, err = run(capsys, "sweep", "--grid", grid)
        assert code == 1
        assert err.startswith("error:")


def test_factor_reveal_single(capsys):
    code, out, _ = run(capsys, "factor-reveal", "--alpha", "1.3660254")
    assert code == 0
    obj = json.loads(out)
    assert obj["value"] == 2.366025
    assert obj["closed_form"] == 2.366025
    assert obj["binaries"] == [0, 1, 1, 1]
    assert obj["assignment"] == [
        1.0, 1.732051, 0.732051, 0.633975, 0.732051, 1.0, 0.0, 0.633975, 0.0, 0.633975,
    ]
    _, again, _ = run(capsys, "factor-reveal", "--alpha", "1.3660254")
    assert again == out


def test_factor_reveal_precision(capsys):
    code, out, _ = run(capsys, "factor-reveal", "--alpha", "1.3660254", "--precision", "2")
    assert code == 0
    assert json.loads(out)["value"] == 2.37


def test_factor_reveal_grid_csv(capsys):
    code, out, _ = run(
        capsys, "factor-reveal", "--grid", "1.3:1.5:0.1", "--format", "csv"
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "alpha,value,closed_form,binaries"
    assert len(lines) == 4
    assert lines[1].startswith("1.3,") and lines[1].endswith(",0111")


def test_factor_reveal_alpha_xor_grid(capsys):
    for argv in (
        ["factor-reveal"],
        ["factor-reveal", "--alpha", "1.2", "--grid", "1:2:0.5"],
    ):
        with pytest.raises(SystemExit) as ei:
            main(argv)
        assert ei.value.code == 2
        capsys.readouterr()


def test_fuzz_small_run(capsys):
    code, out, _ = run(
        capsys,
        "fuzz", "--algo", "lazy", "--alpha", "1.3", "--count", "20", "--seed", "3",
        "--check-schedules",
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["count"] == 20 and obj["seed"] == 3
    assert obj["violations"] == 0
    assert obj["worst"] >= 1.0
    assert "worst_instance" in obj


def test_fuzz_config_file_with_flag_override(capsys, tmp_path):
    cfgfile = tmp_path / "fuzz.json"
    cfgfile.write_text(json.dumps({
        "count": 10,
        "seed": 1,
        "spaces": ["halfline"],
        "capacities": ["inf", 1],
    }))
    code, out, _ = run(
        capsys, "fuzz", "--algo", "ignore", "--config", str(cfgfile), "--seed", "5"
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["count"] == 10
    assert obj["seed"] == 5  # the flag wins over the file
    assert obj["worst_instance"]["metric"]["type"] == "halfline"


def test_fuzz_bad_config_key(capsys, tmp_path):
    cfgfile = tmp_path / "fuzz.json"
    cfgfile.write_text(json.dumps({"countt": 10}))
    code, _, err = run(capsys, "fuzz", "--algo", "ignore", "--config", str(cfgfile))
    assert code == 1
    assert "bad fuzz config" in err


def test_fuzz_lazy_needs_alpha(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["fuzz", "--algo", "lazy", "--count", "5"])
    assert ei.value.code == 2


def test_tolerance_flag_is_restored(capsys, lb_instance):
    code, _, _ = run(
        capsys,
        "ratio", "--instance", lb_instance, "--algo", "ignore", "--tolerance", "1e-6",
    )
    assert code == 0
    assert tolerance() == DEFAULT_TOLERANCE
