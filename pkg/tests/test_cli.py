import csv
import json
from pathlib import Path

import pytest

from monoprox.cli import main, read_trace

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def stage(tmp_path, name, **overrides):
    """Copy a shipped config into tmp_path, applying section overrides."""
    cfg = json.loads((CONFIGS / f"{name}.json").read_text())
    for section, values in overrides.items():
        if isinstance(values, dict):
            cfg.setdefault(section, {}).update(values)
        else:
            cfg[section] = values
    cfg["outputs"] = {"trace": "trace.csv", "summary": "summary.json", "sweep": "sweep.csv"}
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    return path


def rows_of(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def rewrite(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


# ---------------------------------------------------------------- run


def test_run_identity_demo(tmp_path):
    cfg = stage(tmp_path, "identity_demo")
    assert main(["run", "--config", str(cfg)]) == 0
    rows = rows_of(tmp_path / "trace.csv")
    assert len(rows) == 10
    # v_k = 2^-k with 1-indexed iterations
    assert float(rows[2]["norm_v"]) == 0.125
    assert rows[3]["k"] == "4" and float(rows[3]["norm_v"]) == 0.0625
    assert float(rows[1]["eps_a"]) == 0.015625
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["passed"] and summary["stop_reason"] == "max_iters"
    assert summary["d0"] == 1.0 and summary["iterations"] == 10
    assert {"name", "passed", "slack", "worst_index", "tolerance"} <= set(summary["checks"][0])


def test_trace_has_enough_digits(tmp_path):
    cfg = stage(tmp_path, "identity_demo")
    main(["run", "--config", str(cfg)])
    row = rows_of(tmp_path / "trace.csv")[2]
    assert row["norm_v_a"] == "0.29166666666666669"


def test_sigma_out_of_range_is_config_error(tmp_path, capsys):
    cfg = stage(tmp_path, "identity_demo", params={"sigma": 1.2})
    assert main(["run", "--config", str(cfg)]) == 2
    assert "sigma" in capsys.readouterr().err


@pytest.mark.parametrize("patch, field", [
    ({"params": {"t": 1.5}}, "params.t"),
    ({"oracle": {"type": "nope"}}, "oracle.type"),
    ({"z0": "x"}, "z0"),
])
def test_schema_errors_name_field(tmp_path, capsys, patch, field):
    cfg = stage(tmp_path, "identity_demo", **patch)
    assert main(["run", "--config", str(cfg)]) == 2
    assert field in capsys.readouterr().err


def test_missing_and_malformed_config(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "none.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  \"problem\": \n")
    assert main(["run", "--config", str(bad)]) == 2
    assert "bad.json:" in capsys.readouterr().err


def test_dimension_mismatch_is_config_error(tmp_path):
    cfg = stage(tmp_path, "identity_demo", z0=[1.0, 2.0, 3.0])
    assert main(["run", "--config", str(cfg)]) == 2


def test_run_large_step_spd(tmp_path):
    cfg = stage(tmp_path, "large_step_spd")
    assert main(["run", "--config", str(cfg)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    ls = [c for c in summary["checks"] if c["name"].startswith("large_step.")]
    assert len(ls) == 6 and all(c["passed"] for c in ls)


def test_run_ppm_with_errors(tmp_path):
    cfg = stage(tmp_path, "ppm_errors")
    assert main(["run", "--config", str(cfg)]) == 0
    names = {c["name"] for c in json.loads((tmp_path / "summary.json").read_text())["checks"]}
    assert {"ppm.error_bound", "ppm.distance_bound"} <= names


def test_seed_env_override(tmp_path, monkeypatch):
    cfg = stage(tmp_path, "perturbed_spd", params={"max_iters": 20})
    main(["run", "--config", str(cfg)])
    base = (tmp_path / "trace.csv").read_bytes()
    monkeypatch.setenv("MONOPROX_SEED", "7")
    main(["run", "--config", str(cfg)])
    assert (tmp_path / "trace.csv").read_bytes() == base
    monkeypatch.setenv("MONOPROX_SEED", "8")
    main(["run", "--config", str(cfg)])
    assert (tmp_path / "trace.csv").read_bytes() != base
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["config"]["params"]["seed"] == 8


def test_bad_seed_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MONOPROX_SEED", "abc")
    assert main(["run", "--config", str(stage(tmp_path, "identity_demo"))]) == 2


# ---------------------------------------------------------------- certify


@pytest.mark.parametrize("name", ["identity_demo", "perturbed_spd", "large_step_spd", "ppm_errors"])
def test_certify_round_trip(tmp_path, name):
    cfg = stage(tmp_path, name)
    assert main(["run", "--config", str(cfg), "--full-state"]) == 0
    assert main(["certify", "--trace", str(tmp_path / "trace.csv"), "--config", str(cfg)]) == 0
    out = json.loads((tmp_path / "trace.csv.certify.json").read_text())
    assert out["mode"] == "full" and out["passed"]
    names = {c["name"] for c in out["checks"]}
    assert {"trace.sidecar_consistency", "trace.chain"} <= names


def test_certify_without_sidecar_needs_scalar_only(tmp_path):
    cfg = stage(tmp_path, "identity_demo")
    main(["run", "--config", str(cfg)])
    trace = str(tmp_path / "trace.csv")
    assert main(["certify", "--trace", trace, "--config", str(cfg)]) == 1
    assert main(["certify", "--trace", trace, "--config", str(cfg), "--scalar-only"]) == 0
    out = json.loads((tmp_path / "trace.csv.certify.json").read_text())
    assert out["mode"] == "scalar" and out["notes"]


def test_certify_eps_tampering(tmp_path):
    cfg = stage(tmp_path, "perturbed_spd", params={"max_iters": 30})
    main(["run", "--config", str(cfg)])
    trace = tmp_path / "trace.csv"
    rows = rows_of(trace)
    idx = next(i for i, r in enumerate(rows) if float(r["eps"]) > 0)
    rows[idx]["eps"] = repr(float(rows[idx]["eps"]) * 1e6)
    rewrite(trace, rows)
    summary = tmp_path / "cert.json"
    code = main(["certify", "--trace", str(trace), "--config", str(cfg), "--scalar-only",
                 "--summary", str(summary)])
    assert code == 1
    checks = {c["name"]: c for c in json.loads(summary.read_text())["checks"]}
    assert not checks["scalar.step.eps_budget"]["passed"]
    assert checks["scalar.step.eps_budget"]["worst_index"] == idx + 1


def test_certify_csv_edit_against_sidecar(tmp_path):
    cfg = stage(tmp_path, "identity_demo")
    main(["run", "--config", str(cfg), "--full-state"])
    trace = tmp_path / "trace.csv"
    rows = rows_of(trace)
    rows[4]["norm_v_a"] = repr(float(rows[4]["norm_v_a"]) * 0.5)
    rewrite(trace, rows)
    assert main(["certify", "--trace", str(trace), "--config", str(cfg)]) == 1
    checks = {c["name"]: c for c in
              json.loads((tmp_path / "trace.csv.certify.json").read_text())["checks"]}
    assert not checks["trace.sidecar_consistency"]["passed"]
    assert checks["trace.sidecar_consistency"]["worst_index"] == 5


def test_certify_empty_trace(tmp_path):
    cfg = stage(tmp_path, "identity_demo")
    trace = tmp_path / "empty.csv"
    trace.write_text("k,t,lambda,norm_v,eps,res_norm,Lambda,norm_v_a,eps_a,dist_to_zero\n")
    assert main(["certify", "--trace", str(trace), "--config", str(cfg)]) == 2
    trace.write_text("")
    assert main(["certify", "--trace", str(trace), "--config", str(cfg)]) == 2


def test_read_trace_rejects_garbage(tmp_path):
    from monoprox.exceptions import ConfigError

    p = tmp_path / "t.csv"
    p.write_text("k,t,lambda,norm_v,eps,res_norm,Lambda,norm_v_a,eps_a,dist_to_zero\n1,x,1,1,0,1,1,1,0,1\n")
    with pytest.raises(ConfigError, match=":2:"):
        read_trace(p)


# ---------------------------------------------------------------- sweep


def test_sweep_identity_ratios(tmp_path):
    cfg = stage(tmp_path, "identity_demo", oracle={"type": "large_step", "eta": 0.1},
                params={"max_iters": 1024, "tol_v": 1e-12, "tol_eps": 1e-12})
    ks = "8,16,32,64,128,256,512,1024"
    assert main(["sweep", "--config", str(cfg), "--k", ks]) == 0
    rows = rows_of(tmp_path / "sweep.csv")
    assert rows
    for r in rows:
        assert float(r["ratio_pointwise_v"]) <= 1 and float(r["ratio_ergodic_v"]) <= 1
        # sigma = 0
        assert float(r["bound_pointwise_eps"]) == 0 and float(r["min_eps"]) == 0
        assert float(r["eps_a"]) <= float(r["bound_ergodic_eps"])
        assert float(r["Lambda"]) >= float(r["bound_Lambda"])


def test_sweep_slope_on_spd(tmp_path):
    cfg = stage(tmp_path, "large_step_spd")
    assert main(["sweep", "--config", str(cfg), "--k", "8,16,32,64,128,256,512,1024"]) == 0
    info = json.loads((tmp_path / "sweep.csv.json").read_text())
    assert info["passed"] and info["slope_norm_v_a"] <= -1.4


def test_sweep_rows_are_prefixes_of_longer_run(tmp_path):
    cfg = stage(tmp_path, "perturbed_spd", params={"max_iters": 64})
    main(["sweep", "--config", str(cfg), "--k", "4,8,16", "--out", str(tmp_path / "a.csv")])
    main(["sweep", "--config", str(cfg), "--k", "4,8,16,32,64", "--out", str(tmp_path / "b.csv")])
    a, b = rows_of(tmp_path / "a.csv"), rows_of(tmp_path / "b.csv")
    # bound columns use eta from the run, so compare the observed columns
    for ra, rb in zip(a, b):
        for col in ("k", "min_norm_v", "min_eps", "norm_v_a", "eps_a", "Lambda"):
            assert ra[col] == rb[col]


def test_sweep_rejects_unsorted_k(tmp_path):
    cfg = stage(tmp_path, "identity_demo")
    assert main(["sweep", "--config", str(cfg), "--k", "16,8"]) == 2


# ---------------------------------------------------------------- determinism


@pytest.mark.parametrize("name", ["perturbed_spd", "large_step_spd", "ppm_errors"])
def test_byte_identical_reruns(tmp_path, name):
    cfg = stage(tmp_path, name)
    files = ["trace.csv", "summary.json", "trace.csv.state.json"]
    main(["run", "--config", str(cfg), "--full-state"])
    first = [(tmp_path / f).read_bytes() for f in files]
    main(["run", "--config", str(cfg), "--full-state"])
    assert [(tmp_path / f).read_bytes() for f in files] == first
