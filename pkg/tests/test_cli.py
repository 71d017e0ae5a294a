import json

import pytest

from heisenlab import cli

SMALL = {"grid": {"T": 1.0, "steps": 16}, "replicas": 1000, "seed": 5}


def test_empty_check_list_passes():
    rep = cli.run({"checks": []})
    assert rep.records == [] and rep.passed


def test_unknown_catalog_entry():
    with pytest.raises(cli.ConfigError, match="unknown catalog entry"):
        cli.run({"model": {"catalog": "nope"}, "checks": []})


def test_records_have_required_fields():
    rep = cli.run({**SMALL, "checks": [{"name": "ricci"}, {"name": "lsi"}]})
    assert rep.records
    for r in rep.records:
        assert {"name", "anchor", "lhs", "rhs", "stderr", "tolerance_rule", "pass"} <= set(r)
        assert r["anchor"]


def test_report_deterministic_and_worker_independent():
    cfg = {**SMALL, "checks": [{"name": "qi"}, {"name": "heat", "params": {"snapshots": 8}}]}
    first = cli.run(cfg).to_json()
    from heisenlab.montecarlo import workers

    with workers(4):
        second = cli.run(cfg).to_json()
    assert first == second


def test_all_catalog_models_build():
    for name in cli.CATALOG:
        m = cli.build_model({"catalog": name})
        assert m.n >= 2 and m.d >= 1
    explicit = cli.build_model({"omega": [[[0, 1], [-1, 0]]]})
    assert (explicit.n, explicit.d) == (2, 1)


def test_polynomial_config_literal():
    poly = [[{"coeff": 1.0, "exponents": [0, 0, 2]}]]
    rep = cli.run({**SMALL, "checks": [{"name": "heat", "params": {"polys": poly, "snapshots": 8}}]})
    assert len(rep.records) == 1


def test_describe_and_catalog_text():
    text = cli.list_catalog()
    for name in ("real-heisenberg", "complex-heisenberg", "weighted-q", "block-sequence", "path-space"):
        assert name in text
    assert "Sobolev" in cli.describe_check("lsi")
    assert "structure-constant" in cli.describe_check("ricci")
    with pytest.raises(cli.ConfigError):
        cli.describe_check("bogus")


def test_main_exit_codes(tmp_path, capsys):
    assert cli.main(["catalog"]) == 0
    assert cli.main(["bogus"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"model": {"catalog": "nope"}}))
    assert cli.main(["verify", "forms", "--config", str(bad)]) == 2
    assert "unknown catalog entry" in capsys.readouterr().err
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({**SMALL, "checks": [{"name": "ricci"}]}))
    out = tmp_path / "r.json"
    assert cli.main(["ricci", "--config", str(cfg), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["pass"] is True
    csv_out = tmp_path / "r.csv"
    assert cli.main(["verify", "forms", "--config", str(cfg), "--format", "csv", "--out", str(csv_out)]) == 0
    assert csv_out.read_text().startswith("name,anchor,lhs")


def test_failing_check_exit_code(tmp_path, monkeypatch):
    def failing(ctx, params):
        return [("always-fails", {"lhs": 1.0, "rhs": 0.0, "pass": False})]

    monkeypatch.setitem(cli.CHECKS, "forms", cli.Check("a deliberately failing check", "", failing))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({**SMALL, "checks": [{"name": "forms"}]}))
    assert cli.main(["verify", "all", "--config", str(cfg), "--out", str(tmp_path / "o.json")]) == 1


def test_simulate_and_distance(tmp_path, capsys):
    samples = tmp_path / "s.csv"
    assert cli.main(["simulate", "--replicas", "2000", "--steps", "20", "--samples-csv", str(samples)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert set(summary) >= {"estimate", "stderr", "target", "pass"}
    assert samples.read_text().splitlines()[0] == "w0,w1,c0"
    assert cli.main(["distance", "--target", '{"w": [0.6, 0.8], "c": [0.0]}']) == 0


def test_seed_override(monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "99")

    class Args:
        config = None
        seed = None

    assert cli._load_config(Args())["seed"] == 99
    Args.seed = 7
    assert cli._load_config(Args())["seed"] == 7
