import json

import numpy as np
import pytest

from corruptlab.lab import (
    DEFAULTS,
    EXPERIMENTS,
    RUNNERS,
    Check,
    ConfigError,
    ExperimentConfig,
    Report,
    dump_config,
    load_config,
    parse_config_text,
    rederive,
    run,
)
from corruptlab.lab.cli import main
from corruptlab.lab.lower_bounds import (
    DegreeInstance,
    _walsh_hadamard,
    colliding_indices,
    correlation_test,
    expected_repeats,
    repeat_count,
)

SMALL = {
    "counterexample": dict(m_values=(2, 4)),
    "easy-direction": dict(trials=2000),
    "support-size": dict(trials=2000, calibration_trials=2000),
    "degree-lb": dict(d=8, n=4, m=16, trials=400, calibration_trials=200),
    "conversions": dict(m=4, n=2),
    "partial-adaptive": dict(m=4, trials=2000),
    "certify": dict(m_values=(4, 6), functions=3),
}


# --- configuration ---


def test_every_experiment_has_defaults_and_runner():
    assert set(EXPERIMENTS) == set(DEFAULTS) == set(RUNNERS)
    for name in EXPERIMENTS:
        ExperimentConfig(name).resolved()


def test_parse_config_text():
    text = "experiment = support-size\n# comment\nk: 100  # inline\nlarge-k = 1e4\nm_values = 2, 4\neta = 0.25\n"
    vals = parse_config_text(text)
    assert vals == {"experiment": "support-size", "k": 100, "large_k": 10000, "m_values": (2, 4), "eta": 0.25}
    with pytest.raises(ConfigError):
        parse_config_text("bogus = 1")
    with pytest.raises(ConfigError):
        parse_config_text("k = 1.5")
    with pytest.raises(ConfigError):
        parse_config_text("just words")


def test_load_and_dump_round_trip(tmp_path):
    cfg = ExperimentConfig("certify", m_values=(4, 6), functions=2, seed=5).resolved()
    path = tmp_path / "c.cfg"
    path.write_text(dump_config(cfg))
    back = load_config(path).resolved()
    assert back.as_dict() == cfg.as_dict()
    assert load_config(path, seed=9).seed == 9
    path.write_text("k = 3\n")
    with pytest.raises(ConfigError):
        load_config(path)


@pytest.mark.parametrize("experiment,bad", [
    ("counterexample", dict(eta=0.25)),
    ("easy-direction", dict(m=10)),
    ("support-size", dict(k=500, large_k=400)),
    ("degree-lb", dict(b=1.0)),
    ("degree-lb", dict(m=3, n=4)),
    ("conversions", dict(m=12)),
    ("partial-adaptive", dict(domain_size=5)),
    ("certify", dict(cost="nope")),
    ("certify", dict(cost="file")),
    ("easy-direction", dict(trials=5)),
    ("easy-direction", dict(eta=0.0)),
])
def test_validation_rejects(experiment, bad):
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment, **bad).resolved()


def test_unknown_experiment():
    with pytest.raises(ConfigError):
        ExperimentConfig("nope").resolved()


# --- reports ---


@pytest.mark.parametrize("value,rel,bound,slack,expected", [
    (1.0, "<=", 1.0, 0.0, True),
    (1.1, "<=", 1.0, 0.05, False),
    (0.96, ">=", 1.0, 0.05, True),
    (0.5, "==", 0.51, 0.02, True),
    (0.5, "==", 0.55, 0.02, False),
    (float("nan"), "<=", 1.0, 0.0, False),
])
def test_rederive(value, rel, bound, slack, expected):
    assert rederive(value, rel, bound, slack) is expected
    assert Check("c", value, rel, bound, slack).passed is expected


def test_check_rejects_relation():
    with pytest.raises(ValueError):
        Check("c", 1, "<", 2)


def test_report_json_fields_rederive():
    r = Report("x", {"a": (1, 2)})
    r.check("ok", 0.1, "<=", 0.2)
    r.check("bad", 0.3, "<=", 0.2, slack=0.05, stderr=0.01, note="why")
    r.measure("arr", np.array([1.5, 2.5]).tolist())
    d = json.loads(r.to_json())
    assert d["passed"] is False
    for c in d["checks"]:
        assert rederive(c["value"], c["relation"], c["bound"], c["slack"]) == c["passed"]
    assert d["config"] == {"a": [1, 2]}
    assert "elapsed" not in d


@pytest.mark.parametrize("experiment", EXPERIMENTS)
def test_small_runs_are_deterministic(experiment):
    cfg = ExperimentConfig(experiment, seed=3, **SMALL[experiment]).resolved()
    a, b = run(cfg), run(cfg)
    assert a.to_json() == b.to_json()
    d = json.loads(a.to_json())
    assert d["experiment"] == experiment and d["checks"]
    for c in d["checks"]:
        assert rederive(c["value"], c["relation"], c["bound"], c["slack"]) == c["passed"]


# --- command line ---


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["counterexample", "--out", str(out), "--quiet"]) == 0
    data = json.loads(out.read_text())
    assert data["passed"] is True
    assert capsys.readouterr().err == ""
    assert (tmp_path / "r.json.log").read_text().strip()


def test_cli_config_errors(tmp_path, capsys):
    assert main(["counterexample", "--eta", "0.3"]) == 2
    cfg = tmp_path / "c.cfg"
    cfg.write_text("experiment = certify\n")
    assert main(["counterexample", "--config", str(cfg)]) == 2
    assert "not 'counterexample'" in capsys.readouterr().err


def test_cli_failing_report_exits_one(capsys):
    assert main(["certify", "--quiet"]) == 1
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_cli_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("experiment = support-size\ntrials = 2000\ncalibration_trials = 2000\n")
    code = main(["support-size", "--config", str(cfg), "--seed", "4"])
    d = json.loads(capsys.readouterr().out)
    assert d["config"]["seed"] == 4 and d["config"]["trials"] == 2000
    assert code == (0 if d["passed"] else 1)


# --- lower-bound building blocks ---


def test_repeat_count_and_collisions():
    s = np.array([[1, 2, 3, 4], [1, 1, 2, 2], [5, 5, 5, 1]])
    assert repeat_count(s).tolist() == [0, 2, 2]
    mask = colliding_indices(s)
    assert mask.sum(axis=1).tolist() == [0, 4, 3]
    assert mask[2].tolist() == [True, True, True, False]


def test_expected_repeats_birthday():
    rng = np.random.default_rng(0)
    k, n = 50, 12
    draws = rng.integers(0, k, (40_000, n))
    emp = repeat_count(draws).mean()
    assert emp == pytest.approx(expected_repeats(k, n), abs=4 * repeat_count(draws).std() / 200)
    assert expected_repeats(k, 1) == pytest.approx(0, abs=1e-12)


def test_walsh_hadamard_matches_matrix():
    rng = np.random.default_rng(1)
    size = 16
    h = np.array([[1]])
    while len(h) < size:
        h = np.block([[h, h], [h, -h]])
    a = rng.random((3, size))
    assert np.allclose(_walsh_hadamard(a.copy()), a @ h.T)


def test_correlation_test_inner_products():
    d = 4
    inst = DegreeInstance(d, 1.5, 0.5)
    pop = inst.pop
    # +-1 strings as bitmasks: 0b0000 and 0b0001 have inner product d - 2
    s = np.array([[0b0000, 0b0001], [0b0000, 0b1111]])
    assert correlation_test(s, d - 2, pop, d).tolist() == [True, False]


def test_degree_instance_budget_and_draws():
    inst = DegreeInstance(6, 1.5, 0.5)
    assert inst.budget_changes(30) == 20
    x = inst.draw(np.random.default_rng(0), (20_000, 1))
    star_rate = (x == inst.star).mean()
    expect = inst.c / 2 + (1 - inst.c / 2) / 2**6
    assert star_rate == pytest.approx(expect, abs=4 * np.sqrt(expect / 20_000))
    out = inst.corrupt(x.reshape(-1, 10)[:50], "full", 2)
    changed = (out != x.reshape(-1, 10)[:50]).sum(axis=1)
    assert (changed <= inst.budget_changes(10)).all()
