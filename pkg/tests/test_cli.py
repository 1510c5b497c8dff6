import json

from choicebandit.cli import main


def write_config(tmp_path, **changes):
    raw = {
        "name": "tiny",
        "env": {"kind": "nl-env"},
        "variants": [
            {"name": "MNL-GB", "algorithm": "classical-softmax", "model": {"mnl": {"n": 9}}},
            {"name": "NL", "algorithm": "nested-logit",
             "model": {"nl": {"partition": [[0, 3, 4], [1, 5, 6], [2, 7, 8]], "mu_ell": 0.45}}},
        ],
        "steps": 20, "replications": 500,
    }
    raw.update(changes)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw))
    return path


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", "--config", str(write_config(tmp_path)), "--fast", "--out", str(out),
                 "--format", "csv", "--threads", "2", "--seed", "3"])
    assert code == 0
    meta = json.loads((out / "tiny_meta.json").read_text())
    assert meta["config"]["replications"] == 200 and meta["config"]["seed"] == 3
    assert (out / "tiny.csv").exists() and not (out / "tiny_mean_reward.svg").exists()
    assert "tiny: B=200" in capsys.readouterr().out


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["run", "--config", str(write_config(tmp_path, steps=0))]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["presets", "run", "no-such-preset"]) == 2
    assert "config error" in capsys.readouterr().err


def test_presets_list(capsys):
    assert main(["presets", "list"]) == 0
    names = capsys.readouterr().out.split()
    assert "e2-nl-env" in names and "adv-bounds-switching-best" in names


def test_preset_run(tmp_path):
    assert main(["presets", "run", "experts-bounds-single-best-arm", "--fast", "--format", "csv",
                 "--out", str(tmp_path)]) == 0


def test_verify_passes(capsys):
    assert main(["verify"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_verify_failure_exits_3(monkeypatch):
    from choicebandit import verify
    monkeypatch.setattr(verify, "CHECKS", (lambda rng: verify.CheckResult("broken", False, "x"),))
    assert main(["verify"]) == 3
