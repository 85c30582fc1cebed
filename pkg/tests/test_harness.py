import json

import pytest

from mlinbound import cli
from mlinbound.harness import (
    EXPERIMENTS,
    TRACE,
    ConfigError,
    emit,
    load_config,
    parse_config,
    run,
)

PLANCH = "experiment = plancherel-check\nn = 1\nG = 32\nL = 4\ncases = 3\n"

SMALL = {
    "plancherel-check": PLANCH,
    "decomp-verify": "experiment = decomp-verify\nn = 1\nm = 3\ncases = 40\nsize = 60\n",
    "atomsum-oracle": "experiment = atomsum-oracle\nn = 1\nm = 2\nG = 64\nL = 32\nlam = 2\ncases = 4\nsize = 16\n",
    "scaling-N": "experiment = scaling-N\nn = 1\nm = 2\nG = 64\nL = 8\nlam = 0\nN = 4,8,16\n"
                 "configs = random\ntrials = 8\nascent_steps = 20\ntol.slope = 10\n"
                 "tol.max_min_ratio = 100\n",
    "wavelet-recon": "experiment = wavelet-recon\nM = 1,2\nlam_max = 3\n",
    "coeff-decay": "experiment = coeff-decay\nM = 2\nlam_max = 3\ntol.decay_rate = 1\n",
}


# ------------------------------------------------------------------ config


def test_config_echo_is_byte_identical():
    text = "experiment = scaling-N\nn = 1\nm = 2\nG = 64\nL = 8\nlam = 0\nN = 16,32,64\nconfigs = random,cols\nseed = 4\n"
    cfg = parse_config(text)
    assert cfg.to_text() == text
    assert parse_config(cfg.to_text()).values == cfg.values


def test_config_values_and_defaults():
    cfg = parse_config("# comment\n" + PLANCH)
    assert (cfg.G, cfg.L, cfg.cases, cfg.seed) == (32, 4.0, 3, 0)
    assert cfg.with_values(seed=9).seed == 9


@pytest.mark.parametrize(
    "text,line",
    [
        (PLANCH + "colour = red\n", 6),
        (PLANCH + "G = 64\n", 6),
        (PLANCH.replace("G = 32", "G = 33"), None),
        (PLANCH.replace("L = 4", "L = four"), 4),
        (PLANCH.replace("G = 32\n", ""), None),
        ("n = 1\n", None),
        (PLANCH + "just words\n", 6),
    ],
)
def test_config_rejects(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    if line is not None:
        assert exc.value.line == line


def test_config_wrong_experiment():
    with pytest.raises(ConfigError):
        parse_config(PLANCH, "levelset")


def test_missing_key_is_named():
    with pytest.raises(ConfigError, match="G"):
        parse_config(PLANCH.replace("G = 32\n", ""))


def test_dense_budget_checked_at_parse():
    text = SMALL["atomsum-oracle"].replace("G = 64", "G = 1024")
    with pytest.raises(ConfigError):
        parse_config(text)


def test_tolerance_override():
    cfg = parse_config(PLANCH + "tol.min_ratio = 0.5\n")
    assert cfg.tol("min_ratio", 1e-6) == 0.5


# ------------------------------------------------------------------- runs


@pytest.mark.parametrize("name", sorted(SMALL))
def test_small_runs_pass(name, tmp_path):
    res = run(parse_config(SMALL[name]))
    assert res.checks
    assert res.passed, [c for c in res.checks if not c.passed]
    paths = emit(res, tmp_path)
    doc = json.loads((tmp_path / f"{name}.json").read_text())
    assert doc["status"] == "pass" and doc["traceability"] == TRACE[name]
    assert doc["config"] == SMALL[name]
    assert (tmp_path / f"{name}_checks.csv").read_text().startswith("check,measured,relation,threshold,pass\n")
    assert len(paths) == 2 + len(res.tables)


def test_every_experiment_is_traced():
    assert set(TRACE) == set(EXPERIMENTS)


def test_runs_are_deterministic(tmp_path):
    cfg = parse_config(SMALL["decomp-verify"])
    emit(run(cfg), tmp_path / "a")
    emit(run(cfg, workers=3), tmp_path / "b")
    for f in (tmp_path / "a").glob("*.csv"):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


# --------------------------------------------------------------------- cli


def _write(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_pass(tmp_path, capsys):
    code = cli.main(["plancherel-check", "--config", _write(tmp_path, PLANCH), "--out", str(tmp_path / "o")])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS min_ratio" in out
    assert (tmp_path / "o" / "plancherel-check.json").exists()


def test_cli_failing_check(tmp_path):
    text = PLANCH + "tol.min_ratio = -1\n"
    assert cli.main(["plancherel-check", "--config", _write(tmp_path, text), "--out", str(tmp_path)]) == 1


def test_cli_bad_invocations(tmp_path, capsys):
    assert cli.main(["plancherel-check"]) == 2
    assert cli.main(["no-such", "--config", "x"]) == 2
    assert cli.main(["plancherel-check", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert cli.main(["plancherel-check", "--config", _write(tmp_path, PLANCH + "oops = 1\n")]) == 2
    assert cli.main(["levelset", "--config", _write(tmp_path, PLANCH)]) == 2
    assert "line 6" in capsys.readouterr().err


def test_cli_seed_override(tmp_path):
    cli.main(["decomp-verify", "--config", _write(tmp_path, SMALL["decomp-verify"]),
              "--seed", "7", "--out", str(tmp_path / "o")])
    doc = json.loads((tmp_path / "o" / "decomp-verify.json").read_text())
    assert doc["seed"] == 7


def test_cli_workers_env(tmp_path, monkeypatch):
    cfg = _write(tmp_path, PLANCH)
    monkeypatch.setenv(cli.WORKERS_ENV, "3")
    assert cli.main(["plancherel-check", "--config", cfg, "--out", str(tmp_path)]) == 0
    monkeypatch.setenv(cli.WORKERS_ENV, "many")
    assert cli.main(["plancherel-check", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert cli.main(["plancherel-check", "--config", cfg, "--workers", "0", "--out", str(tmp_path)]) == 2


def test_console_script(tmp_path):
    import subprocess
    import sys

    cfg = _write(tmp_path, PLANCH)
    cmd = [sys.executable, "-m", "mlinbound.cli", "plancherel-check", "--config", cfg, "--out", str(tmp_path / "o")]
    done = subprocess.run(cmd, capture_output=True, text=True)
    assert done.returncode == 0, done.stderr
    assert done.stdout.splitlines()[-1].startswith("plancherel-check: pass")
    bad = subprocess.run(cmd[:3] + ["levelset", "--config", cfg], capture_output=True, text=True)
    assert bad.returncode == 2
