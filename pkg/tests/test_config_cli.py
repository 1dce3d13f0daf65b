import pytest

from periodic_gp.cli import main
from periodic_gp.config import ConfigError, load_config, parse_config, parse_lines
from periodic_gp.kernels import Matern
from periodic_gp.policies import ContinuousBox, Empirical, FiniteArm, PeriodicGPUCB


def cfg_file(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_defaults_and_overrides():
    cfg = parse_config({"seed": "4", "env.tau": "12"}, {"reps": "3", "out": None})
    assert cfg["seed"] == 4 and cfg["reps"] == 3 and cfg["env.tau"] == 12
    assert cfg["horizon"] == 200 and cfg["mode"] == "synthetic"
    assert cfg.policy_param("periodic", "tau") == 12
    assert cfg.policy_param("periodic", "time_length_scale") == 10.0
    assert cfg["env.time_length_scale"] == 1.0


def test_comments_and_blank_lines():
    raw = parse_lines(["# header", "", "seed = 1  ", "  env.tau=5"])
    assert raw == {"seed": "1", "env.tau": "5"}


@pytest.mark.parametrize("lines", [["seed = 1", "seed = 2"], ["seed 1"]])
def test_line_errors(lines):
    with pytest.raises(ConfigError):
        parse_lines(lines)


@pytest.mark.parametrize("raw", [
    {},
    {"seed": "1", "bogus": "3"},
    {"seed": "1", "env.tau": "0"},
    {"seed": "1", "env.tau": "x"},
    {"seed": "1", "policies": "periodic,unknown"},
    {"seed": "1", "policies": "gp,gp"},
    {"seed": "1", "policy.periodic.colour": "red"},
    {"seed": "1", "policy.nobody.tau": "3"},
    {"seed": "1", "policy.time_varying.epsilon": "1.0"},
    {"seed": "1", "beta.delta": "1.5"},
    {"seed": "1", "mode": "replay"},
    {"seed": "1", "mode": "info-gain", "env.tau": "5", "horizon": "12"},
    {"seed": "1", "beta.kind": "fancy"},
])
def test_invalid_configs(raw):
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_build_policy_with_overrides():
    cfg = parse_config({
        "seed": "1",
        "policy.periodic.tau": "7",
        "policy.periodic.beta.a": "1.5",
        "policy.periodic.action_kernel": "matern32",
        "policy.gp.beta.kind": "finite",
        "policy.contextual.beta.kind": "continuous",
    })
    p = cfg.build_policy("periodic", arm_count=101, d=1, box_width=10.0)
    assert isinstance(p, PeriodicGPUCB) and p.period == 7
    assert p.beta_schedule == Empirical(1.5, 0.4)
    assert p.action_kernel == Matern(1.5, 1.0)
    assert cfg.build_policy("gp", arm_count=101, d=1, box_width=10.0).beta_schedule == FiniteArm(101, 0.1)
    assert cfg.build_policy("contextual", arm_count=101, d=1, box_width=10.0).beta_schedule == ContinuousBox(1, 10.0, 0.1)
    r = cfg.build_policy("resetting", arm_count=101, d=1, box_width=10.0)
    assert r.block_size == 15 and r.reset_phase == 0


def test_to_lines_round_trip():
    cfg = parse_config({"seed": "9", "policies": "gp,periodic", "policy.gp.noise_variance": "0.25"})
    again = parse_config(parse_lines(cfg.to_lines()))
    assert again.values == cfg.values and again.policy_values == cfg.policy_values


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.cfg")


# -- CLI exit codes -----------------------------------------------------------


def test_validate_ok(tmp_path, capsys):
    path = cfg_file(tmp_path, "seed = 1\n")
    assert main(["run", "--config", str(path), "--validate"]) == 0
    assert "mode=synthetic" in capsys.readouterr().out


def test_unknown_key_exit_1(tmp_path, capsys):
    path = cfg_file(tmp_path, "seed = 1\nenv.tua = 20\n")
    assert main(["run", "--config", str(path), "--validate"]) == 1
    assert "env.tua" in capsys.readouterr().err


def test_missing_replay_file_exit_1(tmp_path):
    path = cfg_file(tmp_path, f"seed = 1\nenv.replay_path = {tmp_path / 'none.csv'}\n")
    assert main(["run", "replay", "--config", str(path), "--out", str(tmp_path / "o")]) == 1


def test_replay_too_short_exit_1(tmp_path):
    data = cfg_file(tmp_path, "time,a,b\n1,1,2\n2,2,1\n", "d.csv")
    path = cfg_file(tmp_path, f"seed = 1\nenv.replay_path = {data}\nenv.warmup = 1\nhorizon = 5\n")
    assert main(["run", "replay", "--config", str(path), "--out", str(tmp_path / "o")]) == 1


def test_schedule_domain_exit_2(tmp_path):
    # continuous schedule with a tiny constant has a non-positive log argument
    path = cfg_file(tmp_path, "seed = 1\nreps = 1\nhorizon = 2\npolicies = gp\n"
                              "env.grid_size = 5\nbeta.kind = continuous\nbeta.c1 = 1e-6\n")
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_mode_argument_overrides_config(tmp_path, capsys):
    path = cfg_file(tmp_path, "seed = 1\nhorizon = 6\nenv.tau = 3\ninfogain.trials = 2\n"
                              "env.grid_size = 5\n")
    out = tmp_path / "ig"
    assert main(["run", "info-gain", "--config", str(path), "--out", str(out)]) == 0
    assert (out / "infogain.csv").exists()
    assert "infogain:" in capsys.readouterr().out


def test_full_scale_flag(tmp_path, capsys):
    path = cfg_file(tmp_path, "seed = 1\n")
    assert main(["run", "--config", str(path), "--full-scale", "--validate"]) == 0


def test_bad_subcommand():
    with pytest.raises(SystemExit):
        main(["run", "nonsense", "--config", "x"])
