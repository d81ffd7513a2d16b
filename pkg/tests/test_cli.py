import pytest

from constrained_consensus.cli import (
    EXIT_GENERATION,
    EXIT_INVARIANT,
    EXIT_OK,
    EXIT_USAGE,
    ConfigError,
    coerce_config,
    format_config,
    main,
    parse_config_text,
)


def test_validate_all_suites_pass(capsys):
    assert main(["validate"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "PASS sets.projection_idempotent" in out
    assert "PASS engine.dgpc_cost_descent" in out


def test_validate_suite_filter(capsys):
    assert main(["validate", "--suite", "potential"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "potential.exact_potential" in out
    assert "sets.projection_idempotent" not in out
    assert "engine." not in out


def test_validate_unknown_suite_is_usage_error(capsys):
    assert main(["validate", "--suite", "nonsense"]) == EXIT_USAGE
    assert "unknown suite" in capsys.readouterr().err


def test_validate_corrupted_step_fails(capsys):
    # a 10x step-size corruption makes the observed gradient-descent
    # monotonicity check fail (convergence no longer guaranteed there)
    code = main(["validate", "--suite", "engine", "--debug-step-scale", "10.0"])
    out = capsys.readouterr().out
    assert code == EXIT_INVARIANT
    assert "FAIL engine.dgpc_cost_descent" in out


def test_run_writes_deterministic_csv(tmp_path, capsys):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["run", "--n", "10", "--q", "2", "--rho", "0.5", "--trials", "2",
            "--threshold", "1e-5", "--seed", "7"]
    assert main(args + ["--out", str(out1)]) == EXIT_OK
    assert main(args + ["--out", str(out2)]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()
    header = out1.read_text().splitlines()[0]
    assert header == "algo,trial,seed,t,consensus_metric,potential"
    assert "median iterations" in capsys.readouterr().out


def test_sweep_writes_csv_and_summary(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--n", "10", "--rho-min", "0.35", "--rho-max", "0.6",
                 "--realizations", "3", "--threshold", "1e-4",
                 "--max-iters", "2000", "--seed", "3", "--out", str(out)])
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "trial,seed,rho,fiedler,iters_dgtc,conv_dgtc,iters_dgpc,conv_dgpc"
    assert len(lines) == 4
    text = capsys.readouterr().out
    assert "full-range median iterations" in text


def test_pocs_command(tmp_path, capsys):
    out = tmp_path / "pocs.csv"
    code = main(["pocs", "--n", "10", "--rho", "0.5", "--trials", "2",
                 "--cycles", "6", "--seed", "1", "--out", str(out)])
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "trial,seed,cycle,displacement,max_set_distance"
    assert len(lines) == 1 + 2 * 6
    assert "max final distance" in capsys.readouterr().out


def test_generation_failure_exit_code(tmp_path, capsys):
    code = main(["run", "--n", "40", "--rho", "0.01", "--trials", "1",
                 "--max-attempts", "3", "--out", str(tmp_path / "x.csv")])
    assert code == EXIT_GENERATION
    assert "generation error" in capsys.readouterr().err


def test_usage_errors(tmp_path, capsys):
    assert main(["run", "--n", "1", "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    capsys.readouterr()
    assert main(["sweep", "--rho-min", "0.5", "--rho-max", "0.4"]) == EXIT_USAGE
    capsys.readouterr()
    assert main(["run", "--trials", "-3"]) == EXIT_USAGE
    capsys.readouterr()
    assert main(["sweep", "--realizations", "0"]) == EXIT_USAGE
    capsys.readouterr()
    with pytest.raises(SystemExit) as exc:
        main(["run", "--not-a-flag", "1"])
    assert exc.value.code == EXIT_USAGE


def test_io_error_exit_code(tmp_path):
    code = main(["run", "--n", "10", "--rho", "0.5", "--trials", "1",
                 "--out", str(tmp_path / "missing" / "x.csv")])
    assert code == 4


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# sweep config\nn = 10\nrho_min = 0.35\nrho_max = 0.6\n"
                   "realizations = 2\nmax_iters = 2000\nthreshold = 1e-4\nseed = 3\n")
    out1, out2 = tmp_path / "c1.csv", tmp_path / "c2.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out1)]) == EXIT_OK
    # flags override file values
    assert main(["sweep", "--config", str(cfg), "--seed", "3", "--out", str(out2)]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()


def test_config_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 10\nwibble = 3\n")
    assert main(["run", "--config", str(cfg)]) == EXIT_USAGE
    assert "unknown config key" in capsys.readouterr().err


def test_config_round_trip_is_idempotent():
    text = "n = 12\nq = 3\nrho = 0.25\ntrials = 4\nseed = 9\n"
    cfg = coerce_config("run", parse_config_text(text))
    serialized = format_config(cfg)
    again = coerce_config("run", parse_config_text(serialized))
    assert again == cfg
    assert format_config(again) == serialized


def test_config_parse_errors():
    with pytest.raises(ConfigError):
        parse_config_text("just words\n")
    with pytest.raises(ConfigError):
        parse_config_text("key =\n")
    with pytest.raises(ConfigError):
        coerce_config("run", {"n": "ten"})
