"""
Config parsing and the command-line entry point
"""

import json
import logging

import pytest

from src.cli.config_loader import (
    describe,
    list_presets,
    load_config,
    parse_config,
    scan_lines,
)
from src.cli.main import build_parser, main
from src.utils.errors import ConfigError

RIESZ = """\
[kernel]
variant = tempered-riesz
rho = 1.5

[problem]
r = 0.3333333333333333
"""

SMALL_RUN = [
    "--set", "discretization.modes=8",
    "--set", "discretization.steps=64",
    "--set", "noise.paths=3",
    "--set", "measurement.beta_grid=",
    "--no-timestamp",
    "-q",
]


def test_scan_lines():
    lines = scan_lines(RIESZ)
    assert lines["kernel.variant"] == 2
    assert lines["kernel.rho"] == 3
    assert lines["problem.r"] == 6


def test_defaults_fill_missing_sections():
    config = parse_config(RIESZ)
    assert config.kernel.rho == 1.5
    assert config.noise.covariance == "white"
    assert config.discretization.modes == 64
    assert config.output.formats == ("json", "csv", "gnuplot")
    assert describe(config)["kernel"]["variant"] == "tempered-riesz"


def test_missing_variant():
    with pytest.raises(ConfigError) as info:
        parse_config("[discretization]\nmodes = 8\n")
    assert str(info.value) == "kernel.variant: required"
    assert info.value.exit_code == 1


def test_errors_carry_line_numbers():
    with pytest.raises(ConfigError) as info:
        parse_config(RIESZ.replace("rho = 1.5", "rho = 2.5"))
    assert str(info.value) == "kernel.rho: must lie in (1, 2) (line 3)"
    with pytest.raises(ConfigError) as info:
        parse_config(RIESZ.replace("r = 0.3333333333333333", "r = 1.5"))
    assert info.value.line == 6


def test_type_errors():
    with pytest.raises(ConfigError) as info:
        parse_config(RIESZ + "\n[noise]\npaths = many\n")
    assert info.value.key == "noise.paths"
    with pytest.raises(ConfigError):
        parse_config(RIESZ + "\n[output]\nformats = json, xml\n")
    with pytest.raises(ConfigError):
        parse_config("kernel without a section\n")


def test_s_values_below_the_ceiling():
    with pytest.raises(ConfigError) as info:
        parse_config(RIESZ + "\n[measurement]\ns_values = 0.0, 0.7\n")
    assert info.value.key == "measurement.s_values"


def test_overrides():
    overrides = ["kernel.rho=1.2", "noise.seed=5", "output.timestamp=false"]
    config = parse_config(RIESZ, overrides)
    assert config.kernel.rho == 1.2
    assert config.noise.seed == 5
    assert config.output.timestamp is False
    with pytest.raises(ConfigError):
        parse_config(RIESZ, ["kernel.rho"])


@pytest.mark.parametrize("name", list_presets())
def test_presets_load(name):
    config = load_config(name)
    assert config.source.endswith(f"{name}.cfg")
    assert config.measurement.refine


def test_unknown_config_file():
    with pytest.raises(ConfigError):
        load_config("no-such-preset")


def test_parser():
    args = build_parser().parse_args(
        ["simulate", "--config", "riesz-demo", "--seed", "3", "--set", "noise.paths=2"]
    )
    assert args.subcommand == "simulate"
    assert args.seed == 3
    assert args.overrides == ["noise.paths=2"]
    with pytest.raises(SystemExit):
        build_parser().parse_args(["simulate"])


def test_main_reports_config_errors(tmp_path, caplog):
    broken = tmp_path / "broken.cfg"
    broken.write_text("[discretization]\nmodes = 8\n", encoding="utf-8")
    with caplog.at_level(logging.ERROR):
        assert main(["certify-kernel", "--config", str(broken), "-q"]) == 1
    assert "kernel.variant: required" in caplog.text


def test_certify_laplace_example(tmp_path):
    code = main(
        [
            "certify-kernel",
            "--config",
            "laplace-example-demo",
            "--output",
            str(tmp_path),
            "-q",
        ]
    )
    assert code in (0, 3)
    payload = json.loads((tmp_path / "assumptions.json").read_text(encoding="utf-8"))
    rows = {row["name"]: row for row in payload["conditions"]}
    assert rows["rho_sector"]["value"] == pytest.approx(1.874, abs=0.01)
    assert payload["passed"] is (code == 0)


def test_certify_riesz(tmp_path):
    argv = ["certify-kernel", "--config", "riesz-demo", "--output", str(tmp_path)]
    assert main(argv + ["-q"]) == 0
    assert (tmp_path / "assumptions.json").exists()


def test_simulate_is_byte_reproducible(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    common = ["simulate", "--config", "riesz-demo", "--seed", "7"] + SMALL_RUN
    assert main(common + ["--output", str(first), "--threads", "1"]) == 0
    assert main(common + ["--output", str(second), "--threads", "3"]) == 0
    text = (first / "ensemble.csv").read_text(encoding="utf-8")
    assert text == (second / "ensemble.csv").read_text(encoding="utf-8")
    assert text.splitlines()[0] == "t,s_exponent,empirical_Lp_norm,n_paths,stderr"
    payload = json.loads((first / "simulate.json").read_text(encoding="utf-8"))
    summary = payload["summary"]
    assert summary["n_paths"] == 3
    assert summary["seed"] == 7


def test_failed_verification_still_writes_artefacts(tmp_path):
    # two dyadic lags on 64 steps cannot support a Hoelder fit
    argv = ["holder", "--config", "riesz-demo", "--output", str(tmp_path)]
    code = main(argv + SMALL_RUN)
    assert code == 3
    payload = json.loads((tmp_path / "regularity.json").read_text(encoding="utf-8"))
    assert payload["passed"] is False
    assert (tmp_path / "regularity.csv").exists()
