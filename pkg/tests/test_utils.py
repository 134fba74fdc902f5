"""
Fits, writers, worker pools and the error hierarchy
"""

import ast
import json
import math
import pathlib

import numpy as np
import pytest

from src.utils.errors import (
    ConfigError,
    NumericalError,
    ParameterOutOfRange,
    VerificationFailure,
)
from src.utils.fitting import fit_loglog
from src.utils.io import format_float, write_csv, write_gnuplot, write_json
from src.utils.parallel import map_ordered


def test_fit_recovers_power_law():
    x = np.geomspace(1e-3, 1.0, 12)
    fit = fit_loglog(x, 3.0 * x ** 0.75)
    assert fit.slope == pytest.approx(0.75)
    assert fit.constant == pytest.approx(3.0)
    assert fit.half_width == pytest.approx(0.0, abs=1e-10)
    assert fit.within(0.7, 0.1)


def test_fit_rejects_bad_data():
    with pytest.raises(ParameterOutOfRange):
        fit_loglog([1.0, 2.0], [1.0, -1.0])
    with pytest.raises(ParameterOutOfRange):
        fit_loglog([1.0], [1.0])
    with pytest.raises(ParameterOutOfRange):
        fit_loglog([1.0, 2.0], [1.0])


def test_two_point_fit():
    fit = fit_loglog([1.0, 4.0], [2.0, 1.0])
    assert fit.slope == pytest.approx(-0.5)
    assert fit.n_points == 2


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(np.float64(2.0)) == "2"
    assert format_float(np.int64(3)) == "3"
    assert format_float(True) == "true"
    assert format_float(None) == "None"


def test_write_json(tmp_path):
    path = write_json(str(tmp_path / "nested" / "out.json"), {
        "array": np.arange(3),
        "flag": np.bool_(True),
        "missing": float("nan"),
        "value": np.float64(0.5),
    })
    payload = json.loads(open(path, encoding="utf-8").read())
    assert payload == {"array": [0, 1, 2], "flag": True, "missing": "nan", "value": 0.5}


def test_write_csv(tmp_path):
    rows = [(1, 0.5), (2, math.inf)]
    path = write_csv(str(tmp_path / "out.csv"), ("a", "b"), rows, timestamp=False)
    assert open(path, encoding="utf-8").read() == "a,b\n1,0.5\n2,inf\n"


def test_write_gnuplot_blocks(tmp_path):
    path = write_gnuplot(str(tmp_path / "out.dat"), ("x", "y"), [[(1, 2)], [(3, 4)]],
                         timestamp=False, titles=["first", "second"])
    text = open(path, encoding="utf-8").read()
    assert text == "# x y\n# first\n1 2\n\n\n# second\n3 4\n"


@pytest.mark.parametrize("threads", [1, 4])
def test_map_ordered_keeps_order(threads):
    squares = map_ordered(lambda x: x * x, list(range(20)), threads)
    assert squares == [x * x for x in range(20)]


def test_exit_codes():
    assert ConfigError("kernel.rho", "required").exit_code == 1
    assert NumericalError("x").exit_code == 2
    assert VerificationFailure("x").exit_code == 3
    assert isinstance(ParameterOutOfRange("x"), ValueError)
    assert str(ConfigError("noise.seed", "bad", 4)) == "noise.seed: bad (line 4)"


def _unannotated(path):
    tree = ast.parse(path.read_text(encoding="utf-8"))
    for node in ast.walk(tree):
        if not isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            continue
        args = node.args
        params = args.posonlyargs + args.args + args.kwonlyargs
        params += [a for a in (args.vararg, args.kwarg) if a is not None]
        missing = [
            a.arg
            for a in params
            if a.annotation is None and a.arg not in ("self", "cls")
        ]
        if node.returns is None:
            missing.append("return")
        if missing:
            yield f"{path.name}:{node.lineno} {node.name} {missing}"


def test_every_def_is_annotated():
    root = pathlib.Path(__file__).resolve().parents[1]
    sources = sorted((root / "src").rglob("*.py")) + [root / "main.py"]
    offenders = [hit for path in sources for hit in _unannotated(path)]
    assert offenders == []
