"""
Experiment configuration: sectioned key = value files with line-anchored validation
"""

import configparser
import os
import re
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from config.settings import (
    DEFAULT_GRADING,
    DEFAULT_HORIZON,
    DEFAULT_MODES,
    DEFAULT_MOMENT,
    DEFAULT_PATHS,
    DEFAULT_RULE,
    DEFAULT_SEED,
    DEFAULT_STEPS,
    OUTPUT_DIR,
    PATHWISE_MOMENT,
    PICARD_TOL,
    PRESETS_DIR,
    SLOPE_TOLERANCE,
    SMOOTHING_MODES,
)
from src.utils.errors import ConfigError

_SECTION = re.compile(r"^\s*\[([^\]]+)\]")
_KEY = re.compile(r"^\s*([^=#;\s\[][^=]*?)\s*=")
_REQUIRED = object()

KERNEL_VARIANTS = ("tempered-riesz", "finite-history", "tabulated", "laplace-example")
GRID_KINDS = ("uniform", "graded")
COVARIANCE_KINDS = ("white", "power", "custom")
F_VARIANTS = ("zero", "diagonal-linear", "nemytskii")
G_VARIANTS = ("zero", "additive", "diagonal-multiplicative", "nemytskii")
U0_KINDS = ("zero", "mode", "random")
RULES = ("left", "midpoint", "local")


@dataclass(frozen=True)
class KernelConfig:
    variant: str
    rho: Optional[float] = None
    eta: float = 0.0
    times: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()
    exponent: float = 0.4
    weight: float = 0.4
    power: int = 5


@dataclass(frozen=True)
class DiscretizationConfig:
    modes: int = DEFAULT_MODES
    steps: int = DEFAULT_STEPS
    horizon: float = DEFAULT_HORIZON
    grid: str = "uniform"
    grading: float = DEFAULT_GRADING
    scalar_steps: int = 2048
    scalar_horizon: float = 20.0
    smoothing_modes: int = SMOOTHING_MODES


@dataclass(frozen=True)
class NoiseConfig:
    covariance: str = "white"
    gamma: float = 0.0
    values: Tuple[float, ...] = ()
    seed: int = DEFAULT_SEED
    paths: int = DEFAULT_PATHS
    rule: str = DEFAULT_RULE


@dataclass(frozen=True)
class ProblemConfig:
    F: str = "zero"
    F_function: str = "sin"
    F_lipschitz: float = 1.0
    F_coefficients: Tuple[float, ...] = ()
    G: str = "additive"
    G_function: str = "sin"
    G_lipschitz: float = 1.0
    G_coefficients: Tuple[float, ...] = ()
    u0: str = "zero"
    u0_modes: Tuple[float, ...] = ()
    u0_decay: float = 2.0
    r: float = 0.0
    p: int = DEFAULT_MOMENT


@dataclass(frozen=True)
class MeasurementConfig:
    s_values: Tuple[float, ...] = ()
    lags: Tuple[int, ...] = ()
    alpha: Optional[float] = None
    tol: float = PICARD_TOL
    slope_tolerance: float = SLOPE_TOLERANCE
    mu_grid: Tuple[float, ...] = ()
    smoothing_s: Tuple[float, ...] = ()
    beta_grid: Tuple[float, ...] = ()
    pathwise_p: int = PATHWISE_MOMENT
    refine: bool = True


@dataclass(frozen=True)
class OutputConfig:
    directory: str = OUTPUT_DIR
    formats: Tuple[str, ...] = ("json", "csv", "gnuplot")
    timestamp: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: KernelConfig
    discretization: DiscretizationConfig = field(default_factory=DiscretizationConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    measurement: MeasurementConfig = field(default_factory=MeasurementConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    source: Optional[str] = None


def scan_lines(text: str) -> Dict[str, int]:
    """Line number of every section.key in the text"""
    lines: Dict[str, int] = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION.match(line)
        if header:
            section = header.group(1).strip()
            continue
        key = _KEY.match(line)
        if key and section is not None:
            lines[f"{section}.{key.group(1).strip().lower()}"] = number
    return lines


class _Reader:
    """Typed access to a parsed config; every failure names section.key"""

    def __init__(
        self, parser: configparser.ConfigParser, lines: Dict[str, int]
    ) -> None:
        self.parser = parser
        self.lines = lines

    def _raw(self, section: str, key: str, default: Any) -> Any:
        if self.parser.has_section(section) and self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        if default is _REQUIRED:
            raise ConfigError(f"{section}.{key}", "required")
        return default

    def _fail(self, section: str, key: str, problem: str) -> ConfigError:
        name = f"{section}.{key}"
        return ConfigError(name, problem, self.lines.get(name))

    def text(
        self,
        section: str,
        key: str,
        default: Any = _REQUIRED,
        choices: Optional[Sequence[str]] = None,
    ) -> str:
        value = self._raw(section, key, default)
        if choices is not None and value not in choices:
            allowed = ", ".join(choices)
            raise self._fail(section, key, f"must be one of {allowed}, got {value!r}")
        return value

    def number(
        self, section: str, key: str, default: Any = _REQUIRED
    ) -> Optional[float]:
        value = self._raw(section, key, default)
        if value is None or isinstance(value, float):
            return value
        try:
            return float(value)
        except (TypeError, ValueError):
            raise self._fail(section, key, f"expected a number, got {value!r}")

    def integer(self, section: str, key: str, default: Any = _REQUIRED) -> int:
        value = self._raw(section, key, default)
        if isinstance(value, int):
            return value
        try:
            return int(value)
        except (TypeError, ValueError):
            raise self._fail(section, key, f"expected an integer, got {value!r}")

    def numbers(
        self, section: str, key: str, default: Tuple[float, ...] = ()
    ) -> Tuple[float, ...]:
        value = self._raw(section, key, None)
        if value is None:
            return default
        try:
            return tuple(float(item) for item in value.split(",") if item.strip())
        except ValueError:
            problem = f"expected a comma-separated list of numbers, got {value!r}"
            raise self._fail(section, key, problem)

    def words(
        self, section: str, key: str, default: Tuple[str, ...]
    ) -> Tuple[str, ...]:
        value = self._raw(section, key, None)
        if value is None:
            return default
        return tuple(item.strip() for item in value.split(",") if item.strip())

    def flag(self, section: str, key: str, default: bool) -> bool:
        value = self._raw(section, key, None)
        if value is None:
            return default
        lowered = value.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise self._fail(section, key, f"expected true or false, got {value!r}")

    def check(self, condition: bool, section: str, key: str, problem: str) -> None:
        if not condition:
            raise self._fail(section, key, problem)


def apply_overrides(
    parser: configparser.ConfigParser, overrides: Sequence[str]
) -> None:
    """--set section.key=value entries"""
    for item in overrides:
        target, sep, value = item.partition("=")
        section, dot, key = target.strip().partition(".")
        if not sep or not dot or not section or not key:
            raise ConfigError(item, "override must look like section.key=value")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key.strip().lower(), value.strip())


def resolve_config_path(path: str) -> str:
    """A path, or the name of a shipped preset"""
    if os.path.exists(path):
        return path
    preset = os.path.join(PRESETS_DIR, path if path.endswith(".cfg") else f"{path}.cfg")
    if os.path.exists(preset):
        return preset
    raise ConfigError("config", f"file not found: {path}")


def parse_config(
    text: str, overrides: Sequence[str] = (), source: Optional[str] = None
) -> ExperimentConfig:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";")
    )
    try:
        parser.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError("config", f"cannot parse: {exc.message}", line)
    apply_overrides(parser, overrides)
    return _validate(_Reader(parser, scan_lines(text)), source)


def load_config(path: str, overrides: Sequence[str] = ()) -> ExperimentConfig:
    path = resolve_config_path(path)
    with open(path, encoding="utf-8") as handle:
        return parse_config(handle.read(), overrides, source=path)


def _validate(read: _Reader, source: Optional[str]) -> ExperimentConfig:
    variant = read.text("kernel", "variant", choices=KERNEL_VARIANTS)
    kernel = KernelConfig(
        variant=variant,
        rho=read.number("kernel", "rho", None),
        eta=read.number("kernel", "eta", 0.0),
        times=read.numbers("kernel", "times"),
        values=read.numbers("kernel", "values"),
        exponent=read.number("kernel", "exponent", 0.4),
        weight=read.number("kernel", "weight", 0.4),
        power=read.integer("kernel", "power", 5),
    )
    if variant in ("tempered-riesz", "finite-history"):
        read.check(kernel.rho is not None, "kernel", "rho", "required for this variant")
        read.check(1.0 < kernel.rho < 2.0, "kernel", "rho", "must lie in (1, 2)")
    read.check(kernel.eta >= 0.0, "kernel", "eta", "must be >= 0")
    if variant == "tabulated":
        read.check(
            len(kernel.times) >= 2, "kernel", "times", "needs at least two nodes"
        )
        read.check(
            len(kernel.times) == len(kernel.values),
            "kernel",
            "values",
            "must match kernel.times in length",
        )

    disc = DiscretizationConfig(
        modes=read.integer("discretization", "modes", DEFAULT_MODES),
        steps=read.integer("discretization", "steps", DEFAULT_STEPS),
        horizon=read.number("discretization", "horizon", DEFAULT_HORIZON),
        grid=read.text("discretization", "grid", "uniform", choices=GRID_KINDS),
        grading=read.number("discretization", "grading", DEFAULT_GRADING),
        scalar_steps=read.integer("discretization", "scalar_steps", 2048),
        scalar_horizon=read.number("discretization", "scalar_horizon", 20.0),
        smoothing_modes=read.integer(
            "discretization", "smoothing_modes", SMOOTHING_MODES
        ),
    )
    for key, ok, message in (
        ("modes", disc.modes >= 1, "must be >= 1"),
        ("steps", disc.steps >= 8, "must be >= 8"),
        ("horizon", disc.horizon > 0, "must be positive"),
        ("grading", disc.grading >= 1.0, "must be >= 1"),
        ("scalar_steps", disc.scalar_steps >= 8, "must be >= 8"),
        ("scalar_horizon", disc.scalar_horizon > 0, "must be positive"),
        ("smoothing_modes", disc.smoothing_modes >= 2, "must be >= 2"),
    ):
        read.check(ok, "discretization", key, message)

    noise = NoiseConfig(
        covariance=read.text("noise", "covariance", "white", choices=COVARIANCE_KINDS),
        gamma=read.number("noise", "gamma", 0.0),
        values=read.numbers("noise", "values"),
        seed=read.integer("noise", "seed", DEFAULT_SEED),
        paths=read.integer("noise", "paths", DEFAULT_PATHS),
        rule=read.text("noise", "rule", DEFAULT_RULE, choices=RULES),
    )
    read.check(
        noise.seed >= 0, "noise", "seed", "must be a non-negative 64-bit integer"
    )
    read.check(noise.paths >= 1, "noise", "paths", "must be >= 1")
    if noise.covariance == "custom":
        read.check(
            len(noise.values) >= disc.modes,
            "noise",
            "values",
            f"needs {disc.modes} entries",
        )
        read.check(
            all(v >= 0 for v in noise.values), "noise", "values", "entries must be >= 0"
        )

    problem = ProblemConfig(
        F=read.text("problem", "f", "zero", choices=F_VARIANTS),
        F_function=read.text("problem", "f_function", "sin", choices=("sin", "arctan")),
        F_lipschitz=read.number("problem", "f_lipschitz", 1.0),
        F_coefficients=read.numbers("problem", "f_coefficients"),
        G=read.text("problem", "g", "additive", choices=G_VARIANTS),
        G_function=read.text("problem", "g_function", "sin", choices=("sin", "arctan")),
        G_lipschitz=read.number("problem", "g_lipschitz", 1.0),
        G_coefficients=read.numbers("problem", "g_coefficients"),
        u0=read.text("problem", "u0", "zero", choices=U0_KINDS),
        u0_modes=read.numbers("problem", "u0_modes"),
        u0_decay=read.number("problem", "u0_decay", 2.0),
        r=read.number("problem", "r", 0.0),
        p=read.integer("problem", "p", DEFAULT_MOMENT),
    )
    read.check(problem.r < 1.0, "problem", "r", "must be < 1")
    read.check(problem.p >= 2, "problem", "p", "must be >= 2")
    if problem.F == "diagonal-linear":
        read.check(
            len(problem.F_coefficients) >= 1,
            "problem",
            "f_coefficients",
            "required for diagonal-linear",
        )
    if problem.G == "diagonal-multiplicative":
        read.check(
            len(problem.G_coefficients) >= 1,
            "problem",
            "g_coefficients",
            "required for diagonal-multiplicative",
        )
    if problem.u0 == "mode":
        read.check(
            len(problem.u0_modes) >= 1, "problem", "u0_modes", "required when u0 = mode"
        )

    alpha = read.number("measurement", "alpha", None)
    measurement = MeasurementConfig(
        s_values=read.numbers("measurement", "s_values"),
        lags=tuple(int(v) for v in read.numbers("measurement", "lags")),
        alpha=alpha,
        tol=read.number("measurement", "tol", PICARD_TOL),
        slope_tolerance=read.number("measurement", "slope_tolerance", SLOPE_TOLERANCE),
        mu_grid=read.numbers("measurement", "mu_grid"),
        smoothing_s=read.numbers("measurement", "smoothing_s"),
        beta_grid=read.numbers("measurement", "beta_grid"),
        pathwise_p=read.integer("measurement", "pathwise_p", PATHWISE_MOMENT),
        refine=read.flag("measurement", "refine", True),
    )
    read.check(alpha is None or alpha > 0, "measurement", "alpha", "must be positive")
    read.check(
        all(lag >= 1 for lag in measurement.lags),
        "measurement",
        "lags",
        "lags are positive step counts",
    )
    rho = kernel.rho
    if rho is not None and measurement.s_values:
        ceiling = problem.r - 1.0 + 2.0 / rho
        read.check(
            all(s < ceiling for s in measurement.s_values),
            "measurement",
            "s_values",
            f"every s must be below r - 1 + 2/rho = {ceiling:.6g}",
        )
    read.check(measurement.pathwise_p >= 2, "measurement", "pathwise_p", "must be >= 2")
    if rho is not None and measurement.beta_grid:
        s_list = measurement.s_values or (problem.r - 1.0 + 1.0 / rho,)
        p_path = measurement.pathwise_p
        bounds = [
            min(0.5, (problem.r - s - 1.0) * rho / 2.0 + 1.0) - 1.0 / p_path
            for s in s_list
        ]
        read.check(
            any(beta < max(bounds) for beta in measurement.beta_grid),
            "measurement",
            "beta_grid",
            f"no beta lies below the pathwise bound min{{1/2, kappa/2+1}} - 1/p, "
            f"which is at most {max(bounds):.4g} for these s_values",
        )

    output = OutputConfig(
        directory=read.text("output", "directory", OUTPUT_DIR),
        formats=read.words("output", "formats", ("json", "csv", "gnuplot")),
        timestamp=read.flag("output", "timestamp", True),
    )
    unknown = [f for f in output.formats if f not in ("json", "csv", "gnuplot")]
    names = ", ".join(unknown)
    read.check(not unknown, "output", "formats", f"unknown format(s) {names}")
    return ExperimentConfig(kernel, disc, noise, problem, measurement, output, source)


def describe(config: ExperimentConfig) -> Dict[str, object]:
    """Plain dictionary of the validated configuration"""
    payload = asdict(config)
    payload.pop("source", None)
    return payload


def list_presets() -> List[str]:
    if not os.path.isdir(PRESETS_DIR):
        return []
    names = os.listdir(PRESETS_DIR)
    return sorted(name[:-4] for name in names if name.endswith(".cfg"))
