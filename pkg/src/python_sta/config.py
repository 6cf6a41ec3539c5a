"""
Run configuration: an INI file with the sections

    [run]       protocol, trajectory method, step counts, tolerances, workers
    [stirap]    reference pulse pair (frequencies in MHz, times in us)
    [rescale]   time contraction parameter a (required by the tr protocol)
    [baseline]  operation window of the cd and pi_pulse protocols
    [scan]      robustness scan settings
    [output]    result file names

Frequencies are converted to rad/us by a factor 2 pi on parsing and back on serialisation.
Every value is written with 17 significant digits, so parse_config(serialize_config(c)) == c.
"""
import configparser
import dataclasses
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Mapping, Tuple, TypeVar

from python_sta.baselines import BaselineKind, BaselineSpec
from python_sta.errors import ConfigError, ConfigParseError, MissingSectionError, StaError
from python_sta.experiments import (
    DEFAULT_AMPLITUDE_RANGE,
    DEFAULT_DELAY_RANGE,
    DEFAULT_DETUNING_RANGE,
    DEFAULT_POINTS,
    DetuningModel,
    ErrorKind,
    Protocol,
    ScanSpec,
)
from python_sta.hamiltonian import StirapParams
from python_sta.hamiltonian.stirap import NOMINAL_OMEGA0, NOMINAL_T_F, TWO_PI
from python_sta.propagator import DEFAULT_CONVERGENCE_TOL, TrajectoryMethod
from python_sta.rescale import RescaleParams

logger = logging.getLogger(__name__)

T = TypeVar("T")

DEFAULT_A = 10.0
DEFAULT_GRID_POINTS = 1001
DEFAULT_PULSE_POINTS = 2001
DEFAULT_BASELINE_DURATION = 1.0

SCAN_KINDS = {
    "amplitude": ErrorKind.AMPLITUDE,
    "detuning": ErrorKind.DETUNING,
    "delay": ErrorKind.DELAY,
}
DEFAULT_RANGES = {
    ErrorKind.AMPLITUDE: DEFAULT_AMPLITUDE_RANGE,
    ErrorKind.DETUNING: DEFAULT_DETUNING_RANGE,
    ErrorKind.DELAY: DEFAULT_DELAY_RANGE,
}

SECTION_KEYS = {
    "run": {"protocol", "method", "steps", "grid_points", "check_convergence", "convergence_tol", "workers"},
    "stirap": {"omega0_mhz", "t_f_us", "t0_us", "sigma_us", "delta_p_mhz", "delta_2_mhz"},
    "rescale": {"a", "t_f_us"},
    "baseline": {"duration_us", "t0_us", "omega0_mhz"},
    "scan": {"kind", "low", "high", "n_points", "detuning_model"},
    "output": {"directory", "trajectory", "scan", "pulses", "pulse_points"},
}

DEFAULT_CONFIG_TEXT = """\
# python-sta run configuration. Frequencies in MHz, times in us.
[run]
protocol = tr

[stirap]

[rescale]
a = 10

[baseline]
duration_us = 1

[scan]
kind = amplitude

[output]
"""


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "."
    trajectory: str = "trajectory.csv"
    scan: str = "scan.csv"
    pulses: str = "pulses.csv"
    pulse_points: int = DEFAULT_PULSE_POINTS

    def path(self, name: str) -> Path:
        return Path(self.directory) / name


@dataclass(frozen=True)
class RunConfig:
    protocol: Protocol = Protocol.TR
    method: TrajectoryMethod = TrajectoryMethod.NUMERIC
    steps: int | None = None
    grid_points: int = DEFAULT_GRID_POINTS
    check_convergence: bool = False
    convergence_tol: float = DEFAULT_CONVERGENCE_TOL
    workers: int = 1
    stirap: StirapParams = dataclasses.field(default_factory=StirapParams.nominal)
    rescale: RescaleParams | None = None
    baseline: BaselineSpec | None = None
    scan: ScanSpec | None = None
    output: OutputSettings = dataclasses.field(default_factory=OutputSettings)

    def require_rescale(self) -> RescaleParams:
        if self.rescale is None:
            raise MissingSectionError("rescale", "the tr protocol needs a time contraction parameter")
        return self.rescale

    def require_baseline(self) -> BaselineSpec:
        if self.baseline is None:
            raise MissingSectionError("baseline", f"the {self.protocol.value} protocol needs an operation window")
        return self.baseline

    def require_scan(self) -> ScanSpec:
        if self.scan is None:
            raise MissingSectionError("scan", "a scan needs its error kind and range")
        return self.scan


def mhz_to_rad(value: float) -> float:
    return value * TWO_PI


def rad_to_mhz(value: float) -> float:
    """
    Inverse of mhz_to_rad that round-trips exactly whenever value is itself a product m * 2 pi,
    which is the case for every frequency that came out of parse_config.
    """
    guess = value / TWO_PI
    candidates = [guess]
    up = down = guess
    for _ in range(3):
        up, down = math.nextafter(up, math.inf), math.nextafter(down, -math.inf)
        candidates += [up, down]
    for candidate in candidates:
        if mhz_to_rad(candidate) == value:
            return candidate
    return guess


def _format(value: float) -> str:
    return f"{value:.17g}"


def _column_of(text: str, line: int) -> int:
    lines = text.splitlines()
    if not 1 <= line <= len(lines):
        return 1
    content = lines[line - 1]
    return len(content) - len(content.lstrip()) + 1


def _read_ini(text: str, overrides: Mapping[str, str]) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(strict=True, interpolation=None)
    try:
        parser.read_string(text, source="<config>")
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigParseError(exc.message, exc.lineno, _column_of(text, exc.lineno)) from exc
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigParseError("key outside of any section", exc.lineno, _column_of(text, exc.lineno)) from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else 1
        raise ConfigParseError("malformed line", line, _column_of(text, line)) from exc

    if parser.defaults():
        raise ConfigError("a [DEFAULT] section is not supported", key="DEFAULT")
    for dotted, value in overrides.items():
        section, _, key = dotted.partition(".")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value)

    for section in parser.sections():
        if section not in SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]", key=section)
        for key in parser[section]:
            if key not in SECTION_KEYS[section]:
                raise ConfigError("unknown key", key=f"{section}.{key}")
    return parser


class _Section:
    """Typed reads from one INI section; every error names the offending key."""

    def __init__(self, parser: configparser.ConfigParser, name: str) -> None:
        self.name = name
        self.values = dict(parser[name]) if parser.has_section(name) else {}

    def _get(self, key: str, default: T, convert: Callable[[str], T]) -> T:
        raw = self.values.get(key)
        if raw is None or raw.strip() == "":
            return default
        try:
            return convert(raw.strip())
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"invalid value {raw.strip()!r}", key=f"{self.name}.{key}") from exc

    def number(self, key: str, default: float) -> float:
        return self._get(key, default, float)

    def frequency(self, key: str, default: float) -> float:
        """A value given in MHz, returned in rad/us."""
        return self._get(key, default, lambda raw: mhz_to_rad(float(raw)))

    def integer(self, key: str, default: int | None, allow_auto: bool = False) -> int | None:
        return self._get(key, default, lambda raw: None if allow_auto and raw == "auto" else int(raw))

    def flag(self, key: str, default: bool) -> bool:
        return self._get(key, default, lambda raw: configparser.ConfigParser.BOOLEAN_STATES[raw.lower()])

    def choice(self, key: str, default: T, choices: Mapping[str, T]) -> T:
        return self._get(key, default, lambda raw: choices[raw])

    def text(self, key: str, default: str) -> str:
        return self._get(key, default, str)


def _checked(section: str, build: Callable[[], T]) -> T:
    try:
        return build()
    except StaError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), key=section) from exc


def _parse_stirap(section: _Section) -> StirapParams:
    t_f = section.number("t_f_us", NOMINAL_T_F)
    return _checked(section.name, lambda: StirapParams(
        omega0=section.frequency("omega0_mhz", NOMINAL_OMEGA0),
        t_f=t_f,
        t0=section.number("t0_us", t_f / 10),
        sigma=section.number("sigma_us", t_f / 6),
        delta_p=section.frequency("delta_p_mhz", 0.0),
        delta_2=section.frequency("delta_2_mhz", 0.0),
    ))


def _parse_rescale(section: _Section, stirap: StirapParams) -> RescaleParams:
    t_f = section.number("t_f_us", stirap.t_f)
    if abs(t_f - stirap.t_f) > 1e-12 * stirap.t_f:
        raise ConfigError(f"must match [stirap] t_f_us = {stirap.t_f!r}", key="rescale.t_f_us")
    return _checked("rescale.a", lambda: RescaleParams(section.number("a", DEFAULT_A), stirap.t_f))


def _parse_baseline(section: _Section, protocol: Protocol) -> BaselineSpec:
    duration = section.number("duration_us", DEFAULT_BASELINE_DURATION)
    if protocol is Protocol.PI_PULSE:
        return _checked(section.name, lambda: BaselineSpec.pi_pulse(duration))
    stirap = _checked(section.name, lambda: StirapParams.standard(
        omega0=section.frequency("omega0_mhz", NOMINAL_OMEGA0),
        t_f=duration,
        t0=section.number("t0_us", duration / 8),
        sigma=duration / 6,
    ))
    return _checked(section.name, lambda: BaselineSpec(BaselineKind.COUNTERDIABATIC, duration, stirap=stirap))


def _scan_window(config: RunConfig) -> Tuple[float, StirapParams | None]:
    """Operation time and pulse pair of the configured protocol."""
    if config.protocol is Protocol.TR:
        return config.stirap.t_f / config.require_rescale().a, config.stirap
    if config.protocol is Protocol.REFERENCE:
        return config.stirap.t_f, config.stirap
    baseline = config.require_baseline()
    return baseline.duration, baseline.stirap


def _parse_scan(section: _Section, config: RunConfig) -> ScanSpec:
    kind = section.choice("kind", ErrorKind.AMPLITUDE, SCAN_KINDS)
    read = section.frequency if kind is ErrorKind.DETUNING else section.number
    low_default, high_default = DEFAULT_RANGES[kind]
    duration, stirap = _scan_window(config)
    return _checked(section.name, lambda: ScanSpec(
        protocol=config.protocol,
        error_kind=kind,
        low=read("low", low_default),
        high=read("high", high_default),
        n_points=section.integer("n_points", DEFAULT_POINTS),
        duration=duration,
        a=config.rescale.a if config.protocol is Protocol.TR else None,
        stirap=stirap,
        detuning_model=section.choice("detuning_model", DetuningModel.ONE_PHOTON,
                                      {m.value: m for m in DetuningModel}),
        steps=config.steps,
        workers=config.workers,
    ))


def parse_config(text: str, overrides: Mapping[str, str] | None = None) -> RunConfig:
    """
    Parse and validate an INI run configuration. Missing keys take the reference defaults.

    Args:
    text (str): The configuration text.
    overrides (Mapping[str, str], optional): "section.key" -> raw value, applied before validation.

    Raises:
    ConfigParseError: On malformed INI, including duplicate keys or sections.
    MissingSectionError: If the selected protocol needs a section that is absent.
    ConfigError: On an unknown key or an invalid value.
    """
    parser = _read_ini(text, overrides or {})
    run = _Section(parser, "run")
    protocol = run.choice("protocol", Protocol.TR, {p.value: p for p in Protocol})
    method = run.choice("method", TrajectoryMethod.NUMERIC, {
        TrajectoryMethod.NUMERIC.value: TrajectoryMethod.NUMERIC,
        TrajectoryMethod.ADIABATIC.value: TrajectoryMethod.ADIABATIC,
    })
    steps = run.integer("steps", None, allow_auto=True)
    if steps is not None and steps < 1:
        raise ConfigError("must be >= 1 or auto", key="run.steps")
    grid_points = run.integer("grid_points", DEFAULT_GRID_POINTS)
    if grid_points < 2:
        raise ConfigError("must be >= 2", key="run.grid_points")
    convergence_tol = run.number("convergence_tol", DEFAULT_CONVERGENCE_TOL)
    if not convergence_tol > 0:
        raise ConfigError("must be > 0", key="run.convergence_tol")
    workers = run.integer("workers", 1)
    if workers < 1:
        raise ConfigError("must be >= 1", key="run.workers")

    stirap = _parse_stirap(_Section(parser, "stirap"))
    rescale = _parse_rescale(_Section(parser, "rescale"), stirap) if parser.has_section("rescale") else None
    if protocol is Protocol.TR and rescale is None:
        raise MissingSectionError("rescale", "the tr protocol needs a time contraction parameter")
    baseline = None
    if protocol in (Protocol.CD, Protocol.PI_PULSE):
        if not parser.has_section("baseline"):
            raise MissingSectionError("baseline", f"the {protocol.value} protocol needs an operation window")
        baseline = _parse_baseline(_Section(parser, "baseline"), protocol)

    out = _Section(parser, "output")
    pulse_points = out.integer("pulse_points", DEFAULT_PULSE_POINTS)
    if pulse_points < 2:
        raise ConfigError("must be >= 2", key="output.pulse_points")
    output = OutputSettings(
        directory=out.text("directory", "."),
        trajectory=out.text("trajectory", "trajectory.csv"),
        scan=out.text("scan", "scan.csv"),
        pulses=out.text("pulses", "pulses.csv"),
        pulse_points=pulse_points,
    )

    config = RunConfig(
        protocol=protocol, method=method, steps=steps, grid_points=grid_points,
        check_convergence=run.flag("check_convergence", False), convergence_tol=convergence_tol,
        workers=workers, stirap=stirap, rescale=rescale, baseline=baseline, output=output,
    )
    if parser.has_section("scan"):
        config = dataclasses.replace(config, scan=_parse_scan(_Section(parser, "scan"), config))
    logger.debug("parsed configuration: protocol %s, scan %s", protocol.value,
                 None if config.scan is None else config.scan.error_kind.value)
    return config


def load_config(path, overrides: Mapping[str, str] | None = None) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), overrides)


def default_config(overrides: Mapping[str, str] | None = None) -> RunConfig:
    return parse_config(DEFAULT_CONFIG_TEXT, overrides)


def config_sections(config: RunConfig) -> Dict[str, Dict[str, str]]:
    """The configuration as INI sections of formatted strings."""
    p = config.stirap
    sections = {
        "run": {
            "protocol": config.protocol.value,
            "method": config.method.value,
            "steps": "auto" if config.steps is None else str(config.steps),
            "grid_points": str(config.grid_points),
            "check_convergence": "true" if config.check_convergence else "false",
            "convergence_tol": _format(config.convergence_tol),
            "workers": str(config.workers),
        },
        "stirap": {
            "omega0_mhz": _format(rad_to_mhz(p.omega0)),
            "t_f_us": _format(p.t_f),
            "t0_us": _format(p.t0),
            "sigma_us": _format(p.sigma),
            "delta_p_mhz": _format(rad_to_mhz(p.delta_p)),
            "delta_2_mhz": _format(rad_to_mhz(p.delta_2)),
        },
    }
    if config.rescale is not None:
        sections["rescale"] = {"a": _format(config.rescale.a)}
    if config.baseline is not None:
        baseline = {"duration_us": _format(config.baseline.duration)}
        if config.baseline.stirap is not None:
            baseline["t0_us"] = _format(config.baseline.stirap.t0)
            baseline["omega0_mhz"] = _format(rad_to_mhz(config.baseline.stirap.omega0))
        sections["baseline"] = baseline
    if config.scan is not None:
        scan = config.scan
        convert = rad_to_mhz if scan.error_kind is ErrorKind.DETUNING else float
        kind = next(name for name, value in SCAN_KINDS.items() if value is scan.error_kind)
        sections["scan"] = {
            "kind": kind,
            "low": _format(convert(scan.low)),
            "high": _format(convert(scan.high)),
            "n_points": str(scan.n_points),
            "detuning_model": scan.detuning_model.value,
        }
    out = config.output
    sections["output"] = {
        "directory": out.directory,
        "trajectory": out.trajectory,
        "scan": out.scan,
        "pulses": out.pulses,
        "pulse_points": str(out.pulse_points),
    }
    return sections


def serialize_config(config: RunConfig) -> str:
    lines = ["# python-sta run configuration. Frequencies in MHz, times in us."]
    for name, values in config_sections(config).items():
        lines.append(f"[{name}]")
        lines.extend(f"{key} = {value}" for key, value in values.items())
        lines.append("")
    return "\n".join(lines)
