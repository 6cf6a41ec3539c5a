import argparse
import logging
import sys
from typing import Dict, Sequence

from python_sta.config import RunConfig, default_config, load_config
from python_sta.errors import ConfigError, OutputError, StaError
from python_sta.experiments import Protocol, run_scan
from python_sta.hamiltonian import StirapHamiltonian, tr_hamiltonian
from python_sta.propagator import (
    REFERENCE_STEPS,
    Trajectory,
    TrajectoryMethod,
    adiabatic_trajectory,
    default_steps,
    evolve,
    ket,
    reparametrized_trajectory,
    substeps_for,
    uniform_grid,
)
from python_sta.results import emit_pulses, emit_scan, emit_trajectory
from python_sta.verify import DEFAULT_A_VALUES, run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VERIFY = 2
EXIT_IO = 3

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration (defaults to the reference parameters)")
    common.add_argument("--output", help="result file, overriding the [output] section")
    common.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--workers", type=int, help="threads used by scans")
    common.add_argument("--steps", help="total integration steps, or 'auto'")

    protocol = argparse.ArgumentParser(add_help=False)
    protocol.add_argument("--protocol", choices=[p.value for p in Protocol])
    protocol.add_argument("--a", help="time contraction parameter of the tr protocol")

    parser = argparse.ArgumentParser(prog="python-sta", description="Time-rescaled shortcuts to adiabaticity on STIRAP.")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", parents=[common, protocol], help="evolve one protocol and write its trajectory")
    simulate.add_argument("--method", choices=[TrajectoryMethod.NUMERIC.value, TrajectoryMethod.ADIABATIC.value])

    scan = commands.add_parser("scan", parents=[common, protocol], help="fidelity versus a systematic error")
    scan.add_argument("--kind", choices=["amplitude", "detuning", "delay"])
    scan.add_argument("--points", help="number of error values")
    scan.add_argument("--low", help="lower end of the error range (MHz for detuning)")
    scan.add_argument("--high", help="upper end of the error range (MHz for detuning)")

    commands.add_parser("verify", parents=[common], help="run the invariant suite, exit 2 on failure")

    pulses = commands.add_parser("emit-pulses", parents=[common], help="write reference and rescaled pulse samples")
    pulses.add_argument("--a", help="time contraction parameter")
    pulses.add_argument("--points", help="number of samples")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, str]:
    mapping = {
        "protocol": "run.protocol",
        "method": "run.method",
        "workers": "run.workers",
        "steps": "run.steps",
        "a": "rescale.a",
        "kind": "scan.kind",
        "low": "scan.low",
        "high": "scan.high",
    }
    overrides = {key: str(getattr(args, name)) for name, key in mapping.items() if getattr(args, name, None) is not None}
    points = getattr(args, "points", None)
    if points is not None:
        overrides["output.pulse_points" if args.command == "emit-pulses" else "scan.n_points"] = str(points)
    return overrides


def _load(args: argparse.Namespace) -> RunConfig:
    overrides = _overrides(args)
    if args.config is None:
        return default_config(overrides)
    return load_config(args.config, overrides)


def simulate(config: RunConfig) -> Trajectory:
    """Evolve the configured protocol from |1> on a uniform grid over its duration."""
    p = config.stirap
    n = config.grid_points
    adiabatic = config.method is TrajectoryMethod.ADIABATIC

    if config.protocol is Protocol.TR:
        r = config.require_rescale()
        if adiabatic:
            return reparametrized_trajectory(adiabatic_trajectory(p, uniform_grid(p.t_f, n)), r, stirap=p)
        hamiltonian = tr_hamiltonian(StirapHamiltonian(p), r)
        total = default_steps(r) if config.steps is None else config.steps
    elif config.protocol is Protocol.REFERENCE:
        if adiabatic:
            return adiabatic_trajectory(p, uniform_grid(p.t_f, n))
        hamiltonian = StirapHamiltonian(p)
        total = REFERENCE_STEPS if config.steps is None else config.steps
    else:
        if adiabatic:
            raise ConfigError("the adiabatic method needs the reference or tr protocol", key="run.method")
        hamiltonian = config.require_baseline().build()
        total = REFERENCE_STEPS if config.steps is None else config.steps

    grid = uniform_grid(hamiltonian.duration, n)
    return evolve(hamiltonian, ket(1), grid, substeps_for(total, grid),
                  check_convergence=config.check_convergence, convergence_tol=config.convergence_tol)


def _run(args: argparse.Namespace) -> int:
    config = _load(args)
    out = config.output

    if args.command == "simulate":
        trajectory = simulate(config)
        path = emit_trajectory(trajectory, args.output or out.path(out.trajectory))
        p1, p2, p3 = trajectory.populations[-1]
        print(f"{config.protocol.value} ({trajectory.method.value}) t = {trajectory.final_time:.6g} us: "
              f"P1 = {p1:.6f}, P2 = {p2:.6f}, P3 = {p3:.6f} -> {path}")
        if trajectory.converged is False:
            print(f"warning: step doubling changed amplitudes by {trajectory.convergence_error:.3e}")
        return EXIT_OK

    if args.command == "scan":
        result = run_scan(config.require_scan())
        path = emit_scan(result, args.output or out.path(out.scan), config)
        failed = int(result.failed.sum())
        print(f"{result.protocol} {result.spec.error_kind.value} scan: {len(result)} points, {failed} failed -> {path}")
        return EXIT_OK

    if args.command == "emit-pulses":
        path = emit_pulses(args.output or out.path(out.pulses), config.stirap, config.require_rescale(), out.pulse_points)
        print(f"pulses -> {path}")
        return EXIT_OK

    a_values = sorted(set(DEFAULT_A_VALUES) | ({config.rescale.a} if config.rescale else set()))
    report = run_verification(config.stirap, a_values, config.grid_points, config.steps)
    for check in report.checks:
        print(f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.value:.3e} (bound {check.bound:.1e})")
    if not report.passed:
        print(f"{len(report.failures)} of {len(report.checks)} checks failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cli_main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        ## argparse exits 2 on a usage error, which is reserved for failed checks here
        return EXIT_OK if not exc.code else EXIT_CONFIG
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except StaError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
