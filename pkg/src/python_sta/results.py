import csv
import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from python_sta import rescale
from python_sta.config import RunConfig, config_sections
from python_sta.errors import OutputError
from python_sta.experiments import ScanResult
from python_sta.hamiltonian import StirapParams, tr_pulses_closed_form
from python_sta.hamiltonian.stirap import pump_pulse, stokes_pulse
from python_sta.propagator import Trajectory
from python_sta.rescale import RescaleParams

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
TRAJECTORY_HEADER = ("t_us", "re1", "im1", "re2", "im2", "re3", "im3", "P1", "P2", "P3")
SCAN_HEADER = ("error_value", "fidelity", "protocol", "a", "T_us")
PULSE_HEADER = ("t_ref_us", "omega_p", "omega_s", "t_tr_us", "f_us", "f_dot", "omega_p_tr", "omega_s_tr", "delta_tr")


def format_value(value: float) -> str:
    """17 significant digits: float(format_value(x)) == x for every finite x."""
    return f"{float(value):.17g}"


@contextmanager
def _open_for_writing(path: Path) -> Iterator:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            yield handle
    except OSError as exc:
        raise OutputError(path, exc) from exc


def _write_csv(path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path = Path(path)
    with _open_for_writing(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow(row)
            count += 1
    logger.info("wrote %d rows to %s", count, path)
    return path


def emit_trajectory(trajectory: Trajectory, path) -> Path:
    """Write a trajectory as t_us, Re/Im of each amplitude and the three level populations."""
    populations = trajectory.populations
    rows = (
        [format_value(t)]
        + [format_value(part) for amplitude in state for part in (amplitude.real, amplitude.imag)]
        + [format_value(p) for p in pops]
        for t, state, pops in zip(trajectory.times, trajectory.states, populations)
    )
    return _write_csv(path, TRAJECTORY_HEADER, rows)


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def emit_scan(result: ScanResult, path, config: RunConfig | None = None) -> Path:
    """
    Write a scan curve as CSV plus a JSON sidecar next to it carrying the scan metadata,
    the indices of failed points and, when given, the full run configuration.
    """
    spec = result.spec
    a = "" if spec.a is None else format_value(spec.a)
    rows = (
        [format_value(x), format_value(fid), result.protocol, a, format_value(spec.duration)]
        for x, fid in zip(result.error_values, result.fidelities)
    )
    written = _write_csv(path, SCAN_HEADER, rows)

    provenance = {
        "format_version": FORMAT_VERSION,
        "protocol": result.protocol,
        "n_points": len(result),
        "failed_points": [int(i) for i in np.flatnonzero(result.failed)],
        "metadata": result.metadata,
        "config": None if config is None else config_sections(config),
    }
    sidecar = sidecar_path(written)
    with _open_for_writing(sidecar) as handle:
        json.dump(provenance, handle, indent=4)
    return written


def emit_pulses(path, p: StirapParams, r: RescaleParams, n_points: int) -> Path:
    """
    Reference pulses on [0, t_f] and the rescaled ones on the matching grid t_ref / a of
    [0, t_f / a], together with the route f(t) and the bracket factor f_dot(t).
    """
    t_ref = np.linspace(0.0, p.t_f, n_points)
    t_tr = t_ref / r.a
    omega_p_tr, omega_s_tr, delta_tr = tr_pulses_closed_form(p, r, t_tr)
    columns = (
        t_ref,
        np.asarray(pump_pulse(p, t_ref)),
        np.asarray(stokes_pulse(p, t_ref)),
        t_tr,
        np.asarray(rescale.f(r, t_tr)),
        np.asarray(rescale.f_dot(r, t_tr)),
        np.broadcast_to(omega_p_tr, t_tr.shape),
        np.broadcast_to(omega_s_tr, t_tr.shape),
        np.broadcast_to(delta_tr, t_tr.shape),
    )
    rows = ([format_value(column[i]) for column in columns] for i in range(n_points))
    return _write_csv(path, PULSE_HEADER, rows)
