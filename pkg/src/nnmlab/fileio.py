"""CSV / JSON persistence helpers and run manifests.

Every artefact written by the CLI is a CSV payload plus a JSON manifest that
echoes the fully resolved configuration, the tool version and a hash of that
configuration.  Timestamps live in a single isolated manifest field so that
reruns with identical configs produce byte-identical payloads and manifests
that differ only there.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidInputError
from .newmark import StateTrajectory, forcing_from_dict


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:16]


def write_manifest(path, config: dict, extra: dict | None = None) -> dict:
    manifest = {
        "version": __version__,
        "config": config,
        "config_hash": config_hash(config),
        "timestamp": {"written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z")},
    }
    if extra:
        manifest.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")
    return manifest


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())


def write_csv(path, header: list[str], rows: np.ndarray):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.atleast_2d(np.asarray(rows))
    if rows.size and rows.shape[1] != len(header):
        raise InvalidInputError(f"{len(header)} columns in header, rows have {rows.shape[1]}")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format(v, ".17g") for v in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader if row]
    return header, np.array(data) if data else np.empty((0, len(header)))


def save_trajectory(trajectory: StateTrajectory, csv_path, config: dict | None = None):
    """Persist a trajectory as CSV (time, x_*, v_*) plus a JSON sidecar."""
    csv_path = Path(csv_path)
    n = trajectory.n_dof
    header = ["time"] + [f"x_{i}" for i in range(n)] + [f"v_{i}" for i in range(n)]
    rows = np.column_stack([trajectory.times, trajectory.states])
    write_csv(csv_path, header, rows)
    sidecar = {
        "dt": trajectory.dt,
        "n_dof": n,
        "n_samples": trajectory.n_steps,
        "forcing": trajectory.forcing_dict(),
    }
    write_manifest(csv_path.with_suffix(".json"), config or {}, extra={"trajectory": sidecar})


def load_trajectory(csv_path) -> StateTrajectory:
    csv_path = Path(csv_path)
    header, rows = read_csv(csv_path)
    if not header or header[0] != "time" or (len(header) - 1) % 2 != 0:
        raise InvalidInputError(f"{csv_path} is not a trajectory CSV")
    if rows.shape[0] < 2:
        raise InvalidInputError(f"{csv_path} has fewer than 2 samples")
    dt = float(rows[1, 0] - rows[0, 0])
    forcing = None
    sidecar = csv_path.with_suffix(".json")
    if sidecar.exists():
        meta = read_manifest(sidecar).get("trajectory", {})
        dt = float(meta.get("dt", dt))
        forcing = forcing_from_dict(meta.get("forcing"))
    return StateTrajectory(dt=dt, states=rows[:, 1:], forcing=forcing)


def save_matrix_csv(matrix, path):
    matrix = np.atleast_2d(np.asarray(matrix))
    write_csv(path, [f"c{i}" for i in range(matrix.shape[1])], matrix)
