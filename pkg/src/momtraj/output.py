"""Deterministic run outputs: CSV exports, stats JSON, config INI, manifests.

All numeric output uses round-trip decimal formatting (shortest string that
parses back to the identical IEEE-754 double), so identical runs produce
byte-identical data files. Wall-clock timestamps appear only in the manifest,
never in data files.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .currents import CurrentField, current_for
from .errors import ConfigurationError
from .grid import ComplexField, Representation
from .potentials import Free, Harmonic, Linear, Potential
from .scenarios import CURRENTS, RunResult, ScenarioConfig
from .trajectories import TrajStatus


def fmt(x: float) -> str:
    return repr(float(x))


# -- CSV writers ----------------------------------------------------------------------


def write_field_csv(field: ComplexField, path: str | Path) -> Path:
    """`axis0[,axis1],re,im` rows in row-major grid order."""
    path = Path(path)
    grid = field.grid
    mesh = np.meshgrid(*[grid.axis_points(field.rep, a) for a in range(grid.dof)], indexing="ij")
    flat = [m.ravel() for m in mesh]
    vals = field.values.ravel()
    header = ",".join([f"axis{a}" for a in range(grid.dof)] + ["re", "im"])
    with path.open("w") as fh:
        fh.write(header + "\n")
        for i in range(vals.size):
            coords = ",".join(fmt(f[i]) for f in flat)
            fh.write(f"{coords},{fmt(vals[i].real)},{fmt(vals[i].imag)}\n")
    return path


def read_field_csv(path: str | Path, grid, rep: Representation, time: float = 0.0) -> ComplexField:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    if data.shape[0] != grid.size:
        raise ConfigurationError(f"field CSV has {data.shape[0]} rows, grid expects {grid.size}")
    vals = (data[:, -2] + 1j * data[:, -1]).reshape(grid.shape)
    return ComplexField(grid, rep, vals, time)


def write_current_csv(current: CurrentField, path: str | Path) -> Path:
    """`p0[,p1],j0[,j1]` rows in row-major grid order."""
    path = Path(path)
    grid = current.grid
    mesh = np.meshgrid(*[grid.momenta(a) for a in range(grid.dof)], indexing="ij")
    flat = [m.ravel() for m in mesh]
    comps = [current.components[a].ravel() for a in range(grid.dof)]
    header = ",".join([f"p{a}" for a in range(grid.dof)] + [f"j{a}" for a in range(grid.dof)])
    with path.open("w") as fh:
        fh.write(header + "\n")
        for i in range(flat[0].size):
            row = [fmt(f[i]) for f in flat] + [fmt(c[i]) for c in comps]
            fh.write(",".join(row) + "\n")
    return path


_STATUS_NAMES = {
    TrajStatus.ACTIVE: "active",
    TrajStatus.FROZEN_AT_NODE: "frozen_at_node",
    TrajStatus.LEFT_GRID: "left_grid",
}


def write_trajectories_csv(ensemble, path: str | Path, limit: int = 200) -> Path:
    """`traj_id,t,p0[,p1],x0[,x1],status` at frame resolution.

    Writes the first `limit` trajectories (0 = all); full histories stay in
    memory for the statistics either way.
    """
    path = Path(path)
    hist = ensemble.history
    n = hist.n_trajectories if limit == 0 else min(limit, hist.n_trajectories)
    dof = hist.x.shape[2]
    cols = ["traj_id", "t"]
    if hist.p is not None:
        cols += [f"p{a}" for a in range(dof)]
    cols += [f"x{a}" for a in range(dof)] + ["status"]
    with path.open("w") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(n):
            for f, t in enumerate(hist.times):
                row = [str(i), fmt(t)]
                if hist.p is not None:
                    row += [fmt(v) for v in hist.p[f, i]]
                row += [fmt(v) for v in hist.x[f, i]]
                row.append(_STATUS_NAMES[TrajStatus(int(hist.status[f, i]))])
                fh.write(",".join(row) + "\n")
    return path


def write_histogram_csv(centers, density, path: str | Path) -> Path:
    """`bin_center[,bin_center1],density` rows."""
    path = Path(path)
    dens = np.asarray(density)
    with path.open("w") as fh:
        if dens.ndim == 1:
            fh.write("bin_center,density\n")
            for c, d in zip(np.asarray(centers), dens):
                fh.write(f"{fmt(c)},{fmt(d)}\n")
        else:
            fh.write("bin_center,bin_center1,density\n")
            c0, c1 = centers
            for i in range(dens.shape[0]):
                for j in range(dens.shape[1]):
                    fh.write(f"{fmt(c0[i, j])},{fmt(c1[i, j])},{fmt(dens[i, j])}\n")
    return path


# -- JSON / INI -----------------------------------------------------------------------


def _jsonify(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


def write_stats_json(result: RunResult, path: str | Path) -> Path:
    path = Path(path)
    payload = {
        "scenario": result.config.name,
        "seed": result.config.seed,
        "n_samples": result.config.n_samples,
        "frames": _jsonify(result.stats_rows),
        "diagnostics": _jsonify(result.diagnostics),
        "verdicts": [_jsonify(dataclasses.asdict(v)) for v in result.verdicts],
    }
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    return path


_INI_SECTIONS = {
    "scenario": ("name", "model", "current", "seed", "n_samples"),
    "grid": ("grid_points", "grid_extent", "grid_points2", "grid_extent2"),
    "time": ("dt", "steps_per_frame", "t_final"),
    "state": ("sigma", "sigma_env", "a", "dpe", "c1_sq", "delta_p",
              "displacement", "linear_coeff"),
    "units": ("mass", "omega", "hbar"),
    "output": ("histogram_bins", "traj_csv_limit"),
}


def write_config_ini(config: ScenarioConfig, path: str | Path) -> Path:
    path = Path(path)
    data = config.as_dict()
    cp = configparser.ConfigParser()
    for section, keys in _INI_SECTIONS.items():
        cp[section] = {}
        for k in keys:
            v = data[k]
            cp[section][k] = fmt(v) if isinstance(v, float) else str(v)
    with path.open("w") as fh:
        cp.write(fh)
    return path


def read_config_ini(path: str | Path) -> ScenarioConfig:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigurationError(f"config file not found or unreadable: {path}")
    types = {f.name: type(f.default) for f in dataclasses.fields(ScenarioConfig)}
    flat: dict = {}
    for section in cp.sections():
        for k, v in cp[section].items():
            if k not in types:
                raise ConfigurationError(f"unknown config key {k!r} in [{section}]")
            t = types[k]
            flat[k] = v if t is str else t(float(v)) if t is int else t(v)
    return ScenarioConfig.from_dict(flat)


# -- manifest and full run output --------------------------------------------------------


def sha256_of(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def potential_for(config: ScenarioConfig) -> Potential:
    """The potential each built-in scenario runs under."""
    if config.name in ("collapse", "harmonic-coherent"):
        return Harmonic(config.mass, config.omega)
    if config.name == "linear-drift":
        return Linear(config.linear_coeff)
    return Free()


def write_run_outputs(result: RunResult, out_dir: str | Path, tool_version: str,
                      started: str, finished: str) -> Path:
    """Write the full artifact set for a run and its digest manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []
    files.append(write_config_ini(result.config, out / "config.ini"))
    files.append(write_stats_json(result, out / "stats.json"))

    final = result.frames[-1]
    files.append(write_field_csv(final.psi_x, out / "field_final_position.csv"))
    files.append(write_field_csv(final.psi_p, out / "field_final_momentum.csv"))
    pot = potential_for(result.config)
    cur = current_for(pot, final.psi_x, final.psi_p, CURRENTS[result.config.current])
    files.append(write_current_csv(cur, out / "current_final.csv"))

    for model, ens in result.ensembles.items():
        files.append(
            write_trajectories_csv(ens, out / f"trajectories_{model}.csv",
                                   result.config.traj_csv_limit)
        )
        hist = ens.history
        act = hist.status[-1] == TrajStatus.ACTIVE
        xs = hist.x[-1][act]
        grid = final.psi_x.grid
        if grid.dof == 1:
            lo, hi = grid.positions(0)[0], grid.positions(0)[-1]
            counts, edges = np.histogram(xs[:, 0], bins=result.config.histogram_bins,
                                         range=(lo, hi))
            width = edges[1] - edges[0]
            dens = counts / (counts.sum() * width) if counts.sum() else counts.astype(float)
            centers = 0.5 * (edges[:-1] + edges[1:])
            files.append(write_histogram_csv(centers, dens, out / f"histogram_{model}.csv"))
        else:
            rng = [(grid.positions(a)[0], grid.positions(a)[-1]) for a in range(2)]
            counts, e0, e1 = np.histogram2d(xs[:, 0], xs[:, 1], bins=50, range=rng)
            area = (e0[1] - e0[0]) * (e1[1] - e1[0])
            dens = counts / (counts.sum() * area) if counts.sum() else counts
            c0 = 0.5 * (e0[:-1] + e0[1:])
            c1 = 0.5 * (e1[:-1] + e1[1:])
            files.append(write_histogram_csv(np.meshgrid(c0, c1, indexing="ij"), dens,
                                             out / f"histogram_{model}.csv"))

    manifest = {
        "tool": f"momtraj {tool_version}",
        "config": _jsonify(result.config.as_dict()),
        "seed": result.config.seed,
        "started_utc": started,
        "finished_utc": finished,
        "verdicts": [_jsonify(dataclasses.asdict(v)) for v in result.verdicts],
        "passed": result.passed,
        "outputs": {f.name: f"sha256:{sha256_of(f)}" for f in sorted(files)},
    }
    mpath = out / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return mpath


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()
