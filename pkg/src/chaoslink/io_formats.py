"""File formats: trajectory dumps, masked-series files, CSV/JSON reports.

Binary layouts are little-endian throughout. Every artifact embeds the map
parameters, the seed, and the package version so any output can be
regenerated from its own header.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .core_map import Trajectory
from .link import MaskedSeries, ModulationConfig
from .params import SettlingConfig, SystemParams

TRAJECTORY_MAGIC = b"CLTR"
MASKED_MAGIC = b"CLMS"
FORMAT_VERSION = 1

_PARAMS_FIELDS = ("a", "b", "c", "beta", "gamma")


def _params_bytes(params: SystemParams) -> bytes:
    return struct.pack("<5d", *(getattr(params, f) for f in _PARAMS_FIELDS))


def _params_from(raw: bytes) -> SystemParams:
    return SystemParams(**dict(zip(_PARAMS_FIELDS, struct.unpack("<5d", raw))))


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """CSV with columns n, x, y, z, w and a JSON metadata comment line."""
    meta = {
        "version": __version__,
        "params": asdict(traj.params),
        "mode": traj.mode,
        "seed": traj.seed,
        "transient": traj.transient,
    }
    w = traj.w
    with open(path, "w", newline="") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["n", "x", "y", "z", "w"])
        for k, (state, wk) in enumerate(zip(traj.states, w)):
            writer.writerow(
                [k] + [repr(float(v)) for v in (state[0], state[1], state[2], wk)]
            )


def write_trajectory_dump(path, traj: Trajectory) -> None:
    """Compact binary dump: header (params, mode, seed) + (x, y, z, w) rows."""
    t_n = traj.settling.t_n if traj.settling is not None else float("nan")
    seed = -1 if traj.seed is None else int(traj.seed)
    header = (
        TRAJECTORY_MAGIC
        + struct.pack("<H", FORMAT_VERSION)
        + _params_bytes(traj.params)
        + struct.pack("<dqqQ", t_n, seed, traj.transient, len(traj))
    )
    rows = np.column_stack([traj.states, traj.w]).astype("<f8")
    Path(path).write_bytes(header + rows.tobytes())


def read_trajectory_dump(path) -> Trajectory:
    raw = Path(path).read_bytes()
    if raw[:4] != TRAJECTORY_MAGIC:
        raise ValueError(f"{path}: not a trajectory dump")
    (version,) = struct.unpack("<H", raw[4:6])
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    params = _params_from(raw[6:46])
    t_n, seed, transient, n = struct.unpack("<dqqQ", raw[46:78])
    rows = np.frombuffer(raw, dtype="<f8", count=4 * n, offset=78).reshape(n, 4)
    return Trajectory(
        states=rows[:, :3].copy(),
        params=params,
        settling=None if np.isnan(t_n) else SettlingConfig(t_n=t_n),
        seed=None if seed < 0 else int(seed),
        transient=int(transient),
    )


def write_masked_series(path, masked: MaskedSeries) -> None:
    """Binary masked-series file: header (params, modulation, seed) + samples.

    Only the transmitted w* travels; the reference bits and the clean output
    stay with the transmitter, so a separately invoked receiver process gets
    exactly what the channel would deliver.
    """
    cfg = masked.config
    header = (
        MASKED_MAGIC
        + struct.pack("<H", FORMAT_VERSION)
        + _params_bytes(masked.params)
        + struct.pack(
            "<dIddqIIQ",
            cfg.amplitude,
            cfg.samples_per_bit,
            cfg.f_clk,
            cfg.bit_rate,
            int(masked.seed),
            masked.settle_steps,
            masked.pilot_bits,
            masked.w_star.size,
        )
    )
    Path(path).write_bytes(header + masked.w_star.astype("<f8").tobytes())


def read_masked_series(path) -> MaskedSeries:
    raw = Path(path).read_bytes()
    if raw[:4] != MASKED_MAGIC:
        raise ValueError(f"{path}: not a masked-series file")
    (version,) = struct.unpack("<H", raw[4:6])
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    params = _params_from(raw[6:46])
    amplitude, spb, f_clk, bit_rate, seed, settle, pilot, n = struct.unpack(
        "<dIddqIIQ", raw[46:98]
    )
    samples = np.frombuffer(raw, dtype="<f8", count=n, offset=98).copy()
    return MaskedSeries(
        w_star=samples,
        config=ModulationConfig(
            amplitude=amplitude,
            samples_per_bit=spb,
            f_clk=f_clk,
            bit_rate=bit_rate,
        ),
        params=params,
        seed=int(seed),
        settle_steps=int(settle),
        pilot_bits=int(pilot),
    )


def write_csv(path, header, rows, metadata: dict | None = None) -> None:
    """CSV table with an optional leading JSON metadata comment."""
    with open(path, "w", newline="") as fh:
        if metadata is not None:
            meta = dict(metadata)
            meta.setdefault("version", __version__)
            fh.write("# " + json.dumps(meta, sort_keys=True, default=str) + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_json_report(path, payload: dict) -> None:
    report = dict(payload)
    report.setdefault("version", __version__)
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")
