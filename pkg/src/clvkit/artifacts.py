"""File artifacts: CSV/JSON writers, the binary record checkpoint, gnuplot.

All writes are whole-file atomic (write a temp file, then rename). Floats in
CSV files are printed in scientific notation with 17 significant digits so
files round-trip to the exact doubles that produced them.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from .errors import ArgumentError, CheckpointError
from .ginelli import ForwardRecord, VectorField, canonicalize_signs
from .integrate import Trajectory

CHECKPOINT_MAGIC = b"CLVF"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sIIIQQddI")  # magic, version, dim, substeps, n1, n2, t0, dt, meta len


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """Header ``t,x1..xn``, one row per grid point."""
    dim = traj.states.shape[1]
    lines = ["t," + ",".join(f"x{i + 1}" for i in range(dim))]
    times = traj.times
    for k in range(traj.states.shape[0]):
        lines.append(_fmt(times[k]) + "," + ",".join(_fmt(v) for v in traj.states[k]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_vectors_csv(path, vf: VectorField) -> None:
    """Header ``n,t,x1..xn,v1_1..v1_n,...,vn_1..vn_n``; signs canonicalized."""
    dim = vf.vectors.shape[-1]
    head = ["n", "t"]
    head += [f"x{i + 1}" for i in range(dim)]
    for j in range(dim):
        head += [f"v{j + 1}_{i + 1}" for i in range(dim)]
    lines = [",".join(head)]
    V = canonicalize_signs(vf.vectors)
    times = vf.times
    steps = vf.steps
    for k in range(V.shape[0]):
        row = [str(int(steps[k])), _fmt(times[k])]
        row += [_fmt(v) for v in vf.base_points[k]]
        for j in range(dim):
            row += [_fmt(v) for v in V[k][:, j]]
        lines.append(",".join(row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def checkpoint_write(path, rec: ForwardRecord) -> None:
    """Serialize a ForwardRecord; little-endian, versioned, bit-exact."""
    meta = json.dumps(
        {"system": rec.system_name, "params": rec.params}, sort_keys=True
    ).encode("utf-8")
    head = _HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        rec.dim,
        rec.substeps,
        rec.n1,
        rec.n2,
        rec.t0,
        rec.dt,
        len(meta),
    )
    body = b"".join(
        np.ascontiguousarray(a, dtype="<f8").tobytes()
        for a in (rec.states, rec.frames, rec.factors)
    )
    atomic_write_bytes(path, head + meta + body)


def checkpoint_read(path) -> ForwardRecord:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CheckpointError(f"checkpoint '{path}' is truncated")
    magic, version, dim, substeps, n1, n2, t0, dt, meta_len = _HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"'{path}' is not a checkpoint file (bad magic {magic!r})")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint version {version} unsupported (expected {CHECKPOINT_VERSION})"
        )
    off = _HEADER.size
    try:
        meta = json.loads(raw[off : off + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"checkpoint '{path}' has corrupt metadata: {exc}") from exc
    off += meta_len
    counts = ((n2 + 1) * dim, (n2 + 1) * dim * dim, n2 * dim * dim)
    if len(raw) - off != 8 * sum(counts):
        raise CheckpointError(f"checkpoint '{path}' body size mismatch")
    arrays = []
    for count in counts:
        arrays.append(np.frombuffer(raw, dtype="<f8", count=count, offset=off).copy())
        off += 8 * count
    return ForwardRecord(
        system_name=meta["system"],
        params=meta["params"],
        t0=t0,
        dt=dt,
        substeps=substeps,
        n1=n1,
        n2=n2,
        states=arrays[0].reshape(n2 + 1, dim),
        frames=arrays[1].reshape(n2 + 1, dim, dim),
        factors=arrays[2].reshape(n2, dim, dim),
    )


def records_equal(a: ForwardRecord, b: ForwardRecord) -> bool:
    """Bit-exact comparison of two records (metadata and array bytes)."""
    meta = all(
        getattr(a, k) == getattr(b, k)
        for k in ("system_name", "params", "t0", "dt", "substeps", "n1", "n2")
    )
    return (
        meta
        and a.states.tobytes() == b.states.tobytes()
        and a.frames.tobytes() == b.frames.tobytes()
        and a.factors.tobytes() == b.factors.tobytes()
    )


def _require_data_rows(csv_path) -> None:
    p = Path(csv_path)
    if not p.is_file():
        raise ArgumentError(f"artifact '{p}' does not exist")
    with open(p, "r", encoding="utf-8") as fh:
        fh.readline()
        if fh.readline() == "":
            raise ArgumentError(f"artifact '{p}' has no data rows")


def gnuplot_vectors_script(csv_path, out_dir, stride: int = 500, scale: float = 20.0) -> str:
    """3D orbit with vector glyphs every ``stride`` rows, length ``scale``.

    Assumes a 3D vectors CSV; the returned script references the CSV by path
    relative to ``out_dir``.
    """
    _require_data_rows(csv_path)
    rel = os.path.relpath(Path(csv_path).resolve(), Path(out_dir).resolve())
    lines = [
        "# 3D orbit with tangent-vector glyphs; run: gnuplot -persist <script>",
        "set datafile separator ','",
        "set xlabel 'x'",
        "set ylabel 'y'",
        "set zlabel 'z'",
        "set ticslevel 0",
        f"L = {scale:g}",
        f"csv = '{rel}'",
        "splot csv skip 1 using 3:4:5 with lines lc rgb 'gray50' title 'orbit', \\",
        f"      csv skip 1 every {stride} using 3:4:5:($6*L):($7*L):($8*L) "
        "with vectors lc rgb 'red' title 'v1', \\",
        f"      csv skip 1 every {stride} using 3:4:5:($9*L):($10*L):($11*L) "
        "with vectors lc rgb 'web-green' title 'v2', \\",
        f"      csv skip 1 every {stride} using 3:4:5:($12*L):($13*L):($14*L) "
        "with vectors lc rgb 'blue' title 'v3'",
        "pause -1",
    ]
    return "\n".join(lines) + "\n"


def gnuplot_perturbed_script(csv_path, out_dir) -> str:
    """Two panels: the 3D perturbed orbit and its xy projection."""
    _require_data_rows(csv_path)
    rel = os.path.relpath(Path(csv_path).resolve(), Path(out_dir).resolve())
    lines = [
        "# perturbed orbit, 3D view and xy projection; run: gnuplot -persist <script>",
        "set datafile separator ','",
        f"csv = '{rel}'",
        "set multiplot layout 1,2",
        "set xlabel 'x'",
        "set ylabel 'y'",
        "set zlabel 'z'",
        "set ticslevel 0",
        "splot csv skip 1 using 2:3:4 with lines lc rgb 'blue' title 'orbit'",
        "set xlabel 'x'",
        "set ylabel 'y'",
        "plot csv skip 1 using 2:3 with lines lc rgb 'blue' title 'xy projection'",
        "unset multiplot",
        "pause -1",
    ]
    return "\n".join(lines) + "\n"
