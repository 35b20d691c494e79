"""On-disk formats: raw frame stacks, PGM heatmaps, CSV tables, manifests.

Frame stacks are stored as raw little-endian float32, shot-major and then
strip/row-major, next to a JSON sidecar describing geometry, seed, RNG,
strip byte offsets and the configuration echo.  All writers are
deterministic for identical input; timestamps only ever appear in the run
manifest.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .geometry import DetectorGeometry
from .ensemble import FrameStack

FRAMES_FILE = "frames.f32"
SIDECAR_FILE = "meta.json"
MANIFEST_FILE = "manifest.json"

TOOL_VERSION = "0.1.0"


def save_frames(stack: FrameStack, out_dir) -> Path:
    """Write a frame stack (float32 raw plus JSON sidecar) into a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = stack.frames.astype("<f4")
    (out / FRAMES_FILE).write_bytes(data.tobytes())
    strip_bytes = data.shape[2] * data.shape[3] * 4
    sidecar = {
        "dtype": "<f4",
        "shape": list(data.shape),
        "order": "shot-major, then strip, row, column",
        "strip_offsets_bytes": {"signal": 0, "idler": strip_bytes},
        "shot_stride_bytes": 2 * strip_bytes,
        "geometry": stack.geometry.describe(),
        "meta": _jsonable(stack.meta),
    }
    (out / SIDECAR_FILE).write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return out


def load_frames(in_dir) -> FrameStack:
    """Read a frame stack written by save_frames."""
    src = Path(in_dir)
    sidecar_path = src / SIDECAR_FILE
    if not sidecar_path.exists():
        raise ConfigError(f"no frame sidecar at {sidecar_path}")
    sidecar = json.loads(sidecar_path.read_text())
    shape = tuple(sidecar["shape"])
    raw = np.frombuffer((src / FRAMES_FILE).read_bytes(), dtype=sidecar["dtype"])
    if raw.size != int(np.prod(shape)):
        raise ConfigError("frame payload size does not match sidecar shape")
    g = sidecar["geometry"]
    geometry = DetectorGeometry(
        wavelength_min_nm=g["wavelength_min_nm"],
        wavelength_max_nm=g["wavelength_max_nm"],
        wavelength_pitch_nm=g["wavelength_pitch_nm"],
        radial_min_mrad=g["radial_min_mrad"],
        radial_max_mrad=g["radial_max_mrad"],
        radial_pitch_mrad=g["radial_pitch_mrad"],
        downsample=g["downsample"],
        arc_half_width_rad=g["arc_half_width_rad"],
        arc_points=g["arc_points"],
    )
    frames = raw.reshape(shape).astype(np.float64)
    return FrameStack(frames=frames, geometry=geometry, meta=sidecar["meta"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_pgm(values, path, sidecar: bool = True) -> Path:
    """8-bit binary PGM heatmap with min/max normalization in a JSON sidecar.

    Constant maps render uniformly black; the sidecar records the exact
    normalization so the grayscale is invertible.
    """
    a = np.asarray(values, dtype=float)
    if a.ndim != 2:
        raise ConfigError(f"heatmap must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ConfigError("heatmap contains non-finite values")
    lo = float(a.min())
    hi = float(a.max())
    if hi > lo:
        scaled = np.round(255.0 * (a - lo) / (hi - lo)).astype(np.uint8)
    else:
        scaled = np.zeros(a.shape, dtype=np.uint8)
    path = Path(path)
    header = f"P5\n{a.shape[1]} {a.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + scaled.tobytes())
    if sidecar:
        side = {
            "min": lo,
            "max": hi,
            "rows": int(a.shape[0]),
            "cols": int(a.shape[1]),
            "mapping": "value -> round(255*(value-min)/(max-min)), uniform if max==min",
        }
        path.with_suffix(path.suffix + ".json").write_text(
            json.dumps(side, indent=2, sort_keys=True)
        )
    return path


def write_csv(path, columns, rows, units: dict | None = None) -> Path:
    """CSV with one comment line of units, then a header row, then data."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if units:
            fh.write("# " + ", ".join(f"{k}: {v}" for k, v in units.items()) + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".12g")
    return v


def g2map_rows(g2map):
    """CSV rows (row_coord, col_coord, g2bar, stderr, m_g) of a map."""
    values = np.atleast_2d(g2map.values)
    stderr = np.atleast_2d(g2map.stderr)
    m_g = np.atleast_2d(g2map.mode_numbers)
    rows = []
    rcoords = np.atleast_1d(g2map.row_coords)
    ccoords = np.atleast_1d(g2map.col_coords)
    for i in range(values.shape[0]):
        for j in range(values.shape[1]):
            rows.append(
                (
                    float(rcoords[i % rcoords.size]),
                    float(ccoords[j % ccoords.size]),
                    float(values[i, j]),
                    float(stderr[i, j]),
                    float(m_g[i, j]),
                )
            )
    return rows


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(out_dir, config_echo, master_seed, rng_algorithm, started, extra=None):
    """Checksum inventory of every file in the output directory.

    Written last: everything present at call time is listed, then the
    manifest itself is added without a self-checksum.
    """
    out = Path(out_dir)
    files = sorted(
        p for p in out.rglob("*") if p.is_file() and p.name != MANIFEST_FILE
    )
    manifest = {
        "tool_version": TOOL_VERSION,
        "master_seed": master_seed,
        "rng_algorithm": rng_algorithm,
        "config_echo": _jsonable(config_echo),
        "started_unix": started,
        "finished_unix": time.time(),
        "files": {str(p.relative_to(out)): sha256_of(p) for p in files},
    }
    if extra:
        manifest.update(_jsonable(extra))
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return out / MANIFEST_FILE


def verify_manifest(out_dir) -> bool:
    """Re-hash every listed file and compare with the manifest."""
    out = Path(out_dir)
    manifest = json.loads((out / MANIFEST_FILE).read_text())
    for rel, digest in manifest["files"].items():
        target = out / rel
        if not target.exists() or sha256_of(target) != digest:
            return False
    return True
