"""Deterministic artifact I/O: field dumps, CSV tables, JSON records.

Everything written here is a pure function of its inputs (sorted keys, fixed
float formatting, no timestamps), so re-running a pipeline with the same
config and seed reproduces artifacts byte-for-byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .grids import GridSpec

__all__ = ["config_hash", "write_json", "read_json", "write_csv",
           "write_field", "read_field", "band_csv", "modes_csv",
           "profile_csv", "emit_plot_script"]


def config_hash(obj) -> str:
    """Short stable hash of a JSON-serializable configuration."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def write_field(path_base, values: np.ndarray, grid: GridSpec,
                meta: dict | None = None) -> Path:
    """Flat binary dump plus JSON header (shape, staggering, bloch data)."""
    base = Path(path_base)
    base.parent.mkdir(parents=True, exist_ok=True)
    arr = np.ascontiguousarray(values)
    header = {"shape": list(arr.shape), "dtype": str(arr.dtype),
              "grid_shape": list(grid.shape),
              "spacing": list(grid.spacing), "origin": list(grid.origin)}
    header.update(meta or {})
    base.with_suffix(".bin").write_bytes(arr.tobytes())
    write_json(base.with_suffix(".json"), header)
    return base.with_suffix(".bin")


def read_field(path_base):
    """Inverse of write_field; returns (values, header dict)."""
    base = Path(path_base)
    header = read_json(base.with_suffix(".json"))
    raw = base.with_suffix(".bin").read_bytes()
    arr = np.frombuffer(raw, dtype=np.dtype(header["dtype"]))
    arr = arr.reshape(header["shape"])
    expect = int(np.prod(header["shape"]))
    if arr.size != expect:
        raise ValidationError(
            f"field dump has {arr.size} entries, header says {expect}")
    return arr, header


def band_csv(bt, path) -> Path:
    """BandTable as (k, band index, lambda) rows."""
    return write_csv(path, ["k", "band", "lambda"], bt.rows())


def modes_csv(modes, path) -> Path:
    return write_csv(path, ["k1", "lambda", "residual", "localization"],
                     ((m.k1, m.lam, m.residual,
                       m.localization if m.localization is not None else "")
                      for m in modes))


def profile_csv(prof, path, d_lo=None, d_hi=None) -> Path:
    return write_csv(path, ["dist", "norm", "log_norm", "in_window"],
                     ((d, n, ln, int(ok))
                      for d, n, ln, ok in prof.rows(d_lo, d_hi)))


_PLOTS = {
    "bands": """\
import csv, sys
from collections import defaultdict
import matplotlib.pyplot as plt

by_band = defaultdict(list)
with open(sys.argv[1] if len(sys.argv) > 1 else {src!r}) as fh:
    for row in csv.DictReader(fh):
        by_band[int(row["band"])].append((float(row["k"]), float(row["lambda"])))
for band, pts in sorted(by_band.items()):
    pts.sort()
    plt.plot(*zip(*pts), "o-", ms=3, label=f"band {{band}}")
plt.xlabel("Bloch momentum"); plt.ylabel("eigenvalue"); plt.legend()
plt.savefig({out!r}, dpi=150)
""",
    "decay": """\
import csv, sys
import matplotlib.pyplot as plt

dist, norm, flag = [], [], []
with open(sys.argv[1] if len(sys.argv) > 1 else {src!r}) as fh:
    for row in csv.DictReader(fh):
        dist.append(float(row["dist"])); norm.append(float(row["norm"]))
        flag.append(bool(int(row["in_window"])))
plt.semilogy(dist, norm, "o-", ms=3)
plt.semilogy([d for d, f in zip(dist, flag) if f],
             [n for n, f in zip(norm, flag) if f], "rs", ms=4, label="fit window")
plt.xlabel("distance to strip"); plt.ylabel("windowed norm"); plt.legend()
plt.savefig({out!r}, dpi=150)
""",
    "map": """\
import csv, sys
import matplotlib.pyplot as plt

ls, es, margin = [], [], []
with open(sys.argv[1] if len(sys.argv) > 1 else {src!r}) as fh:
    for row in csv.DictReader(fh):
        ls.append(float(row["l"])); es.append(float(row["eps"]))
        margin.append(float(row["margin"]))
sc = plt.scatter(ls, es, c=margin, cmap="RdYlGn", s=120, marker="s")
plt.colorbar(sc, label="condition margin")
plt.xlabel("l"); plt.ylabel("eps")
plt.savefig({out!r}, dpi=150)
""",
}


def emit_plot_script(path, kind: str, source_csv, figure_out) -> Path:
    """Write a standalone matplotlib script for a CSV artifact."""
    if kind not in _PLOTS:
        raise ValidationError(f"unknown plot kind {kind!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_PLOTS[kind].format(src=str(source_csv),
                                        out=str(figure_out)))
    return path
