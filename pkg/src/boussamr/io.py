"""Frame, gauge, and manifest output plus frame plotting.

Frame files hold one (frame, level, patch) triple each: a single header
line ``# t=<s> level=<l> i_lo=<n> dx=<m>`` followed by one row per
interior cell with columns ``x h hu eta psi B``.  All floating-point
values are written with 17 significant digits so that reading a frame
and re-emitting it is byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
import os
import re
from dataclasses import dataclass

import numpy as np

FLOAT_FMT = "%.17g"
FRAME_GLOB = "frame*_lev*_p*.txt"
_FRAME_NAME_RE = re.compile(r"frame(\d+)_lev(\d+)_p(\d+)\.txt$")


def format_float(value):
    """Render one float with 17 significant digits (round-trip exact)."""
    return FLOAT_FMT % float(value)


def frame_filename(frame_index, level, patch_index):
    return "frame%04d_lev%d_p%02d.txt" % (frame_index, level, patch_index)


@dataclass
class FrameData:
    """Parsed contents of a single frame file."""

    t: float
    level: int
    i_lo: int
    dx: float
    columns: np.ndarray  # shape (n, 6): x h hu eta psi B

    @property
    def x(self):
        return self.columns[:, 0]

    @property
    def h(self):
        return self.columns[:, 1]

    @property
    def hu(self):
        return self.columns[:, 2]

    @property
    def eta(self):
        return self.columns[:, 3]

    @property
    def psi(self):
        return self.columns[:, 4]

    @property
    def b(self):
        return self.columns[:, 5]


def frame_text(frame):
    """Serialize FrameData to the on-disk text format."""
    lines = [
        "# t=%s level=%d i_lo=%d dx=%s"
        % (format_float(frame.t), frame.level, frame.i_lo, format_float(frame.dx))
    ]
    for row in frame.columns:
        lines.append(" ".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def patch_frame_data(patch):
    """Extract a FrameData snapshot from a live patch (interior cells)."""
    sl = patch.interior
    x = patch.x_centers()
    h = patch.h[sl]
    hu = patch.hu[sl]
    psi = patch.psi[sl]
    b = patch.b[sl]
    eta = np.where(h > 0.0, b + h, b)
    columns = np.column_stack([x, h, hu, eta, psi, b])
    return FrameData(t=patch.t, level=patch.level, i_lo=patch.i_lo, dx=patch.geom.dx(patch.level), columns=columns)


def write_frame(out_dir, frame_index, hierarchy):
    """Write one file per (frame, level, patch); returns the paths written."""
    paths = []
    for level in range(1, hierarchy.nlevels + 1):
        for p_idx, patch in enumerate(hierarchy.patches(level)):
            frame = patch_frame_data(patch)
            path = os.path.join(out_dir, frame_filename(frame_index, level, p_idx))
            with open(path, "w") as fh:
                fh.write(frame_text(frame))
            paths.append(path)
    return paths


def read_frame_file(path):
    """Parse one frame file back into FrameData."""
    with open(path) as fh:
        header = fh.readline()
        fields = {}
        for token in header.lstrip("#").split():
            key, _, value = token.partition("=")
            fields[key] = value
        rows = [line.split() for line in fh if line.strip()]
    columns = np.array([[float(v) for v in row] for row in rows], dtype=np.float64)
    if columns.size == 0:
        columns = columns.reshape(0, 6)
    return FrameData(
        t=float(fields["t"]),
        level=int(fields["level"]),
        i_lo=int(fields["i_lo"]),
        dx=float(fields["dx"]),
        columns=columns,
    )


def list_frame_files(out_dir):
    """Map frame index -> list of (level, patch_index, path), sorted."""
    frames = {}
    for name in sorted(os.listdir(out_dir)):
        m = _FRAME_NAME_RE.match(name)
        if not m:
            continue
        idx, level, p_idx = (int(g) for g in m.groups())
        frames.setdefault(idx, []).append((level, p_idx, os.path.join(out_dir, name)))
    for entries in frames.values():
        entries.sort()
    return frames


class GaugeRecorder:
    """Accumulates time series at fixed x positions.

    Each sample is taken from the finest patch whose interior covers the
    gauge position, linearly interpolated in x between cell centers.
    """

    def __init__(self, positions):
        self.positions = tuple(float(x) for x in positions)
        self.samples = [[] for _ in self.positions]

    def record(self, hierarchy):
        for g_idx, x_g in enumerate(self.positions):
            best = None
            for level in range(1, hierarchy.nlevels + 1):
                for patch in hierarchy.patches(level):
                    geom = patch.geom
                    x_left = geom.x_lo + patch.i_lo * geom.dx(level)
                    x_right = geom.x_lo + patch.i_hi * geom.dx(level)
                    if x_left <= x_g <= x_right:
                        best = patch
            if best is None:
                continue
            sl = best.interior
            x = best.x_centers()
            h = float(np.interp(x_g, x, best.h[sl]))
            hu = float(np.interp(x_g, x, best.hu[sl]))
            b = float(np.interp(x_g, x, best.b[sl]))
            eta = b + h if h > 0.0 else b
            self.samples[g_idx].append((best.t, h, hu, eta))

    def write(self, out_dir):
        paths = []
        for g_idx, x_g in enumerate(self.positions):
            path = os.path.join(out_dir, "gauge%02d.txt" % g_idx)
            with open(path, "w") as fh:
                fh.write("# gauge x=%s rows: t h hu eta\n" % format_float(x_g))
                for t, h, hu, eta in self.samples[g_idx]:
                    fh.write(
                        "%s %s %s %s\n"
                        % (format_float(t), format_float(h), format_float(hu), format_float(eta))
                    )
            paths.append(path)
        return paths


def read_gauge_file(path):
    """Parse a gauge file into (x_position, array of rows t h hu eta)."""
    with open(path) as fh:
        header = fh.readline()
        x_g = float(header.split("x=")[1].split()[0])
        rows = [[float(v) for v in line.split()] for line in fh if line.strip()]
    data = np.array(rows, dtype=np.float64)
    if data.size == 0:
        data = data.reshape(0, 4)
    return x_g, data


def write_manifest(out_dir, config, ledger):
    """Write manifest.json: config echo, solver version, run ledger."""
    from . import __version__

    payload = {
        "solver": "boussamr",
        "version": __version__,
        "config": dataclasses.asdict(config),
        "ledger": ledger,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def read_manifest(out_dir):
    with open(os.path.join(out_dir, "manifest.json")) as fh:
        return json.load(fh)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError("not JSON serializable: %r" % type(obj))


def plot_frames(out_dir, plot_dir=None, quiet=False):
    """Render eta-vs-x per frame to SVG, outlining refined patches."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import Rectangle

    plot_dir = plot_dir or out_dir
    os.makedirs(plot_dir, exist_ok=True)
    frames = list_frame_files(out_dir)
    written = []
    for idx in sorted(frames):
        parsed = [read_frame_file(path) for _, _, path in frames[idx]]
        fig, ax = plt.subplots(figsize=(9, 4))
        t = parsed[0].t if parsed else 0.0
        eta_lo, eta_hi = 0.0, 0.0
        for frame in parsed:
            wet = frame.h > 0.0
            if np.any(wet):
                eta_lo = min(eta_lo, float(np.min(frame.eta[wet])))
                eta_hi = max(eta_hi, float(np.max(frame.eta[wet])))
        span = max(eta_hi - eta_lo, 1e-30)
        for frame in sorted(parsed, key=lambda f: f.level):
            eta = np.where(frame.h > 0.0, frame.eta, np.nan)
            ax.plot(frame.x, eta, lw=1.0 + 0.3 * frame.level, label="level %d" % frame.level)
            ax.plot(frame.x, frame.b, color="saddlebrown", lw=0.8, alpha=0.6)
            if frame.level >= 2 and frame.x.size:
                half = 0.5 * frame.dx
                rect = Rectangle(
                    (frame.x[0] - half, eta_lo - 0.05 * span),
                    frame.x[-1] - frame.x[0] + 2 * half,
                    1.1 * span,
                    fill=False,
                    edgecolor="black",
                    lw=0.9,
                )
                ax.add_patch(rect)
        ax.set_xlabel("x [m]")
        ax.set_ylabel("surface elevation [m]")
        ax.set_title("t = %g s" % t)
        handles, labels = ax.get_legend_handles_labels()
        if handles:
            seen = {}
            for hnd, lab in zip(handles, labels):
                seen.setdefault(lab, hnd)
            ax.legend(seen.values(), seen.keys(), loc="best", fontsize=8)
        path = os.path.join(plot_dir, "frame%04d.svg" % idx)
        fig.savefig(path, format="svg", bbox_inches="tight")
        plt.close(fig)
        written.append(path)
        if not quiet:
            print("wrote %s" % path)
    return written
