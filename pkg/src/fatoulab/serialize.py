"""Output writers: binary PPM images, CSV tables, canonical JSON.

All CSVs carry a header row and '.' decimal separators; floats print with
repr-precision so reruns under fixed seeds are byte-identical.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .grid import ClassificationGrid
from .orbits import EscapeReason, Kind

# Fixed kind -> RGB palette (drift-certified Baker escape gets its own hue).
PALETTE = {
    "undecided": (0, 0, 0),
    "escaping": (68, 119, 170),
    "escaping_drift": (34, 170, 204),
    "attracting": (238, 153, 68),
    "parabolic": (102, 204, 102),
}


def _cell_colors(grid: ClassificationGrid) -> np.ndarray:
    rgb = np.zeros((grid.ny, grid.nx, 3), dtype=np.uint8)
    kinds = grid.kinds
    rgb[kinds == Kind.ESCAPING] = PALETTE["escaping"]
    drift = (kinds == Kind.ESCAPING) & (grid.reasons == EscapeReason.DRIFT)
    rgb[drift] = PALETTE["escaping_drift"]
    rgb[kinds == Kind.ATTRACTING] = PALETTE["attracting"]
    rgb[kinds == Kind.PARABOLIC] = PALETTE["parabolic"]
    return rgb


def grid_to_ppm(grid: ClassificationGrid, path: str | Path) -> None:
    """Binary P6 image; the top image row is the top of the window (max Im)."""
    rgb = _cell_colors(grid)[::-1]  # flip so +Im is up
    header = f"P6\n{grid.nx} {grid.ny}\n255\n".encode("ascii")
    Path(path).write_bytes(header + rgb.tobytes())


def grid_to_csv(grid: ClassificationGrid, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x_index", "y_index", "kind", "label", "iterations"])
        for iy in range(grid.ny):
            for ix in range(grid.nx):
                w.writerow(
                    [
                        ix,
                        iy,
                        Kind(int(grid.kinds[iy, ix])).name.lower(),
                        int(grid.labels[iy, ix]),
                        int(grid.iterations[iy, ix]),
                    ]
                )


def cloud_to_csv(cloud, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["source_id", "step", "re", "im"])
        for s in cloud.samples:
            w.writerow([s.source, s.step, repr(s.point.real), repr(s.point.imag)])


def singular_to_csv(sd, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["source_id", "step", "re", "im"])
        for source, v in sd.sources():
            w.writerow([source, 0, repr(v.real), repr(v.imag)])


def curve_to_csv(curve, path: str | Path) -> None:
    """Access-curve polyline rows (m, re, im, gap to the landing point)."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["m", "re", "im", "gap"])
        for gen, v in zip(curve.segment_index, curve.vertices):
            w.writerow([gen, repr(v.real), repr(v.imag), repr(abs(v - curve.landing_point))])


def hits_to_csv(report, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["sample_id", "hit_re", "hit_im", "verdict", "orbit_iterations"])
        for h in report.hits:
            w.writerow(
                [h.sample_id, repr(h.hit.real), repr(h.hit.imag), h.verdict.lower(), h.orbit_iterations]
            )


def audit_to_csv(audit, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["re", "im", "ratio_lower", "ratio_upper", "verdict"])
        for row in audit.rows:
            w.writerow(
                [
                    repr(row.point.real),
                    repr(row.point.imag),
                    repr(row.ratio_lower),
                    repr(row.ratio_upper),
                    row.verdict,
                ]
            )


def probe_violations_to_csv(report, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["sample_re", "sample_im", "image_re", "image_im", "note"])
        for v in report.violations:
            img = v.image if v.image is not None else complex("nan")
            w.writerow(
                [repr(v.sample.real), repr(v.sample.imag), repr(img.real), repr(img.imag), v.note]
            )


def periodic_points_to_csv(points, n: int, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["n", "j", "theta", "residual"])
        for p in points:
            w.writerow([n, p.branch, repr(p.theta), repr(p.residual)])


def write_json(obj, path: str | Path) -> None:
    Path(path).write_text(canonical_json(obj) + "\n")


def _scalar(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_scalar)
