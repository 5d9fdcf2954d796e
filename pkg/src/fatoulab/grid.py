"""Grid rendering of Fatou components: classification, labeling, distances.

Cells are classified at their centers (optionally 2x2-supersampled for
figures), labeled by 4-connectivity within their verdict class, and queried
for conservative distances to the Julia raster. Label 0 always means
"Julia / undecided / ambiguous escape"; only unambiguous Fatou evidence
(attracting, parabolic, drift-certified Baker escape) is labeled.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .catalog import EntireMap
from .errors import OutOfWindow
from .orbits import (
    DEFAULT_ESCAPE_RADIUS,
    DEFAULT_TOL,
    EscapeReason,
    Kind,
    classify_orbits_array,
)
from .raster import label_by_class

# Verdict-class encoding used for labeling and signature matching.
_CLASS_ATTRACTING = 1000  # + attractor index
_CLASS_PARABOLIC = 2000
_CLASS_DRIFT = 3000  # + strip index + _STRIP_OFFSET
_STRIP_OFFSET = 500


@dataclass
class ClassificationGrid:
    """Rectangular raster of orbit verdicts with component labels.

    Arrays are indexed [iy, ix] with iy increasing along +Im and ix along +Re.
    Frozen by convention after construction; all reads are thread-safe.
    """

    window: tuple[float, float, float, float]  # re_min, re_max, im_min, im_max
    nx: int
    ny: int
    kinds: np.ndarray        # int8 Kind per cell
    labels: np.ndarray       # int32 component ids, 0 = Julia/undecided
    iterations: np.ndarray   # int32
    reasons: np.ndarray      # int8 EscapeReason
    strips: np.ndarray       # int32
    attractor_index: np.ndarray  # int16
    attractors: tuple[tuple[complex, int], ...]
    budget: int
    escape_radius: float
    tol: float
    labeled: bool = False
    label_table: dict[int, int] = field(default_factory=dict)
    _tree_cache: dict[int, cKDTree | None] = field(default_factory=dict, repr=False)

    # -- geometry ----------------------------------------------------------

    @property
    def cell_size(self) -> tuple[float, float]:
        re_min, re_max, im_min, im_max = self.window
        return (re_max - re_min) / self.nx, (im_max - im_min) / self.ny

    @property
    def cell_diagonal(self) -> float:
        hx, hy = self.cell_size
        return float(np.hypot(hx, hy))

    def cell_centers(self) -> np.ndarray:
        re_min, _, im_min, _ = self.window
        hx, hy = self.cell_size
        xs = re_min + (np.arange(self.nx) + 0.5) * hx
        ys = im_min + (np.arange(self.ny) + 0.5) * hy
        return xs[None, :] + 1j * ys[:, None]

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        re_min, re_max, im_min, im_max = self.window
        return (
            (z.real >= re_min) & (z.real <= re_max)
            & (z.imag >= im_min) & (z.imag <= im_max)
        )

    def cell_of(self, z: complex) -> tuple[int, int]:
        if not bool(self.contains(z)):
            raise OutOfWindow(f"{z} outside window {self.window}")
        re_min, _, im_min, _ = self.window
        hx, hy = self.cell_size
        ix = min(int((z.real - re_min) / hx), self.nx - 1)
        iy = min(int((z.imag - im_min) / hy), self.ny - 1)
        return ix, iy

    def label_at(self, z: complex) -> int:
        ix, iy = self.cell_of(z)
        return int(self.labels[iy, ix])

    def kind_at(self, z: complex) -> Kind:
        ix, iy = self.cell_of(z)
        return Kind(int(self.kinds[iy, ix]))

    # -- masks and signatures ------------------------------------------------

    def julia_mask(self) -> np.ndarray:
        """Cells that are not unambiguous Fatou evidence (the Julia raster proxy)."""
        return self.labels == 0

    def class_codes(self) -> np.ndarray:
        codes = np.zeros((self.ny, self.nx), dtype=np.int32)
        att = self.kinds == Kind.ATTRACTING
        codes[att] = _CLASS_ATTRACTING + self.attractor_index[att]
        par = self.kinds == Kind.PARABOLIC
        codes[par] = _CLASS_PARABOLIC
        drift = (self.kinds == Kind.ESCAPING) & (self.reasons == EscapeReason.DRIFT)
        codes[drift] = _CLASS_DRIFT + _STRIP_OFFSET + self.strips[drift]
        return codes

    def labelable_mask(self) -> np.ndarray:
        return (
            (self.kinds == Kind.ATTRACTING)
            | (self.kinds == Kind.PARABOLIC)
            | ((self.kinds == Kind.ESCAPING) & (self.reasons == EscapeReason.DRIFT))
        )

    def label_class(self, label: int) -> int:
        return self.label_table[label]

    def verdict_matches_label(self, verdict, label: int) -> bool:
        """Does a fresh OrbitVerdict carry the same component-family signature as `label`?"""
        cls = self.label_table.get(label)
        if cls is None:
            return False
        if verdict.kind == Kind.ATTRACTING:
            return cls == _CLASS_ATTRACTING + self._attractor_of(verdict)
        if verdict.kind == Kind.PARABOLIC:
            return cls == _CLASS_PARABOLIC
        if verdict.kind == Kind.ESCAPING and verdict.escape_reason == EscapeReason.DRIFT:
            return cls == _CLASS_DRIFT + _STRIP_OFFSET + int(verdict.drift_strip)
        return False

    def _attractor_of(self, verdict) -> int:
        for j, (p, q) in enumerate(self.attractors):
            if verdict.period == q and abs(verdict.target - p) < 1e-6:
                return j
        return -1

    # -- distance queries ----------------------------------------------------

    def _other_label_tree(self, label: int) -> cKDTree | None:
        if label in self._tree_cache:
            return self._tree_cache[label]
        centers = self.cell_centers()
        pts = centers[self.labels != label]
        tree = cKDTree(np.column_stack([pts.real, pts.imag])) if pts.size else None
        self._tree_cache[label] = tree
        return tree


def classify_grid(
    m: EntireMap,
    window: tuple[float, float, float, float],
    resolution: tuple[int, int],
    budget: int,
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
    attractors: tuple[tuple[complex, int], ...] = (),
    tol: float = DEFAULT_TOL,
    threads: int = 1,
    supersample: bool = False,
) -> ClassificationGrid:
    """Per-cell classify_orbit at cell centers; deterministic for any thread count."""
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise ValueError("resolution components must be >= 2")
    if supersample:
        fine = classify_grid(
            m, window, (2 * nx, 2 * ny), budget, escape_radius, attractors, tol, threads
        )
        return _downsample(fine, nx, ny)

    grid = ClassificationGrid(
        window=tuple(float(v) for v in window),
        nx=nx,
        ny=ny,
        kinds=np.zeros((ny, nx), dtype=np.int8),
        labels=np.zeros((ny, nx), dtype=np.int32),
        iterations=np.zeros((ny, nx), dtype=np.int32),
        reasons=np.zeros((ny, nx), dtype=np.int8),
        strips=np.zeros((ny, nx), dtype=np.int32),
        attractor_index=np.full((ny, nx), -1, dtype=np.int16),
        attractors=tuple((complex(p), int(q)) for p, q in attractors),
        budget=budget,
        escape_radius=float(escape_radius),
        tol=float(tol),
    )
    centers = grid.cell_centers()

    def work(row_range):
        lo, hi = row_range
        res = classify_orbits_array(
            m, centers[lo:hi].ravel(), budget, escape_radius, grid.attractors, tol
        )
        shape = (hi - lo, nx)
        grid.kinds[lo:hi] = res.kinds.reshape(shape)
        grid.iterations[lo:hi] = res.iterations.reshape(shape)
        grid.reasons[lo:hi] = res.reasons.reshape(shape)
        grid.strips[lo:hi] = res.strips.reshape(shape)
        grid.attractor_index[lo:hi] = res.attractor_index.reshape(shape)

    if threads > 1:
        chunk = max(1, ny // (threads * 4))
        ranges = [(i, min(i + chunk, ny)) for i in range(0, ny, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, ranges))
    else:
        work((0, ny))
    return grid


def _downsample(fine: ClassificationGrid, nx: int, ny: int) -> ClassificationGrid:
    """2x2 majority-kind reduction for figure rendering; ties go to the first sample."""
    def blocks(a):
        return a.reshape(ny, 2, nx, 2).transpose(0, 2, 1, 3).reshape(ny, nx, 4)

    kind_blocks = blocks(fine.kinds)
    counts = np.stack(
        [(kind_blocks == int(k)).sum(axis=2) for k in Kind], axis=2
    )
    majority = np.argmax(counts, axis=2).astype(np.int8)
    idx = np.argmax(kind_blocks == majority[:, :, None], axis=2)

    def take(a):
        return np.take_along_axis(blocks(a), idx[:, :, None], axis=2)[:, :, 0]

    return dataclasses.replace(
        fine,
        nx=nx,
        ny=ny,
        kinds=take(fine.kinds),
        labels=np.zeros((ny, nx), dtype=np.int32),
        iterations=take(fine.iterations),
        reasons=take(fine.reasons),
        strips=take(fine.strips),
        attractor_index=take(fine.attractor_index),
        labeled=False,
        label_table={},
        _tree_cache={},
    )


def label_components(grid: ClassificationGrid) -> ClassificationGrid:
    """4-connectivity flood labeling by (kind, attractor/drift signature); stable across runs."""
    labels, table = label_by_class(grid.class_codes(), grid.labelable_mask())
    return dataclasses.replace(
        grid, labels=labels, labeled=True, label_table=table, _tree_cache={}
    )


def distance_to_julia(grid: ClassificationGrid, z: complex) -> tuple[float, float]:
    """Conservative (lower, upper) bounds on the distance from z to other-label cells.

    lower = nearest non-same-label cell-center distance minus one cell
    diagonal, clamped at zero; upper adds the diagonal instead.
    """
    label = grid.label_at(z)
    tree = grid._other_label_tree(label)
    if tree is None:
        return float("inf"), float("inf")
    d, _ = tree.query([z.real, z.imag])
    diag = grid.cell_diagonal
    return max(0.0, float(d) - diag), float(d) + diag
