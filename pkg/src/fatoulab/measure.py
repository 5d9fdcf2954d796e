"""Walk-on-spheres sampling of harmonic measure on the raster boundary.

Walks step by the conservative lower distance estimate, so they can never
jump across Julia filaments; the reported numbers are budgeted estimates on
the raster approximation of the boundary, at smoothing scale walk_eps.
Randomness comes from counter-based Philox streams keyed by (seed,
sample_index), making runs deterministic and independent of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .catalog import EntireMap
from .errors import LeftWindow, TooManyWindowExits
from .grid import ClassificationGrid, label_components
from .orbits import Kind, classify_orbits_array

TWO_PI = 2.0 * math.pi
_MAX_WALK_STEPS = 100_000


def _sample_rng(seed: int, sample_index: int) -> np.random.Generator:
    key = np.array([seed, sample_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_boundary_hit(
    m: EntireMap,
    grid: ClassificationGrid,
    basepoint: complex,
    walk_eps: float,
    rng: np.random.Generator,
    max_steps: int = _MAX_WALK_STEPS,
) -> complex:
    """One walk-on-spheres boundary hit: the nearest boundary-raster cell center.

    Jumps to a uniform point on the circle of radius distance_to_julia.lower
    (capped at a quarter of the window diagonal) until the lower estimate
    drops below walk_eps. Raises LeftWindow when the walk exits the window.
    """
    hx, hy = grid.cell_size
    if walk_eps < 2.0 * max(hx, hy) - 1e-12:
        raise ValueError("walk_eps must be at least two grid cells")
    label = grid.label_at(basepoint)
    if label == 0:
        raise ValueError(f"basepoint {basepoint} is not Fatou-classified")
    tree = grid._other_label_tree(label)
    if tree is None:
        # No boundary raster inside the window; every walk is an exit.
        raise LeftWindow("window contains no non-basepoint-label cells")
    re_min, re_max, im_min, im_max = grid.window
    cap = 0.25 * math.hypot(re_max - re_min, im_max - im_min)
    diag = grid.cell_diagonal

    x, y = basepoint.real, basepoint.imag
    for _ in range(max_steps):
        d, idx = tree.query([x, y])
        lower = max(0.0, float(d) - diag)
        if lower < walk_eps:
            bx, by = tree.data[idx]
            return complex(bx, by)
        radius = min(lower, cap)
        theta = TWO_PI * rng.uniform()
        x += radius * math.cos(theta)
        y += radius * math.sin(theta)
        if not (re_min <= x <= re_max and im_min <= y <= im_max):
            raise LeftWindow(f"walk left the window at {complex(x, y)}")
    raise LeftWindow("walk exceeded the step cap")


# ---------------------------------------------------------------------------
# Measure report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HitRecord:
    sample_id: int
    hit: complex
    verdict: str
    orbit_iterations: int


@dataclass(frozen=True)
class MeasureReport:
    basepoint: complex
    samples: int
    fractions: dict[str, float]
    counts: dict[str, int]
    left_window: int
    dense_orbit_stat: float
    rng_seed: int
    budgets: dict[str, float]
    hits: tuple[HitRecord, ...]

    def to_json(self) -> dict:
        return {
            "basepoint": [self.basepoint.real, self.basepoint.imag],
            "samples": self.samples,
            "fractions": self.fractions,
            "counts": self.counts,
            "left_window": self.left_window,
            "dense_orbit_stat": self.dense_orbit_stat,
            "rng_seed": self.rng_seed,
            "budgets": self.budgets,
        }


def measure_report(
    m: EntireMap,
    grid: ClassificationGrid,
    basepoint: complex,
    n_samples: int,
    walk_eps: float,
    orbit_budget: int,
    targets: tuple[complex, ...] = (),
    rng_seed: int = 0,
    threads: int = 1,
    walk_budget: int = _MAX_WALK_STEPS,
) -> MeasureReport:
    """Draw boundary hits, classify each hit's forward orbit, aggregate fractions.

    The escaping/bounded/undecided fractions are integer-ratio bookkeeping
    over the non-exited samples and sum to one exactly; dense_orbit_stat is
    the worst-case over `targets` of how closely any sampled-hit orbit
    approaches that target.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")

    def one(i: int) -> complex | None:
        try:
            return sample_boundary_hit(
                m, grid, basepoint, walk_eps, _sample_rng(rng_seed, i), max_steps=walk_budget
            )
        except LeftWindow:
            return None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            raw = list(pool.map(one, range(n_samples)))
    else:
        raw = [one(i) for i in range(n_samples)]

    ids = [i for i, h in enumerate(raw) if h is not None]
    hits = np.array([raw[i] for i in ids], dtype=complex)
    left = n_samples - len(ids)
    if left > 0.5 * n_samples:
        raise TooManyWindowExits(f"{left}/{n_samples} walks exited the window")

    res = classify_orbits_array(
        m, hits, orbit_budget, grid.escape_radius, grid.attractors, grid.tol
    )
    n_ok = len(ids)
    n_esc = int(np.count_nonzero(res.kinds == Kind.ESCAPING))
    n_bnd = int(
        np.count_nonzero((res.kinds == Kind.ATTRACTING) | (res.kinds == Kind.PARABOLIC))
    )
    frac_esc = n_esc / n_ok
    frac_bnd = n_bnd / n_ok
    fractions = {
        "escaping": frac_esc,
        "bounded": frac_bnd,
        "undecided": 1.0 - frac_esc - frac_bnd,
    }
    counts = {"escaping": n_esc, "bounded": n_bnd, "undecided": n_ok - n_esc - n_bnd}

    stat = _dense_orbit_stat(m, hits, orbit_budget, grid.escape_radius, targets)

    records = tuple(
        HitRecord(i, complex(h), Kind(int(k)).name, int(it))
        for i, h, k, it in zip(ids, hits, res.kinds, res.iterations)
    )
    return MeasureReport(
        basepoint=complex(basepoint),
        samples=n_samples,
        fractions=fractions,
        counts=counts,
        left_window=left,
        dense_orbit_stat=float(stat),
        rng_seed=rng_seed,
        budgets={"walk_eps": walk_eps, "orbit_budget": orbit_budget},
        hits=records,
    )


def _dense_orbit_stat(
    m: EntireMap,
    hits: np.ndarray,
    budget: int,
    escape_radius: float,
    targets: tuple[complex, ...],
) -> float:
    """max over targets of the min distance from any sampled-hit orbit point."""
    if len(targets) == 0 or hits.size == 0:
        return math.nan
    t = np.asarray(targets, dtype=complex)
    best = np.full(t.shape, np.inf)
    z = hits.copy()
    alive = np.ones(z.shape, dtype=bool)
    for _ in range(budget + 1):
        za = z[alive]
        if za.size == 0:
            break
        d = np.abs(za[None, :] - t[:, None]).min(axis=1)
        best = np.minimum(best, d)
        w, bad = m.evaluate_array(za)
        ok = ~bad & (np.abs(w) <= escape_radius)
        idx = np.nonzero(alive)[0]
        z[idx[ok]] = w[ok]
        alive[idx[~ok]] = False
    return float(best.max())


# ---------------------------------------------------------------------------
# Disk-oracle calibration
# ---------------------------------------------------------------------------


def disk_grid(
    resolution: int = 400,
    radius: float = 1.0,
    margin: float = 0.2,
    boundary_kind: Kind = Kind.ATTRACTING,
) -> ClassificationGrid:
    """Synthetic labeled grid: one Fatou disk |z| < radius in an undecided frame."""
    half = radius + margin
    window = (-half, half, -half, half)
    n = resolution
    grid = ClassificationGrid(
        window=window,
        nx=n,
        ny=n,
        kinds=np.zeros((n, n), dtype=np.int8),
        labels=np.zeros((n, n), dtype=np.int32),
        iterations=np.zeros((n, n), dtype=np.int32),
        reasons=np.zeros((n, n), dtype=np.int8),
        strips=np.zeros((n, n), dtype=np.int32),
        attractor_index=np.full((n, n), -1, dtype=np.int16),
        attractors=((0.0 + 0.0j, 1),),
        budget=1,
        escape_radius=50.0,
        tol=1e-6,
    )
    inside = np.abs(grid.cell_centers()) < radius
    grid.kinds[inside] = int(boundary_kind)
    grid.attractor_index[inside] = 0
    return label_components(grid)


@dataclass(frozen=True)
class CalibrationResult:
    chi2_p: float
    ks_stat: float
    passed: bool
    samples: int


def _poisson_cdf(r: float):
    scale = (1.0 + r) / (1.0 - r)

    def cdf(theta):
        return 0.5 + np.arctan(scale * np.tan(np.asarray(theta) / 2.0)) / math.pi

    return cdf


def calibrate_disk(
    rng_seed: int = 0,
    samples: int = 10**4,
    resolution: int = 400,
    walk_eps_cells: float = 2.5,
    chi2_bins: int = 16,
    chi2_p_min: float = 0.01,
    ks_max: float = 0.03,
) -> CalibrationResult:
    """The two toy-mask oracles that gate every transcendental measure run.

    From the disk center, hit angles must be uniform (chi-squared over
    `chi2_bins` bins); from basepoint 0.5 they must follow the Poisson
    kernel (Kolmogorov-Smirnov).
    """
    grid = disk_grid(resolution=resolution)
    eps = walk_eps_cells * max(grid.cell_size)
    dummy = EntireMap("exp_lambda", 0.25)  # the walk itself never evaluates the map

    center_hits = np.array(
        [
            sample_boundary_hit(dummy, grid, 0.0 + 0.0j, eps, _sample_rng(rng_seed, i))
            for i in range(samples)
        ]
    )
    angles = np.angle(center_hits)
    counts, _ = np.histogram(angles, bins=chi2_bins, range=(-math.pi, math.pi))
    chi2_p = float(stats.chisquare(counts).pvalue)

    offset_hits = np.array(
        [
            sample_boundary_hit(dummy, grid, 0.5 + 0.0j, eps, _sample_rng(rng_seed + 1, i))
            for i in range(samples)
        ]
    )
    ks = float(stats.kstest(np.angle(offset_hits), _poisson_cdf(0.5)).statistic)

    return CalibrationResult(
        chi2_p=chi2_p,
        ks_stat=ks,
        passed=(chi2_p > chi2_p_min) and (ks < ks_max),
        samples=samples,
    )
