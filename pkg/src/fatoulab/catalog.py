"""Closed-form catalog of transcendental entire maps and their singular data.

Five families are supported; every downstream solver relies on their closed
forms, so the catalog is deliberately closed rather than a general expression
parser:

    exp_lambda   f(z) = lam * exp(z)
    fatou_plus   f(z) = z + 1 + exp(-z)
    fatou_minus  f(z) = z - 1 + exp(-z)
    z_plus_exp   f(z) = z + exp(-z)
    z_exp        f(z) = z * exp(-z)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Overflow, WindowTooSmall

EXP_LAMBDA = "exp_lambda"
FATOU_PLUS = "fatou_plus"
FATOU_MINUS = "fatou_minus"
Z_PLUS_EXP = "z_plus_exp"
Z_EXP = "z_exp"

FAMILIES = (EXP_LAMBDA, FATOU_PLUS, FATOU_MINUS, Z_PLUS_EXP, Z_EXP)

# exp() of a double overflows past this magnitude of the (real) argument.
_EXP_OVERFLOW = 709.0

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EntireMap:
    """One catalog member; immutable, safe to share across workers."""

    family: str
    lam: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == EXP_LAMBDA:
            if self.lam is None or self.lam == 0.0:
                raise ValueError("exp_lambda requires a nonzero lambda")
        elif self.lam is not None:
            raise ValueError(f"{self.family} takes no lambda parameter")

    # -- scalar evaluation ------------------------------------------------

    def evaluate(self, z: complex) -> complex:
        """f(z) by closed form; raises Overflow when the exp argument leaves double range."""
        z = complex(z)
        if self.family == EXP_LAMBDA:
            if z.real > _EXP_OVERFLOW:
                raise Overflow(f"exp({z.real:.3g}) overflows")
            return self.lam * np.exp(z)
        if -z.real > _EXP_OVERFLOW:
            raise Overflow(f"exp({-z.real:.3g}) overflows")
        e = np.exp(-z)
        if self.family == FATOU_PLUS:
            return z + 1.0 + e
        if self.family == FATOU_MINUS:
            return z - 1.0 + e
        if self.family == Z_PLUS_EXP:
            return z + e
        return z * e

    def derivative(self, z: complex) -> complex:
        return self.eval_with_derivative(z)[1]

    def eval_with_derivative(self, z: complex) -> tuple[complex, complex]:
        """(f(z), f'(z)) sharing one exp evaluation."""
        z = complex(z)
        if self.family == EXP_LAMBDA:
            if z.real > _EXP_OVERFLOW:
                raise Overflow(f"exp({z.real:.3g}) overflows")
            w = self.lam * np.exp(z)
            return w, w
        if -z.real > _EXP_OVERFLOW:
            raise Overflow(f"exp({-z.real:.3g}) overflows")
        e = np.exp(-z)
        if self.family == FATOU_PLUS:
            return z + 1.0 + e, 1.0 - e
        if self.family == FATOU_MINUS:
            return z - 1.0 + e, 1.0 - e
        if self.family == Z_PLUS_EXP:
            return z + e, 1.0 - e
        return z * e, (1.0 - z) * e

    # -- array evaluation (overflow returned as a mask, never raised) -----

    def evaluate_array(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised f(z); returns (values, overflow_mask).

        Overflowing entries hold +inf-ish garbage and must be read through
        the mask; the orbit engine maps them to escape evidence.
        """
        z = np.asarray(z, dtype=complex)
        if self.family == EXP_LAMBDA:
            bad = z.real > _EXP_OVERFLOW
            arg = np.where(bad, 0.0, z)
            w = self.lam * np.exp(arg)
        else:
            bad = -z.real > _EXP_OVERFLOW
            arg = np.where(bad, 0.0, -z)
            e = np.exp(arg)
            if self.family == FATOU_PLUS:
                w = z + 1.0 + e
            elif self.family == FATOU_MINUS:
                w = z - 1.0 + e
            elif self.family == Z_PLUS_EXP:
                w = z + e
            else:
                w = z * e
        bad = bad | ~np.isfinite(w.real) | ~np.isfinite(w.imag)
        return w, bad

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        d: dict = {"family": self.family}
        if self.lam is not None:
            d["lambda"] = self.lam
        return d

    @staticmethod
    def from_json(d: dict) -> "EntireMap":
        if not isinstance(d, dict) or "family" not in d:
            raise ValueError("map descriptor must be an object with a 'family' key")
        return EntireMap(family=d["family"], lam=d.get("lambda"))

    def __str__(self) -> str:
        if self.family == EXP_LAMBDA:
            return f"exp_lambda(lam={self.lam})"
        return self.family


def exp_lambda(lam: float) -> EntireMap:
    return EntireMap(EXP_LAMBDA, lam)


def fatou_plus() -> EntireMap:
    return EntireMap(FATOU_PLUS)


def fatou_minus() -> EntireMap:
    return EntireMap(FATOU_MINUS)


def z_plus_exp() -> EntireMap:
    return EntireMap(Z_PLUS_EXP)


def z_exp() -> EntireMap:
    return EntireMap(Z_EXP)


# ---------------------------------------------------------------------------
# Singular data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingularData:
    """Critical points/values (indexed by k where the family is infinite) and asymptotic values."""

    critical_points: tuple[complex, ...]
    critical_values: tuple[complex, ...]
    asymptotic_values: tuple[complex, ...]
    critical_indices: tuple[int, ...] = ()

    def sources(self) -> list[tuple[str, complex]]:
        """(source_id, value) pairs feeding the postsingular sampler."""
        out = []
        for k, v in zip(self.critical_indices, self.critical_values):
            out.append((f"cv[k={k}]", v))
        for j, v in enumerate(self.asymptotic_values):
            out.append((f"av[{j}]", v))
        return out


def singular_values(m: EntireMap, k_bound: int = 8) -> SingularData:
    """Exact closed-form singular data; k in [-k_bound, k_bound] for the 2*pi*i*k families.

    Critical values are listed exactly as f(critical point) evaluates, so the
    chain invariant `value == f(point)` holds bit-for-bit.
    """
    if m.family == EXP_LAMBDA:
        return SingularData((), (), (0.0 + 0.0j,))
    if m.family == Z_EXP:
        cp = (1.0 + 0.0j,)
        return SingularData(cp, (m.evaluate(cp[0]),), (0.0 + 0.0j,), (0,))
    ks = tuple(range(-k_bound, k_bound + 1))
    cps = tuple(complex(0.0, TWO_PI * k) for k in ks)
    cvs = tuple(m.evaluate(c) for c in cps)
    return SingularData(cps, cvs, (), ks)


# ---------------------------------------------------------------------------
# Postsingular sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CloudSample:
    source: str
    step: int
    point: complex


@dataclass(frozen=True)
class PostsingularCloud:
    """Forward orbits of singular values, truncated at an escape radius."""

    samples: tuple[CloudSample, ...]
    depth: int
    escape_radius: float
    truncated: dict[str, int] = field(default_factory=dict)

    def points(self) -> np.ndarray:
        return np.array([s.point for s in self.samples], dtype=complex)


def postsingular_sample(
    m: EntireMap,
    depth: int,
    escape_radius: float = 1e6,
    k_bound: int = 8,
) -> PostsingularCloud:
    """Orbits of all singular values up to `depth` steps or until |z| > escape_radius.

    Truncation is recorded in `truncated` (source -> first omitted step),
    never raised.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if escape_radius <= 0:
        raise ValueError("escape_radius must be positive")
    sd = singular_values(m, k_bound=k_bound)
    samples: list[CloudSample] = []
    truncated: dict[str, int] = {}
    for source, v in sd.sources():
        z = complex(v)
        for step in range(depth + 1):
            if abs(z) > escape_radius:
                truncated[source] = step
                break
            samples.append(CloudSample(source, step, z))
            if step == depth:
                break
            try:
                z = m.evaluate(z)
            except Overflow:
                truncated[source] = step + 1
                break
    return PostsingularCloud(tuple(samples), depth, escape_radius, truncated)


# ---------------------------------------------------------------------------
# Postsingular-separation audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PsAuditReport:
    ps_evidence: bool
    min_distance: float
    offending_samples: tuple[CloudSample, ...]
    in_window_fraction: float
    sps_evidence: bool | None = None
    enclosed_samples: tuple[CloudSample, ...] = ()


def ps_audit(
    m: EntireMap,
    grid,
    cloud: PostsingularCloud,
    delta: float | None = None,
    allowed_contact: tuple[complex, ...] = (),
    sps: bool = False,
) -> PsAuditReport:
    """Raster evidence (not proof) that postsingular samples stay `delta` away from Julia cells.

    `allowed_contact` lists boundary points (e.g. a parabolic fixed point)
    whose neighbourhood is exempt from the distance check; samples within
    delta + one cell diagonal of such a point only need to approach it.
    With `sps=True` the audit additionally checks that no sample lies inside
    the filled closure of the Julia raster mask.
    """
    from .raster import fill_from_infinity  # local import keeps the module DAG acyclic

    hx, hy = grid.cell_size
    diag = math.hypot(hx, hy)
    if delta is None:
        delta = 2.0 * max(hx, hy)

    pts = cloud.points()
    if len(pts) == 0:
        raise WindowTooSmall("empty postsingular cloud")
    inside = grid.contains(pts)
    frac = float(np.count_nonzero(inside)) / len(pts)
    if frac < 0.5:
        raise WindowTooSmall(
            f"only {frac:.0%} of postsingular samples fall in the grid window"
        )

    julia = grid.julia_mask()
    dist_map = _julia_distance_map(julia, hx, hy)

    offending: list[CloudSample] = []
    min_distance = math.inf
    for s, ok in zip(cloud.samples, inside):
        if not ok:
            continue
        if any(abs(s.point - p) < delta + diag for p in allowed_contact):
            continue
        ix, iy = grid.cell_of(s.point)
        d = float(dist_map[iy, ix])
        min_distance = min(min_distance, d)
        if d < delta:
            offending.append(s)

    sps_evidence = None
    enclosed: list[CloudSample] = []
    if sps:
        filled = fill_from_infinity(julia)
        pocket = filled & ~julia
        for s, ok in zip(cloud.samples, inside):
            if not ok:
                continue
            ix, iy = grid.cell_of(s.point)
            if pocket[iy, ix]:
                enclosed.append(s)
        sps_evidence = not offending and not enclosed

    return PsAuditReport(
        ps_evidence=not offending,
        min_distance=min_distance,
        offending_samples=tuple(offending),
        in_window_fraction=frac,
        sps_evidence=sps_evidence,
        enclosed_samples=tuple(enclosed),
    )


def _julia_distance_map(julia: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """Per-cell Euclidean distance (plane units) to the nearest Julia-classified cell."""
    from scipy import ndimage

    if julia.all():
        return np.zeros(julia.shape)
    if not julia.any():
        return np.full(julia.shape, np.inf)
    return ndimage.distance_transform_edt(~julia, sampling=(hy, hx))
