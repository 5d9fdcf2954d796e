"""Finite Blaschke products and their unit-circle dynamics.

Covers evaluation, argument lifts of the induced circle maps, Denjoy-Wolff
point location, boundary periodic points, the ergodic/recurrent lookup for
component types, and the audit of rational circle-map candidates. Only
finite products are instantiated; infinite-degree inner functions have no
finite representation here.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import LiftNotExpandingWarning, PoleOnCircle, RotationLike

TWO_PI = 2.0 * math.pi

# A Denjoy-Wolff orbit is treated as boundary-bound after this many
# consecutive iterates with modulus above 1 - _BOUNDARY_NEAR.
_BOUNDARY_NEAR = 1e-6
_BOUNDARY_RUN = 20

_DEFAULT_GRID_BITS = 14
_MAX_GRID_BITS = 19


@dataclass(frozen=True)
class BlaschkeProduct:
    """rotation * prod (z - a_j)/(1 - conj(a_j) z) with |a_j| < 1, |rotation| = 1."""

    rotation: complex = 1.0 + 0.0j
    zeros: tuple[complex, ...] = ()

    def __post_init__(self):
        if abs(abs(self.rotation) - 1.0) > 1e-9:
            raise ValueError("rotation must be unimodular")
        for a in self.zeros:
            if abs(a) >= 1.0:
                raise ValueError(f"zero {a} not inside the unit disk")
        object.__setattr__(self, "zeros", tuple(complex(a) for a in self.zeros))
        object.__setattr__(self, "rotation", complex(self.rotation))

    @property
    def degree(self) -> int:
        return len(self.zeros)

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        w = np.full_like(z, self.rotation)
        for a in self.zeros:
            w = w * (z - a) / (1.0 - np.conj(a) * z)
        return w if w.ndim else complex(w)

    def eval_with_derivative(self, z):
        """(B(z), B'(z)) by the product rule; robust at zeros of B."""
        z = np.asarray(z, dtype=complex)
        d = len(self.zeros)
        if d == 0:
            return (np.full_like(z, self.rotation), np.zeros_like(z))
        f = np.empty((d,) + z.shape, dtype=complex)
        fp = np.empty_like(f)
        for j, a in enumerate(self.zeros):
            den = 1.0 - np.conj(a) * z
            f[j] = (z - a) / den
            fp[j] = (1.0 - abs(a) ** 2) / den**2
        prefix = np.ones((d + 1,) + z.shape, dtype=complex)
        for j in range(d):
            prefix[j + 1] = prefix[j] * f[j]
        suffix = np.ones((d + 1,) + z.shape, dtype=complex)
        for j in range(d - 1, -1, -1):
            suffix[j] = suffix[j + 1] * f[j]
        deriv = sum(fp[j] * prefix[j] * suffix[j + 1] for j in range(d))
        val = self.rotation * prefix[d]
        deriv = self.rotation * deriv
        if z.ndim:
            return val, deriv
        return complex(val), complex(deriv)

    def derivative(self, z):
        return self.eval_with_derivative(z)[1]

    def iterate(self, z, n: int):
        for _ in range(n):
            z = self.evaluate(z)
        return z

    def boundary_derivative_modulus(self, theta: float) -> float:
        """|B'| on the unit circle; equals the sum of Poisson kernels at the zeros."""
        return abs(self.derivative(cmath.exp(1j * theta)))

    def to_json(self) -> dict:
        return {
            "rotation": [self.rotation.real, self.rotation.imag],
            "zeros": [[a.real, a.imag] for a in self.zeros],
        }

    @staticmethod
    def from_json(d: dict) -> "BlaschkeProduct":
        rot = complex(*d.get("rotation", [1.0, 0.0]))
        zeros = tuple(complex(re, im) for re, im in d.get("zeros", []))
        return BlaschkeProduct(rot, zeros)


# ---------------------------------------------------------------------------
# Circle lifts
# ---------------------------------------------------------------------------


@dataclass
class CircleLift:
    """Continuous argument lift G of theta -> arg f(e^{i theta}) on [0, 2pi].

    G(theta + 2pi) = G(theta) + 2pi * winding by construction. Evaluation at
    off-grid angles continues analytically from the nearest left grid anchor;
    the grid is dense enough that each anchored increment stays below pi.
    """

    func: object                 # callable complex -> complex
    thetas: np.ndarray           # N+1 nodes spanning [0, 2pi]
    values: np.ndarray           # lift values at the nodes
    winding: int

    @property
    def grid_step(self) -> float:
        return float(self.thetas[1] - self.thetas[0])

    def eval_at(self, theta: float) -> float:
        wraps, t = divmod(theta, TWO_PI)
        j = min(int(t / self.grid_step), len(self.thetas) - 2)
        anchor = float(self.values[j])
        raw = cmath.phase(self.func(cmath.exp(1j * t)))
        delta = (raw - anchor + math.pi) % TWO_PI - math.pi
        return anchor + delta + TWO_PI * self.winding * wraps

    def displacement(self, theta: float) -> float:
        return self.eval_at(theta) - theta


def build_lift(func, grid_bits: int = _DEFAULT_GRID_BITS, require_monotone: bool = True) -> CircleLift:
    """Track the argument of func along the circle, doubling the grid until unambiguous."""
    bits = grid_bits
    while True:
        n = 1 << bits
        thetas = np.linspace(0.0, TWO_PI, n + 1)
        vals = np.asarray(func(np.exp(1j * thetas)), dtype=complex)
        args = np.unwrap(np.angle(vals))
        steps = np.diff(args)
        ambiguous = np.max(np.abs(steps)) >= 0.9 * math.pi
        non_monotone = require_monotone and np.any(steps <= 0.0)
        if not ambiguous and not non_monotone:
            winding = (args[-1] - args[0]) / TWO_PI
            rounded = round(winding)
            if abs(winding - rounded) > 1e-6:
                raise ValueError(f"lift winding {winding} is not an integer")
            return CircleLift(func, thetas, args, rounded)
        if bits >= _MAX_GRID_BITS:
            raise ValueError("circle lift grid exhausted; map varies too fast")
        bits += 1


def circle_lift(b: BlaschkeProduct, n: int = 1, grid_bits: int = _DEFAULT_GRID_BITS) -> CircleLift:
    return build_lift(lambda z: b.iterate(z, n), grid_bits=grid_bits)


# ---------------------------------------------------------------------------
# Boundary periodic points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CirclePeriodicPoint:
    theta: float
    branch: int
    residual: float


def _branch_roots(lift: CircleLift, two_pi_j: float, refine_tol: float = 5e-14) -> list[float]:
    """All roots of lift(theta) - theta = two_pi_j on [0, 2pi) by scanning + bisection."""
    h = lift.values - lift.thetas - two_pi_j
    roots: list[float] = []
    for k in range(len(h) - 1):
        a, b = h[k], h[k + 1]
        if a == 0.0:
            roots.append(float(lift.thetas[k]))
            continue
        if a * b < 0.0:
            lo, hi = float(lift.thetas[k]), float(lift.thetas[k + 1])
            flo = a
            while hi - lo > refine_tol:
                mid = 0.5 * (lo + hi)
                fm = lift.displacement(mid) - two_pi_j
                if fm == 0.0:
                    lo = hi = mid
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
    if h[-1] == 0.0:
        roots.append(float(lift.thetas[-1]))
    return roots


def _vector_branch_roots(
    lift: CircleLift, func_n, j_values: np.ndarray, refine_tol: float = 5e-14
) -> list[tuple[float, int]]:
    """All roots of lift(theta) = theta + 2pi j over the given j's, bisected in lockstep.

    Brackets from every branch equation are refined together, one vectorised
    map evaluation per bisection level; lift values at midpoints continue
    analytically from the tracked left-endpoint anchor.
    """
    h = lift.values - lift.thetas
    roots: list[tuple[float, int]] = []
    lo_list, hi_list, glo_list, Glo_list, jj_list = [], [], [], [], []
    for j in j_values:
        hj = h - TWO_PI * j
        on_node = np.nonzero(hj == 0.0)[0]
        roots.extend((float(lift.thetas[k]), int(j)) for k in on_node)
        crossing = np.nonzero(hj[:-1] * hj[1:] < 0.0)[0]
        for k in crossing:
            lo_list.append(lift.thetas[k])
            hi_list.append(lift.thetas[k + 1])
            glo_list.append(hj[k])
            Glo_list.append(lift.values[k])
            jj_list.append(j)
    if lo_list:
        lo = np.array(lo_list)
        hi = np.array(hi_list)
        g_lo = np.array(glo_list)
        G_lo = np.array(Glo_list)
        jj = np.array(jj_list, dtype=float)
        while np.max(hi - lo) > refine_tol:
            mid = 0.5 * (lo + hi)
            raw = np.angle(func_n(np.exp(1j * mid)))
            G_mid = G_lo + (raw - G_lo + math.pi) % TWO_PI - math.pi
            g_mid = G_mid - mid - TWO_PI * jj
            left = (g_lo * g_mid < 0.0) | (g_mid == 0.0)
            hi = np.where(left, mid, hi)
            move = ~left
            lo = np.where(move, mid, lo)
            g_lo = np.where(move, g_mid, g_lo)
            G_lo = np.where(move, G_mid, G_lo)
        roots.extend(
            (float(t), int(j)) for t, j in zip(0.5 * (lo + hi), jj_list)
        )
    return roots


def circle_periodic_points(
    b: BlaschkeProduct, n: int, dedup_tol: float = 1e-10
) -> list[CirclePeriodicPoint]:
    """Fixed points of the boundary map of B^n, one branch equation per 2pi j.

    For B of degree d >= 2 there are at most d^n - 1 points, with equality for
    z^d. If a branch equation has several roots the lift was not expanding
    there; a LiftNotExpandingWarning is issued and all roots are returned.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if b.degree < 2:
        raise ValueError("degree must be >= 2")
    lift = circle_lift(b, n)
    disp = lift.values - lift.thetas
    j_lo = math.ceil(disp.min() / TWO_PI - 1e-12)
    j_hi = math.floor(disp.max() / TWO_PI + 1e-12)
    j_values = np.arange(j_lo, j_hi + 1)
    found = _vector_branch_roots(lift, lambda z: b.iterate(z, n), j_values)

    per_j: dict[int, int] = {}
    for _, j in found:
        per_j[j] = per_j.get(j, 0) + 1
    if any(c > 1 for c in per_j.values()):
        warnings.warn(
            "some branch equations had multiple roots", LiftNotExpandingWarning
        )

    found.sort()
    points: list[CirclePeriodicPoint] = []
    for theta, j in found:
        t = theta % TWO_PI
        if any(
            abs(t - p.theta) < dedup_tol or abs(abs(t - p.theta) - TWO_PI) < dedup_tol
            for p in points
        ):
            continue
        z = cmath.exp(1j * t)
        residual = abs(b.iterate(z, n) - z)
        points.append(CirclePeriodicPoint(t, j, residual))
    return points


# ---------------------------------------------------------------------------
# Denjoy-Wolff point
# ---------------------------------------------------------------------------

INTERIOR = "interior"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class DenjoyWolff:
    point: complex
    location: str
    derivative_modulus: float


def denjoy_wolff(
    b: BlaschkeProduct,
    tol: float = 1e-9,
    budget: int = 2000,
    z0: complex = 0.0 + 0.0j,
) -> DenjoyWolff:
    """Locate the Denjoy-Wolff point by iteration from z0 (default 0).

    Interior: the orbit becomes Cauchy inside |z| <= 1 - tol and a Newton
    polish lands on the fixed point. Boundary: the orbit hugs the circle for
    _BOUNDARY_RUN consecutive steps; the limit angle is refined to a circle
    fixed point with derivative <= 1 + tol. Elliptic rotations do neither and
    raise RotationLike.
    """
    z = complex(z0)
    boundary_run = 0
    for _ in range(budget):
        w = b.evaluate(z)
        if abs(w) > 1.0 - _BOUNDARY_NEAR:
            boundary_run += 1
            if boundary_run >= _BOUNDARY_RUN:
                return _refine_boundary(b, cmath.phase(w), tol)
        else:
            boundary_run = 0
        if abs(w - z) < 1e-9 and abs(w) <= 1.0 - tol:
            p = _newton_fixed_point(b, w)
            dm = abs(b.derivative(p))
            if dm >= 1.0 - 1e-9:
                # a neutral interior fixed point makes B an elliptic automorphism
                raise RotationLike(f"neutral interior fixed point at {p}")
            return DenjoyWolff(p, INTERIOR, dm)
        z = w
    raise RotationLike("orbit neither contracts nor approaches the boundary")


def _newton_fixed_point(b: BlaschkeProduct, z: complex, steps: int = 50) -> complex:
    for _ in range(steps):
        val, der = b.eval_with_derivative(z)
        g, gp = val - z, der - 1.0
        if gp == 0:
            break
        step = g / gp
        z = z - step
        if abs(step) < 1e-15:
            break
    return z


def _circle_fixed_points(b: BlaschkeProduct) -> list[float]:
    lift = build_lift(lambda z: b.evaluate(z), require_monotone=False)
    disp = lift.values - lift.thetas
    j_lo = math.ceil(disp.min() / TWO_PI - 1e-12)
    j_hi = math.floor(disp.max() / TWO_PI + 1e-12)
    roots: list[float] = []
    for j in range(j_lo, j_hi + 1):
        roots.extend(r % TWO_PI for r in _branch_roots(lift, TWO_PI * j))
    return sorted(roots)


def _refine_boundary(b: BlaschkeProduct, theta_hat: float, tol: float) -> DenjoyWolff:
    candidates = _circle_fixed_points(b)
    best = None
    for t in candidates:
        dm = b.boundary_derivative_modulus(t)
        if dm > 1.0 + tol:
            continue
        gap = abs((t - theta_hat + math.pi) % TWO_PI - math.pi)
        if best is None or gap < best[0]:
            best = (gap, t, dm)
    if best is None:
        raise RotationLike("no non-repelling boundary fixed point found")
    _, t, dm = best
    return DenjoyWolff(cmath.exp(1j * t), BOUNDARY, dm)


# ---------------------------------------------------------------------------
# Ergodic / recurrent lookup
# ---------------------------------------------------------------------------

ATTRACTING_BASIN = "attracting"
PARABOLIC_BASIN = "parabolic"
SIEGEL_DISK = "siegel"
BAKER_DOUBLY_PARABOLIC_DW_REGULAR = "baker_doubly_parabolic_dw_regular"
BAKER_DOUBLY_PARABOLIC_DW_SINGULAR = "baker_doubly_parabolic_dw_singular"
BAKER_SIMPLY_PARABOLIC = "baker_simply_parabolic"
BAKER_HYPERBOLIC = "baker_hyperbolic"

UNKNOWN = "unknown"

_DYNAMICS_TABLE: dict[str, tuple[bool, bool | None]] = {
    ATTRACTING_BASIN: (True, True),
    PARABOLIC_BASIN: (True, True),
    SIEGEL_DISK: (True, True),
    BAKER_DOUBLY_PARABOLIC_DW_REGULAR: (True, True),
    BAKER_DOUBLY_PARABOLIC_DW_SINGULAR: (True, None),
    BAKER_SIMPLY_PARABOLIC: (False, False),
    BAKER_HYPERBOLIC: (False, False),
}


def classify_component_dynamics(kind: str) -> dict:
    """Ergodicity/recurrence of the boundary map by component type.

    Attracting and parabolic basins and Siegel disks are ergodic and
    recurrent; hyperbolic and simply parabolic Baker domains are neither;
    doubly parabolic Baker domains are ergodic, and recurrent when the
    Denjoy-Wolff point is a regular point of the inner function (unknown in
    the singular case).
    """
    if kind not in _DYNAMICS_TABLE:
        raise ValueError(f"unknown component kind {kind!r}")
    ergodic, recurrent = _DYNAMICS_TABLE[kind]
    return {
        "ergodic": ergodic,
        "recurrent": recurrent if recurrent is not None else UNKNOWN,
    }


# ---------------------------------------------------------------------------
# Rational circle-map candidates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalCircleMap:
    """num(z)/den(z) with ascending coefficient lists; used to audit candidates."""

    num: tuple[complex, ...]
    den: tuple[complex, ...]

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        num = np.polynomial.polynomial.polyval(z, np.asarray(self.num, dtype=complex))
        den = np.polynomial.polynomial.polyval(z, np.asarray(self.den, dtype=complex))
        w = num / den
        return w if w.ndim else complex(w)


@dataclass(frozen=True)
class InnerCandidateReport:
    circle_preserving: bool
    maps_disk_in: bool
    boundary_fixed_points: tuple[complex, ...]
    max_circle_error: float
    notes: tuple[str, ...]


def verify_inner_candidate(
    cand: RationalCircleMap, samples: int = 10**4, rng_seed: int = 0
) -> InnerCandidateReport:
    """Audit a rational candidate: circle preservation, disk invariance, boundary fixed points."""
    thetas = TWO_PI * np.arange(samples) / samples
    z = np.exp(1j * thetas)
    den = np.polynomial.polynomial.polyval(z, np.asarray(cand.den, dtype=complex))
    if np.min(np.abs(den)) < 1e-12:
        raise PoleOnCircle("denominator vanishes on the sampled circle")
    w = cand.evaluate(z)
    max_err = float(np.max(np.abs(np.abs(w) - 1.0)))
    circle_preserving = max_err < 1e-12

    notes: list[str] = []
    v0 = cand.evaluate(0.0 + 0.0j)
    maps_disk_in = abs(v0) < 1.0
    if maps_disk_in:
        rng = np.random.default_rng(rng_seed)
        r = np.sqrt(rng.uniform(0.0, 1.0, 256)) * 0.999
        phi = rng.uniform(0.0, TWO_PI, 256)
        inside = cand.evaluate(r * np.exp(1j * phi))
        maps_disk_in = bool(np.all(np.abs(inside) < 1.0))
    if not maps_disk_in:
        notes.append(f"candidate does not map the disk into itself: g(0) = {v0}")

    fixed: list[complex] = []
    if circle_preserving:
        lift = build_lift(cand.evaluate, require_monotone=False)
        disp = lift.values - lift.thetas
        j_lo = math.ceil(disp.min() / TWO_PI - 1e-12)
        j_hi = math.floor(disp.max() / TWO_PI + 1e-12)
        roots: list[float] = []
        for j in range(j_lo, j_hi + 1):
            roots.extend(r % TWO_PI for r in _branch_roots(lift, TWO_PI * j, 1e-14))
        roots.sort()
        for t in roots:
            p = cmath.exp(1j * t)
            if any(abs(p - q) < 1e-9 for q in fixed):
                continue
            if abs(cand.evaluate(p) - p) < 1e-10:
                fixed.append(p)
    else:
        notes.append("candidate does not preserve the unit circle; fixed points skipped")

    return InnerCandidateReport(
        circle_preserving=circle_preserving,
        maps_disk_in=maps_disk_in,
        boundary_fixed_points=tuple(fixed),
        max_circle_error=max_err,
        notes=tuple(notes),
    )
