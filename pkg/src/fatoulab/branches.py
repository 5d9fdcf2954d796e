"""Branch-indexed inverse maps, pullback chains and the proper-invertibility probe.

Branch indexing: for the exp-family maps (z + c + exp(-z)), branch k means
the preimage with Im z in ((2k-1)pi, (2k+1)pi]; the map is 2 pi i
pseudoperiodic, so branch k of w equals branch 0 of (w - 2 pi i k) shifted
back up. For exp_lambda, k is the 2 pi i k summand of the logarithm; for
z_exp, k is the Lambert-W branch index of z = -W(-w).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

from .catalog import (
    EXP_LAMBDA,
    FATOU_MINUS,
    FATOU_PLUS,
    TWO_PI,
    Z_EXP,
    Z_PLUS_EXP,
    EntireMap,
)
from .errors import (
    AmbiguousBranch,
    AsymptoticValueCollision,
    BranchJumpDetected,
    CriticalValueCollision,
    InsufficientFatouSamples,
    NewtonDiverged,
    Overflow,
)
from .orbits import classify_orbit

_SV_TOL = 1e-12
_NEWTON_STEPS = 200
_RESIDUAL_TOL = 1e-12

_EXP_SHIFT = {FATOU_PLUS: 1.0, FATOU_MINUS: -1.0, Z_PLUS_EXP: 0.0}


def _singular_guard(m: EntireMap, w: complex, branch: int) -> complex | None:
    """Guard against singular values; returns the critical point on an exact hit.

    At an exact critical value the two merging branch inverses agree at the
    critical point, so that limit is returned; requests merely near one (the
    ill-conditioned annulus below 1e-12) raise CriticalValueCollision.
    Asymptotic values are logarithmic singularities with no usable limit and
    always raise.
    """
    if m.family == EXP_LAMBDA:
        if abs(w) < _SV_TOL:
            raise AsymptoticValueCollision("logarithm branch point at w = 0")
        return None
    if m.family == Z_EXP:
        if abs(w) < _SV_TOL:
            raise AsymptoticValueCollision("asymptotic value 0 of z*exp(-z)")
        if branch in (0, -1):
            d = abs(w - math.exp(-1.0))
            if d == 0.0:
                return 1.0 + 0.0j
            if d < _SV_TOL:
                raise CriticalValueCollision("critical value 1/e of z*exp(-z)")
        return None
    c = _EXP_SHIFT[m.family]
    cp = TWO_PI * 1j * branch
    cv = m.evaluate(cp)
    d = abs(w - cv)
    if d == 0.0:
        return cp
    if d < _SV_TOL:
        raise CriticalValueCollision(
            f"critical value {1.0 + c:+g} + 2 pi i {branch} of {m.family}"
        )
    return None


def _damped_newton(m: EntireMap, w: complex, seed: complex) -> complex:
    """Solve f(z) = w by Newton with step halving (up to 8 times on residual increase)."""
    z = complex(seed)
    try:
        fz, dfz = m.eval_with_derivative(z)
    except Overflow as exc:
        raise NewtonDiverged(f"seed {seed} overflows") from exc
    res = abs(fz - w)
    for _ in range(_NEWTON_STEPS):
        if res < _RESIDUAL_TOL:
            return z
        if dfz == 0:
            raise NewtonDiverged("derivative vanished during inversion")
        full = (fz - w) / dfz
        step = full
        for _ in range(8):
            cand = z - step
            try:
                fc, dfc = m.eval_with_derivative(cand)
            except Overflow:
                step *= 0.5
                continue
            rc = abs(fc - w)
            if rc < res or abs(step) < 1e-17:
                z, fz, dfz, res = cand, fc, dfc, rc
                break
            step *= 0.5
        else:
            raise NewtonDiverged(f"no descent step while inverting near {seed}")
    if res < _RESIDUAL_TOL:
        return z
    raise NewtonDiverged(f"residual {res:.3e} after {_NEWTON_STEPS} Newton steps")


def inverse(
    m: EntireMap,
    w: complex,
    branch: int | None = None,
    seed: complex | None = None,
) -> complex:
    """One preimage z with |f(z) - w| < 1e-12, selected by branch index or seed.

    exp_lambda uses the closed form log(w/lam) + 2 pi i k; z_exp uses the
    Lambert-W branch; the exp-family maps run damped Newton from strip seeds
    and verify strip membership of the result.
    """
    w = complex(w)
    if branch is None:
        if seed is None:
            branch = 0
        elif m.family == EXP_LAMBDA:
            branch = round((complex(seed).imag - cmath.phase(w / m.lam)) / TWO_PI)
        else:
            branch = branch_of(m, complex(seed))
    exact_critical = _singular_guard(m, w, branch)
    if exact_critical is not None:
        return exact_critical

    if m.family == EXP_LAMBDA:
        return cmath.log(w / m.lam) + TWO_PI * 1j * branch

    if m.family == Z_EXP:
        z = complex(-lambertw(-w, k=branch))
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise NewtonDiverged(f"Lambert-W branch {branch} undefined at {w}")
        return _damped_newton(m, w, z)

    c = _EXP_SHIFT[m.family]
    # Reduce to the principal strip via 2 pi i pseudoperiodicity.
    v = w - TWO_PI * 1j * branch
    z0 = None
    for cand_seed in (v - c, -_safe_log(v - c)):
        if cand_seed is None:
            continue
        try:
            z0 = _damped_newton(m, v, cand_seed)
        except NewtonDiverged:
            continue
        if -math.pi < z0.imag <= math.pi + 1e-12:
            break
        z0 = None
    if z0 is None:
        raise NewtonDiverged(f"no principal-strip preimage found for {v}")
    return z0 + TWO_PI * 1j * branch


def _safe_log(v: complex) -> complex | None:
    return cmath.log(v) if v != 0 else None


def branch_of(m: EntireMap, z: complex) -> int:
    """Branch index owning the preimage z (log summand, strip, or Lambert-W index)."""
    if m.family == EXP_LAMBDA:
        wrapped = (z.imag + math.pi) % TWO_PI - math.pi
        return round((z.imag - wrapped) / TWO_PI)
    if m.family == Z_EXP:
        # Lambert-W branch k has Im W in ((2k-1)pi, (2k+1)pi] up to the cut; W = -z.
        return math.ceil((-z.imag - math.pi) / TWO_PI)
    return math.ceil((z.imag - math.pi) / TWO_PI)


def _candidate_preimages(m: EntireMap, w: complex, near: complex, halo: int = 2) -> list[complex]:
    """Distinct preimages of w found from canonical branch seeds around `near`.

    Used to measure how isolated the continuity preimage is (ambiguity and
    trust-radius accounting); the enumeration is best-effort, not exhaustive.
    """
    base = branch_of(m, near)
    found: list[complex] = []

    def push(z: complex) -> None:
        if abs(m.evaluate(z) - w) > 1e-9:
            return
        if all(abs(z - q) > 1e-9 for q in found):
            found.append(z)

    for k in range(base - halo, base + halo + 1):
        if m.family == EXP_LAMBDA:
            try:
                push(inverse(m, w, branch=k))
            except (AsymptoticValueCollision, NewtonDiverged):
                pass
            continue
        if m.family == Z_EXP:
            try:
                z = complex(-lambertw(-w, k=k))
                if math.isfinite(z.real) and math.isfinite(z.imag):
                    push(_damped_newton(m, w, z))
            except (NewtonDiverged, Overflow):
                pass
            continue
        c = _EXP_SHIFT[m.family]
        v = w - TWO_PI * 1j * k
        for seed in (v - c, _safe_log_neg(v - c)):
            if seed is None:
                continue
            try:
                push(_damped_newton(m, v, seed) + TWO_PI * 1j * k)
            except (NewtonDiverged, Overflow):
                pass
    return found


def _safe_log_neg(v: complex) -> complex | None:
    return -cmath.log(v) if v != 0 else None


# ---------------------------------------------------------------------------
# Pullback chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainStep:
    branch: int
    anchor: complex       # the known preimage z_i with f(z_i) ~ z_{i+1}
    residual: float       # |f(anchor) - next anchor|
    nearest_other: float  # distance from anchor to the nearest other preimage


@dataclass(frozen=True)
class BranchChain:
    """A composed inverse branch along an orbit; step i inverts z_{i+1} back to z_i."""

    map: EntireMap
    steps: tuple[ChainStep, ...]
    terminal: complex
    trust_radius: float

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict:
        return {
            "steps": [
                {"k": s.branch, "anchor": [s.anchor.real, s.anchor.imag], "residual": s.residual}
                for s in self.steps
            ],
            "terminal": [self.terminal.real, self.terminal.imag],
        }


def pullback_chain(m: EntireMap, orbit: list[complex]) -> BranchChain:
    """Select, per orbit step, the inverse branch that undoes it, recording indices.

    Precondition: consecutive points satisfy f(z_i) = z_{i+1} to 1e-8. Raises
    AmbiguousBranch when the two closest candidate preimages nearly merge
    (orbit through a critical value) or when the match is not clearly unique.
    """
    orbit = [complex(z) for z in orbit]
    if len(orbit) < 1:
        raise ValueError("orbit must contain at least one point")
    steps: list[ChainStep] = []
    for i in range(len(orbit) - 1):
        z_i, z_next = orbit[i], orbit[i + 1]
        residual = abs(m.evaluate(z_i) - z_next)
        if residual > 1e-8:
            raise ValueError(
                f"orbit is not consecutive at step {i}: |f(z_{i}) - z_{i+1}| = {residual:.3e}"
            )
        # The continuity preimage: the root of f(z) = z_next next to the anchor.
        p_best = _continuity_inverse(m, z_next, z_i)
        d_best = abs(p_best - z_i)
        others = [
            q for q in _candidate_preimages(m, z_next, z_i) if abs(q - p_best) > 1e-9
        ]
        nearest_other = min((abs(q - p_best) for q in others), default=math.inf)
        if nearest_other < 1e-6:
            raise AmbiguousBranch(
                f"two candidate preimages within 1e-6 at step {i} (near a critical value)"
            )
        d_second = min((abs(q - z_i) for q in others), default=math.inf)
        if d_best >= 0.5 * d_second:
            raise AmbiguousBranch(
                f"branch selection not unique at step {i}: {d_best:.3e} vs {d_second:.3e}"
            )
        steps.append(ChainStep(branch_of(m, p_best), z_i, residual, nearest_other))
    trust = 0.5 * min((s.nearest_other for s in steps), default=math.inf)
    return BranchChain(m, tuple(steps), orbit[-1], trust)


def _continuity_inverse(m: EntireMap, w: complex, anchor: complex) -> complex:
    """The preimage of w obtained by continuation from a known nearby preimage."""
    if m.family == EXP_LAMBDA:
        if abs(w) < _SV_TOL:
            raise AsymptoticValueCollision("logarithm branch point at w = 0")
        raw = cmath.log(w / m.lam)
        return raw + TWO_PI * 1j * round((anchor.imag - raw.imag) / TWO_PI)
    guard = _singular_guard(m, w, branch_of(m, anchor))
    if guard is not None:
        return guard
    return _damped_newton(m, w, anchor)


def apply_chain(chain: BranchChain, z: complex, verify_trust: bool = True) -> complex:
    """Apply the stored single-step inverses innermost-first, Newton-seeded by
    continuity from each step's anchor; images must stay inside the trust radius."""
    u = complex(z)
    for step in reversed(chain.steps):
        u = _continuity_inverse(chain.map, u, step.anchor)
        if verify_trust and abs(u - step.anchor) > chain.trust_radius:
            raise BranchJumpDetected(
                f"image {u} strayed {abs(u - step.anchor):.3e} from anchor {step.anchor} "
                f"(trust radius {chain.trust_radius:.3e})"
            )
    return u


def chain_fixing(m: EntireMap, p: complex, length: int) -> BranchChain:
    """The pullback chain along the constant orbit at a fixed point p."""
    return pullback_chain(m, [p] * (length + 1))


# ---------------------------------------------------------------------------
# Proper-invertibility probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeViolation:
    sample: complex
    image: complex | None
    note: str


@dataclass(frozen=True)
class ProbeReport:
    holds_on_samples: bool
    violations: tuple[ProbeViolation, ...]
    label: int
    n_fatou_samples: int


def proper_invertibility_probe(
    m: EntireMap,
    grid,
    p: complex,
    r: float,
    chain: BranchChain,
    samples: int = 200,
    rng_seed: int = 0,
    budget: int | None = None,
    margin_cells: float = 1.5,
) -> ProbeReport:
    """Sample D(p, r) inside one Fatou label, pull back, and reclassify the images.

    Samples are kept only when their cell carries the dominant Fatou label
    and they sit at least `margin_cells` cell diagonals away from any
    other-label cell center, so borderline raster cells cannot produce
    spurious verdicts. Images inside the window are reclassified by their
    cell label; images outside fall back to a fresh orbit run matched
    against the label's component-family signature.
    """
    if r <= 2.0 * max(grid.cell_size):
        raise ValueError("probe radius must exceed two grid cells")
    rng = np.random.default_rng(rng_seed)
    rho = r * np.sqrt(rng.uniform(0.0, 1.0, samples))
    phi = rng.uniform(0.0, TWO_PI, samples)
    pts = p + rho * np.exp(1j * phi)

    labels = []
    for z in pts:
        try:
            labels.append(grid.label_at(complex(z)))
        except Exception:
            labels.append(0)
    labels = np.asarray(labels)
    positive = labels[labels > 0]
    if positive.size == 0:
        raise InsufficientFatouSamples("no Fatou-labelled samples in the probe disk")
    label = int(np.bincount(positive).argmax())

    tree = grid._other_label_tree(label)
    margin = margin_cells * grid.cell_diagonal
    fatou_pts = []
    for z in pts[labels == label]:
        d, _ = tree.query([z.real, z.imag])
        if d >= margin:
            fatou_pts.append(complex(z))
    if len(fatou_pts) < 10:
        raise InsufficientFatouSamples(
            f"only {len(fatou_pts)} confident samples carry Fatou label {label}"
        )

    budget = (budget if budget is not None else grid.budget) + len(chain)
    violations: list[ProbeViolation] = []
    for z in fatou_pts:
        try:
            img = apply_chain(chain, z)
        except Exception as exc:  # chain errors count against the probe
            violations.append(ProbeViolation(z, None, f"chain error: {exc}"))
            continue
        if bool(grid.contains(img)):
            img_label = grid.label_at(img)
            if img_label != label:
                violations.append(
                    ProbeViolation(z, img, f"image cell label {img_label} != {label}")
                )
        else:
            verdict = classify_orbit(
                m, img, budget, grid.escape_radius, grid.attractors, grid.tol
            )
            if not grid.verdict_matches_label(verdict, label):
                violations.append(
                    ProbeViolation(
                        z, img, f"image verdict {verdict.kind.name} does not match label"
                    )
                )
    return ProbeReport(
        holds_on_samples=not violations,
        violations=tuple(violations),
        label=label,
        n_fatou_samples=len(fatou_pts),
    )
