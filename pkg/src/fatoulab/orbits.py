"""Forward-orbit classification into escaping / bounded / undecided.

The scalar entry point wraps the vectorised kernel on a length-1 array, so
grid runs and single-point queries share one code path and one semantics.
Verdicts fire at the first step whose condition holds, which makes the
classification monotone in the budget: any non-Undecided verdict at budget b
is reproduced verbatim at every larger budget.
"""

from __future__ import annotations

import enum
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

DEFAULT_ESCAPE_RADIUS = 50.0
DEFAULT_TOL = 1e-6

# Baker-domain drift heuristic (family-specific, calibrated on the known
# absorbing behaviour): escape is certified after Re f^n has increased for
# DRIFT_RUN consecutive steps while beyond DRIFT_MIN_RE.
DRIFT_MIN_RE = 3.0
DRIFT_RUN = 50
_DRIFT_FAMILIES = (Z_PLUS_EXP, FATOU_PLUS)

# Parabolic certification (z_exp): the petal attracts along R+, so we require
# a small modulus, an argument inside the petal sector and a shrinking step.
PARABOLIC_ABS = 1e-3


class Kind(enum.IntEnum):
    UNDECIDED = 0
    ESCAPING = 1
    ATTRACTING = 2
    PARABOLIC = 3


class EscapeReason(enum.IntEnum):
    NONE = 0
    RADIUS = 1
    OVERFLOW = 2
    DRIFT = 3


@dataclass(frozen=True)
class OrbitVerdict:
    kind: Kind
    iterations_used: int
    final_point: complex
    target: complex | None = None
    period: int | None = None
    escape_reason: EscapeReason = EscapeReason.NONE
    drift_strip: int | None = None

    @property
    def is_fatou_evidence(self) -> bool:
        """True for verdicts that are unambiguous Fatou evidence (labelable)."""
        return self.kind in (Kind.ATTRACTING, Kind.PARABOLIC) or (
            self.kind == Kind.ESCAPING and self.escape_reason == EscapeReason.DRIFT
        )


@dataclass
class OrbitArrays:
    """Struct-of-arrays result of the vectorised classifier."""

    kinds: np.ndarray          # int8 Kind
    iterations: np.ndarray     # int32, f-applications at verdict (budget if undecided)
    final: np.ndarray          # complex final point
    reasons: np.ndarray        # int8 EscapeReason
    strips: np.ndarray         # int32 drift strip index (valid where reason==DRIFT)
    attractor_index: np.ndarray  # int16, -1 where not attracted


def default_attractors(m: EntireMap, k_bound: int = 8) -> tuple[tuple[complex, int], ...]:
    """Known attracting cycles per family (empty where none exist)."""
    if m.family == EXP_LAMBDA and 0 < m.lam < 1.0 / math.e:
        q = complex(-lambertw(-m.lam, 0))
        return ((q, 1),)
    if m.family == FATOU_MINUS:
        return tuple((complex(0.0, TWO_PI * k), 1) for k in range(-k_bound, k_bound + 1))
    return ()


def parabolic_points(m: EntireMap) -> tuple[complex, ...]:
    return (0.0 + 0.0j,) if m.family == Z_EXP else ()


def classify_orbits_array(
    m: EntireMap,
    z0: np.ndarray,
    budget: int,
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
    attractors: tuple[tuple[complex, int], ...] = (),
    tol: float = DEFAULT_TOL,
) -> OrbitArrays:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    for p, _ in attractors:
        if abs(p) >= escape_radius:
            raise ValueError("escape_radius must exceed every attractor modulus")

    z = np.asarray(z0, dtype=complex).ravel().copy()
    n = z.size
    kinds = np.zeros(n, dtype=np.int8)
    iterations = np.full(n, budget, dtype=np.int32)
    final = z.copy()
    reasons = np.zeros(n, dtype=np.int8)
    strips = np.zeros(n, dtype=np.int32)
    att_index = np.full(n, -1, dtype=np.int16)

    active = np.arange(n)
    drift_count = np.zeros(n, dtype=np.int16)
    use_drift = m.family in _DRIFT_FAMILIES
    parabolic = parabolic_points(m)
    capture = tol / 4.0

    for step in range(1, budget + 1):
        if active.size == 0:
            break
        w, bad = m.evaluate_array(z[active])

        # Overflow of the exponential is escape evidence for every catalog map.
        verdict_kind = np.zeros(active.size, dtype=np.int8)
        verdict_reason = np.zeros(active.size, dtype=np.int8)
        verdict_kind[bad] = Kind.ESCAPING
        verdict_reason[bad] = EscapeReason.OVERFLOW

        radius = ~bad & (np.abs(w) > escape_radius)
        verdict_kind[radius] = Kind.ESCAPING
        verdict_reason[radius] = EscapeReason.RADIUS

        undecided = verdict_kind == 0
        if attractors and undecided.any():
            for j, (p, q) in enumerate(attractors):
                near = undecided & (np.abs(w - p) < capture)
                if near.any():
                    idx = np.nonzero(near)[0]
                    wq = w[idx].copy()
                    okq = np.ones(idx.size, dtype=bool)
                    for _ in range(q):
                        wq2, badq = m.evaluate_array(wq)
                        okq &= ~badq
                        wq = wq2
                    good = okq & (np.abs(wq - w[idx]) < tol)
                    sel = idx[good]
                    verdict_kind[sel] = Kind.ATTRACTING
                    att_index[active[sel]] = j
                    undecided[sel] = False

        if parabolic and undecided.any():
            p = parabolic[0]
            dw = w - p
            near = undecided & (np.abs(dw) < PARABOLIC_ABS) & (dw.real > np.abs(dw.imag))
            if near.any():
                idx = np.nonzero(near)[0]
                w1, bad1 = m.evaluate_array(w[idx])
                good = ~bad1 & (np.abs(w1 - p) <= np.abs(dw[idx]))
                sel = idx[good]
                verdict_kind[sel] = Kind.PARABOLIC
                undecided[sel] = False

        if use_drift:
            rising = (w.real > z[active].real) & (w.real > DRIFT_MIN_RE) & ~bad
            dc = drift_count[active]
            dc = np.where(rising, dc + 1, 0)
            drift_count[active] = dc
            drifted = undecided & (dc >= DRIFT_RUN)
            verdict_kind[drifted] = Kind.ESCAPING
            verdict_reason[drifted] = EscapeReason.DRIFT
            strips[active[drifted]] = np.round(w[drifted].imag / TWO_PI).astype(np.int32)

        z[active] = w
        final[active] = w
        done = verdict_kind != 0
        if done.any():
            sel = active[done]
            kinds[sel] = verdict_kind[done]
            reasons[sel] = verdict_reason[done]
            iterations[sel] = step
            active = active[~done]

    return OrbitArrays(kinds, iterations, final, reasons, strips, att_index)


def classify_orbit(
    m: EntireMap,
    z0: complex,
    budget: int,
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
    attractors: tuple[tuple[complex, int], ...] = (),
    tol: float = DEFAULT_TOL,
) -> OrbitVerdict:
    """Classify one starting point; Undecided is the budget-exhausted fallback."""
    res = classify_orbits_array(
        m, np.array([z0], dtype=complex), budget, escape_radius, attractors, tol
    )
    kind = Kind(int(res.kinds[0]))
    reason = EscapeReason(int(res.reasons[0]))
    target = None
    period = None
    if kind == Kind.ATTRACTING:
        p, q = attractors[int(res.attractor_index[0])]
        target, period = complex(p), int(q)
    elif kind == Kind.PARABOLIC:
        target = complex(parabolic_points(m)[0])
    return OrbitVerdict(
        kind=kind,
        iterations_used=int(res.iterations[0]),
        final_point=complex(res.final[0]),
        target=target,
        period=period,
        escape_reason=reason,
        drift_strip=int(res.strips[0]) if reason == EscapeReason.DRIFT else None,
    )
