"""Frequency function N(r) = r D(r) / H(r) and the experiments built on it.

For a harmonic field u on the cone:

    H(r) = int_{dB_r} |u|^2
    D(r) = int_{B_r} |grad u|^2 + R(u, u)     (curvature term, zero here)
         = int_{dB_r} <u, grad_r u>           (boundary form)
    F(r) = int_{B_r} |u|^2

N is nondecreasing and is constant exactly when u is homogeneous under the
radial derivative; log H and log F are convex in log r (3-circle); boundary
pairings of homogeneous fields scale as C r^(2s+m-1). The dyadic decay
report measures ball averages of |du|^2 + |d*u|^2 against the r^(-2 delta)
bound, and the doubling test checks that fields orthogonal to differentials
of subquadratic harmonics grow at least almost linearly.

Supported cones are flat or flat quotients, so the curvature contribution
to D vanishes for functions and 1-forms; a nonzero plug-in evaluator is
accepted but must bring its own validation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ._radial import RadialPoly
from .cone_fields import (
    FUNCTION,
    ONE_FORM,
    FieldError,
    HomogeneityReport,
    SeparableField,
    ball_norm_sq,
    differential,
    mode_field,
    project_against,
)
from .cones import Cone
from .cross_section import KIND_FUNCTION, SpectrumError
from .spectra import (
    SpectrumReport,
    growth_spectrum,
    oneform_growth_spectrum,
    type_II_mode,
)

TOLERANCES = {"analytic": 1e-9, "mesh": 1e-6}
_RESIDUAL_GATE = {"analytic": 1e-10, "mesh": 1e-6}


class FrequencyError(ValueError):
    pass


def _profile_for(field: SeparableField, tolerance_profile: Optional[str]) -> str:
    if tolerance_profile is not None:
        if tolerance_profile not in TOLERANCES:
            raise FrequencyError(f"unknown tolerance profile {tolerance_profile!r}")
        return tolerance_profile
    return "mesh" if field.uses_mesh_data else "analytic"


@dataclass(frozen=True)
class FrequencyProfile:
    radii: np.ndarray
    D: np.ndarray
    H: np.ndarray
    N: np.ndarray
    F: np.ndarray
    curvature_term_included: bool
    bulk_boundary_rel_error: float
    homogeneity: HomogeneityReport
    tolerance_profile: str

    def to_json_dict(self) -> dict:
        return {
            "radii": list(map(float, self.radii)),
            "D": list(map(float, self.D)),
            "H": list(map(float, self.H)),
            "N": list(map(float, self.N)),
            "F": list(map(float, self.F)),
            "curvature_term_included": self.curvature_term_included,
            "bulk_boundary_rel_error": self.bulk_boundary_rel_error,
            "homogeneous": self.homogeneity.homogeneous,
            "tolerance_profile": self.tolerance_profile,
        }

    def csv_rows(self, plot_data: bool = False) -> List[List[str]]:
        if plot_data:
            rows = [["log_r", "log_H", "log_F", "N"]]
            for r, h, f, n in zip(self.radii, self.H, self.F, self.N):
                rows.append([format(math.log(x), ".17g") for x in (r, h, f)] + [format(n, ".17g")])
            return rows
        rows = [["r", "D", "H", "N", "F"]]
        for r, d, h, n, f in zip(self.radii, self.D, self.H, self.N, self.F):
            rows.append([format(x, ".17g") for x in (r, d, h, n, f)])
        return rows


def frequency_profile(
    u: SeparableField,
    radii: Sequence[float],
    curvature_term: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    tolerance_profile: Optional[str] = None,
) -> FrequencyProfile:
    """Compute D, H, N, F on a radius grid, cross-checking both forms of D.

    D is evaluated from the bulk energy integral (closed-form radial
    integrals for power modes) and from the boundary integrand; the two must
    agree to the profile tolerance or the computation is rejected.
    """
    prof = _profile_for(u, tolerance_profile)
    tol = TOLERANCES[prof]
    radii = np.asarray(sorted(float(r) for r in radii))
    if len(radii) < 2 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise FrequencyError("need at least two strictly increasing positive radii")

    resid = u.harmonicity_residual(radii)
    if resid > _RESIDUAL_GATE[prof]:
        raise FrequencyError(
            f"field is not harmonic: residual {resid:.3e} exceeds {_RESIDUAL_GATE[prof]:.0e}"
        )

    m = u.cone.m
    link_sq = u.link_norm_sq()
    if link_sq.is_zero():
        raise FrequencyError("frequency undefined for the zero field")
    H = link_sq.shift_power(m - 1.0).eval(radii)
    if np.any(H <= 0):
        raise FrequencyError("H(r) vanished on the grid; frequency undefined")

    D_boundary = u.link_radial_pair().shift_power(m - 1.0).eval(radii)
    grad = u.link_grad_sq().shift_power(m - 1.0)
    try:
        D_bulk = np.array([grad.integrate(0.0, r) for r in radii])
    except ValueError as exc:
        raise FrequencyError(
            f"bulk energy integral diverges at the vertex ({exc}); "
            "the field is not locally W^{1,2}"
        ) from exc
    included = curvature_term is not None
    if included:
        D_bulk = D_bulk + np.asarray(curvature_term(radii), dtype=float)

    scale = np.maximum(np.abs(D_bulk), np.abs(D_boundary))
    scale[scale == 0.0] = 1.0
    rel = float(np.max(np.abs(D_bulk - D_boundary) / scale))
    if rel > tol:
        raise FrequencyError(
            f"bulk and boundary forms of D disagree (rel {rel:.3e} > {tol:.0e})"
        )

    F = np.array([link_sq.shift_power(m - 1.0).integrate(0.0, r) for r in radii])
    N = radii * D_boundary / H
    return FrequencyProfile(
        radii, D_boundary, H, N, F, included, rel, u.homogeneity(), prof
    )


# ---------------------------------------------------------------------------
# monotonicity and 3-circle checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityResult:
    passed: bool
    violations: Tuple[Tuple[float, float, float], ...]  # (r_i, N_i, N_{i+1})
    constant: bool
    boundary_flag: bool
    homogeneity_consistent: bool


def monotonicity_check(profile: FrequencyProfile, tol: Optional[float] = None) -> MonotonicityResult:
    """N nondecreasing along the grid; constancy iff the field is homogeneous."""
    tol = TOLERANCES[profile.tolerance_profile] if tol is None else tol
    N = profile.N
    diffs = np.diff(N)
    violations = tuple(
        (float(profile.radii[i]), float(N[i]), float(N[i + 1]))
        for i in np.nonzero(diffs < -tol)[0]
    )
    boundary = bool(np.any((diffs < 0) & (diffs >= -tol)))
    constant = float(N.max() - N.min()) <= tol
    consistent = constant == profile.homogeneity.homogeneous
    return MonotonicityResult(not violations, violations, constant, boundary, consistent)


@dataclass(frozen=True)
class ThreeCircleResult:
    passed: bool
    equality: bool
    margins_F: Tuple[float, ...]
    margins_H: Tuple[float, ...]
    homogeneity_consistent: bool


def three_circle_check(
    u: SeparableField,
    radii: Sequence[float],
    tolerance_profile: Optional[str] = None,
) -> ThreeCircleResult:
    """Discrete log-convexity of F and H at scale factor 2.

    For each top radius r: F(r) F(r/4) >= F(r/2)^2 up to the relative
    tolerance, with equality exactly for homogeneous fields.
    """
    prof = _profile_for(u, tolerance_profile)
    tol = TOLERANCES[prof]
    m = u.cone.m
    link_sq = u.link_norm_sq().shift_power(m - 1.0)
    margins_F, margins_H = [], []
    for r in radii:
        trip = [float(r), r / 2.0, r / 4.0]
        Fv = [link_sq.integrate(0.0, x) for x in trip]
        Hv = list(link_sq.eval(np.array(trip)))
        if min(Fv) <= 0 or min(Hv) <= 0:
            raise FrequencyError("three-circle check needs a nonzero field")
        margins_F.append((Fv[0] * Fv[2] - Fv[1] ** 2) / Fv[1] ** 2)
        margins_H.append((Hv[0] * Hv[2] - Hv[1] ** 2) / Hv[1] ** 2)
    mF = np.array(margins_F)
    mH = np.array(margins_H)
    passed = bool(np.all(mF >= -tol) and np.all(mH >= -tol))
    equality = bool(np.all(np.abs(mF) <= tol) and np.all(np.abs(mH) <= tol))
    hom = u.homogeneity()
    consistent = equality == (hom.homogeneous or hom.log_homogeneous)
    return ThreeCircleResult(passed, equality, tuple(margins_F), tuple(margins_H), consistent)


# ---------------------------------------------------------------------------
# homogeneous pairing law
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairingResult:
    vanishing: bool
    constant: float
    fitted_exponent: Optional[float]
    expected_exponent: Optional[float]
    fit_residual: Optional[float]


def pairing_law_check(
    u: SeparableField, v: SeparableField, radii: Sequence[float]
) -> PairingResult:
    """Boundary pairing int_{dB_r} <u, v> = C r^(2s+m-1) for homogeneous v.

    Fits the exponent on the grid; a pairing below 1e-12 of the field norms
    is reported as C = 0 (orthogonal angular or degree support).
    """
    hom = v.homogeneity()
    if not hom.homogeneous:
        raise FrequencyError("pairing law requires a homogeneous second field")
    m = u.cone.m
    radii = np.asarray(sorted(float(r) for r in radii))
    P = u.link_pair(v).shift_power(m - 1.0).eval(radii)
    norm_u = np.sqrt(u.link_norm_sq().shift_power(m - 1.0).eval(radii))
    norm_v = np.sqrt(v.link_norm_sq().shift_power(m - 1.0).eval(radii))
    if np.all(np.abs(P) <= 1e-12 * norm_u * norm_v):
        return PairingResult(True, 0.0, None, None, None)
    if np.any(P == 0) or len(set(np.sign(P))) != 1:
        raise FrequencyError("pairing changes sign; no single power law to fit")
    logs = np.log(np.abs(P))
    A = np.vstack([np.log(radii), np.ones_like(radii)]).T
    (slope, intercept), res, *_ = np.linalg.lstsq(A, logs, rcond=None)
    fit_residual = float(np.max(np.abs(A @ np.array([slope, intercept]) - logs)))
    C = math.copysign(math.exp(intercept), P[0])
    return PairingResult(False, C, float(slope), 2.0 * hom.degree + m - 1.0, fit_residual)


# ---------------------------------------------------------------------------
# ball averages, 3-annulus and doubling experiments
# ---------------------------------------------------------------------------


def ball_average_sq(u: SeparableField, radius: float) -> float:
    """Volume-normalized L2 average over B_radius."""
    m = u.cone.m
    vol = u.cone.link_volume * radius**m / m
    return ball_norm_sq(u, radius) / vol


@dataclass(frozen=True)
class ThreeAnnulusResult:
    d_bar: float
    radius: float
    hypothesis_holds: bool
    conclusion_holds: bool
    implication_holds: bool
    averages: Tuple[float, float, float]


def three_annulus_check(
    u: SeparableField,
    d_bar: float,
    radius: float,
    spectrum: Optional[SpectrumReport] = None,
) -> ThreeAnnulusResult:
    """Monotonicity implication at scales (r, r/2, r/4) for d_bar off-spectrum.

    avg(B_r) <= 2^(2 d_bar) avg(B_r/2)  must imply the strict version one
    scale down. d_bar is checked against the growth spectrum first.
    """
    if spectrum is None:
        window = (0.0, max(2.0, math.floor(d_bar) + 2.0))
        if u.kind == FUNCTION:
            spectrum = growth_spectrum(u.cone, window)
        else:
            spectrum = oneform_growth_spectrum(u.cone, window)
    if spectrum.contains_rate(d_bar):
        raise FrequencyError(f"d_bar = {d_bar} lies in the growth spectrum; pick a gap value")
    a_r = ball_average_sq(u, radius)
    a_2 = ball_average_sq(u, radius / 2.0)
    a_4 = ball_average_sq(u, radius / 4.0)
    factor = 2.0 ** (2.0 * d_bar)
    hyp = a_r <= factor * a_2
    concl = a_2 < factor * a_4
    return ThreeAnnulusResult(d_bar, radius, hyp, concl, (not hyp) or concl, (a_r, a_2, a_4))


def subquadratic_differential_space(cone: Cone) -> List[SeparableField]:
    """d H_{<2}(C(X)): differentials of harmonic functions of degree < 2.

    These are the type II modes with growth rate below 1; d(constants) = 0
    is omitted.
    """
    table = cone.function_table(1)
    out = []
    for item in table.of_kind(KIND_FUNCTION):
        if item.eigenvalue <= 1e-12:
            continue
        mode = type_II_mode(cone.m, item)
        if not (0.0 <= mode.growth_rate < 1.0):
            continue
        for j in range(item.multiplicity):
            out.append(mode_field(cone, mode, j))
    return out


@dataclass(frozen=True)
class DoublingResult:
    passed: bool
    vacuous: bool
    ratio: Optional[float]
    threshold: float
    delta: float


def epsilon_doubling_test(u: SeparableField, delta: float) -> DoublingResult:
    """Project out d H_{<2} on B_1, then check the almost-linear doubling bound.

    The remainder w must satisfy avg_{B_1} |w|^2 >= 2^(2(1-delta))
    avg_{B_1/2} |w|^2; a zero remainder passes vacuously.
    """
    if not (0.0 < delta < 1.0):
        raise FrequencyError("delta must lie in (0, 1)")
    if u.kind != ONE_FORM:
        raise FrequencyError("the doubling test applies to 1-forms")
    subspace = subquadratic_differential_space(u.cone)
    w = project_against(u, subspace, 1.0)
    threshold = 2.0 ** (2.0 * (1.0 - delta))
    top = ball_average_sq(w, 1.0)
    if top <= 1e-24 * max(ball_average_sq(u, 1.0), 1e-300):
        return DoublingResult(True, True, None, threshold, delta)
    ratio = top / ball_average_sq(w, 0.5)
    return DoublingResult(ratio >= threshold * (1.0 - 1e-12), False, float(ratio), threshold, delta)


# ---------------------------------------------------------------------------
# dyadic decay of |du|^2 + |d*u|^2
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayReport:
    radii: Tuple[float, ...]
    energy_averages: Tuple[float, ...]
    field_averages: Tuple[float, ...]
    doubling_ratios: Tuple[float, ...]
    fitted_exponent: Optional[float]
    fit_residual: Optional[float]
    delta: float
    constant: Optional[float]
    bound_holds: bool
    identically_zero: bool

    def to_json_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "energy_averages": list(self.energy_averages),
            "field_averages": list(self.field_averages),
            "doubling_ratios": list(self.doubling_ratios),
            "fitted_exponent": self.fitted_exponent,
            "fit_residual": self.fit_residual,
            "delta": self.delta,
            "constant": self.constant,
            "bound_holds": self.bound_holds,
            "identically_zero": self.identically_zero,
        }

    def csv_rows(self) -> List[List[str]]:
        rows = [["radius", "energy_average", "field_average", "doubling_ratio"]]
        for i, r in enumerate(self.radii):
            ratio = self.doubling_ratios[i] if i < len(self.doubling_ratios) else float("nan")
            rows.append(
                [
                    format(r, ".17g"),
                    format(self.energy_averages[i], ".17g"),
                    format(self.field_averages[i], ".17g"),
                    format(ratio, ".17g"),
                ]
            )
        return rows


def dyadic_decay_report(u: SeparableField, k_max: int, delta: float = 0.5) -> DecayReport:
    """Ball averages of |du|^2 + |d*u|^2 at radii 2^-k, k = 0..k_max.

    The bound avg(B_r) <= C r^(-2 delta) avg_{B_1} |u|^2 is checked with C
    fitted at the first halved scale. Fields whose modes all have rate < 1
    are closed and coclosed, so their report is identically zero.
    """
    if u.kind != ONE_FORM:
        raise FrequencyError("the decay report applies to 1-forms")
    if k_max < 1:
        raise FrequencyError("need k_max >= 1")
    m = u.cone.m
    energy = u.link_du_sq() + u.codifferential().link_norm_sq()
    radii = [2.0**-k for k in range(k_max + 1)]
    vol = [u.cone.link_volume * r**m / m for r in radii]
    weighted = energy.shift_power(m - 1.0)
    e_avg = [weighted.integrate(0.0, r) / v for r, v in zip(radii, vol)]
    u_avg = [ball_average_sq(u, r) for r in radii]
    base = u_avg[0]
    zero = all(a <= 1e-24 * base for a in e_avg)
    ratios = tuple(
        e_avg[i + 1] / e_avg[i] if e_avg[i] > 0 else float("nan") for i in range(k_max)
    )
    if zero:
        return DecayReport(
            tuple(radii), tuple(e_avg), tuple(u_avg), ratios,
            None, None, delta, None, True, True,
        )
    pos = [(r, a) for r, a in zip(radii, e_avg) if a > 0]
    exponent = residual = None
    if len(pos) >= 2:
        lr = np.log([p[0] for p in pos])
        la = np.log([p[1] for p in pos])
        A = np.vstack([lr, np.ones_like(lr)]).T
        coef, *_ = np.linalg.lstsq(A, la, rcond=None)
        exponent = float(coef[0])
        residual = float(np.max(np.abs(A @ coef - la)))
    C = e_avg[1] * radii[1] ** (2.0 * delta) / base
    bound = all(
        a <= C * r ** (-2.0 * delta) * base * (1.0 + 1e-9) for r, a in zip(radii[1:], e_avg[1:])
    )
    return DecayReport(
        tuple(radii), tuple(e_avg), tuple(u_avg), ratios,
        exponent, residual, delta, C, bound, False,
    )
