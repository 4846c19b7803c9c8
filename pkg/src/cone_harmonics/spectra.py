"""Indicial roots, the six homogeneous 1-form families, growth spectra.

A homogeneous harmonic 1-form on C(X) is, up to linear combination, one of
six types. With s the radial symbol and lambda the link eigenvalue:

    I    u = r dr  or  r^-(m-1) dr                      (lambda = 0)
    II   u = d(r^(s+1) g),        lambda = (s+1)(s+m-1)   [g eigenfunction]
    III  u = r^s g dr - r^(s+1)/(s+m-3) dg,
                                  lambda = (s-1)(s+m-3)   [g eigenfunction]
    IV   u = r^(s+1) eta,         lambda = (s+1)(s+m-3)   [eta coclosed]
    V/VI log-profile modes at the repeated indicial root -(m-2)/2 with
         lambda = -m^2/4 + m  (function) resp. -m^2/4 + 2m - 4 (coclosed).

Growth rate means the exponent of |u| in the cone metric (tangential parts
pick up a 1/r from the metric), so all four power families above have
|u| ~ r^s. Link eigenvalue lower bounds (lambda >= m-1 for nonconstant
functions, lambda >= 2m-4 for coclosed 1-forms on links with
Ric_X = (m-2) g_X) filter the families; V and VI never survive for m >= 3.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .cones import Cone
from .cross_section import (
    KIND_COCLOSED,
    KIND_FUNCTION,
    AntipodalMap,
    CyclicDiagonal,
    EigenItem,
    EigenTable,
    SpectrumError,
)

_REL_TOL = 1e-12

TYPE_TAGS = ("I", "II", "III", "IV", "V", "VI")

RADIAL_POWER = "power"
RADIAL_LOG_POWER = "log_power"


class WindowError(SpectrumError):
    """Eigen table does not cover the requested growth window."""


# ---------------------------------------------------------------------------
# indicial algebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndicialRoots:
    """Roots of s^2 + (m-2)s - (c1 + m - 1) = 0."""

    kind: str  # "distinct" | "repeated" | "complex"
    discriminant: float
    roots: Tuple[float, ...]


def indicial_roots(m: int, c1: float) -> IndicialRoots:
    if m < 2:
        raise SpectrumError("need m >= 2")
    disc = m * m + 4.0 * c1
    if abs(disc) <= 1e-12:
        return IndicialRoots("repeated", disc, (-(m - 2) / 2.0,))
    if disc < 0:
        return IndicialRoots("complex", disc, ())
    root = math.sqrt(disc)
    return IndicialRoots("distinct", disc, ((-(m - 2) + root) / 2.0, (-(m - 2) - root) / 2.0))


def function_degrees_from_eigenvalue(m: int, lam: float) -> Tuple[float, float]:
    """Both degrees d with d(d + m - 2) = lam; the first is the growing one."""
    if lam < 0:
        raise SpectrumError("function eigenvalues are nonnegative")
    root = math.sqrt((m - 2) ** 2 + 4.0 * lam)
    return ((-(m - 2) + root) / 2.0, (-(m - 2) - root) / 2.0)


def type_eigenvalue(tag: str, m: int, s: float) -> float:
    if tag == "II":
        return (s + 1.0) * (s + m - 1.0)
    if tag == "III":
        return (s - 1.0) * (s + m - 3.0)
    if tag == "IV":
        return (s + 1.0) * (s + m - 3.0)
    if tag == "V":
        return -(m * m) / 4.0 + m
    if tag == "VI":
        return -(m * m) / 4.0 + 2.0 * m - 4.0
    raise SpectrumError(f"type {tag} carries no eigenvalue relation")


def _roots_of(tag: str, m: int, lam: float) -> Tuple[float, float]:
    """Solve type_eigenvalue(tag, m, s) = lam for s (two branches)."""
    if tag == "II":
        b, c = float(m), (m - 1.0) - lam
    elif tag == "III":
        b, c = float(m - 4), -(m - 3.0) - lam
    elif tag == "IV":
        b, c = float(m - 2), (m - 3.0) - lam
    else:
        raise SpectrumError(f"no quadratic family for type {tag}")
    disc = b * b - 4.0 * c
    if disc < 0:
        return ()
    root = math.sqrt(disc)
    return ((-b + root) / 2.0, (-b - root) / 2.0)


# ---------------------------------------------------------------------------
# growth modes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthMode:
    """One homogeneous harmonic family on C(X)."""

    type_tag: str
    s_raw: float
    growth_rate: float
    radial: str  # RADIAL_POWER | RADIAL_LOG_POWER
    radial_exponent: float
    multiplicity: int
    c1: float
    angular_kind: Optional[str] = None  # None for type I
    angular_eigenvalue: Optional[float] = None
    angular_label: str = ""

    def validate(self, m: int, tol: float = 1e-12) -> None:
        if self.type_tag not in TYPE_TAGS:
            raise SpectrumError(f"unknown type tag {self.type_tag}")
        if self.type_tag in ("V", "VI"):
            if self.radial != RADIAL_LOG_POWER or abs(self.radial_exponent + (m - 2) / 2.0) > tol:
                raise SpectrumError("log modes live at the repeated root -(m-2)/2")
            if abs(self.c1 + m * m / 4.0) > tol:
                raise SpectrumError("log modes require c1 = -m^2/4")
        else:
            resid = self.s_raw**2 + (m - 2) * self.s_raw - (self.c1 + m - 1)
            if abs(resid) > tol * max(1.0, abs(self.c1)):
                raise SpectrumError(f"indicial residual {resid} for mode {self}")
        if self.type_tag != "I":
            lam = type_eigenvalue(self.type_tag, m, self.s_raw)
            if abs(lam - self.angular_eigenvalue) > tol * max(1.0, abs(lam)):
                raise SpectrumError(
                    f"type {self.type_tag} eigenvalue relation violated: "
                    f"{self.angular_eigenvalue} vs {lam}"
                )

    def to_json_dict(self) -> dict:
        return {
            "type": self.type_tag,
            "s_raw": self.s_raw,
            "growth_rate": self.growth_rate,
            "radial": self.radial,
            "radial_exponent": self.radial_exponent,
            "multiplicity": self.multiplicity,
            "c1": self.c1,
            "angular_kind": self.angular_kind,
            "angular_eigenvalue": self.angular_eigenvalue,
            "angular_label": self.angular_label,
        }


def _power_mode(tag: str, m: int, s: float, mult: int, kind: Optional[str], lam: Optional[float], label: str) -> GrowthMode:
    c1 = s * s + (m - 2.0) * s - (m - 1.0)
    return GrowthMode(tag, s, s, RADIAL_POWER, s, mult, c1, kind, lam, label)


def radial_modes(m: int) -> Tuple[GrowthMode, GrowthMode]:
    """Type I: r dr and r^-(m-1) dr."""
    return (
        _power_mode("I", m, 1.0, 1, None, None, "radial"),
        _power_mode("I", m, -(m - 1.0), 1, None, None, "radial"),
    )


def type_II_mode(m: int, item: EigenItem, branch: int = 0) -> GrowthMode:
    s = _roots_of("II", m, item.eigenvalue)[branch]
    return _power_mode("II", m, s, item.multiplicity, KIND_FUNCTION, item.eigenvalue, item.label)


def type_III_mode(m: int, item: EigenItem, branch: int = 0) -> GrowthMode:
    s = _roots_of("III", m, item.eigenvalue)[branch]
    return _power_mode("III", m, s, item.multiplicity, KIND_FUNCTION, item.eigenvalue, item.label)


def type_IV_mode(m: int, item: EigenItem, branch: int = 0) -> GrowthMode:
    s = _roots_of("IV", m, item.eigenvalue)[branch]
    return _power_mode("IV", m, s, item.multiplicity, KIND_COCLOSED, item.eigenvalue, item.label)


def _log_mode(tag: str, m: int, mult: int, kind: str, lam: float, label: str) -> GrowthMode:
    rate = -(m - 2.0) / 2.0
    return GrowthMode(tag, rate, rate, RADIAL_LOG_POWER, rate, mult, -(m * m) / 4.0, kind, lam, label)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def _check_window(window: Sequence[float]) -> Tuple[float, float]:
    lo, hi = float(window[0]), float(window[1])
    if not (lo < hi) or math.isinf(lo) or math.isinf(hi):
        raise SpectrumError(f"window [{lo}, {hi}) must be bounded and nonempty")
    return lo, hi


def _in_window(s: float, lo: float, hi: float) -> bool:
    return lo <= s < hi


def required_cutoffs(m: int, window: Sequence[float], include_coclosed: bool = True) -> Dict[str, float]:
    """Largest link eigenvalue a table must be complete below, per kind."""
    lo, hi = _check_window(window)
    fn = 0.0
    for tag in ("II", "III"):
        fn = max(fn, type_eigenvalue(tag, m, lo), type_eigenvalue(tag, m, hi))
    out = {KIND_FUNCTION: fn}
    if include_coclosed:
        out[KIND_COCLOSED] = max(
            0.0, type_eigenvalue("IV", m, lo), type_eigenvalue("IV", m, hi)
        )
    return out


def _assert_complete(table: EigenTable, needed: Dict[str, float]) -> None:
    for kind, lam in needed.items():
        have = table.cutoff_for(kind)
        if lam > have + 1e-9:
            raise WindowError(
                f"eigen table for {table.cross_section_id} is complete only below "
                f"{have} for kind {kind}; the window needs that spectrum below {lam}"
            )


def classify_homogeneous(
    m: int,
    eigen: EigenTable,
    window: Sequence[float],
    include_coclosed: Optional[bool] = None,
) -> List[GrowthMode]:
    """All homogeneous 1-form families with growth rate in [lo, hi).

    For m = 3 (dim X = 2) coclosed eigendata is outside the supported scope,
    so only types I/II/III are enumerated there.
    """
    lo, hi = _check_window(window)
    if include_coclosed is None:
        include_coclosed = m >= 4
    _assert_complete(eigen, required_cutoffs(m, window, include_coclosed))

    modes: List[GrowthMode] = []
    for mode in radial_modes(m):
        if _in_window(mode.growth_rate, lo, hi):
            modes.append(mode)

    for item in eigen.of_kind(KIND_FUNCTION):
        if item.eigenvalue <= 1e-12:
            continue  # constants: the radial family already carries lambda = 0
        for tag, ctor in (("II", type_II_mode), ("III", type_III_mode)):
            for branch, s in enumerate(_roots_of(tag, m, item.eigenvalue)):
                if tag == "III" and abs(s + m - 3.0) < 1e-12:
                    continue  # degenerate denominator, absorbed by other families
                if _in_window(s, lo, hi):
                    modes.append(ctor(m, item, branch))

    if include_coclosed:
        for item in eigen.of_kind(KIND_COCLOSED):
            for branch, s in enumerate(_roots_of("IV", m, item.eigenvalue)):
                if _in_window(s, lo, hi):
                    modes.append(type_IV_mode(m, item, branch))

    log_rate = -(m - 2.0) / 2.0
    if _in_window(log_rate, lo, hi):
        lam_v = type_eigenvalue("V", m, 0.0)
        lam_vi = type_eigenvalue("VI", m, 0.0)
        for item in eigen.of_kind(KIND_FUNCTION):
            # lambda_V = 0 happens only at m = 4, where the mode is d(const) = 0
            if abs(item.eigenvalue - lam_v) <= 1e-12 and m != 4:
                modes.append(_log_mode("V", m, item.multiplicity, KIND_FUNCTION, lam_v, item.label))
        if include_coclosed:
            for item in eigen.of_kind(KIND_COCLOSED):
                if abs(item.eigenvalue - lam_vi) <= 1e-12:
                    modes.append(_log_mode("VI", m, item.multiplicity, KIND_COCLOSED, lam_vi, item.label))

    for mode in modes:
        mode.validate(m)
    modes.sort(key=lambda md: (md.growth_rate, md.type_tag, md.angular_eigenvalue or 0.0))
    return modes


# ---------------------------------------------------------------------------
# Lichnerowicz-Obata filter
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FilterReport:
    kept: Tuple[GrowthMode, ...]
    removed: Tuple[Tuple[GrowthMode, str], ...]

    @property
    def removal_reasons(self) -> List[str]:
        return [reason for _, reason in self.removed]


def lichnerowicz_filter(modes: Sequence[GrowthMode], m: int) -> FilterReport:
    """Drop modes violating the link eigenvalue bounds for Ric_X = (m-2)g_X.

    Nonconstant function eigenvalues satisfy lambda >= m-1, coclosed 1-form
    eigenvalues satisfy lambda >= 2m-4 (both non-strict); log modes violate
    the bounds for every m >= 3.
    """
    if m < 3:
        raise SpectrumError("filter needs m >= 3")
    kept, removed = [], []
    for mode in modes:
        if mode.type_tag in ("IV", "VI") and m < 4:
            raise SpectrumError("1-form (coclosed) filtering needs m >= 4")
        reason = None
        lam = mode.angular_eigenvalue
        if mode.type_tag in ("V", "VI"):
            bound = m - 1.0 if mode.type_tag == "V" else 2.0 * m - 4.0
            reason = (
                f"type {mode.type_tag} eigenvalue {lam} violates lambda >= {bound} for m >= 3"
            )
        elif mode.type_tag in ("II", "III") and lam is not None and lam > 1e-12:
            if lam < m - 1.0 - 1e-12:
                reason = f"function eigenvalue {lam} violates lambda >= m-1 = {m - 1}"
        elif mode.type_tag == "IV":
            if lam < 2.0 * m - 4.0 - 1e-12:
                reason = f"coclosed eigenvalue {lam} violates lambda >= 2m-4 = {2 * m - 4}"
        if reason is None:
            kept.append(mode)
        else:
            removed.append((mode, reason))
    return FilterReport(tuple(kept), tuple(removed))


# ---------------------------------------------------------------------------
# growth spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumEntry:
    rate: float
    multiplicity: int
    breakdown: Tuple[Tuple[str, int, Optional[float]], ...]  # (tag, mult, eigenvalue)


@dataclass(frozen=True)
class SpectrumReport:
    cone_m: int
    cross_section_id: str
    window: Tuple[float, float]
    kind: str  # "function" | "one_form"
    entries: Tuple[SpectrumEntry, ...]
    filters_applied: Tuple[str, ...] = ()

    def rates(self) -> List[float]:
        return [e.rate for e in self.entries]

    def multiplicities(self) -> List[int]:
        return [e.multiplicity for e in self.entries]

    def as_pairs(self) -> List[Tuple[float, int]]:
        return [(e.rate, e.multiplicity) for e in self.entries]

    def contains_rate(self, rate: float, tol: float = 1e-9) -> bool:
        return any(abs(e.rate - rate) <= tol for e in self.entries)

    def to_json_dict(self) -> dict:
        return {
            "cone": {"m": self.cone_m, "cross_section_id": self.cross_section_id},
            "window": list(self.window),
            "kind": self.kind,
            "filters_applied": list(self.filters_applied),
            "entries": [
                {
                    "rate": e.rate,
                    "multiplicity": e.multiplicity,
                    "breakdown": [
                        {"type": t, "multiplicity": mu, "eigenvalue": lam}
                        for t, mu, lam in e.breakdown
                    ],
                }
                for e in self.entries
            ],
        }

    def csv_rows(self) -> List[List[str]]:
        rows = [["rate", "type", "multiplicity", "eigenvalue", "filter_status"]]
        for e in self.entries:
            for tag, mult, lam in e.breakdown:
                rows.append(
                    [
                        format(e.rate, ".17g"),
                        tag,
                        str(mult),
                        "" if lam is None else format(lam, ".17g"),
                        "kept",
                    ]
                )
        return rows

    def text_table(self) -> str:
        rows = self.csv_rows()
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        return "\n".join(lines)


def _aggregate(modes: Sequence[GrowthMode], tol: float = 1e-9):
    groups: Dict[int, List[GrowthMode]] = {}
    order: List[float] = []
    for mode in sorted(modes, key=lambda md: md.growth_rate):
        for i, r in enumerate(order):
            if abs(r - mode.growth_rate) <= tol:
                groups[i].append(mode)
                break
        else:
            order.append(mode.growth_rate)
            groups[len(order) - 1] = [mode]
    entries = []
    for i, r in enumerate(order):
        mds = groups[i]
        breakdown = tuple((md.type_tag, md.multiplicity, md.angular_eigenvalue) for md in mds)
        entries.append(SpectrumEntry(r, sum(md.multiplicity for md in mds), breakdown))
    return tuple(entries)


def growth_spectrum(cone: Cone, window: Sequence[float], table: Optional[EigenTable] = None) -> SpectrumReport:
    """Harmonic-function growth spectrum of C(X) inside [lo, hi)."""
    lo, hi = _check_window(window)
    m = cone.m
    needed = max(0.0, lo * (lo + m - 2.0), hi * (hi + m - 2.0))
    if table is None:
        k_max = 0
        while xs_function_eigenvalue(m, k_max + 1) < needed + 1e-9:
            k_max += 1
        table = cone.function_table(k_max)
    _assert_complete(table, {KIND_FUNCTION: needed})

    entries: List[SpectrumEntry] = []
    for item in table.of_kind(KIND_FUNCTION):
        for d in function_degrees_from_eigenvalue(m, item.eigenvalue):
            if _in_window(d, lo, hi):
                entries.append(
                    SpectrumEntry(d, item.multiplicity, (("fn", item.multiplicity, item.eigenvalue),))
                )
    entries.sort(key=lambda e: e.rate)
    return SpectrumReport(m, cone.id, (lo, hi), "function", tuple(entries))


def xs_function_eigenvalue(m: int, k: int) -> float:
    return float(k * (k + m - 2))


def oneform_growth_spectrum(
    cone: Cone, window: Sequence[float], table: Optional[EigenTable] = None
) -> SpectrumReport:
    """Harmonic 1-form growth spectrum of C(X) inside [lo, hi).

    Enumerates the six families, applies the eigenvalue-bound filter, and
    merges equal rates. Inside [0, 1) only type II entries survive, which is
    the exactness statement for sublinear homogeneous 1-forms.
    """
    m = cone.m
    if m < 4:
        raise SpectrumError("1-form growth spectra need m >= 4")
    lo, hi = _check_window(window)
    if table is None:
        needed = required_cutoffs(m, window)
        k_fn = 0
        while xs_function_eigenvalue(m, k_fn + 1) < needed[KIND_FUNCTION] + 1e-9:
            k_fn += 1
        k_cc = 1
        while (k_cc + 2.0) * (k_cc + m - 2.0) < needed[KIND_COCLOSED] + 1e-9:
            k_cc += 1
        table = cone.function_table(k_fn).merged_with(cone.coclosed_table(k_cc))
    modes = classify_homogeneous(m, table, window)
    report = lichnerowicz_filter(modes, m)
    kept = [md for md in report.kept if not _is_zero_family(md)]
    filters = tuple(
        ["lichnerowicz_obata"] + [f"removed: {reason}" for reason in report.removal_reasons]
    )
    return SpectrumReport(m, cone.id, (lo, hi), "one_form", _aggregate(kept), filters)


def _is_zero_family(mode: GrowthMode) -> bool:
    # type II at lambda = 0 with s = -1 is d(constant) = 0
    return mode.type_tag == "II" and abs(mode.s_raw + 1.0) < 1e-12


# ---------------------------------------------------------------------------
# holomorphic spectrum and the spectral match
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HoloSpectrum:
    cone_descriptor: str
    degrees: Tuple[Tuple[int, int], ...]  # (degree, multiplicity)

    def degrees_in(self, lo: float, hi: float) -> List[Tuple[int, int]]:
        return [(d, mu) for d, mu in self.degrees if lo <= d < hi]

    def to_json_dict(self) -> dict:
        return {
            "cone": self.cone_descriptor,
            "degrees": [{"degree": d, "multiplicity": mu} for d, mu in self.degrees],
        }


def _holo_invariant_count(n: int, p: int, weights: Sequence[int], k: int) -> int:
    # DP over (degree, weight residue) across the n holomorphic variables
    dp = [[0] * p for _ in range(k + 1)]
    dp[0][0] = 1
    for w in weights:
        nxt = [[0] * p for _ in range(k + 1)]
        for d in range(k + 1):
            for res in range(p):
                c = dp[d][res]
                if c:
                    for extra in range(k - d + 1):
                        nxt[d + extra][(res + extra * w) % p] += c
        dp = nxt
    return dp[k][0]


def holomorphic_spectrum(cone: Cone, degree_max: int = 8) -> HoloSpectrum:
    """Degrees of invariant holomorphic monomials on a flat Kaehler model."""
    if not cone.is_kahler:
        raise SpectrumError(f"cone {cone.id} is not a supported Kaehler model")
    n = cone.complex_dim
    g = cone.group
    degrees = []
    for k in range(degree_max + 1):
        if g is None:
            mult = math.comb(k + n - 1, n - 1)
        elif isinstance(g, AntipodalMap):
            mult = math.comb(k + n - 1, n - 1) if k % 2 == 0 else 0
        else:
            mult = _holo_invariant_count(n, g.order, g.weights, k)
        if mult > 0:
            degrees.append((k, mult))
    return HoloSpectrum(f"C^{n}" + (f"/{cone.id}" if g is not None else ""), tuple(degrees))


@dataclass(frozen=True)
class MatchReport:
    cone_id: str
    harmonic_degrees: Tuple[Tuple[float, int], ...]
    holomorphic_degrees: Tuple[Tuple[int, int], ...]
    sets_equal: bool

    def to_json_dict(self) -> dict:
        return {
            "cone": self.cone_id,
            "harmonic": [list(x) for x in self.harmonic_degrees],
            "holomorphic": [list(x) for x in self.holomorphic_degrees],
            "sets_equal": self.sets_equal,
        }


def spectra_match_check(cone: Cone) -> MatchReport:
    """Compare harmonic and holomorphic growth degrees inside [0, 2).

    Set equality is asserted; the multiplicity relation is reported only
    (real parts of holomorphic functions double-count real dimensions).
    """
    harm = growth_spectrum(cone, (0.0, 2.0)).as_pairs()
    holo = holomorphic_spectrum(cone, degree_max=3).degrees_in(0.0, 2.0)
    hset = sorted(d for d, _ in harm)
    sset = sorted(float(d) for d, _ in holo)
    equal = len(hset) == len(sset) and all(abs(a - b) <= 1e-9 for a, b in zip(hset, sset))
    return MatchReport(cone.id, tuple(harm), tuple(holo), equal)
