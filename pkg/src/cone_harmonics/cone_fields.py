"""Separable harmonic functions and 1-forms on a cone C(X).

A 1-form splits as u = kappa(r,x) dr + eta(r,x) with eta tangent to X.
Fields here are finite sums over an orthonormal angular basis:

    kappa = sum_a f_a(r) g_a(x)
    eta   = sum_a c_a(r) dg_a(x) + sum_b q_b(r) eta_b(x)

with g_a orthonormal eigenfunctions (eigenvalue lambda_a, so dg_a has
squared norm lambda_a) and eta_b orthonormal coclosed eigen 1-forms. All
link integrals then reduce to radial algebra, which keeps H, D, F and the
projection Gram matrices exact for power-law profiles.

Component equations of the Hodge Laplacian in this frame (prime = d/dr,
tilde = operators on X):

    (1/r^2) L kappa - kappa'' - (m-1)/r kappa' + (m-1)/r^2 kappa
        - (2/r^3) d*eta = 0
    (1/r^2) L eta - eta'' - (m-3)/r eta' - (2/r) d kappa = 0

The codifferential sign convention is pinned by d*(r dr) = -m on the flat
cone and re-checked once per process against that identity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ._radial import RadialPoly
from .cones import AngularElement, AngularKey, Cone
from .cross_section import KIND_COCLOSED, KIND_FUNCTION, SpectrumError
from .harmonic_polynomials import form_eval, poly_eval, poly_partial
from .spectra import (
    RADIAL_LOG_POWER,
    GrowthMode,
)

FUNCTION = "function"
ONE_FORM = "one_form"

_GRAM_CONDITION_LIMIT = 1e12


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class FieldTerm:
    coefficient: float
    mode: GrowthMode
    angular_index: int


class SeparableField:
    """Finite linear combination of separable modes; immutable after build."""

    def __init__(
        self,
        cone: Cone,
        kind: str,
        elements: Dict[AngularKey, AngularElement],
        kappa: Dict[AngularKey, RadialPoly],
        eta_exact: Optional[Dict[AngularKey, RadialPoly]] = None,
        eta_coclosed: Optional[Dict[AngularKey, RadialPoly]] = None,
        terms: Tuple[FieldTerm, ...] = (),
    ):
        if kind not in (FUNCTION, ONE_FORM):
            raise FieldError(f"unknown field kind {kind!r}")
        self.cone = cone
        self.kind = kind
        self.elements = dict(elements)
        self.kappa = {k: v for k, v in kappa.items() if not v.is_zero()}
        self.eta_exact = {k: v for k, v in (eta_exact or {}).items() if not v.is_zero()}
        self.eta_coclosed = {k: v for k, v in (eta_coclosed or {}).items() if not v.is_zero()}
        self.terms = tuple(terms)
        if kind == FUNCTION and (self.eta_exact or self.eta_coclosed):
            raise FieldError("function fields have no tangential part")
        for key in list(self.kappa) + list(self.eta_exact):
            if key.kind != KIND_FUNCTION:
                raise FieldError(f"key {key} is not function-kind angular data")
        for key in self.eta_coclosed:
            if key.kind != KIND_COCLOSED:
                raise FieldError(f"key {key} is not coclosed angular data")
        for key in self._all_keys():
            if key not in self.elements:
                raise FieldError(f"missing angular element for {key}")
        if kind == ONE_FORM:
            _codifferential_convention_selftest()

    # -- bookkeeping ---------------------------------------------------------

    def _all_keys(self) -> List[AngularKey]:
        return list(self.kappa) + list(self.eta_exact) + list(self.eta_coclosed)

    def eigenvalue(self, key: AngularKey) -> float:
        return self.elements[key].eigenvalue

    def is_zero(self, tol: float = 0.0) -> bool:
        polys = list(self.kappa.values()) + list(self.eta_exact.values()) + list(
            self.eta_coclosed.values()
        )
        if tol == 0.0:
            return all(p.is_zero() for p in polys)
        return all(max((abs(c) for c, _, _ in p.terms), default=0.0) <= tol for p in polys)

    @property
    def uses_mesh_data(self) -> bool:
        return any(el.approximate for el in self.elements.values())

    def __add__(self, other: "SeparableField") -> "SeparableField":
        if other.cone is not self.cone or other.kind != self.kind:
            raise FieldError("fields live on different cones or have different kinds")
        elements = {**self.elements, **other.elements}

        def merge(a, b):
            out = dict(a)
            for k, v in b.items():
                out[k] = out[k] + v if k in out else v
            return out

        return SeparableField(
            self.cone,
            self.kind,
            elements,
            merge(self.kappa, other.kappa),
            merge(self.eta_exact, other.eta_exact),
            merge(self.eta_coclosed, other.eta_coclosed),
            terms=self.terms + other.terms,
        )

    def scale(self, a: float) -> "SeparableField":
        return SeparableField(
            self.cone,
            self.kind,
            self.elements,
            {k: v.scale(a) for k, v in self.kappa.items()},
            {k: v.scale(a) for k, v in self.eta_exact.items()},
            {k: v.scale(a) for k, v in self.eta_coclosed.items()},
            terms=tuple(FieldTerm(a * t.coefficient, t.mode, t.angular_index) for t in self.terms),
        )

    def __sub__(self, other: "SeparableField") -> "SeparableField":
        return self + other.scale(-1.0)

    # -- link integrals (functions of r, exact radial algebra) ----------------

    def link_norm_sq(self) -> RadialPoly:
        """int_X |u|^2 over the link at radius r (cone-metric norm)."""
        out = RadialPoly.zero()
        for f in self.kappa.values():
            out = out + f * f
        for key, c in self.eta_exact.items():
            out = out + (c * c).scale(self.eigenvalue(key)).shift_power(-2.0)
        for q in self.eta_coclosed.values():
            out = out + (q * q).shift_power(-2.0)
        return out

    def link_pair(self, other: "SeparableField") -> RadialPoly:
        if other.kind != self.kind:
            raise FieldError("cannot pair fields of different kinds")
        out = RadialPoly.zero()
        for key, f in self.kappa.items():
            g = other.kappa.get(key)
            if g is not None:
                out = out + f * g
        for key, c in self.eta_exact.items():
            d = other.eta_exact.get(key)
            if d is not None:
                out = out + (c * d).scale(self.eigenvalue(key)).shift_power(-2.0)
        for key, q in self.eta_coclosed.items():
            p = other.eta_coclosed.get(key)
            if p is not None:
                out = out + (q * p).shift_power(-2.0)
        return out

    def link_radial_pair(self) -> RadialPoly:
        """int_X <u, grad_r u> at radius r; the boundary Dirichlet integrand."""
        out = RadialPoly.zero()
        for f in self.kappa.values():
            out = out + f * f.deriv()
        for key, c in self.eta_exact.items():
            cov = c.deriv() - c.shift_power(-1.0)
            out = out + (c * cov).scale(self.eigenvalue(key)).shift_power(-2.0)
        for q in self.eta_coclosed.values():
            cov = q.deriv() - q.shift_power(-1.0)
            out = out + (q * cov).shift_power(-2.0)
        return out

    def link_grad_sq(self) -> RadialPoly:
        """int_X |nabla u|^2 at radius r (full covariant gradient)."""
        m = self.cone.m
        out = RadialPoly.zero()
        if self.kind == FUNCTION:
            for key, f in self.kappa.items():
                lam = self.eigenvalue(key)
                out = out + f.deriv() * f.deriv()
                if lam:
                    out = out + (f * f).scale(lam).shift_power(-2.0)
            return out
        for key, f in self.kappa.items():
            out = out + f.deriv() * f.deriv()
            out = out + (f * f).scale(m - 1.0).shift_power(-2.0)
        for key, c in self.eta_exact.items():
            lam = self.eigenvalue(key)
            cov = c.deriv() - c.shift_power(-1.0)
            out = out + (cov * cov).scale(lam).shift_power(-2.0)
            out = out + (c * c).scale(lam * (lam - (m - 2.0))).shift_power(-4.0)
            f = self.kappa.get(key, RadialPoly.zero())
            mixed = f - c.shift_power(-1.0)
            out = out + (mixed * mixed).scale(lam).shift_power(-2.0)
            if not f.is_zero():
                out = out - (f * c).scale(2.0 * lam).shift_power(-3.0)
        for key, f in self.kappa.items():
            if key not in self.eta_exact and self.eigenvalue(key) > 0:
                out = out + (f * f).scale(self.eigenvalue(key)).shift_power(-2.0)
        for key, q in self.eta_coclosed.items():
            lam = self.eigenvalue(key)
            cov = q.deriv() - q.shift_power(-1.0)
            out = out + (cov * cov).shift_power(-2.0)
            out = out + (q * q).shift_power(-4.0)
            out = out + (q * q).scale(lam - (m - 2.0)).shift_power(-4.0)
        return out

    def link_du_sq(self) -> RadialPoly:
        """int_X |du|^2 at radius r."""
        if self.kind == FUNCTION:
            raise FieldError("du of a function is its differential; build it explicitly")
        out = RadialPoly.zero()
        for key, c in self.eta_exact.items():
            lam = self.eigenvalue(key)
            alpha = c.deriv() - self.kappa.get(key, RadialPoly.zero())
            out = out + (alpha * alpha).scale(lam).shift_power(-2.0)
        for key, f in self.kappa.items():
            if key not in self.eta_exact and self.eigenvalue(key) > 0:
                out = out + (f * f).scale(self.eigenvalue(key)).shift_power(-2.0)
        for key, q in self.eta_coclosed.items():
            lam = self.eigenvalue(key)
            out = out + (q.deriv() * q.deriv()).shift_power(-2.0)
            out = out + (q * q).scale(lam).shift_power(-4.0)
        return out

    # -- calculus -------------------------------------------------------------

    def codifferential(self) -> "SeparableField":
        """d* u as a separable function field; d*(r dr) = -m on flat cones."""
        if self.kind != ONE_FORM:
            raise FieldError("codifferential acts on 1-forms here")
        m = self.cone.m
        kappa: Dict[AngularKey, RadialPoly] = {}
        keys = set(self.kappa) | set(self.eta_exact)
        for key in keys:
            f = self.kappa.get(key, RadialPoly.zero())
            c = self.eta_exact.get(key, RadialPoly.zero())
            w = f.deriv().scale(-1.0) - f.scale(m - 1.0).shift_power(-1.0)
            if not c.is_zero():
                w = w + c.scale(self.eigenvalue(key)).shift_power(-2.0)
            kappa[key] = w
        return SeparableField(self.cone, FUNCTION, self.elements, kappa)

    def radial_derivative(self) -> "SeparableField":
        """Covariant derivative along r d/dr, termwise on coordinate data."""
        kappa = {k: v.deriv().shift_power(1.0) for k, v in self.kappa.items()}
        eta_exact = {
            k: v.deriv().shift_power(1.0) - v for k, v in self.eta_exact.items()
        }
        eta_cc = {k: v.deriv().shift_power(1.0) - v for k, v in self.eta_coclosed.items()}
        return SeparableField(self.cone, self.kind, self.elements, kappa, eta_exact, eta_cc)

    # -- residuals -------------------------------------------------------------

    def harmonicity_residual(self, radii: Sequence[float]) -> float:
        """Max over radii of the L2(X) norm of the component equations."""
        radii = np.asarray(radii, dtype=float)
        if np.any(radii <= 0):
            raise FieldError("radii must be positive")
        m = self.cone.m
        total = np.zeros_like(radii)
        if self.kind == FUNCTION:
            for key, f in self.kappa.items():
                lam = self.eigenvalue(key)
                e = (
                    f.scale(lam).shift_power(-2.0)
                    - f.deriv().deriv()
                    - f.deriv().scale(m - 1.0).shift_power(-1.0)
                )
                total += e.eval(radii) ** 2
            return float(np.sqrt(total).max())
        keys = set(self.kappa) | set(self.eta_exact)
        for key in keys:
            lam = self.eigenvalue(key)
            f = self.kappa.get(key, RadialPoly.zero())
            c = self.eta_exact.get(key, RadialPoly.zero())
            e1 = (
                f.scale(lam + m - 1.0).shift_power(-2.0)
                - f.deriv().deriv()
                - f.deriv().scale(m - 1.0).shift_power(-1.0)
                - c.scale(2.0 * lam).shift_power(-3.0)
            )
            total += e1.eval(radii) ** 2
            if lam > 0:
                e2 = (
                    c.scale(lam).shift_power(-2.0)
                    - c.deriv().deriv()
                    - c.deriv().scale(m - 3.0).shift_power(-1.0)
                    - f.scale(2.0).shift_power(-1.0)
                )
                total += lam * e2.eval(radii) ** 2
        for key, q in self.eta_coclosed.items():
            lam = self.eigenvalue(key)
            e2 = (
                q.scale(lam).shift_power(-2.0)
                - q.deriv().deriv()
                - q.deriv().scale(m - 3.0).shift_power(-1.0)
            )
            total += e2.eval(radii) ** 2
        return float(np.sqrt(total).max())

    # -- homogeneity -------------------------------------------------------------

    def homogeneity(self) -> "HomogeneityReport":
        rates = set()
        has_log = False
        clean = True
        for group, shift in ((self.kappa, 0.0), (self.eta_exact, -1.0), (self.eta_coclosed, -1.0)):
            for poly in group.values():
                if len(poly.terms) != 1:
                    clean = False
                for _, p, q in poly.terms:
                    rates.add(round(p + shift, 12))
                    if q > 0:
                        has_log = True
        if has_log:
            same_rate = len(rates) == 1
            return HomogeneityReport(False, None, log_homogeneous=clean and same_rate)
        if clean and len(rates) == 1:
            return HomogeneityReport(True, float(next(iter(rates))))
        return HomogeneityReport(False, None)

    # -- pointwise values --------------------------------------------------------

    def has_realization(self) -> bool:
        return all(self.elements[k].realization is not None for k in self._all_keys())

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Cartesian values at ambient points (..., m); functions -> (...,),
        1-forms -> (..., m). Needs polynomial realizations (sphere links)."""
        if not self.has_realization():
            raise FieldError("field has angular data without pointwise realization")
        pts = np.asarray(points, dtype=float)
        r = np.linalg.norm(pts, axis=-1)
        if np.any(r <= 0):
            raise FieldError("evaluation requires points away from the vertex")
        if self.kind == FUNCTION:
            out = np.zeros(pts.shape[:-1])
            for key, f in self.kappa.items():
                el = self.elements[key]
                k = _poly_degree(el.realization)
                out += f.eval(r) * poly_eval(el.realization, pts) / r**k
            return out
        out = np.zeros(pts.shape)
        unit = pts / r[..., None]
        for key, f in self.kappa.items():
            el = self.elements[key]
            k = _poly_degree(el.realization)
            g = poly_eval(el.realization, pts) / r**k
            out += (f.eval(r) * g)[..., None] * unit
        for key, c in self.eta_exact.items():
            el = self.elements[key]
            k = _poly_degree(el.realization)
            gvals = poly_eval(el.realization, pts)
            grad = np.stack(
                [poly_eval(poly_partial(el.realization, i), pts) for i in range(self.cone.m)],
                axis=-1,
            )
            # dg (link differential) in Cartesian components
            dg = grad / (r**k)[..., None] - (k * gvals / r ** (k + 2))[..., None] * pts
            out += c.eval(r)[..., None] * dg
        for key, q in self.eta_coclosed.items():
            el = self.elements[key]
            kdeg = _form_degree(el.realization)
            vals = form_eval(el.realization, pts)
            out += (q.eval(r) / r ** (kdeg + 1))[..., None] * vals
        return out

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        def dump_group(group):
            return [
                {
                    "kind": k.kind,
                    "label": k.label,
                    "index": k.index,
                    "eigenvalue": self.eigenvalue(k),
                    "radial_terms": [[c, p, q] for c, p, q in v.terms],
                }
                for k, v in sorted(group.items(), key=lambda kv: (kv[0].label, kv[0].index))
            ]

        return {
            "cone": {"m": self.cone.m, "cross_section_id": self.cone.id},
            "kind": self.kind,
            "kappa": dump_group(self.kappa),
            "eta_exact": dump_group(self.eta_exact),
            "eta_coclosed": dump_group(self.eta_coclosed),
            "terms": [
                {
                    "coefficient": t.coefficient,
                    "angular_index": t.angular_index,
                    "mode": t.mode.to_json_dict(),
                }
                for t in self.terms
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class HomogeneityReport:
    homogeneous: bool
    degree: Optional[float]
    log_homogeneous: bool = False


def _poly_degree(poly) -> int:
    return max(sum(e) for e in poly)


def _form_degree(form) -> int:
    return max(_poly_degree(p) for p in form if p)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def _element_for(cone: Cone, mode: GrowthMode, index: int) -> Optional[AngularElement]:
    if mode.type_tag == "I":
        return None
    k = _band_from_label(mode.angular_label)
    if mode.angular_kind == KIND_FUNCTION:
        els = cone.function_elements(k)
    else:
        els = cone.coclosed_elements(k)
    if index >= len(els):
        raise FieldError(f"angular index {index} out of range for {mode.angular_label}")
    return els[index]


def _band_from_label(label: str) -> int:
    if not label.startswith("k="):
        raise FieldError(f"cannot resolve angular band from label {label!r}")
    return int(label[2:])


def _constant_element(cone: Cone) -> AngularElement:
    key = AngularKey(KIND_FUNCTION, "k=0", 0)
    if not cone.is_mesh and cone.group is None:
        return cone.function_elements(0)[0]
    return AngularElement(key, 0.0)


def mode_field(
    cone: Cone,
    mode: GrowthMode,
    angular_index: int = 0,
    coefficient: float = 1.0,
    element: Optional[AngularElement] = None,
) -> SeparableField:
    """Realize one classified mode as a separable 1-form field.

    Normalized so the literal radial modes are c * r dr etc.; angular data is
    orthonormal, so the type I field carries the constant eigenfunction
    scaled by sqrt(Vol X).
    """
    m = cone.m
    s = mode.s_raw
    if element is None and mode.type_tag != "I":
        element = _element_for(cone, mode, angular_index)
    kappa: Dict[AngularKey, RadialPoly] = {}
    eta_exact: Dict[AngularKey, RadialPoly] = {}
    eta_cc: Dict[AngularKey, RadialPoly] = {}
    elements: Dict[AngularKey, AngularElement] = {}

    if mode.type_tag == "I":
        el = _constant_element(cone)
        elements[el.key] = el
        scale = math.sqrt(cone.link_volume) * coefficient
        kappa[el.key] = RadialPoly.power(scale, s)
    elif mode.type_tag == "II":
        elements[element.key] = element
        kappa[element.key] = RadialPoly.power(coefficient * (s + 1.0), s)
        eta_exact[element.key] = RadialPoly.power(coefficient, s + 1.0)
    elif mode.type_tag == "III":
        elements[element.key] = element
        kappa[element.key] = RadialPoly.power(coefficient, s)
        eta_exact[element.key] = RadialPoly.power(-coefficient / (s + m - 3.0), s + 1.0)
    elif mode.type_tag == "IV":
        elements[element.key] = element
        eta_cc[element.key] = RadialPoly.power(coefficient, s + 1.0)
    elif mode.type_tag == "V":
        a = -(m - 4.0) / 2.0
        elements[element.key] = element
        kappa[element.key] = RadialPoly.power(coefficient * a, a - 1.0, 1)
        eta_exact[element.key] = RadialPoly.power(coefficient, a, 1)
    elif mode.type_tag == "VI":
        elements[element.key] = element
        eta_cc[element.key] = RadialPoly.power(coefficient, -(m - 4.0) / 2.0, 1)
    else:
        raise FieldError(f"unknown mode type {mode.type_tag}")
    return SeparableField(
        cone, ONE_FORM, elements, kappa, eta_exact, eta_cc,
        terms=(FieldTerm(coefficient, mode, angular_index),),
    )


def radial_field(cone: Cone, coefficient: float = 1.0, branch: int = 0) -> SeparableField:
    """The type I field c * r dr (branch 0) or c * r^-(m-1) dr (branch 1)."""
    from .spectra import radial_modes

    return mode_field(cone, radial_modes(cone.m)[branch], coefficient=coefficient)


def harmonic_function_field(
    cone: Cone,
    degree: float,
    band: int,
    angular_index: int = 0,
    coefficient: float = 1.0,
    element: Optional[AngularElement] = None,
) -> SeparableField:
    """u = c * r^degree * g with g an orthonormal band-`band` eigenfunction."""
    m = cone.m
    if element is None:
        if band == 0:
            element = _constant_element(cone)
        else:
            els = cone.function_elements(band)
            if angular_index >= len(els):
                raise FieldError(f"angular index {angular_index} out of range for band {band}")
            element = els[angular_index]
    lam = element.eigenvalue
    if abs(degree * (degree + m - 2.0) - lam) > 1e-9 * max(1.0, lam):
        raise FieldError(
            f"degree {degree} does not solve d(d+m-2) = {lam}; the field would not be harmonic"
        )
    return SeparableField(
        cone, FUNCTION, {element.key: element},
        {element.key: RadialPoly.power(coefficient, degree)},
    )


def constant_field(cone: Cone, value: float = 1.0) -> SeparableField:
    el = _constant_element(cone)
    scale = value * math.sqrt(cone.link_volume)
    return SeparableField(cone, FUNCTION, {el.key: el}, {el.key: RadialPoly.power(scale, 0.0)})


def differential(field: SeparableField) -> SeparableField:
    """du of a separable function field (a type-II style 1-form)."""
    if field.kind != FUNCTION:
        raise FieldError("differential here acts on function fields")
    kappa: Dict[AngularKey, RadialPoly] = {}
    eta_exact: Dict[AngularKey, RadialPoly] = {}
    for key, f in field.kappa.items():
        kappa[key] = f.deriv()
        if field.eigenvalue(key) > 0:
            eta_exact[key] = f
    return SeparableField(field.cone, ONE_FORM, field.elements, kappa, eta_exact)


def mixture(
    cone: Cone, parts: Iterable[Tuple[float, GrowthMode, int]]
) -> SeparableField:
    """Linear combination of classified modes."""
    total: Optional[SeparableField] = None
    for coef, mode, idx in parts:
        f = mode_field(cone, mode, idx, coef)
        total = f if total is None else total + f
    if total is None:
        raise FieldError("empty mixture")
    return total


# ---------------------------------------------------------------------------
# ball inner products and projection
# ---------------------------------------------------------------------------


def ball_inner(u: SeparableField, v: SeparableField, radius: float) -> float:
    """L2 inner product over the ball B_radius centered at the vertex."""
    m = u.cone.m
    return u.link_pair(v).shift_power(m - 1.0).integrate(0.0, radius)


def ball_norm_sq(u: SeparableField, radius: float) -> float:
    return ball_inner(u, u, radius)


def project_against(
    u: SeparableField, subspace: Sequence[SeparableField], ball_radius: float
) -> SeparableField:
    """u minus its L2(B_R) orthogonal projection onto span(subspace)."""
    if not subspace:
        return u
    n = len(subspace)
    gram = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            gram[i, j] = gram[j, i] = ball_inner(subspace[i], subspace[j], ball_radius)
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > _GRAM_CONDITION_LIMIT:
        raise FieldError(f"subspace Gram matrix is numerically singular (cond {cond:.3e})")
    rhs = np.array([ball_inner(u, v, ball_radius) for v in subspace])
    coeffs = np.linalg.solve(gram, rhs)
    out = u
    for c, v in zip(coeffs, subspace):
        out = out - v.scale(float(c))
    return out


# ---------------------------------------------------------------------------
# d* sign convention self-test
# ---------------------------------------------------------------------------

_CONVENTION_CHECKED = False


def _codifferential_convention_selftest() -> None:
    """One-time check that d*(r dr) evaluates to -m on flat cones (m = 3, 4)."""
    global _CONVENTION_CHECKED
    if _CONVENTION_CHECKED:
        return
    _CONVENTION_CHECKED = True  # set first: radial_field builds a 1-form
    from .cones import flat_cone

    for m in (3, 4):
        cone = flat_cone(m)
        dstar = radial_field(cone).codifferential()
        vals = dstar.link_norm_sq().eval(np.array([0.5, 1.0, 2.0]))
        expected = m * m * cone.link_volume
        if np.max(np.abs(vals - expected)) > 1e-9 * expected:
            raise AssertionError(
                f"codifferential convention self-test failed on flat R^{m}: "
                f"int_X |d*(r dr)|^2 = {vals}, expected {expected}"
            )


def flat_polynomial_components(field: SeparableField):
    """Exact Cartesian polynomial components of a flat-realizable field.

    Works when every radial exponent matches its angular degree so that the
    assembled components are genuine polynomials (integer-rate modes on flat
    cones); raises otherwise. Returns one coefficient dict for functions, a
    list of m of them for 1-forms.
    """
    from .harmonic_polynomials import poly_add, poly_mul, poly_scale

    m = field.cone.m
    if not field.has_realization():
        raise FieldError("field has angular data without polynomial realization")

    n_comp = 1 if field.kind == FUNCTION else m
    acc: List[Dict[float, dict]] = [dict() for _ in range(n_comp)]

    def push(comp: int, exponent: float, poly: dict, coef: float) -> None:
        if abs(coef) < 1e-300:
            return
        bucket = acc[comp].setdefault(exponent, {})
        acc[comp][exponent] = poly_add(bucket, poly, coef)

    xi = [tuple(1 if j == i else 0 for j in range(m)) for i in range(m)]

    for key, f in field.kappa.items():
        P = field.elements[key].realization
        k = _poly_degree(P) if P else 0
        for c, p, q in f.terms:
            if q:
                raise FieldError("log-profile fields are not polynomial")
            if field.kind == FUNCTION:
                push(0, p - k, P, c)
            else:
                for i in range(m):
                    push(i, p - k - 1, poly_mul({xi[i]: 1.0}, P), c)
    for key, cpoly in field.eta_exact.items():
        P = field.elements[key].realization
        k = _poly_degree(P)
        for c, p, q in cpoly.terms:
            if q:
                raise FieldError("log-profile fields are not polynomial")
            for i in range(m):
                push(i, p - k, poly_partial(P, i), c)
                push(i, p - k - 2, poly_mul({xi[i]: 1.0}, P), -c * k)
    for key, qpoly in field.eta_coclosed.items():
        U = field.elements[key].realization
        k = _form_degree(U)
        for c, p, q in qpoly.terms:
            if q:
                raise FieldError("log-profile fields are not polynomial")
            for i in range(m):
                push(i, p - k - 1, U[i], c)

    r_sq = {tuple(2 if j == i else 0 for j in range(m)): 1.0 for i in range(m)}
    out = []
    for comp in range(n_comp):
        total: dict = {}
        for exponent, poly in acc[comp].items():
            scale = max((abs(v) for v in poly.values()), default=0.0)
            poly = {e: v for e, v in poly.items() if abs(v) > 1e-12 * max(scale, 1.0)}
            if not poly:
                continue
            if exponent < 0 or abs(exponent - round(exponent)) > 1e-12 or round(exponent) % 2:
                raise FieldError(
                    f"field is not polynomial: residual r^{exponent} factor survives"
                )
            for _ in range(int(round(exponent)) // 2):
                poly = poly_mul(poly, r_sq)
            total = poly_add(total, poly)
        out.append(total)
    return out[0] if field.kind == FUNCTION else out


def sample_csv_rows(
    field: SeparableField, radii: Sequence[float], directions: np.ndarray
) -> List[List[str]]:
    """Rows (r, unit chart coords, Cartesian components) for flat-realizable fields."""
    dirs = np.asarray(directions, dtype=float)
    dirs = dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)
    m = field.cone.m
    header = ["r"] + [f"x{i + 1}" for i in range(m)]
    header += ["value"] if field.kind == FUNCTION else [f"u{i + 1}" for i in range(m)]
    rows = [header]
    for r in radii:
        vals = field.evaluate(r * dirs)
        for d, v in zip(dirs, np.atleast_1d(vals)):
            rows.append(
                [format(r, ".17g")]
                + [format(x, ".17g") for x in d]
                + [format(float(c), ".17g") for c in np.atleast_1d(v)]
            )
    return rows
