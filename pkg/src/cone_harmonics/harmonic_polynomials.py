"""Harmonic polynomials on R^m and exact integrals over the unit sphere.

Polynomials are dicts mapping exponent tuples to float coefficients. Sphere
averages of monomials are computed exactly (double-factorial formula, as
Fractions) before conversion to float, so Gram matrices of low-degree bases
are correct to machine precision.

The divergence-free tangential families built here realize the coclosed
eigen 1-forms of the round sphere inside flat space: a 1-form with
componentwise-harmonic degree-k coefficients that is tangential and
divergence free restricts to a coclosed eigen 1-form on S^(m-1).
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

Poly = Dict[Tuple[int, ...], float]

_RANK_TOL = 1e-9


def harmonic_dim(m: int, k: int) -> int:
    """Dimension of the degree-k harmonic polynomials on R^m."""
    if k < 0:
        return 0
    if k < 2:
        return math.comb(k + m - 1, k)
    return math.comb(k + m - 1, k) - math.comb(k + m - 3, k - 2)


def sphere_volume(m: int) -> float:
    """Volume of the unit sphere S^(m-1) in R^m."""
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@lru_cache(maxsize=None)
def sphere_monomial_average(exponents: Tuple[int, ...]) -> Fraction:
    """Mean of prod x_i^{a_i} over S^(m-1); exact, zero if any a_i is odd."""
    if any(a % 2 for a in exponents):
        return Fraction(0)
    m = len(exponents)
    total = sum(exponents)
    num = Fraction(1)
    for a in exponents:
        num *= _double_factorial(a - 1)
    den = Fraction(1)
    for j in range(total // 2):
        den *= m + 2 * j
    return num / den


def monomials(m: int, k: int) -> List[Tuple[int, ...]]:
    """Exponent tuples of total degree k in m variables, lexicographic."""
    if m == 1:
        return [(k,)]
    out = []
    for first in range(k, -1, -1):
        for rest in monomials(m - 1, k - first):
            out.append((first,) + rest)
    return out


def poly_add(p: Poly, q: Poly, scale: float = 1.0) -> Poly:
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0.0) + scale * c
        if out[e] == 0.0:
            del out[e]
    return out


def poly_scale(p: Poly, a: float) -> Poly:
    return {e: a * c for e, c in p.items()}


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0.0) + c1 * c2
    return {e: c for e, c in out.items() if c != 0.0}


def poly_partial(p: Poly, i: int) -> Poly:
    out: Poly = {}
    for e, c in p.items():
        if e[i] > 0:
            de = list(e)
            de[i] -= 1
            out[tuple(de)] = out.get(tuple(de), 0.0) + c * e[i]
    return out


def poly_laplacian(p: Poly) -> Poly:
    out: Poly = {}
    for e, c in p.items():
        for i, a in enumerate(e):
            if a >= 2:
                de = list(e)
                de[i] -= 2
                key = tuple(de)
                out[key] = out.get(key, 0.0) + c * a * (a - 1)
    return {e: c for e, c in out.items() if c != 0.0}


def poly_eval(p: Poly, points: np.ndarray) -> np.ndarray:
    """Evaluate at points of shape (..., m)."""
    pts = np.asarray(points, dtype=float)
    out = np.zeros(pts.shape[:-1])
    for e, c in p.items():
        term = np.full(pts.shape[:-1], c)
        for i, a in enumerate(e):
            if a:
                term = term * pts[..., i] ** a
        out += term
    return out


def sphere_inner(p: Poly, q: Poly, m: int) -> float:
    """Absolute inner product over S^(m-1) of two polynomials on R^m."""
    total = 0.0
    for e, c in poly_mul(p, q).items():
        avg = sphere_monomial_average(e)
        if avg:
            total += c * float(avg)
    return total * sphere_volume(m)


def _nullspace(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ker(a), rows of the result."""
    if a.size == 0:
        return np.eye(a.shape[1])
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > _RANK_TOL * (s[0] if s.size else 1.0)))
    return vt[rank:]


@lru_cache(maxsize=None)
def harmonic_basis(m: int, k: int) -> Tuple[Poly, ...]:
    """L2(S^(m-1))-orthonormal basis of harmonic polynomials of degree k."""
    mons = monomials(m, k)
    if k < 2:
        cand = [({e: 1.0},) for e in mons]
        basis = [c[0] for c in cand]
    else:
        targets = monomials(m, k - 2)
        tindex = {e: i for i, e in enumerate(targets)}
        lap = np.zeros((len(targets), len(mons)))
        for j, e in enumerate(mons):
            for te, c in poly_laplacian({e: 1.0}).items():
                lap[tindex[te], j] = c
        null = _nullspace(lap)
        if null.shape[0] != harmonic_dim(m, k):
            raise RuntimeError(
                f"harmonic nullspace dimension {null.shape[0]} != expected {harmonic_dim(m, k)}"
            )
        basis = []
        for row in null:
            basis.append({e: c for e, c in zip(mons, row) if abs(c) > 1e-14})
    return tuple(_orthonormalize(basis, m))


def _orthonormalize(basis: List[Poly], m: int, gram_fn=None) -> List[Poly]:
    if gram_fn is None:
        gram_fn = lambda p, q: sphere_inner(p, q, m)
    n = len(basis)
    gram = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            gram[i, j] = gram[j, i] = gram_fn(basis[i], basis[j])
    # inverse square root via symmetric eigendecomposition (Loewdin)
    w, v = np.linalg.eigh(gram)
    if np.any(w <= 0):
        raise RuntimeError("Gram matrix not positive definite")
    inv_sqrt = v @ np.diag(1.0 / np.sqrt(w)) @ v.T
    is_form = isinstance(basis[0], tuple)
    out = []
    for i in range(n):
        if is_form:
            ncomp = len(basis[0])
            comps: List[Poly] = [{} for _ in range(ncomp)]
            for j in range(n):
                a = inv_sqrt[i, j]
                if a != 0.0:
                    for c in range(ncomp):
                        comps[c] = poly_add(comps[c], basis[j][c], a)
            out.append(tuple(comps))
        else:
            p: Poly = {}
            for j in range(n):
                if inv_sqrt[i, j] != 0.0:
                    p = poly_add(p, basis[j], inv_sqrt[i, j])
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# coclosed eigen 1-forms of the round sphere, realized as flat 1-forms
# ---------------------------------------------------------------------------

PolyForm = Tuple[Poly, ...]  # one Poly per dx_i component


def coclosed_multiplicity(m: int, k: int) -> int:
    """Multiplicity of the coclosed 1-form eigenvalue (k+1)(k+m-3) on S^(m-1)."""
    if k < 1:
        return 0
    return m * harmonic_dim(m, k) - harmonic_dim(m, k + 1) - harmonic_dim(m, k - 1)


@lru_cache(maxsize=None)
def _coclosed_raw(m: int, k: int) -> Tuple[PolyForm, ...]:
    """Unnormalized basis of degree-k tangential divergence-free harmonic 1-forms.

    Components live in the degree-k harmonic polynomials; the constraints
    sum_i d_i u_i = 0 and sum_i x_i u_i = 0 are imposed exactly on the
    coefficient vector.
    """
    hb = harmonic_basis(m, k)
    nh = len(hb)
    ncoef = m * nh

    div_targets = monomials(m, k - 1)
    tan_targets = monomials(m, k + 1)
    rows = len(div_targets) + len(tan_targets)
    mat = np.zeros((rows, ncoef))
    div_index = {e: i for i, e in enumerate(div_targets)}
    tan_index = {e: i + len(div_targets) for i, e in enumerate(tan_targets)}

    for comp in range(m):
        xi = tuple(1 if i == comp else 0 for i in range(m))
        for b, poly in enumerate(hb):
            col = comp * nh + b
            for e, c in poly_partial(poly, comp).items():
                mat[div_index[e], col] += c
            for e, c in poly_mul({xi: 1.0}, poly).items():
                mat[tan_index[e], col] += c

    null = _nullspace(mat)
    expected = coclosed_multiplicity(m, k)
    if null.shape[0] != expected:
        raise RuntimeError(
            f"coclosed nullspace dimension {null.shape[0]} != expected {expected} (m={m}, k={k})"
        )

    forms: List[PolyForm] = []
    for row in null:
        comps = []
        for comp in range(m):
            p: Poly = {}
            for b in range(nh):
                c = row[comp * nh + b]
                if abs(c) > 1e-14:
                    p = poly_add(p, hb[b], c)
            comps.append(tuple(sorted(p.items())))
        forms.append(tuple(dict(c) for c in comps))
    return tuple(forms)


@lru_cache(maxsize=None)
def coclosed_polynomial_basis(m: int, k: int) -> Tuple[PolyForm, ...]:
    """L2(S^(m-1))-orthonormal basis of the degree-k coclosed family.

    Restricting a member to the unit sphere and dividing by r^(k+1) gives a
    coclosed eigen 1-form on S^(m-1) with eigenvalue (k+1)(k+m-3).
    """
    forms = list(_coclosed_raw(m, k))

    def form_inner(u: PolyForm, v: PolyForm) -> float:
        return sum(sphere_inner(a, b, m) for a, b in zip(u, v))

    return tuple(tuple(f) for f in _orthonormalize(forms, m, gram_fn=form_inner))


def form_eval(form: PolyForm, points: np.ndarray) -> np.ndarray:
    """Evaluate all components at points (..., m) -> (..., m)."""
    pts = np.asarray(points, dtype=float)
    return np.stack([poly_eval(p, pts) for p in form], axis=-1)


def form_divergence(form: PolyForm) -> Poly:
    out: Poly = {}
    for i, p in enumerate(form):
        out = poly_add(out, poly_partial(p, i))
    return out


def form_curl_norm_sq(form: PolyForm) -> Poly:
    """|du|^2 = sum_{i<j} (d_i u_j - d_j u_i)^2 as an exact polynomial."""
    m = len(form)
    out: Poly = {}
    for i in range(m):
        for j in range(i + 1, m):
            dij = poly_add(poly_partial(form[j], i), poly_partial(form[i], j), -1.0)
            out = poly_add(out, poly_mul(dij, dij))
    return out


def coclosed_rayleigh_eigenvalue(m: int, k: int) -> float:
    """Eigenvalue of the degree-k coclosed band from exact sphere integrals.

    Independent of the cone-side algebra: for a tangential divergence-free
    u with harmonic degree-k components, lambda = int |du|^2 / int |eta|^2
    with eta = u restricted to the sphere, both integrals evaluated from
    monomial averages. |du|^2 on the sphere splits as the flat |du|^2 minus
    the radial-derivative part (k+1)^2 |eta|^2. Normalization-free, so a raw
    nullspace representative suffices.
    """
    u = _coclosed_raw(m, k)[0]
    norm_sq = sum(sphere_inner(p, p, m) for p in u)
    du_sq = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            dij = poly_add(poly_partial(u[j], i), poly_partial(u[i], j), -1.0)
            du_sq += sphere_inner(dij, dij, m)
    return (du_sq - (k + 1) ** 2 * norm_sq) / norm_sq
