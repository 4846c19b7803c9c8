"""Cross-section geometries and their Laplace spectra.

Analytic tables for round spheres and their free quotients (function
spectrum and low coclosed 1-form bands), numeric tables for triangulated
surfaces via the cotangent Laplacian with lumped mass.

Eigenvalue conventions: Hodge Laplacian, all spectra nonnegative. Function
eigenvalues on S^(m-1) are k(k+m-2); coclosed 1-form eigenvalues are
(k+1)(k+m-3) and every emitted coclosed item is re-verified against the
independent polynomial oracle (nullspace multiplicity + Rayleigh quotient)
instead of trusting the closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import harmonic_polynomials as hp
from .meshes import MeshError, TriMesh

KIND_FUNCTION = "function"
KIND_COCLOSED = "coclosed_1form"


class SpectrumError(ValueError):
    pass


# ---------------------------------------------------------------------------
# group descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CyclicDiagonal:
    """Z_p acting on C^n by z_i -> zeta^{w_i} z_i, zeta = exp(2 pi i / p)."""

    order: int
    weights: Tuple[int, ...]

    def __post_init__(self):
        if self.order < 1:
            raise SpectrumError("group order must be >= 1")
        object.__setattr__(self, "weights", tuple(int(w) % self.order if self.order > 1 else 0 for w in self.weights))

    @property
    def size(self) -> int:
        return self.order

    def check_free(self) -> None:
        if self.order == 1:
            return
        for i, w in enumerate(self.weights):
            g = math.gcd(w, self.order)
            if g != 1:
                j = self.order // g
                raise SpectrumError(
                    f"action is not free: element g^{j} fixes the unit vector "
                    f"on the z_{i + 1} axis (weight {w} mod {self.order})"
                )


@dataclass(frozen=True)
class AntipodalMap:
    """x -> -x on S^(m-1); free for every m."""

    @property
    def size(self) -> int:
        return 2

    def check_free(self) -> None:
        return


Group = Union[CyclicDiagonal, AntipodalMap]
TRIVIAL_GROUP = CyclicDiagonal(1, ())


# ---------------------------------------------------------------------------
# cross-section models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundSphere:
    dim_link: int


@dataclass(frozen=True)
class SphereQuotient:
    dim_link: int
    group: Group


@dataclass(frozen=True)
class MeshLink:
    mesh: TriMesh


@dataclass(frozen=True)
class CrossSection:
    id: str
    dim_link: int
    model: Union[RoundSphere, SphereQuotient, MeshLink]
    einstein_constant: float

    def __post_init__(self):
        if self.dim_link < 1:
            raise SpectrumError("dim_link must be >= 1")
        m = self.dim_link + 1
        if isinstance(self.model, RoundSphere) and self.einstein_constant != m - 2:
            raise SpectrumError(f"round S^{self.dim_link} requires einstein_constant {m - 2}")
        if isinstance(self.model, SphereQuotient):
            self.model.group.check_free()
            if isinstance(self.model.group, CyclicDiagonal) and self.model.group.order > 1:
                if m % 2 != 0 or 2 * len(self.model.group.weights) != m:
                    raise SpectrumError(
                        f"cyclic diagonal quotients need even m with m/2 weights, got m={m}"
                    )


def round_sphere(m: int, label: Optional[str] = None) -> CrossSection:
    return CrossSection(label or f"S{m - 1}", m - 1, RoundSphere(m - 1), float(m - 2))


def sphere_quotient(m: int, group: Group, label: Optional[str] = None) -> CrossSection:
    if label is None:
        if isinstance(group, AntipodalMap):
            label = f"S{m - 1}/antipodal"
        else:
            label = f"S{m - 1}/Z{group.order}{list(group.weights)}"
    return CrossSection(label, m - 1, SphereQuotient(m - 1, group), float(m - 2))


def mesh_link(mesh: TriMesh, label: str = "mesh") -> CrossSection:
    mesh.validate_closed()
    return CrossSection(label, 2, MeshLink(mesh), 1.0)


# ---------------------------------------------------------------------------
# eigen tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenItem:
    kind: str
    eigenvalue: float
    multiplicity: int
    label: str

    def __post_init__(self):
        if self.kind not in (KIND_FUNCTION, KIND_COCLOSED):
            raise SpectrumError(f"unknown eigen kind {self.kind!r}")
        if self.eigenvalue < 0:
            raise SpectrumError("eigenvalues are nonnegative in the Hodge convention")
        if self.multiplicity < 1:
            raise SpectrumError("multiplicity must be positive")


@dataclass(frozen=True)
class EigenTable:
    """Spectrum items sorted ascending, complete below `cutoff`.

    Merged tables carry one completeness bound per kind in `kind_cutoffs`;
    `cutoff` stays the weakest of them for the serialized schema.
    """

    cross_section_id: str
    dim_link: int
    cutoff: float
    items: Tuple[EigenItem, ...]
    approximate: bool = False
    residuals: Tuple[float, ...] = ()
    kind_cutoffs: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        evs = [it.eigenvalue for it in self.items]
        if any(b < a - 1e-12 for a, b in zip(evs, evs[1:])):
            raise SpectrumError("eigen items must be sorted ascending")

    def of_kind(self, kind: str) -> List[EigenItem]:
        return [it for it in self.items if it.kind == kind]

    def cutoff_for(self, kind: str) -> float:
        for k, c in self.kind_cutoffs:
            if k == kind:
                return c
        return self.cutoff

    def merged_with(self, other: "EigenTable") -> "EigenTable":
        items = sorted(self.items + other.items, key=lambda it: (it.eigenvalue, it.kind))
        cuts: Dict[str, float] = {}
        for tab in (self, other):
            kinds = {it.kind for it in tab.items} | {k for k, _ in tab.kind_cutoffs}
            for k in kinds:
                c = tab.cutoff_for(k)
                cuts[k] = min(cuts[k], c) if k in cuts else c
        return EigenTable(
            self.cross_section_id,
            self.dim_link,
            min(self.cutoff, other.cutoff),
            tuple(items),
            self.approximate or other.approximate,
            kind_cutoffs=tuple(sorted(cuts.items())),
        )

    def to_json_dict(self) -> dict:
        return {
            "cross_section_id": self.cross_section_id,
            "dim_link": self.dim_link,
            "cutoff": float(self.cutoff),
            "approximate": self.approximate,
            "items": [
                {
                    "kind": it.kind,
                    "eigenvalue": format(it.eigenvalue, ".17g"),
                    "multiplicity": it.multiplicity,
                    "label": it.label,
                }
                for it in self.items
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "EigenTable":
        try:
            d = json.loads(text)
            items = tuple(
                EigenItem(i["kind"], float(i["eigenvalue"]), int(i["multiplicity"]), i["label"])
                for i in d["items"]
            )
            return EigenTable(
                d["cross_section_id"], int(d["dim_link"]), float(d["cutoff"]), items,
                bool(d.get("approximate", False)),
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise SpectrumError(f"invalid eigen table data: {exc}") from exc


# ---------------------------------------------------------------------------
# analytic spectra
# ---------------------------------------------------------------------------


def sphere_function_eigenvalue(m: int, k: int) -> float:
    return float(k * (k + m - 2))


def sphere_coclosed_eigenvalue(m: int, k: int) -> float:
    return float((k + 1) * (k + m - 3))


def sphere_function_spectrum(m: int, k_max: int) -> EigenTable:
    """Function spectrum of round S^(m-1) up to spherical-harmonic degree k_max."""
    if m < 2:
        raise SpectrumError("need m >= 2 (the link must be at least S^1)")
    if k_max < 0:
        raise SpectrumError("k_max must be >= 0")
    items = tuple(
        EigenItem(KIND_FUNCTION, sphere_function_eigenvalue(m, k), hp.harmonic_dim(m, k), f"k={k}")
        for k in range(k_max + 1)
    )
    cutoff = sphere_function_eigenvalue(m, k_max + 1)
    return EigenTable(
        f"S{m - 1}", m - 1, cutoff, items, kind_cutoffs=((KIND_FUNCTION, cutoff),)
    )


def _weight_counts(n: int, p: int, weights: Sequence[int], degree: int) -> np.ndarray:
    """counts[w] = number of monomials in z, zbar of total degree `degree`
    whose Z_p weight is congruent to w."""
    counts = np.zeros((degree + 1, p), dtype=np.int64)
    counts[0, 0] = 1
    for w in weights:
        for var_weight in (w % p, (-w) % p):
            new = np.zeros_like(counts)
            for d in range(degree + 1):
                for res in range(p):
                    c = counts[d, res]
                    if c:
                        for extra in range(degree - d + 1):
                            new[d + extra, (res + extra * var_weight) % p] += c
            counts = new
    return counts[degree]


def invariant_function_multiplicity(m: int, group: Group, k: int) -> int:
    """Dimension of group-invariant degree-k harmonics on S^(m-1)."""
    if isinstance(group, AntipodalMap):
        return hp.harmonic_dim(m, k) if k % 2 == 0 else 0
    if group.order == 1:
        return hp.harmonic_dim(m, k)
    n = m // 2
    p = group.order
    full = int(_weight_counts(n, p, group.weights, k)[0])
    below = int(_weight_counts(n, p, group.weights, k - 2)[0]) if k >= 2 else 0
    return full - below


def character_multiplicities(m: int, group: CyclicDiagonal, k: int) -> Dict[int, int]:
    """Per-character dimensions of H_k under a cyclic diagonal action."""
    n = m // 2
    p = group.order
    full = _weight_counts(n, p, group.weights, k)
    below = _weight_counts(n, p, group.weights, k - 2) if k >= 2 else np.zeros(p, dtype=np.int64)
    return {w: int(full[w] - below[w]) for w in range(p)}


def quotient_function_spectrum(m: int, group: Group, k_max: int) -> EigenTable:
    """Invariant function spectrum of S^(m-1)/Gamma; zero-multiplicity bands dropped."""
    if m < 2:
        raise SpectrumError("need m >= 2")
    group.check_free()
    if isinstance(group, CyclicDiagonal) and group.order > 1 and (m % 2 or 2 * len(group.weights) != m):
        raise SpectrumError(f"cyclic diagonal action needs even m with m/2 weights, got m={m}")
    items = []
    for k in range(k_max + 1):
        mult = invariant_function_multiplicity(m, group, k)
        if mult > 0:
            items.append(
                EigenItem(KIND_FUNCTION, sphere_function_eigenvalue(m, k), mult, f"k={k}")
            )
    xs = sphere_quotient(m, group)
    cutoff = sphere_function_eigenvalue(m, k_max + 1)
    return EigenTable(
        xs.id, m - 1, cutoff, tuple(items), kind_cutoffs=((KIND_FUNCTION, cutoff),)
    )


def sphere_coclosed_1form_spectrum(m: int, k_max: int) -> EigenTable:
    """Low coclosed 1-form bands of round S^(m-1), oracle-verified item by item.

    Each band k is emitted only after (a) the divergence-free tangential
    polynomial family has the predicted dimension and (b) its Rayleigh
    quotient reproduces the eigenvalue to 1e-10.
    """
    if m < 4:
        raise SpectrumError("coclosed 1-form spectra require m >= 4")
    if k_max < 1:
        raise SpectrumError("k_max must be >= 1")
    items = []
    for k in range(1, k_max + 1):
        lam = sphere_coclosed_eigenvalue(m, k)
        mult = hp.coclosed_multiplicity(m, k)
        realized = len(hp._coclosed_raw(m, k))
        if realized != mult:
            raise SpectrumError(
                f"coclosed band k={k}: realized dimension {realized} != predicted {mult}"
            )
        rayleigh = hp.coclosed_rayleigh_eigenvalue(m, k)
        if abs(rayleigh - lam) > 1e-10:
            raise SpectrumError(
                f"coclosed band k={k}: Rayleigh eigenvalue {rayleigh} != {lam}"
            )
        items.append(EigenItem(KIND_COCLOSED, lam, mult, f"k={k}"))
    cutoff = sphere_coclosed_eigenvalue(m, k_max + 1)
    return EigenTable(
        f"S{m - 1}", m - 1, cutoff, tuple(items), kind_cutoffs=((KIND_COCLOSED, cutoff),)
    )


def quotient_coclosed_1form_spectrum(m: int, group: Group) -> EigenTable:
    """Coclosed table for S^(m-1)/Gamma, guaranteed only below the first band.

    The invariant spectrum is a subset of the covering sphere's, whose lowest
    coclosed eigenvalue is 2m-4, so an empty table with cutoff 2m-4 is
    complete. Wider coclosed windows on quotients are unsupported.
    """
    if m < 4:
        raise SpectrumError("coclosed 1-form spectra require m >= 4")
    group.check_free()
    xs = sphere_quotient(m, group)
    return EigenTable(
        xs.id, m - 1, float(2 * m - 4), (), kind_cutoffs=((KIND_COCLOSED, float(2 * m - 4)),)
    )


# ---------------------------------------------------------------------------
# mesh spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeshEigendata:
    """Lumped-mass cotangent eigendecomposition of a closed triangle mesh."""

    mesh: TriMesh
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # (n_vertices, n_eigs), M-orthonormal
    mass: np.ndarray  # lumped (diagonal)
    residuals: np.ndarray

    @property
    def total_area(self) -> float:
        return float(self.mass.sum())


def cotangent_laplacian(mesh: TriMesh) -> Tuple[sp.csr_matrix, np.ndarray]:
    """Stiffness matrix (PSD) and lumped mass vector."""
    mesh.validate_closed()
    v = mesh.vertices
    f = mesh.faces
    n = mesh.n_vertices
    ii, jj, ww = [], [], []
    areas = mesh.triangle_areas()
    for c in range(3):
        a, b, o = f[:, c], f[:, (c + 1) % 3], f[:, (c + 2) % 3]
        ea = v[a] - v[o]
        eb = v[b] - v[o]
        cos = np.sum(ea * eb, axis=1)
        sin = np.linalg.norm(np.cross(ea, eb), axis=1)
        w = 0.5 * cos / sin
        ii.extend([a, b])
        jj.extend([b, a])
        ww.extend([w, w])
    ii = np.concatenate(ii)
    jj = np.concatenate(jj)
    ww = np.concatenate(ww)
    W = sp.csr_matrix((ww, (ii, jj)), shape=(n, n))
    K = sp.diags(np.asarray(W.sum(axis=1)).ravel()) - W
    mass = np.zeros(n)
    for c in range(3):
        np.add.at(mass, f[:, c], areas / 3.0)
    return K.tocsr(), mass


def mesh_eigendecomposition(mesh: TriMesh, n_eigs: int) -> MeshEigendata:
    K, mass = cotangent_laplacian(mesh)
    if n_eigs < 1 or n_eigs >= mesh.n_vertices - 1:
        raise SpectrumError("n_eigs out of range for this mesh")
    M = sp.diags(mass).tocsc()
    v0 = np.ones(mesh.n_vertices)
    vals, vecs = spla.eigsh(K, k=n_eigs, M=M, sigma=-1e-2, which="LM", v0=v0)
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    resid = np.array(
        [
            np.linalg.norm(K @ vecs[:, i] - vals[i] * (mass * vecs[:, i]))
            / max(np.linalg.norm(mass * vecs[:, i]), 1e-300)
            for i in range(n_eigs)
        ]
    )
    return MeshEigendata(mesh, vals, vecs, mass, resid)


def mesh_function_spectrum(mesh: TriMesh, n_eigs: int, label: str = "mesh") -> EigenTable:
    """Lowest n_eigs Laplace-Beltrami eigenvalues, flagged approximate."""
    eig = mesh_eigendecomposition(mesh, n_eigs)
    items = tuple(
        EigenItem(KIND_FUNCTION, max(ev, 0.0), 1, f"mode {i}")
        for i, ev in enumerate(eig.eigenvalues)
    )
    cutoff = float(eig.eigenvalues[-1])
    return EigenTable(
        label, 2, cutoff, items, approximate=True,
        residuals=tuple(float(r) for r in eig.residuals),
        kind_cutoffs=((KIND_FUNCTION, cutoff),),
    )
