"""Riemannian cones C(X) = (R_+ x X, dr^2 + r^2 g_X) over supported links.

A Cone bundles the cross-section, its eigen tables, and orthonormal angular
basis elements (with explicit polynomial realizations on round spheres).
All supported cones are flat or free flat quotients, so the curvature term
in the energy vanishes for functions and 1-forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple, Union

import numpy as np

from . import cross_section as xs
from . import harmonic_polynomials as hp
from .cross_section import (
    KIND_COCLOSED,
    KIND_FUNCTION,
    AntipodalMap,
    CrossSection,
    CyclicDiagonal,
    EigenTable,
    MeshEigendata,
    MeshLink,
    RoundSphere,
    SphereQuotient,
    SpectrumError,
)


@dataclass(frozen=True)
class AngularKey:
    kind: str
    label: str
    index: int


@dataclass(frozen=True)
class AngularElement:
    """One L2(X)-orthonormal eigenfunction / coclosed eigen 1-form on the link.

    `realization` is optional pointwise data: a polynomial (functions) or a
    tuple of component polynomials (coclosed forms) on the ambient R^m, or a
    vertex vector for mesh links.
    """

    key: AngularKey
    eigenvalue: float
    realization: object = None
    approximate: bool = False


class Cone:
    def __init__(self, cross_section: CrossSection, mesh_eigendata: Optional[MeshEigendata] = None):
        self.cross_section = cross_section
        self.m = cross_section.dim_link + 1
        self._mesh_eig = mesh_eigendata
        if isinstance(cross_section.model, MeshLink) and mesh_eigendata is None:
            raise SpectrumError("mesh cones need precomputed eigendata")

    # -- identity ----------------------------------------------------------

    @property
    def id(self) -> str:
        return self.cross_section.id

    @property
    def group(self):
        model = self.cross_section.model
        return model.group if isinstance(model, SphereQuotient) else None

    @property
    def is_mesh(self) -> bool:
        return isinstance(self.cross_section.model, MeshLink)

    @property
    def is_kahler(self) -> bool:
        """True for C^n and its cyclic/antipodal quotients (even m)."""
        if self.is_mesh or self.m % 2:
            return False
        return True

    @property
    def complex_dim(self) -> int:
        if not self.is_kahler:
            raise SpectrumError(f"cone {self.id} is not a Kaehler model")
        return self.m // 2

    @property
    def link_volume(self) -> float:
        if self.is_mesh:
            return self._mesh_eig.total_area
        vol = hp.sphere_volume(self.m)
        g = self.group
        return vol / g.size if g is not None else vol

    def __repr__(self) -> str:
        return f"Cone(C({self.id}), m={self.m})"

    # -- eigen tables --------------------------------------------------------

    def function_table(self, k_max: int) -> EigenTable:
        if self.is_mesh:
            eig = self._mesh_eig
            if k_max >= len(eig.eigenvalues):
                raise SpectrumError(
                    f"mesh eigendata holds {len(eig.eigenvalues)} modes, need {k_max + 1}"
                )
            return xs.mesh_function_spectrum(eig.mesh, len(eig.eigenvalues), label=self.id)
        g = self.group
        if g is None:
            return xs.sphere_function_spectrum(self.m, k_max)
        return xs.quotient_function_spectrum(self.m, g, k_max)

    def coclosed_table(self, k_max: int) -> EigenTable:
        if self.is_mesh:
            raise SpectrumError("coclosed 1-form spectra are not available on mesh links")
        g = self.group
        if g is None:
            return xs.sphere_coclosed_1form_spectrum(self.m, k_max)
        return xs.quotient_coclosed_1form_spectrum(self.m, g)

    def eigen_table(self, k_function: int, k_coclosed: int = 0) -> EigenTable:
        """Merged table; coclosed part included for m >= 4 non-mesh links."""
        table = self.function_table(k_function)
        if not self.is_mesh and self.m >= 4:
            k_cc = max(k_coclosed, 1)
            table = table.merged_with(self.coclosed_table(k_cc))
        return table

    # -- angular bases -------------------------------------------------------

    def function_elements(self, k: int) -> List[AngularElement]:
        """Orthonormal basis of the degree-k invariant function eigenspace."""
        if self.is_mesh:
            raise SpectrumError("use mesh_elements() for mesh links")
        lam = xs.sphere_function_eigenvalue(self.m, k)
        g = self.group
        if g is None:
            basis = hp.harmonic_basis(self.m, k)
            return [
                AngularElement(AngularKey(KIND_FUNCTION, f"k={k}", j), lam, realization=basis[j])
                for j in range(len(basis))
            ]
        mult = xs.invariant_function_multiplicity(self.m, g, k)
        return [
            AngularElement(AngularKey(KIND_FUNCTION, f"k={k}", j), lam) for j in range(mult)
        ]

    def coclosed_elements(self, k: int) -> List[AngularElement]:
        if self.is_mesh or self.m < 4:
            raise SpectrumError("coclosed elements need a smooth link with m >= 4")
        if self.group is not None:
            raise SpectrumError("coclosed eigendata is emitted only for round spheres")
        lam = xs.sphere_coclosed_eigenvalue(self.m, k)
        basis = hp.coclosed_polynomial_basis(self.m, k)
        return [
            AngularElement(AngularKey(KIND_COCLOSED, f"k={k}", j), lam, realization=basis[j])
            for j in range(len(basis))
        ]

    def mesh_elements(self) -> List[AngularElement]:
        if not self.is_mesh:
            raise SpectrumError("mesh_elements only on mesh links")
        eig = self._mesh_eig
        return [
            AngularElement(
                AngularKey(KIND_FUNCTION, "mesh", i),
                float(max(eig.eigenvalues[i], 0.0)),
                realization=eig.eigenvectors[:, i],
                approximate=True,
            )
            for i in range(len(eig.eigenvalues))
        ]


def flat_cone(m: int) -> Cone:
    """C(S^(m-1)), isometric to flat R^m."""
    return Cone(xs.round_sphere(m))


def flat_complex_cone(n: int) -> Cone:
    """C^n as the cone over S^(2n-1)."""
    if n < 1:
        raise SpectrumError("need n >= 1")
    return Cone(xs.round_sphere(2 * n, label=f"S{2 * n - 1}"))


def quotient_cone(m: int, group) -> Cone:
    return Cone(xs.sphere_quotient(m, group))


def cyclic_quotient_cone(p: int, weights: Tuple[int, ...]) -> Cone:
    """C^n / Z_p with diagonal weights; the A_1 example is p=2, weights (1,1)."""
    return quotient_cone(2 * len(weights), CyclicDiagonal(p, tuple(weights)))


def antipodal_cone(m: int) -> Cone:
    return quotient_cone(m, AntipodalMap())


def mesh_cone(mesh_eigendata: MeshEigendata, label: str = "mesh") -> Cone:
    return Cone(xs.mesh_link(mesh_eigendata.mesh, label=label), mesh_eigendata)
