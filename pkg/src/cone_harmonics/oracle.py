"""Independent brute-force oracles.

Nothing here trusts the cone-side algebra: the radial ODE is integrated
with classic RK4, flat-space fields are checked with central differences on
annulus grids, the circle spectrum comes from FFT spectral differentiation,
and the sphere spectrum from the cotangent-Laplacian eigensolver. These are
the reference values the analytic modules are validated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .cross_section import (
    KIND_FUNCTION,
    EigenItem,
    EigenTable,
    mesh_function_spectrum,
)
from .meshes import icosphere

MIN_ANNULUS_RADIUS = 0.25


class OracleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# radial ODE: r^2 f'' + (m-1) r f' - (c1 + m - 1) f = 0
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialODE:
    m: int
    c1: float
    r0: float
    r1: float
    f0: float
    fp0: float

    def __post_init__(self):
        if not (0.0 < self.r0 < self.r1) or not math.isfinite(self.r1):
            raise OracleError("need a finite interval with r0 > 0")


@dataclass(frozen=True)
class RadialSolution:
    r: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    error_estimate: float


def integrate_radial(ode: RadialODE, steps: int = 2000) -> RadialSolution:
    """Fourth-order Runge-Kutta integration with a step-halving error estimate."""
    if steps < 2:
        raise OracleError("need at least 2 steps")

    def rhs(r, y):
        f, fp = y
        return np.array([fp, ((ode.c1 + ode.m - 1.0) * f - (ode.m - 1.0) * r * fp) / (r * r)])

    def run(n):
        h = (ode.r1 - ode.r0) / n
        r = ode.r0 + h * np.arange(n + 1)
        ys = np.empty((n + 1, 2))
        y = np.array([ode.f0, ode.fp0], dtype=float)
        ys[0] = y
        for i in range(n):
            x = r[i]
            k1 = rhs(x, y)
            k2 = rhs(x + h / 2.0, y + h / 2.0 * k1)
            k3 = rhs(x + h / 2.0, y + h / 2.0 * k2)
            k4 = rhs(x + h, y + h * k3)
            y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            ys[i + 1] = y
        return r, ys

    r_c, ys_c = run(steps)
    _, ys_f = run(2 * steps)
    err = float(np.max(np.abs(ys_f[::2, 0] - ys_c[:, 0])))
    return RadialSolution(r_c, ys_c[:, 0], ys_c[:, 1], err)


# ---------------------------------------------------------------------------
# finite differences on flat annulus grids (m <= 4)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridField:
    """Box grid placed inside an annulus of R^m; values scalar or per-component."""

    m: int
    center: np.ndarray
    half_width: float
    spacing: float
    axes: Tuple[np.ndarray, ...]
    values: np.ndarray

    @property
    def n_components(self) -> int:
        return 1 if self.values.ndim == self.m else self.values.shape[-1]


def _grid_points(m: int, center: np.ndarray, half_width: float, n: int):
    axes = tuple(center[i] + np.linspace(-half_width, half_width, n) for i in range(m))
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1)
    return axes, pts


def grid_field(
    func: Callable[[np.ndarray], np.ndarray],
    m: int,
    center,
    half_width: float = 0.15,
    n: int = 33,
) -> GridField:
    """Sample a field on a box inside the annulus {r >= 0.25}."""
    if m > 4:
        raise OracleError("finite-difference grids support m <= 4")
    center = np.asarray(center, dtype=float)
    if center.shape != (m,):
        raise OracleError(f"center must have {m} coordinates")
    if np.linalg.norm(center) - half_width * math.sqrt(m) < MIN_ANNULUS_RADIUS:
        raise OracleError("grid must stay inside the annulus r >= 0.25 (away from the vertex)")
    if n < 33:
        raise OracleError("need n >= 33 so the spacing is at most 1/32 of the box width")
    axes, pts = _grid_points(m, center, half_width, n)
    vals = np.asarray(func(pts.reshape(-1, m)), dtype=float)
    if vals.ndim == 1:
        vals = vals.reshape(pts.shape[:-1])
    else:
        vals = vals.reshape(pts.shape[:-1] + (vals.shape[-1],))
    return GridField(m, center, half_width, 2.0 * half_width / (n - 1), axes, vals)


def _interior(a: np.ndarray, m: int) -> np.ndarray:
    sl = tuple(slice(1, -1) for _ in range(m))
    return a[sl]


def _spatial_slices(a: np.ndarray, m: int, axis: int, kind: str):
    base = [slice(1, -1)] * m + [slice(None)] * (a.ndim - m)
    sl_p, sl_m = list(base), list(base)
    sl_p[axis] = slice(2, None)
    sl_m[axis] = slice(None, -2)
    return tuple(sl_p), tuple(base), tuple(sl_m)


def _second_diff(a: np.ndarray, m: int, axis: int, h: float) -> np.ndarray:
    sl_p, sl_c, sl_m = _spatial_slices(a, m, axis, "second")
    return (a[sl_p] - 2.0 * a[sl_c] + a[sl_m]) / (h * h)


def _central_diff(a: np.ndarray, m: int, axis: int, h: float) -> np.ndarray:
    sl_p, _, sl_m = _spatial_slices(a, m, axis, "first")
    return (a[sl_p] - a[sl_m]) / (2.0 * h)


def grid_laplacian(grid: GridField) -> np.ndarray:
    """Central-difference Laplacian of every component on interior points."""
    vals = grid.values
    comps = vals if vals.ndim > grid.m else vals[..., None]
    out = sum(_second_diff(comps, grid.m, ax, grid.spacing) for ax in range(grid.m))
    return out if vals.ndim > grid.m else out[..., 0]


def grid_divergence(grid: GridField) -> np.ndarray:
    if grid.values.ndim == grid.m:
        raise OracleError("divergence needs a 1-form grid")
    return sum(
        _central_diff(grid.values[..., i], grid.m, i, grid.spacing) for i in range(grid.m)
    )


def grid_curl_norm_sq(grid: GridField) -> np.ndarray:
    """Pointwise |du|^2 = sum_{i<j} (d_i u_j - d_j u_i)^2 on interior points."""
    if grid.values.ndim == grid.m:
        raise OracleError("curl needs a 1-form grid")
    m = grid.m
    out = None
    for i in range(m):
        for j in range(i + 1, m):
            dij = _central_diff(grid.values[..., j], grid.m, i, grid.spacing) - _central_diff(
                grid.values[..., i], grid.m, j, grid.spacing
            )
            out = dij**2 if out is None else out + dij**2
    return out


@dataclass(frozen=True)
class FDReport:
    residual: float
    residual_refined: float
    order: Optional[float]
    exact_to_roundoff: bool
    spacing: float


def _two_grid_report(op, func, m, center, half_width, n) -> FDReport:
    g1 = grid_field(func, m, center, half_width, n)
    g2 = grid_field(func, m, center, half_width, 2 * n - 1)
    r1 = float(np.max(np.abs(op(g1))))
    r2 = float(np.max(np.abs(op(g2))))
    scale = float(np.max(np.abs(g1.values))) or 1.0
    noise_floor = 200.0 * np.finfo(float).eps * scale / g2.spacing**2
    if r2 <= noise_floor:
        return FDReport(r1, r2, None, True, g1.spacing)
    order = math.log2(r1 / r2) if r2 > 0 else math.inf
    return FDReport(r1, r2, order, False, g1.spacing)


def fd_harmonicity(
    func: Callable[[np.ndarray], np.ndarray],
    m: int,
    center,
    half_width: float = 0.15,
    n: int = 33,
) -> FDReport:
    """Componentwise Laplacian residual with a step-halving convergence study.

    For fields that are polynomials of degree <= 3 the stencil is exact and
    the report flags `exact_to_roundoff` instead of measuring an order.
    """
    return _two_grid_report(grid_laplacian, func, m, center, half_width, n)


def fd_divergence(
    u: Callable[[np.ndarray], np.ndarray],
    m: int,
    center,
    half_width: float = 0.15,
    n: int = 33,
) -> FDReport:
    """Sup norm of the central-difference divergence (the flat-space d* check:
    on R^m, d*u = -div u)."""
    return _two_grid_report(grid_divergence, u, m, center, half_width, n)


def fd_against_reference(
    op,
    u: Callable[[np.ndarray], np.ndarray],
    reference: Callable[[np.ndarray], np.ndarray],
    m: int,
    center,
    half_width: float = 0.15,
    n: int = 33,
) -> FDReport:
    """Compare an FD operator against pointwise reference values on two grids."""

    def diff_op(grid: GridField) -> np.ndarray:
        npts = grid.values.shape[0]
        _, pts = _grid_points(m, np.asarray(center, dtype=float), half_width, npts)
        ref = np.asarray(reference(pts.reshape(-1, m)), dtype=float).reshape(pts.shape[:-1])
        return op(grid) - _interior(ref, m)

    return _two_grid_report(diff_op, u, m, center, half_width, n)


# ---------------------------------------------------------------------------
# circle and icosphere spectra
# ---------------------------------------------------------------------------


def circle_spectrum_fft(n_modes: int, samples: int = 256) -> EigenTable:
    """Eigenvalues k^2 of the circle Laplacian via FFT spectral differentiation.

    Rayleigh quotients of sampled Fourier modes; exact to roundoff for
    k < samples/2.
    """
    if n_modes < 0:
        raise OracleError("n_modes must be >= 0")
    if 2 * n_modes + 2 >= samples:
        samples = 2 ** int(math.ceil(math.log2(4 * (n_modes + 1))))
    theta = 2.0 * np.pi * np.arange(samples) / samples
    freqs = np.fft.rfftfreq(samples, d=1.0 / samples)
    items = []
    for k in range(n_modes + 1):
        f = np.cos(k * theta)
        lap = np.fft.irfft(np.fft.rfft(f) * freqs**2, n=samples)
        lam = float(lap @ f / (f @ f))
        items.append(EigenItem(KIND_FUNCTION, max(lam, 0.0), 1 if k == 0 else 2, f"k={k}"))
    return EigenTable("S1(fft)", 1, float((n_modes + 1) ** 2), tuple(items))


def icosphere_eigensolve(level: int, n_eigs: int) -> EigenTable:
    """Lowest Laplace-Beltrami bands of the unit icosphere at a given level."""
    if level > 6:
        raise OracleError("icosphere levels above 6 are outside the desk-scale budget")
    return mesh_function_spectrum(icosphere(level), n_eigs, label=f"icosphere{level}")


def sphere_band_errors(level: int, n_eigs: int = 9) -> np.ndarray:
    """Relative errors of the first bands against k(k+1) on the unit sphere."""
    table = icosphere_eigensolve(level, n_eigs)
    target = []
    k = 0
    while len(target) < n_eigs:
        target.extend([k * (k + 1)] * (2 * k + 1))
        k += 1
    target = np.array(target[:n_eigs], dtype=float)
    got = np.array([it.eigenvalue for it in table.items])
    errs = np.zeros(n_eigs)
    nz = target > 0
    errs[nz] = np.abs(got[nz] - target[nz]) / target[nz]
    errs[~nz] = np.abs(got[~nz])
    return errs
