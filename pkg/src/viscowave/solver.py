"""Spectral solution of the Neumann problem in the cosine basis.

The solution splits into three parts, each driven by one piece of the
data: the initial velocity enters through the modal kernels directly,
the initial displacement through a first-order combination of kernel
and kernel rate, and the volume source through a Duhamel convolution
against the kernels.  All three reduce to per-mode scalar work, so the
solver is a set of kernel banks, one quadrature matrix and one
synthesis product.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .errors import ValidationError
from .kernels import (
    MediumParams,
    Truncation,
    limit_kernel,
    modal_kernel,
    zero_mode_response,
)
from .problem import (
    FieldSampling,
    Grid,
    NeumannProblem,
    dehomogenize,
    homogenize,
    lifting_field,
)


@dataclass(frozen=True)
class CosineSpectrum:
    """Mean plus cosine coefficients; time-dependent fields carry one
    coefficient row per mode with the time axis last."""

    mean: float | np.ndarray
    coeffs: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.coeffs.shape[0]


@dataclass(frozen=True)
class SolutionField:
    """A solved field on its grid, tagged with how it was produced."""

    x: np.ndarray
    t: np.ndarray
    values: np.ndarray
    params: MediumParams
    provenance: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.values.shape != (self.x.size, self.t.size):
            raise ValidationError(
                f"solution values must have shape (nx, nt) = {(self.x.size, self.t.size)}, "
                f"got {self.values.shape}"
            )


def simpson_weights(nx: int, dx: float) -> np.ndarray:
    """Composite Simpson weights; nx must be odd (even interval count)."""
    if nx < 3 or nx % 2 == 0:
        raise ValidationError(f"Simpson quadrature needs an odd sample count >= 3, got {nx}")
    w = np.ones(nx)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (dx / 3.0)


def max_resolved_modes(nx: int) -> int:
    """Resolution guard: the analysis grid must oversample the band, nx >= 2N + 1."""
    return (nx - 1) // 2


def cosine_analysis(sampling: FieldSampling, n_modes: int) -> CosineSpectrum:
    """Mean and cosine coefficients of a sampled field by Simpson quadrature.

    mean = (1/pi) integral f,  c_n = (2/pi) integral f cos(n x).

    Works on spatial fields (scalar mean) and space-time fields (one
    mean and one coefficient row per time slice).
    """
    if n_modes < 1:
        raise ValidationError(f"n_modes must be >= 1, got {n_modes}")
    nx = sampling.x.size
    if n_modes > max_resolved_modes(nx):
        raise ValidationError(
            f"analysis of {n_modes} modes needs nx >= {2 * n_modes + 1}, got nx = {nx}"
        )
    dx = float(sampling.x[1] - sampling.x[0])
    w = simpson_weights(nx, dx)
    n = np.arange(1, n_modes + 1)
    cos_mat = np.cos(np.outer(n, sampling.x))
    if sampling.is_spacetime:
        weighted = w[:, None] * sampling.values
        mean = np.sum(weighted, axis=0) / math.pi
        coeffs = (2.0 / math.pi) * (cos_mat @ weighted)
    else:
        weighted = w * sampling.values
        mean = float(np.sum(weighted) / math.pi)
        coeffs = (2.0 / math.pi) * (cos_mat @ weighted)
    return CosineSpectrum(mean=mean, coeffs=coeffs)


def cosine_synthesis(spectrum: CosineSpectrum, x: np.ndarray) -> np.ndarray:
    """Evaluate mean + sum c_n cos(n x) on a grid (time axis passes through)."""
    x = np.asarray(x, float)
    n = np.arange(1, spectrum.n_modes + 1)
    cos_mat = np.cos(np.outer(n, x))
    series = cos_mat.T @ spectrum.coeffs
    return np.asarray(spectrum.mean) + series


def _kernel_bank(params: MediumParams, kind: str, n: np.ndarray, t: np.ndarray, order: int) -> np.ndarray:
    if kind == "perturbed":
        return modal_kernel(params, n[:, None], t[None, :], order)
    if kind == "limit":
        return limit_kernel(params.a, n[:, None], t[None, :], order)
    raise ValidationError(f"kind must be 'perturbed' or 'limit', got {kind!r}")


def _duhamel(kernel_rows: np.ndarray, forcing_rows: np.ndarray, dt: float) -> np.ndarray:
    """Trapezoid convolution int_0^t K(t - s) f(s) ds on a uniform grid.

    Both endpoints get the half-weight correction; for the displacement
    kernels K(0) = 0 and the second one drops out, but the rate kernels
    start at 1.  Evaluated through an FFT product, which computes the
    same sums to rounding.
    """
    nt = kernel_rows.shape[-1]
    full = fftconvolve(kernel_rows, forcing_rows, mode="full", axes=-1)[..., :nt]
    corr = 0.5 * (kernel_rows * forcing_rows[..., :1] + kernel_rows[..., :1] * forcing_rows)
    return dt * (full - corr)


def _two_h(params: MediumParams, kind: str, n: np.ndarray) -> np.ndarray:
    if kind == "perturbed":
        return params.a + params.eps * n.astype(float) ** 2
    return np.full(n.shape, params.a)


def _check_source_resolution(coeffs: np.ndarray, mean) -> None:
    """Warn when the source changes too fast for the output time grid."""
    rows = np.vstack([np.atleast_2d(np.asarray(mean, float)), np.atleast_2d(coeffs)])
    if rows.shape[-1] < 2:
        return
    scale = np.max(np.abs(rows))
    if scale == 0.0:
        return
    step = np.max(np.abs(np.diff(rows, axis=-1)))
    if step > 0.25 * scale:
        warnings.warn(
            "source varies by more than 25% of its amplitude per time step; "
            "the Duhamel trapezoid may be under-resolved, refine nt",
            stacklevel=3,
        )


def initial_velocity_solution(
    spectrum: CosineSpectrum,
    params: MediumParams,
    grid: Grid,
    trunc: Truncation = Truncation(),
    kind: str = "perturbed",
) -> SolutionField:
    """Response to initial velocity data alone (zero displacement, no source)."""
    x, t = grid.x, grid.t
    n = np.arange(1, _mode_count(spectrum.n_modes, grid.nx, trunc) + 1)
    bank = _kernel_bank(params, kind, n, t, 0)
    modal = spectrum.coeffs[: n.size, None] * bank
    mean_t = spectrum.mean * zero_mode_response(params.a, t)
    values = mean_t[None, :] + np.cos(np.outer(x, n)) @ modal
    return SolutionField(x=x, t=t, values=values, params=params,
                         provenance=f"spectral_{kind}",
                         meta={"component": "initial_velocity", "modes": int(n.size)})


def initial_displacement_solution(
    spectrum: CosineSpectrum,
    params: MediumParams,
    grid: Grid,
    trunc: Truncation = Truncation(),
    kind: str = "perturbed",
) -> SolutionField:
    """Response to initial displacement data alone.

    Mode n evolves through kernel_rate + (a + eps n^2) kernel, which
    equals 1 at t = 0 and has zero derivative there, so the data is
    reproduced with zero initial velocity.
    """
    x, t = grid.x, grid.t
    n = np.arange(1, _mode_count(spectrum.n_modes, grid.nx, trunc) + 1)
    bank = _kernel_bank(params, kind, n, t, 0)
    rate = _kernel_bank(params, kind, n, t, 1)
    modal = spectrum.coeffs[: n.size, None] * (rate + _two_h(params, kind, n)[:, None] * bank)
    values = np.asarray(spectrum.mean) + np.cos(np.outer(x, n)) @ modal
    return SolutionField(x=x, t=t, values=values, params=params,
                         provenance=f"spectral_{kind}",
                         meta={"component": "initial_displacement", "modes": int(n.size)})


def forced_solution(
    spectrum: CosineSpectrum,
    params: MediumParams,
    grid: Grid,
    trunc: Truncation = Truncation(),
    kind: str = "perturbed",
) -> SolutionField:
    """Response to the volume source alone (Duhamel convolution, minus sign)."""
    x, t = grid.x, grid.t
    if np.asarray(spectrum.mean).ndim != 1 or spectrum.coeffs.ndim != 2:
        raise ValidationError("forced_solution needs a space-time source spectrum")
    dt = float(t[1] - t[0])
    _check_source_resolution(spectrum.coeffs, spectrum.mean)
    n = np.arange(1, _mode_count(spectrum.n_modes, grid.nx, trunc) + 1)
    bank = _kernel_bank(params, kind, n, t, 0)
    modal = -_duhamel(bank, spectrum.coeffs[: n.size], dt)
    mean_t = -_duhamel(zero_mode_response(params.a, t), np.asarray(spectrum.mean), dt)
    values = mean_t[None, :] + np.cos(np.outer(x, n)) @ modal
    return SolutionField(x=x, t=t, values=values, params=params,
                         provenance=f"spectral_{kind}",
                         meta={"component": "forced", "modes": int(n.size)})


def solve(
    problem: NeumannProblem,
    kind: str = "perturbed",
    grid: Grid | None = None,
    trunc: Truncation = Truncation(),
    source_mode: str = "operator_applied",
) -> SolutionField:
    """Full spectral solution of the Neumann problem.

    Inhomogeneous flux data is absorbed by the lifting first and added
    back at the end.  When a grid is given the problem moves onto it
    (preset fields regenerate; raw samples must already match).  The
    mode count is min(trunc.max_modes, (nx - 1) / 2).
    """
    if grid is not None:
        problem = problem.on_grid(grid.x, grid.t)
    if not problem.is_homogeneous():
        shifted = homogenize(problem, source_mode)
        inner = solve(shifted, kind=kind, grid=None, trunc=trunc, source_mode=source_mode)
        lifted = dehomogenize(inner, problem.flux)
        lifted.meta.update({"source_mode": source_mode, "lifted": True})
        return lifted

    x, t = problem.x, problem.t
    params = problem.params
    dt = float(t[1] - t[0])
    n_modes = _mode_count(max_resolved_modes(x.size), x.size, trunc)
    n = np.arange(1, n_modes + 1)

    s0 = cosine_analysis(problem.f0, n_modes)
    s1 = cosine_analysis(problem.f1, n_modes)
    sF = cosine_analysis(problem.source, n_modes)
    _check_source_resolution(sF.coeffs, sF.mean)

    bank = _kernel_bank(params, kind, n, t, 0)
    rate = _kernel_bank(params, kind, n, t, 1)
    two_h = _two_h(params, kind, n)[:, None]

    modal = (
        s0.coeffs[:, None] * (rate + two_h * bank)
        + s1.coeffs[:, None] * bank
        - _duhamel(bank, sF.coeffs, dt)
    )
    mean_t = (
        s0.mean
        + s1.mean * zero_mode_response(params.a, t)
        - _duhamel(zero_mode_response(params.a, t), np.asarray(sF.mean), dt)
    )
    values = mean_t[None, :] + np.cos(np.outer(x, n)) @ modal
    return SolutionField(
        x=x, t=t, values=values, params=params, provenance=f"spectral_{kind}",
        meta={
            "kind": kind,
            "modes": int(n_modes),
            "max_modes": trunc.max_modes,
            "tail_tol": trunc.tail_tol,
            "source_mode": problem.source_mode,
        },
    )


def solution_rate(
    problem: NeumannProblem,
    kind: str = "perturbed",
    grid: Grid | None = None,
    trunc: Truncation = Truncation(),
    source_mode: str = "operator_applied",
) -> SolutionField:
    """Analytic time derivative of the spectral solution.

    Per mode the displacement combination differentiates to -n^2 G by
    the modal ODE, the velocity part to the kernel rate, and the Duhamel
    term to a convolution against the rate bank (the boundary term
    vanishes because the kernels start at zero).  No finite differences
    are involved; at t = 0 the result reproduces f1 up to truncation of
    its cosine series.
    """
    if grid is not None:
        problem = problem.on_grid(grid.x, grid.t)
    if not problem.is_homogeneous():
        shifted = homogenize(problem, source_mode)
        inner = solution_rate(shifted, kind=kind, grid=None, trunc=trunc, source_mode=source_mode)
        flux = problem.flux.resample(inner.t)
        values = inner.values + lifting_field(flux, inner.x, 1)
        lifted = replace_field(inner, values)
        lifted.meta.update({"source_mode": source_mode, "lifted": True})
        return lifted

    x, t = problem.x, problem.t
    params = problem.params
    dt = float(t[1] - t[0])
    n_modes = _mode_count(max_resolved_modes(x.size), x.size, trunc)
    n = np.arange(1, n_modes + 1)

    s0 = cosine_analysis(problem.f0, n_modes)
    s1 = cosine_analysis(problem.f1, n_modes)
    sF = cosine_analysis(problem.source, n_modes)
    _check_source_resolution(sF.coeffs, sF.mean)

    bank = _kernel_bank(params, kind, n, t, 0)
    rate = _kernel_bank(params, kind, n, t, 1)

    modal = (
        -(n.astype(float) ** 2 * s0.coeffs)[:, None] * bank
        + s1.coeffs[:, None] * rate
        - _duhamel(rate, sF.coeffs, dt)
    )
    mean_t = (
        s1.mean * zero_mode_response(params.a, t, 1)
        - _duhamel(zero_mode_response(params.a, t, 1), np.asarray(sF.mean), dt)
    )
    values = mean_t[None, :] + np.cos(np.outer(x, n)) @ modal
    return SolutionField(
        x=x, t=t, values=values, params=params, provenance=f"spectral_{kind}_rate",
        meta={
            "kind": kind,
            "modes": int(n_modes),
            "max_modes": trunc.max_modes,
            "tail_tol": trunc.tail_tol,
            "source_mode": problem.source_mode,
        },
    )


def replace_field(solution: SolutionField, values: np.ndarray) -> SolutionField:
    """Copy of a solution field with new values on the same grid."""
    return SolutionField(
        x=solution.x, t=solution.t, values=values, params=solution.params,
        provenance=solution.provenance, meta=dict(solution.meta),
    )


def _mode_count(requested: int, nx: int, trunc: Truncation) -> int:
    n = min(int(requested), trunc.max_modes, max_resolved_modes(nx))
    if n < 1:
        raise ValidationError("no resolvable modes: enlarge the grid or the mode cap")
    return n


def boundary_flux_error(solution: SolutionField, flux_phi=None, flux_psi=None) -> float:
    """Largest one-sided 4th-order flux mismatch at the two walls over all t.

    The cosine synthesis has exactly zero slope at both walls, so for a
    homogeneous problem any nonzero reading is finite-difference noise
    plus assembly bugs; with flux histories given, they are subtracted.
    """
    u = solution.values
    dx = float(solution.x[1] - solution.x[0])
    left = (-25 * u[0] + 48 * u[1] - 36 * u[2] + 16 * u[3] - 3 * u[4]) / (12 * dx)
    right = (25 * u[-1] - 48 * u[-2] + 36 * u[-3] - 16 * u[-4] + 3 * u[-5]) / (12 * dx)
    if flux_phi is not None:
        left = left - np.asarray(flux_phi, float)
    if flux_psi is not None:
        right = right - np.asarray(flux_psi, float)
    return float(max(np.max(np.abs(left)), np.max(np.abs(right))))


def pde_residual(solution: SolutionField, problem: NeumannProblem) -> tuple[np.ndarray, float]:
    """Interior finite-difference residual of the operator on a solved field.

    Second-order central differences for every derivative, mixed term
    included, evaluated on interior nodes in both x and t.  Returns the
    residual field of shape (nx - 2, nt - 2) and its sup norm.
    """
    if solution.x.size < 5 or solution.t.size < 5:
        raise ValidationError(
            "pde_residual needs at least 5 nodes per axis, got "
            f"{solution.x.size} x {solution.t.size}"
        )
    problem = problem.on_grid(solution.x, solution.t)
    u = solution.values
    dx = float(solution.x[1] - solution.x[0])
    dt = float(solution.t[1] - solution.t[0])
    eps_eff = solution.params.eps if solution.meta.get("kind", "perturbed") == "perturbed" else 0.0

    lap = (u[:-2, :] - 2.0 * u[1:-1, :] + u[2:, :]) / (dx * dx)
    lap_t = (lap[:, 2:] - lap[:, :-2]) / (2.0 * dt)
    u_t = (u[:, 2:] - u[:, :-2]) / (2.0 * dt)
    u_tt = (u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]) / (dt * dt)

    res = (
        eps_eff * lap_t
        + lap[:, 1:-1]
        - u_tt[1:-1, :]
        - solution.params.a * u_t[1:-1, :]
        - problem.source.values[1:-1, 1:-1]
    )
    return res, float(np.max(np.abs(res)))
