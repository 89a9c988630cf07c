"""Finite-difference reference integrator for the viscous wave problem.

Method of lines: u_t = v, v_t = eps*D v + D u - a v - F with D the
3-point Laplacian and mirror ghost nodes for the zero-flux walls.  Time
stepping is the one-parameter theta scheme; eliminating v turns each
step into a single tridiagonal solve in u, factored once and reused.
This path shares no code with the spectral solver beyond problem setup,
which is what makes it useful as a cross-check.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import diags, identity
from scipy.sparse.linalg import splu

from .errors import ValidationError
from .problem import NeumannProblem, dehomogenize, homogenize
from .solver import SolutionField


@dataclass(frozen=True)
class OracleConfig:
    """Discretization knobs for the reference integrator."""

    nx: int = 201
    dt: float = 5e-3
    theta: float = 0.5
    keep_velocity: bool = False

    def __post_init__(self) -> None:
        if self.nx < 5:
            raise ValidationError(f"oracle needs nx >= 5, got {self.nx}")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValidationError(f"dt must be positive and finite, got {self.dt}")
        if not 0.5 <= self.theta <= 1.0:
            raise ValidationError(
                f"theta must lie in [0.5, 1] (A-stable range), got {self.theta}"
            )


def neumann_laplacian(nx: int, dx: float):
    """Sparse 3-point Laplacian with mirror ghosts (u_{-1} = u_1)."""
    main = np.full(nx, -2.0)
    off = np.ones(nx - 1)
    lap = diags([off, main, off], [-1, 0, 1], format="lil")
    lap[0, 1] = 2.0
    lap[-1, -2] = 2.0
    return (lap / (dx * dx)).tocsr()


def integrate(
    problem: NeumannProblem,
    config: OracleConfig = OracleConfig(),
    kind: str = "perturbed",
) -> SolutionField:
    """March the problem to its horizon and return the nodal field.

    kind="limit" drops the viscous term (eps = 0 path).  Problems with
    boundary flux are homogenized first and the lifting added back, the
    same convention the spectral solver uses.
    """
    if kind not in ("perturbed", "limit"):
        raise ValidationError(f"kind must be 'perturbed' or 'limit', got {kind!r}")
    if not problem.is_homogeneous():
        inner = integrate(homogenize(problem), config, kind)
        lifted = dehomogenize(inner, problem.flux.resample(inner.t))
        lifted.meta.update({"lifted": True})
        return lifted

    a = problem.params.a
    eps = problem.params.eps if kind == "perturbed" else 0.0
    horizon = problem.T
    nsteps = max(1, round(horizon / config.dt))
    dt = horizon / nsteps
    x = np.linspace(0.0, math.pi, config.nx)
    t = np.linspace(0.0, horizon, nsteps + 1)
    dx = float(x[1] - x[0])
    if dt > dx:
        warnings.warn(
            f"oracle step dt = {dt:.3g} exceeds dx = {dx:.3g}; the scheme stays "
            "stable but temporal accuracy will dominate the error",
            stacklevel=2,
        )

    prob = problem.on_grid(x, t)
    lap = neumann_laplacian(config.nx, dx)
    source = prob.source.values

    theta = config.theta
    thdt = theta * dt
    eye = identity(config.nx, format="csr")
    # Eliminating v from the theta-discretized first-order system leaves
    # M u' = (1 + a*th*dt) u + dt v + (th*(1-th)*dt^2 - eps*th*dt) D u
    #        - th*dt^2 * F_th
    # with M below; v' then follows from the u update formula.
    m_mat = (1.0 + a * thdt) * eye - (eps * thdt + thdt * thdt) * lap
    lu = splu(m_mat.tocsc())

    u = prob.f0.values.copy()
    v = prob.f1.values.copy()
    out = np.empty((config.nx, nsteps + 1))
    out[:, 0] = u
    vel = None
    if config.keep_velocity:
        vel = np.empty_like(out)
        vel[:, 0] = v

    du_coeff = theta * (1.0 - theta) * dt * dt - eps * thdt
    for m in range(nsteps):
        f_th = (1.0 - theta) * source[:, m] + theta * source[:, m + 1]
        rhs = (1.0 + a * thdt) * u + dt * v + du_coeff * (lap @ u) - thdt * dt * f_th
        u_new = lu.solve(rhs)
        v = (u_new - u) / thdt - ((1.0 - theta) / theta) * v
        u = u_new
        out[:, m + 1] = u
        if vel is not None:
            vel[:, m + 1] = v

    meta = {
        "kind": kind,
        "nx": config.nx,
        "dt": dt,
        "theta": theta,
        "steps": nsteps,
    }
    if vel is not None:
        meta["velocity"] = vel
    return SolutionField(
        x=x, t=t, values=out, params=problem.params, provenance="oracle", meta=meta
    )


def discrete_energy(field: SolutionField) -> np.ndarray:
    """E(t) = 1/2 int (v^2 + u_x^2) dx with the gradient on cell midpoints.

    Needs the velocity history (run the oracle with keep_velocity=True).
    """
    vel = field.meta.get("velocity")
    if vel is None:
        raise ValidationError("discrete_energy needs a field integrated with keep_velocity=True")
    dx = float(field.x[1] - field.x[0])
    grad = np.diff(field.values, axis=0) / dx
    w = np.full(field.x.size, dx)
    w[0] = w[-1] = 0.5 * dx
    kinetic = 0.5 * (w[:, None] * vel * vel).sum(axis=0)
    elastic = 0.5 * (grad * grad).sum(axis=0) * dx
    return kinetic + elastic
