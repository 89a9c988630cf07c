"""Finite-difference oracle: closed forms, convergence order, stability."""
import math

import numpy as np
import pytest

from viscowave import (
    Grid,
    MediumParams,
    NeumannProblem,
    OracleConfig,
    ValidationError,
    bundle_problem,
    integrate,
    solve,
)
from viscowave.kernels import limit_kernel, modal_kernel
from viscowave.oracle import discrete_energy, neumann_laplacian

PARAMS = MediumParams(a=0.5, eps=0.1)


def test_constant_state_exact():
    grid = Grid(nx=101, nt=201, T=2.0)
    prob = NeumannProblem.from_presets(PARAMS, grid, f0={"name": "constant", "value": 1.3})
    o = integrate(prob, OracleConfig(nx=101, dt=0.01))
    # constant state is a fixed point; only LU roundoff accumulates
    assert np.max(np.abs(o.values - 1.3)) < 1e-11


def test_neumann_laplacian_annihilates_constants():
    lap = neumann_laplacian(51, 0.1)
    assert np.max(np.abs(lap @ np.ones(51))) == 0.0
    # mirror ghosts: cos(x) is an eigenvector up to O(dx^2)
    x = np.linspace(0.0, math.pi, 201)
    dx = x[1] - x[0]
    lap2 = neumann_laplacian(201, dx)
    resid = lap2 @ np.cos(x) + np.cos(x)
    assert np.max(np.abs(resid)) < 1e-3


def test_single_mode_against_closed_form():
    o = integrate(bundle_problem("single-mode", PARAMS, Grid(nx=201, nt=1001, T=5.0)),
                  OracleConfig(nx=201, dt=0.005))
    exact = np.outer(np.cos(o.x), modal_kernel(PARAMS, 1, o.t, 0))
    assert np.max(np.abs(o.values - exact)) < 1e-4


def test_limit_kind_against_closed_form():
    o = integrate(bundle_problem("single-mode", PARAMS, Grid(nx=201, nt=1001, T=5.0)),
                  OracleConfig(nx=201, dt=0.005), kind="limit")
    exact = np.outer(np.cos(o.x), limit_kernel(PARAMS.a, 1, o.t, 0))
    assert np.max(np.abs(o.values - exact)) < 1e-4


def test_second_order_convergence():
    errs = []
    for nx, dt in ((101, 0.01), (201, 0.005), (401, 0.0025)):
        nt = int(round(5.0 / dt)) + 1
        o = integrate(bundle_problem("single-mode", PARAMS, Grid(nx=nx, nt=nt, T=5.0)),
                      OracleConfig(nx=nx, dt=dt))
        exact = np.outer(np.cos(o.x), modal_kernel(PARAMS, 1, o.t, 0))
        errs.append(np.max(np.abs(o.values - exact)))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(1.8 < o_ < 2.2 for o_ in orders), orders


def test_oracle_vs_spectral_smooth():
    grid = Grid(nx=201, nt=2001, T=10.0)
    prob = bundle_problem("smooth-mixed", PARAMS, grid)
    o = integrate(prob, OracleConfig(nx=201, dt=0.005))
    tw = solve(prob.on_grid(o.x, o.t))
    assert np.max(np.abs(tw.values - o.values)) < 1e-3


def test_implicit_stability_large_dt():
    """dt ten times dx stays bounded (the scheme is unconditionally stable)."""
    dx = math.pi / 100
    dt = 10.0 * dx
    nt = int(round(50.0 / dt)) + 1
    prob = bundle_problem("free-decay", PARAMS, Grid(nx=101, nt=nt, T=dt * (nt - 1)))
    o = integrate(prob, OracleConfig(nx=101, dt=dt))
    assert np.all(np.isfinite(o.values))
    assert np.max(np.abs(o.values)) <= np.max(np.abs(prob.f0.values)) * 1.01


def test_energy_non_increasing_free_decay():
    prob = bundle_problem("free-decay", PARAMS, Grid(nx=201, nt=1001, T=5.0))
    o = integrate(prob, OracleConfig(nx=201, dt=0.005, keep_velocity=True))
    e = discrete_energy(o)
    assert e[0] > 0.0
    assert np.all(np.diff(e) <= 1e-12)


def test_energy_needs_velocity():
    prob = bundle_problem("free-decay", PARAMS, Grid(nx=101, nt=101, T=1.0))
    o = integrate(prob, OracleConfig(nx=101, dt=0.01))
    with pytest.raises(ValidationError):
        discrete_energy(o)


def test_inhomogeneous_flux_path():
    grid = Grid(nx=201, nt=1001, T=5.0)
    prob = bundle_problem("lifted", PARAMS, grid)
    o = integrate(prob, OracleConfig(nx=201, dt=0.005))
    tw = solve(prob.on_grid(o.x, o.t))
    assert np.max(np.abs(tw.values - o.values)) < 5e-3


def test_config_validation():
    with pytest.raises(ValidationError):
        OracleConfig(nx=3)
    with pytest.raises(ValidationError):
        OracleConfig(dt=0.0)
    with pytest.raises(ValidationError):
        OracleConfig(theta=0.4)
    with pytest.raises(ValidationError):
        OracleConfig(theta=1.2)


def test_backward_euler_more_damped():
    # theta = 1 dissipates at least as fast as the trapezoid run
    prob = bundle_problem("free-decay", PARAMS, Grid(nx=101, nt=501, T=5.0))
    mid = integrate(prob, OracleConfig(nx=101, dt=0.01, theta=0.5))
    be = integrate(prob, OracleConfig(nx=101, dt=0.01, theta=1.0))
    osc_mid = np.max(np.abs(mid.values[:, -1] - mid.values[:, -1].mean()))
    osc_be = np.max(np.abs(be.values[:, -1] - be.values[:, -1].mean()))
    assert osc_be <= osc_mid * 1.001
