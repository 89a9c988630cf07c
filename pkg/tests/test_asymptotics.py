"""Bound shapes, gap evaluators, incomplete gamma, sweep fits."""
import math

import numpy as np
import pytest
from scipy.integrate import quad

from viscowave import (
    Grid,
    MediumParams,
    Truncation,
    ValidationError,
    bundle_problem,
    solve,
)
from viscowave.asymptotics import (
    BOUND_IDS,
    BoundConstants,
    BoundExponents,
    SWEEP_TRUNCATION,
    bound_shape,
    data_constants,
    default_pairs,
    default_times,
    fit_constants,
    gamma_tail_profile,
    incomplete_gamma,
    kernel_gap,
    proof_constants,
    regime_classify,
    scaled_green_norm,
    solution_gap,
)
from viscowave.kernels import limit_kernel, modal_kernel

# 40-digit reference values, independent summation route.
KERNEL_GAP_ORIGIN_T1 = 4.9987705789354450363e-4   # a=0.5, eps=0.1, x=xi=0, t=1
GREEN_NORM_MID_T05 = 0.030669215557280101948      # a=0.5, eps=0.1, x=xi=pi/2, t=0.5
GAMMA_HALF_AT_1 = 0.2788055852806619765
GAMMA_125_AT_03 = 0.75553322763011681767
GAMMA_25_AT_4 = 0.20769032981158048375

PARAMS = MediumParams(a=0.5, eps=0.1)


# ---------------------------------------------------------------------------
# incomplete gamma

def test_incomplete_gamma_exact_identities():
    for z in (0.0, 1.0, 5.0):
        assert incomplete_gamma(1.0, z) == pytest.approx(math.exp(-z), abs=1e-12)
        assert incomplete_gamma(2.0, z) == pytest.approx((1.0 + z) * math.exp(-z), abs=1e-12)


def test_incomplete_gamma_frozen_references():
    assert incomplete_gamma(0.5, 1.0) == pytest.approx(GAMMA_HALF_AT_1, abs=1e-13)
    assert incomplete_gamma(1.25, 0.3) == pytest.approx(GAMMA_125_AT_03, abs=1e-13)
    assert incomplete_gamma(2.5, 4.0) == pytest.approx(GAMMA_25_AT_4, abs=1e-13)


def test_incomplete_gamma_against_quadrature():
    for s, z in ((0.5, 1.0), (0.75, 0.2), (1.5, 3.0), (2.25, 0.9)):
        ref, _ = quad(lambda u: u ** (s - 1) * math.exp(-u), z, np.inf, limit=300)
        assert incomplete_gamma(s, z) == pytest.approx(ref, abs=1e-8)


def test_incomplete_gamma_complete_value_at_zero():
    assert incomplete_gamma(0.5, 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert incomplete_gamma(3.0, 0.0) == pytest.approx(2.0, rel=1e-14)


def test_incomplete_gamma_validation():
    with pytest.raises(ValidationError):
        incomplete_gamma(0.0, 1.0)
    with pytest.raises(ValidationError):
        incomplete_gamma(1.0, -0.5)


def test_gamma_tail_profile():
    exps = BoundExponents()
    a = 0.5
    k0 = gamma_tail_profile(a, exps.gamma, exps.delta, 0.0)
    full = ((2 / a) ** (2 - exps.gamma) * math.gamma(2 - exps.gamma)
            + (2 / a) ** (3 - exps.delta) * math.gamma(3 - exps.delta))
    assert k0 == pytest.approx(full, rel=1e-12)
    prof = [gamma_tail_profile(a, exps.gamma, exps.delta, t)
            for t in np.linspace(0.0, 20.0, 40)]
    assert np.all(np.diff(prof) <= 0.0)


# ---------------------------------------------------------------------------
# exponents, regimes, shapes

def test_bound_exponents_domains():
    exps = BoundExponents()
    assert exps.m == pytest.approx(0.25)
    with pytest.raises(ValidationError):
        BoundExponents(gamma=0.5)
    with pytest.raises(ValidationError):
        BoundExponents(delta=2.0)
    with pytest.raises(ValidationError):
        BoundExponents(eta=1.0)
    with pytest.raises(ValidationError):
        BoundExponents(k=0.5)


def test_regime_classify():
    assert regime_classify(0.1, 5.0) == "slow"     # tau = 0.5
    assert regime_classify(0.1, 50.0) == "fast"    # tau = 5
    assert regime_classify(0.1, 10.0) == "boundary"
    out = regime_classify(0.1, np.array([5.0, 10.0, 50.0]))
    assert list(out) == ["slow", "boundary", "fast"]


def test_bound_shape_kernel_gap_literal():
    """Spot-check the shape against its written-out formula."""
    exps = BoundExponents()
    t = 2.0
    eps = 0.1
    a = 0.5
    r = 1.0 + t + t ** (1 - exps.gamma) + t ** (2 - exps.delta)
    by_hand = eps ** (1 - exps.gamma) * r * math.exp(-a * t / 2) + eps * math.exp(-t / (4 * eps))
    val = bound_shape("kernel-gap", MediumParams(a=a, eps=eps), exps, t)
    assert val == pytest.approx(by_hand, rel=1e-12)


def test_bound_shape_viscous_norm_literal():
    exps = BoundExponents()
    t, eps, a = 3.0, 0.05, 0.5
    by_hand = ((1 + t) * eps ** (0.5 - exps.k) * math.exp(-a * t / 2)
               + eps ** (1 - exps.eta) * math.exp(-t / (4 * eps)))
    val = bound_shape("viscous-norm", MediumParams(a=a, eps=eps), exps, t)
    assert val == pytest.approx(by_hand, rel=1e-12)


def test_bound_shape_solution_gap_needs_aux():
    exps = BoundExponents()
    with pytest.raises(ValidationError):
        bound_shape("solution-gap", PARAMS, exps, 1.0)
    aux = {"K0": 1.0, "K1": 1.0, "K2": 1.0, "K3": 1.0, "H": 1.0, "H1": 1.0, "C": 1.0}
    v = bound_shape("solution-gap", PARAMS, exps, 1.0, aux=aux)
    assert v > 0.0


def test_bound_shape_unknown_id():
    with pytest.raises(ValidationError):
        bound_shape("no-such-bound", PARAMS, BoundExponents(), 1.0)


# ---------------------------------------------------------------------------
# kernel gap and green norm

def test_kernel_gap_frozen_origin():
    val = kernel_gap(PARAMS, 0.0, 0.0, 1.0, Truncation(max_modes=4096, tail_tol=1e-10))
    assert val == pytest.approx(KERNEL_GAP_ORIGIN_T1, rel=1e-9)


def test_kernel_gap_matches_brute_force():
    """Completion plus certificate agrees with a 2e5-mode direct sum."""
    t = 1.0
    val = kernel_gap(PARAMS, 0.0, 0.0, t, Truncation(max_modes=4096, tail_tol=1e-10))
    n = np.arange(1, 200_001).astype(float)
    ke = modal_kernel(PARAMS, n[:, None], np.array([[t]]), 0)[:, 0]
    kl = limit_kernel(PARAMS.a, n[:, None], np.array([[t]]), 0)[:, 0]
    direct = (2 / math.pi) * np.sum((ke - math.exp(-PARAMS.eps * t / 2) * kl) / n**2)
    assert val == pytest.approx(abs(direct), abs=1e-11)


def test_kernel_gap_rate_matches_brute_force():
    from viscowave.asymptotics import _gap_rows
    t = np.array([1.0])
    rows = np.abs(_gap_rows(PARAMS, [(0.0, 0.0)], t, SWEEP_TRUNCATION, 1))
    n = np.arange(1, 2_000_001).astype(float)
    acc = 0.0
    for lo in range(0, n.size, 250_000):
        nn = n[lo:lo + 250_000]
        ke = modal_kernel(PARAMS, nn[:, None], t[None, :], 1)
        kl = limit_kernel(PARAMS.a, nn[:, None], t[None, :], 1)
        kl0 = limit_kernel(PARAMS.a, nn[:, None], t[None, :], 0)
        br = ke - math.exp(-PARAMS.eps * 0.5) * (kl - 0.5 * PARAMS.eps * kl0)
        acc += np.sum((2 / math.pi) * br[:, 0] / nn**2)
    assert rows[0, 0] == pytest.approx(abs(acc), abs=1e-10)


def test_kernel_gap_vanishes_with_eps():
    vals = [kernel_gap(MediumParams(a=0.5, eps=e), 0.0, 0.0, 1.0,
                       Truncation(max_modes=8192, tail_tol=1e-10))
            for e in (0.1, 0.05, 0.02)]
    assert vals[0] > vals[1] > vals[2] > 0.0
    # near-linear decay in eps at fixed t
    slope = np.polyfit(np.log([0.1, 0.05, 0.02]), np.log(vals), 1)[0]
    assert 0.8 < slope < 1.2


def test_kernel_gap_array_time():
    t = np.array([0.5, 1.0, 2.0])
    vals = kernel_gap(PARAMS, 0.3, 1.1, t, Truncation(max_modes=8192, tail_tol=1e-9))
    assert vals.shape == (3,)
    assert np.all(np.isfinite(vals))


def test_scaled_green_norm_frozen():
    val = scaled_green_norm(PARAMS, math.pi / 2, math.pi / 2, 0.5)
    assert val == pytest.approx(GREEN_NORM_MID_T05, rel=1e-9)


def test_scaled_green_norm_brute_force():
    t = 0.5
    val = scaled_green_norm(PARAMS, math.pi / 2, math.pi / 2, t)
    n = np.arange(1, 2_000_001).astype(float)
    acc = 0.0
    for lo in range(0, n.size, 250_000):
        nn = n[lo:lo + 250_000]
        ke = modal_kernel(PARAMS, nn[:, None], np.array([[t]]), 0)[:, 0]
        acc += np.sum(ke * np.cos(nn * math.pi / 2) ** 2)
    direct = PARAMS.eps * abs((2 / math.pi) * acc)
    # the partial sum itself still misses a ~1e-9 tail that the closed-form
    # completion inside scaled_green_norm accounts for
    assert val == pytest.approx(direct, abs=5e-9)


# ---------------------------------------------------------------------------
# solution gap

def test_solution_gap_constant_preset_closed_form():
    """Constant data ride the zero mode: gap = c (1 - e^{-eps t / 2}) exactly."""
    grid = Grid(nx=101, nt=401, T=8.0)
    prob = bundle_problem("constant", PARAMS, grid)
    c = float(prob.f0.values[0])
    u = solve(prob)
    U = solve(prob, kind="limit")
    gap, sup_t = solution_gap(u, U)
    expect = abs(c) * (1.0 - np.exp(-0.5 * PARAMS.eps * u.t))
    assert np.max(np.abs(sup_t - expect)) < 1e-12


def test_solution_gap_single_mode_matches_kernels():
    grid = Grid(nx=201, nt=401, T=4.0)
    prob = bundle_problem("single-mode", PARAMS, grid)
    u = solve(prob)
    U = solve(prob, kind="limit")
    gap, sup_t = solution_gap(u, U)
    ke = modal_kernel(PARAMS, 1, u.t, 0)
    kl = limit_kernel(PARAMS.a, 1, u.t, 0)
    expect = np.abs(ke - np.exp(-0.5 * PARAMS.eps * u.t) * kl)
    assert np.max(np.abs(sup_t - expect)) < 1e-12


def test_solution_gap_validates_kinds_and_grids():
    grid = Grid(nx=101, nt=101, T=1.0)
    prob = bundle_problem("single-mode", PARAMS, grid)
    u = solve(prob)
    U = solve(prob, kind="limit")
    with pytest.raises(ValidationError):
        solution_gap(U, u)
    other = solve(prob, kind="limit", grid=Grid(nx=51, nt=101, T=1.0))
    with pytest.raises(ValidationError):
        solution_gap(u, other)


# ---------------------------------------------------------------------------
# constants from data and sweep fits

def test_data_constants_bump_second_derivative():
    grid = Grid(nx=801, nt=201, T=2.0)
    prob = bundle_problem("smooth-mixed", PARAMS, grid)
    consts = data_constants(prob, BoundExponents(), A=1.0, B=1.0, C=1.0)
    # K3 = sup|f0''| zeta(2) pi; the bump second derivative peaks at amp/width^2
    f0dd_sup = 1.0 / 0.2**2
    expect = f0dd_sup * (math.pi**2 / 6.0) * math.pi
    assert consts["K3"] == pytest.approx(expect, rel=1e-3)
    assert consts["K0"] > 0.0 and consts["H1"] > consts["H"]


def test_fit_constants_kernel_gap_report():
    t_grid = np.geomspace(0.01, 50.0, 17)
    rep = fit_constants(a=0.5, eps_values=[0.1, 0.05], t_grid=t_grid,
                        pairs=default_pairs(3), bound="kernel-gap")
    assert len(rep.rows) == 2 * 17 * 9
    assert rep.constants.A > 0.0
    assert rep.constants.provenance == "fitted"
    ratios = rep.meta["per_eps_max_ratio"]
    assert set(ratios) == {"0.1", "0.05"}
    assert all(v > 0.0 for v in ratios.values())
    assert rep.meta["skipped_underflow"] == 0
    # every row is finite and classified
    for row in rep.rows[:20]:
        assert row.regime in ("slow", "fast", "boundary")
        assert row.shape > 0.0


def test_fit_constants_nested_refinement_stable():
    # 33-point grid nests inside the 65-point grid; the fitted max must not move
    base = fit_constants(a=0.5, eps_values=[0.1, 0.05], t_grid=np.geomspace(0.01, 50.0, 33),
                         pairs=default_pairs(3), bound="kernel-gap")
    fine = fit_constants(a=0.5, eps_values=[0.1, 0.05], t_grid=np.geomspace(0.01, 50.0, 65),
                         pairs=default_pairs(3), bound="kernel-gap")
    assert fine.constants.A == pytest.approx(base.constants.A, rel=0.05)


def test_fit_constants_threaded_deterministic():
    t_grid = np.geomspace(0.01, 50.0, 9)
    a = fit_constants(a=0.5, eps_values=[0.1, 0.05, 0.02], t_grid=t_grid,
                      pairs=default_pairs(2), bound="viscous-norm", threads=1)
    b = fit_constants(a=0.5, eps_values=[0.1, 0.05, 0.02], t_grid=t_grid,
                      pairs=default_pairs(2), bound="viscous-norm", threads=4)
    assert len(a.rows) == len(b.rows)
    for ra, rb in zip(a.rows, b.rows):
        assert ra == rb


def test_fit_constants_solution_gap_with_explicit_aux():
    aux = BoundConstants(A=0.01, B=0.1, C=0.03, K0=6.0, K1=2.6, K2=0.8,
                         K3=130.0, H=0.04, H1=2.0, provenance="user")
    rep = fit_constants(a=0.5, eps_values=[0.1], t_grid=np.geomspace(0.1, 5.0, 5),
                        pairs=default_pairs(2), bound="solution-gap",
                        grid=Grid(nx=101, nt=501, T=5.0), aux=aux)
    assert rep.meta["aux"]["K0"] == 6.0
    assert rep.constants.K0 == 6.0
    assert all(r.shape > 0.0 for r in rep.rows)
    assert "slow_sup_per_eps" in rep.meta


def test_fit_constants_validation():
    with pytest.raises(ValidationError):
        fit_constants(a=0.5, eps_values=[], t_grid=np.array([1.0]),
                      pairs=default_pairs(2), bound="kernel-gap")
    with pytest.raises(ValidationError):
        fit_constants(a=0.5, eps_values=[1.5], t_grid=np.array([1.0]),
                      pairs=default_pairs(2), bound="kernel-gap")
    with pytest.raises(ValidationError):
        fit_constants(a=0.5, eps_values=[0.1], t_grid=np.array([-1.0]),
                      pairs=default_pairs(2), bound="kernel-gap")
    with pytest.raises(ValidationError):
        fit_constants(a=0.5, eps_values=[0.1], t_grid=np.array([1.0]),
                      pairs=[], bound="kernel-gap")
    with pytest.raises(ValidationError):
        fit_constants(a=0.5, eps_values=[0.1], t_grid=np.array([1.0]),
                      pairs=default_pairs(2), bound="no-such-bound")


def test_default_grids():
    t = default_times()
    assert t.size == 33 and t[0] == pytest.approx(0.01) and t[-1] == pytest.approx(50.0)
    pairs = default_pairs(4)
    assert len(pairs) == 16
    assert all(0.0 <= x <= math.pi and 0.0 <= xi <= math.pi for x, xi in pairs)
    assert BOUND_IDS == ("kernel-gap", "kernel-gap-rate", "viscous-norm", "solution-gap")


def test_proof_constants_invariants():
    pc = proof_constants(PARAMS, c=0.5)
    assert pc["N2"] == 19
    assert pc["band_gap_scaled"] <= pc["band_gap_cap"] + 1e-12
    assert pc["decay_rate"] > 0.0
    assert pc["zeta2"] == pytest.approx(math.pi**2 / 6.0, rel=1e-12)
    for a, eps in ((0.1, 0.02), (0.9, 0.8), (0.5, 0.3)):
        vals = proof_constants(MediumParams(a=a, eps=eps), c=0.5)
        assert all(np.isfinite(v) for v in vals.values())
