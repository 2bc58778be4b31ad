import numpy as np
import pytest

from quaddomains.circle_fourier import MeasureSpec, TrigPolynomial, project_x4, riesz_product
from quaddomains.disk_ops import operator_K
from quaddomains.dss import (
    SolverConfig,
    apply_A_inv,
    contraction_estimate,
    dpsi,
    first_order_coefficient,
    fixed_point_defect,
    from_coords,
    psi,
    random_x4,
    solve_branch,
    solve_point,
    to_coords,
)

SMALL = dict(N=63, Nr=32, M=128)


def test_config_validation():
    with pytest.raises(ValueError, match="mode"):
        SolverConfig(mode="other")
    with pytest.raises(ValueError, match="start at 0"):
        SolverConfig(a_grid=(0.1,))
    with pytest.raises(ValueError, match="increasing"):
        SolverConfig(a_grid=(0.0, 0.2, 0.1))
    with pytest.raises(ValueError, match="angles"):
        SolverConfig(N=300, M=512)
    odd = MeasureSpec.explicit(TrigPolynomial.from_modes({0: 1.0, 2: 0.3}, 2))
    with pytest.raises(ValueError, match="4-fold"):
        SolverConfig(measure=odd)


def test_A_inverse_inverts_I_minus_2K(rng):
    cfg = SolverConfig(**SMALL)
    h = random_x4(rng, cfg.N)
    Ah = h - 2 * operator_K(h, cfg.grid)
    assert np.max(np.abs(apply_A_inv(project_x4(Ah)).coeffs - h.coeffs)) < 1e-13
    with pytest.raises(ValueError):
        apply_A_inv(TrigPolynomial.from_modes({0: 1.0}, 4))


def test_coords_round_trip(rng):
    h = random_x4(rng, 31)
    assert np.allclose(from_coords(to_coords(h, 31), 31).coeffs, h.coeffs)


def test_psi_vanishes_at_origin():
    for mode in ("singular", "consistent"):
        cfg = SolverConfig(mode=mode, **SMALL)
        P, logC = psi(TrigPolynomial.zeros(cfg.N), 0.0, cfg)
        assert P.sup_norm(cfg.M) < 1e-14
        assert logC == pytest.approx(0, abs=1e-14)


def test_dpsi_matches_finite_differences(rng):
    cfg = SolverConfig(mode="singular", **SMALL)
    W = 0.02 * random_x4(rng, cfg.N)
    H = random_x4(rng, cfg.N)
    a, eps = 0.03, 1e-5
    D = dpsi(W, a, cfg)(H)
    fd = (psi(W + eps * H, a, cfg)[0] - psi(W - eps * H, a, cfg)[0]) / (2 * eps)
    rel = (D - fd).sup_norm(cfg.M) / fd.sup_norm(cfg.M)
    assert rel < 1e-6


def test_first_order_formula_matches_linearization():
    # Psi(W, a) ~ (I - 2K) W - 2 a K mu + ... in singular mode, so W_1 = A^{-1} 2 K mu
    cfg = SolverConfig(mode="singular", **SMALL)
    mu = cfg.mu
    rhs = project_x4(2 * operator_K(mu, cfg.grid))
    W1 = apply_A_inv(rhs)
    for n in (4, 8):
        assert W1[n] == pytest.approx(first_order_coefficient(mu, n), abs=1e-14)
    assert first_order_coefficient(mu, 4) == pytest.approx(1 / 3)


def test_consistent_mode_closed_form():
    cfg = SolverConfig(mode="consistent", a_grid=(0.0, 0.02), **SMALL)
    pt = solve_point(0.02, cfg)
    assert (pt.W + 0.02 * project_x4(cfg.mu)).sup_norm(cfg.M) < 1e-9
    assert pt.logC == pytest.approx(-0.02, abs=1e-12)


def test_singular_point_converges_with_small_contraction():
    cfg = SolverConfig(mode="singular", a_grid=(0.0, 0.01), **SMALL)
    pt = solve_point(0.01, cfg)
    assert pt.residual <= cfg.tol_residual
    assert 0 < pt.contraction_est < 0.1
    assert pt.W[4].real / 0.01 == pytest.approx(1 / 3, abs=0.02)
    assert contraction_estimate(pt.W, 0.01, cfg) == pytest.approx(pt.contraction_est)


def test_newton_agrees_with_frozen_inverse():
    base = SolverConfig(mode="singular", a_grid=(0.0, 0.05), N=31, Nr=32, M=128)
    newton = SolverConfig(mode="singular", a_grid=(0.0, 0.05), N=31, Nr=32, M=128, use_newton=True)
    p1, p2 = solve_point(0.05, base), solve_point(0.05, newton)
    assert (p1.W - p2.W).sup_norm(128) < 1e-10
    assert p2.iterations <= p1.iterations


def test_branch_is_truncated_for_large_parameter():
    cfg = SolverConfig(mode="singular", a_grid=(0.0, 0.3125, 0.625, 1.25, 2.5), **SMALL)
    branch = solve_branch(cfg)
    assert branch.stop_reason in ("contraction_lost", "positivity_lost", "max_iter")
    assert branch.failed_a is not None and branch.failed_a > 0.3
    assert len(branch.points) >= 2
    assert branch.stop_detail


def test_fixed_point_defect_on_refined_grid(singular_branch):
    cfg = singular_branch.config
    for pt in singular_branch.points[1:3]:
        assert fixed_point_defect(pt, cfg) < 1e-9


def test_branch_points_are_quarter_turn_invariant(singular_branch):
    for pt in singular_branch.points:
        assert np.allclose(pt.W.rotated(1).coeffs, pt.W.coeffs, atol=1e-15)
        assert pt.W.mean == 0


def test_riesz_depth_one_branch_converges():
    cfg = SolverConfig(mode="singular", measure=riesz_product(1), a_grid=(0.0, 0.01, 0.02), **SMALL)
    branch = solve_branch(cfg)
    assert branch.stop_reason == "completed"
    W = branch.points[-1].W
    assert W[16].real / 0.02 == pytest.approx(first_order_coefficient(cfg.mu, 16), rel=0.1)
