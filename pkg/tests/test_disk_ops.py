import numpy as np
import pytest

from quaddomains.circle_fourier import AliasingError, CutoffError, TrigPolynomial
from quaddomains.disk_ops import (
    PolarField,
    PolarGrid,
    balayage,
    balayage_bruteforce,
    fubini_check,
    operator_K,
    poisson_extend,
    poisson_kernel,
    poisson_moment,
)


def random_field(rng, grid, modes=12):
    a = rng.standard_normal((3, modes)) + 1j * rng.standard_normal((3, modes))
    t = grid.angles[None, :, None]
    n = np.arange(modes)
    vals = sum((np.exp(1j * n * t) @ a[p]).real * grid.radii[:, None] ** p for p in range(3))
    return PolarField(grid, vals)


def test_grid_weights_and_exactness():
    grid = PolarGrid.gauss(16, 64)
    assert grid.weights.sum() == pytest.approx(1, abs=1e-14)
    assert np.all((grid.radii > 0) & (grid.radii < 1))
    # int_0^1 r^(2k) 2r dr = 1/(k+1), exact up to k = 2 Nr - 1
    for k in (0, 5, 31):
        assert grid.weights @ grid.radii ** (2 * k) == pytest.approx(1 / (k + 1), rel=1e-13)


def test_grid_with_break_keeps_exactness():
    grid = PolarGrid.gauss(8, 16, breaks=[0.9])
    assert grid.Nr == 16
    inside = grid.radii > 0.9
    assert grid.weights[inside].sum() == pytest.approx(1 - 0.81, abs=1e-14)


def test_field_rejects_nonfinite():
    grid = PolarGrid.gauss(4, 8)
    vals = np.ones((4, 8))
    vals[1, 2] = np.nan
    with pytest.raises(ValueError):
        PolarField(grid, vals)


def test_poisson_extend_monomials():
    grid = PolarGrid.gauss(8, 32)
    one = poisson_extend(TrigPolynomial.from_modes({0: 1.0}, 0), grid)
    assert np.allclose(one.values, 1, atol=1e-15)
    e4 = poisson_extend(TrigPolynomial.from_modes({4: 1.0}, 4, is_real=False), grid)
    assert np.allclose(e4.values, grid.points() ** 4, atol=1e-14)
    with pytest.raises(AliasingError):
        poisson_extend(TrigPolynomial.from_modes({20: 1.0}, 20), grid)


def test_poisson_extend_matches_kernel_quadrature(rng):
    N = 10
    h = TrigPolynomial(rng.standard_normal(2 * N + 1), True)
    r, theta = 0.7, 1.1
    grid = PolarGrid(np.array([r]), np.array([1.0]), 64)
    ext = poisson_extend(h, grid)
    # oracle: trapezoid rule on int P_z(zeta) h(zeta) dm, evaluated off-grid by rotation
    M = 4096
    t = 2 * np.pi * np.arange(M) / M
    direct = np.mean(poisson_kernel(r, theta - t) * h.sample(M))
    interp = sum(h[n] * r ** abs(n) * np.exp(1j * n * theta) for n in range(-N, N + 1)).real
    assert direct == pytest.approx(interp, abs=1e-10)
    k = 7
    direct_k = np.mean(poisson_kernel(r, grid.angles[k] - t) * h.sample(M))
    assert ext.values[0, k] == pytest.approx(direct_k, abs=1e-10)


def test_balayage_trivial_cases():
    grid = PolarGrid.gauss(16, 64)
    T1 = balayage(PolarField(grid, np.ones((16, 64))))
    assert T1[0] == pytest.approx(1, abs=1e-14)
    assert np.allclose(np.delete(T1.coeffs, T1.N), 0, atol=1e-15)
    z4 = PolarField(grid, grid.points() ** 4)
    assert balayage(z4)[4] == pytest.approx(0.2, abs=1e-14)
    with pytest.raises(CutoffError):
        balayage(z4, N=40)


@pytest.mark.parametrize("n", [0, 4, 12, -7, 31])
def test_operator_K_eigenvalues(n):
    grid = PolarGrid.gauss(64, 512)
    e = TrigPolynomial.from_modes({n: 1.0}, abs(n), is_real=False)
    Ke = operator_K(e, grid)
    assert np.max(np.abs(Ke.coeffs - e.coeffs / (abs(n) + 1))) < 1e-10


def test_bruteforce_oracle_agrees(rng):
    grid = PolarGrid.gauss(32, 128)
    ones = balayage_bruteforce(PolarField(grid, np.ones((32, 128))), 16)
    assert np.allclose(ones, 1, atol=1e-10)
    for _ in range(3):
        G = random_field(rng, grid)
        fast = balayage(G, N=15).sample(32)
        brute = balayage_bruteforce(G, 32)
        assert np.max(np.abs(fast - brute)) < 1e-8


def test_bruteforce_positive_for_bump():
    grid = PolarGrid.gauss(16, 64)
    bump = PolarField.from_function(grid, lambda r, t: np.exp(-20 * ((r * np.cos(t) - 0.5) ** 2 + (r * np.sin(t)) ** 2)))
    out = balayage_bruteforce(bump, 32)
    assert np.all(out >= 0)
    assert np.all(balayage(bump).sample(128) >= -1e-12)


def test_bruteforce_refuses_huge_work():
    grid = PolarGrid.gauss(64, 4096)
    with pytest.raises(ValueError, match="kernel evaluations"):
        balayage_bruteforce(PolarField(grid, np.ones((64, 4096))), 4096)


def test_fubini_examples(rng):
    grid = PolarGrid.gauss(32, 128)
    one = TrigPolynomial.from_modes({0: 1.0}, 0)
    lhs, rhs = fubini_check(one, PolarField(grid, np.ones((32, 128))))
    assert lhs == pytest.approx(1) and rhs == pytest.approx(1)
    # cos 4t against r^4 cos 4theta: 2 * (1/2)(1/2) * int r^8 2r dr = 1/10
    h = TrigPolynomial.from_modes({4: 0.5}, 4)
    G = PolarField.from_function(grid, lambda r, t: r**4 * np.cos(4 * t))
    lhs, rhs = fubini_check(h, G)
    assert lhs == pytest.approx(0.1, abs=1e-14)
    assert rhs == pytest.approx(0.1, abs=1e-14)
    for _ in range(5):
        h = TrigPolynomial(rng.standard_normal(33), True)
        lhs, rhs = fubini_check(h, random_field(rng, grid))
        assert lhs == pytest.approx(rhs, abs=1e-9)


@pytest.mark.parametrize(
    "n,zeta",
    [(4, 1.0), (1, 1j), (8, np.exp(1j * np.pi / 5)), (16, np.exp(2.3j))],
)
def test_poisson_moment(n, zeta):
    num, exact = poisson_moment(n, zeta)
    assert exact == pytest.approx(zeta**n / (n + 1))
    assert abs(num - exact) < 1e-9
