"""Poisson extension, boundary balayage and ``K = T o P`` on the unit disk.

Area integrals use the normalized measure ``da = dA / pi``.  In polar
coordinates ``da = (dt / 2pi) * 2r dr``, so the radial rule integrates
against ``2r dr`` and its weights sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle_fourier import AliasingError, CutoffError, TrigPolynomial

BRUTEFORCE_BUDGET = 10**9


@dataclass(frozen=True, eq=False)
class PolarGrid:
    """Radial nodes/weights for ``int_0^1 (.) 2r dr`` times ``M`` uniform angles.

    Nodes are Gauss-Legendre in ``s = r^2`` (so ``2r dr = ds``), which makes
    every product of harmonic monomials a polynomial in ``s`` and is
    integrated exactly up to degree ``2 Nr - 1``.
    """

    radii: np.ndarray
    weights: np.ndarray
    M: int

    @classmethod
    def gauss(cls, Nr: int = 64, M: int = 512, breaks=None) -> PolarGrid:
        """Gauss rule with ``Nr`` nodes per radial piece.

        ``breaks`` are interior radii splitting ``[0, 1]`` into pieces, used
        when a field is discontinuous across a circle.
        """
        x, w = np.polynomial.legendre.leggauss(Nr)
        edges = [0.0] + sorted(float(b) ** 2 for b in (breaks or ())) + [1.0]
        s_nodes, s_weights = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            s_nodes.append(lo + (hi - lo) * (x + 1) / 2)
            s_weights.append(w * (hi - lo) / 2)
        s = np.concatenate(s_nodes)
        radii = np.sqrt(s)
        weights = np.concatenate(s_weights)
        radii.flags.writeable = False
        weights.flags.writeable = False
        return cls(radii, weights, int(M))

    @property
    def Nr(self) -> int:
        return self.radii.size

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.M) / self.M

    @property
    def max_modes(self) -> int:
        """Largest boundary mode the angular transform resolves (Nyquist dropped)."""
        return self.M // 2 - 1

    def points(self) -> np.ndarray:
        """Complex grid points, shape ``(Nr, M)``."""
        return self.radii[:, None] * np.exp(1j * self.angles)[None, :]

    def with_weights(self, weights) -> PolarGrid:
        return PolarGrid(self.radii, np.asarray(weights, dtype=float), self.M)

    def refined(self, factor: int = 2) -> PolarGrid:
        return PolarGrid.gauss(self.Nr * factor, self.M * factor)


@dataclass(frozen=True, eq=False)
class PolarField:
    """Samples of a function on a :class:`PolarGrid`, shape ``(Nr, M)``."""

    grid: PolarGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.Nr, self.grid.M):
            raise ValueError(f"values shape {self.values.shape} does not match grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field has non-finite values")

    @classmethod
    def from_function(cls, grid: PolarGrid, func) -> PolarField:
        r = grid.radii[:, None]
        t = grid.angles[None, :]
        vals = np.asarray(func(r, t) + 0 * r * t)
        return cls(grid, vals)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def is_positive(self) -> bool:
        return bool(self.is_real and np.all(self.values > 0))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self):
        """``int_D G da`` by the grid rule."""
        return self.grid.weights @ self.values.mean(axis=1)

    def __mul__(self, other):
        if isinstance(other, PolarField):
            return PolarField(self.grid, self.values * other.values)
        return PolarField(self.grid, self.values * other)

    __rmul__ = __mul__

    def angular_modes(self) -> np.ndarray:
        """``g_n(r_j)`` in FFT order along the last axis."""
        return np.fft.fft(self.values, axis=1) / self.grid.M


def poisson_extend(h: TrigPolynomial, grid: PolarGrid) -> PolarField:
    """``P[h](r e^{it}) = sum_n c_n r^{|n|} e^{int}`` on the grid."""
    if 2 * h.N + 1 > grid.M:
        raise AliasingError(f"grid with M={grid.M} angles cannot carry N={h.N}")
    n = h.modes
    with np.errstate(under="ignore"):
        radial = grid.radii[:, None] ** np.abs(n)[None, :]
    spec = np.zeros((grid.Nr, grid.M), dtype=complex)
    spec[:, n % grid.M] = radial * h.coeffs[None, :]
    values = np.fft.ifft(spec, axis=1) * grid.M
    return PolarField(grid, values.real if h.is_real else values)


def balayage(G: PolarField, N: int | None = None) -> TrigPolynomial:
    """Boundary balayage ``(T G)(zeta) = int_D P_z(zeta) G(z) da(z)``.

    The Poisson kernel couples angular mode ``n`` of ``G`` only to boundary
    mode ``n``, with radial weight ``r^{|n|}``:
    ``(T G)^(n) = int_0^1 g_n(r) r^{|n|} 2r dr``.
    """
    grid = G.grid
    if N is None:
        N = grid.max_modes
    if N > grid.max_modes:
        raise CutoffError(f"N={N} exceeds the grid's resolvable modes {grid.max_modes}")
    g = G.angular_modes()
    n = np.arange(-N, N + 1)
    with np.errstate(under="ignore"):
        radial = grid.weights[:, None] * grid.radii[:, None] ** np.abs(n)[None, :]
    coeffs = np.einsum("jn,jn->n", radial, g[:, n % grid.M])
    return TrigPolynomial(coeffs, G.is_real)


def poisson_kernel(r, x):
    """``P_r(x) = (1 - r^2) / (1 - 2 r cos x + r^2)``, cancellation-free near ``r = 1``."""
    return (1 - r) * (1 + r) / ((1 - r) ** 2 + 4 * r * np.sin(x / 2) ** 2)


def _angular_count(r: float, base: int, tol: float) -> int:
    # trapezoid error for P_r against a mode below base/2 is ~ r^(count - base/2)
    if r <= 0:
        return base
    need = base // 2 + int(np.ceil(np.log(tol) / np.log(r))) + 1
    return max(base, need)


def balayage_bruteforce(G: PolarField, M_out: int, tol: float = 1e-14) -> np.ndarray:
    """Direct double quadrature of the Poisson kernel against ``G``.

    Independent of :func:`balayage`: at each radial node the angular
    integral is a trapezoid sum of the closed-form kernel over a grid fine
    enough that periodic images of the kernel are below ``tol``.  ``G`` is
    identified with its trigonometric interpolant (Nyquist mode dropped),
    which supplies values on the finer angular grid.

    Returns samples at ``phi_l = 2 pi l / M_out``.
    """
    grid = G.grid
    counts = [_angular_count(r, grid.M, tol) for r in grid.radii]
    work = sum(counts) * M_out
    if work > BRUTEFORCE_BUDGET:
        raise ValueError(f"brute-force balayage would need {work:.2e} kernel evaluations")
    half = grid.M // 2
    g = G.angular_modes()
    g[:, half] = 0  # Nyquist
    phi = 2 * np.pi * np.arange(M_out) / M_out
    out = np.zeros(M_out, dtype=complex)
    for j, (r, w, Mj) in enumerate(zip(grid.radii, grid.weights, counts)):
        spec = np.zeros(Mj, dtype=complex)
        spec[:half] = g[j, :half]
        spec[Mj - half + 1 :] = g[j, half + 1 :]
        fine = np.fft.ifft(spec) * Mj
        theta = 2 * np.pi * np.arange(Mj) / Mj
        acc = np.zeros(M_out, dtype=complex)
        chunk = max(1, 2_000_000 // Mj)
        for start in range(0, M_out, chunk):
            sl = slice(start, start + chunk)
            kern = poisson_kernel(r, phi[sl, None] - theta[None, :])
            acc[sl] = kern @ fine / Mj
        out += w * acc
    return out.real if G.is_real else out


def operator_K(h: TrigPolynomial, grid: PolarGrid) -> TrigPolynomial:
    """``K h = T(P[h])``; mode ``n`` is scaled by ``1/(|n|+1)``."""
    return balayage(poisson_extend(h, grid), N=h.N)


def fubini_check(h: TrigPolynomial, G: PolarField) -> tuple[complex, complex]:
    """Both sides of ``int_D P[h] G da = int_T h (T G) dm``."""
    lhs = (poisson_extend(h, G.grid) * G).integral()
    TG = balayage(G, N=h.N)
    rhs = np.sum(h.coeffs * TG.coeffs[::-1])
    if h.is_real and G.is_real:
        return float(np.real(lhs)), float(np.real(rhs))
    return complex(lhs), complex(rhs)


def poisson_moment(n: int, zeta: complex, Nr: int = 64, tol: float = 1e-14) -> tuple[complex, complex]:
    """``int_D z^n P_z(zeta) da(z)`` by direct quadrature, and ``zeta^n / (n+1)``.

    The radial rule is exact for ``n <= 2 Nr - 1``; the angular trapezoid
    rule is refined per radius so kernel aliasing stays below ``tol``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    grid = PolarGrid.gauss(Nr, M=2 * n + 2)
    phi = np.angle(zeta)
    total = 0j
    for r, w in zip(grid.radii, grid.weights):
        Mj = _angular_count(r, 2 * n + 2, tol)
        theta = 2 * np.pi * np.arange(Mj) / Mj
        vals = (r * np.exp(1j * theta)) ** n * poisson_kernel(r, phi - theta)
        total += w * vals.mean()
    return complex(total), complex(zeta**n / (n + 1))

