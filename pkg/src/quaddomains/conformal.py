"""Conformal maps ``f = int_0^z exp(-H[nu])`` and their geometry.

A map is synthesized from a real boundary datum ``nu = W dm + a mu`` by
power-series arithmetic: ``F = H[nu]``, ``f' = e^{-F}``, ``f = int f'``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .circle_fourier import MeasureSpec, TrigPolynomial, herglotz_coeffs
from .disk_ops import PolarGrid, poisson_extend
from .series import PowerSeries, UnderResolvedSeries

DEFAULT_SERIES = 1024


def exp_neg_series(F: PowerSeries) -> PowerSeries:
    """Taylor series of ``e^{-F}`` via ``g' = -F' g``.

    ``k g_k = -sum_{j=1}^{k} j F_j g_{k-j}``, ``g_0 = e^{-F_0}``.
    """
    a = F.taylor
    n = a.size
    if not np.isfinite(a[0]):
        raise ValueError("F_0 must be finite")
    jF = np.arange(n) * a
    g = np.zeros(n, dtype=complex)
    g[0] = np.exp(-a[0])
    for k in range(1, n):
        g[k] = -np.dot(jF[1 : k + 1], g[k - 1 :: -1][:k]) / k
    return PowerSeries(g, F.tail_tol)


def integrate_series(g: PowerSeries) -> PowerSeries:
    """Primitive vanishing at 0: ``f_0 = 0``, ``f_k = g_{k-1} / k``."""
    k = np.arange(1, g.N_s + 2)
    return PowerSeries(np.concatenate([[0], g.taylor / k]), g.tail_tol)


@dataclass(frozen=True, eq=False)
class ConformalMapRecord:
    """A synthesized map together with the data it was built from.

    ``W`` is the absolutely continuous weight, ``mu_part`` the measure
    contribution ``a mu`` (kept separate so the boundary-density convention
    can be applied), ``C`` the quadrature constant ``2c`` when known.
    """

    mode: str
    a: float
    W: TrigPolynomial
    mu_part: TrigPolynomial
    F: PowerSeries
    fprime: PowerSeries
    f: PowerSeries
    C: float | None = None

    @property
    def nu(self) -> TrigPolynomial:
        return self.W + self.mu_part

    @property
    def c(self) -> float | None:
        return None if self.C is None else 0.5 * self.C

    def boundary_log_density(self) -> TrigPolynomial:
        """``L`` with declared boundary speed ``|f'^*| = e^{-L}``."""
        if self.mode == "singular":
            return self.W
        return self.nu

    def sigma(self, M: int) -> np.ndarray:
        """Declared boundary density ``|f'^*|`` at ``M`` uniform angles."""
        if self.mode == "taylor":
            return np.abs(self.boundary_fprime(M))
        return np.exp(-values_at(self.boundary_log_density(), M))

    def boundary(self, M: int) -> np.ndarray:
        return self.f.on_circle(1.0, M)

    def boundary_fprime(self, M: int) -> np.ndarray:
        return self.fprime.on_circle(1.0, M)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.mode.encode())
        h.update(np.float64(self.a).tobytes())
        h.update(np.ascontiguousarray(self.f.taylor).tobytes())
        return h.hexdigest()[:16]


def map_from_density(
    W: TrigPolynomial,
    mu_part: TrigPolynomial,
    mode: str = "consistent",
    a: float = 0.0,
    C: float | None = None,
    N_s: int = DEFAULT_SERIES,
    check: bool = True,
) -> ConformalMapRecord:
    """Build ``f`` from ``nu = W + mu_part``; refuses under-resolved series."""
    nu = W + mu_part
    F = herglotz_coeffs(nu, N_s)
    fprime = exp_neg_series(F)
    if check and not fprime.is_resolved():
        need = estimate_truncation(fprime)
        raise UnderResolvedSeries(
            f"f' tail mass {fprime.tail_mass():.2e} above tolerance; try N_s >= {need}"
        )
    f = integrate_series(fprime).padded(N_s + 1)
    rec = ConformalMapRecord(mode, float(a), W, mu_part, F, fprime, f, C)
    if check and _is_four_fold(nu):
        off = np.abs(f.taylor[np.arange(f.N_s + 1) % 4 != 1])
        if off.size and off.max() > 1e-13:
            raise ValueError(f"4-fold equivariance broken: off-lattice coefficient {off.max():.2e}")
    return rec


def values_at(p: TrigPolynomial, M: int) -> np.ndarray:
    """Exact point values at ``2 pi j / M`` for any ``M`` (modes folded mod ``M``)."""
    spec = np.zeros(M, dtype=complex)
    np.add.at(spec, p.modes % M, p.coeffs)
    vals = np.fft.ifft(spec) * M
    return vals.real if p.is_real else vals


def _is_four_fold(p: TrigPolynomial) -> bool:
    return bool(np.all(p.coeffs[p.modes % 4 != 0] == 0))


def estimate_truncation(s: PowerSeries) -> int:
    """Crude ``N_s`` at which a geometrically decaying tail drops below tolerance."""
    mags = np.abs(s.taylor)
    k = np.flatnonzero(mags > 0)
    if k.size < 2:
        return s.N_s
    lo, hi = k[k.size // 2], k[-1]
    if mags[hi] >= mags[lo]:
        return 2 * s.N_s
    rate = (np.log(mags[hi]) - np.log(mags[lo])) / (hi - lo)
    need = hi + (np.log(s.tail_tol * 1e-2) - np.log(mags[hi])) / rate
    return int(min(max(need, s.N_s + 1), 64 * s.N_s))


def build_map(point, cfg, N_s: int = DEFAULT_SERIES) -> ConformalMapRecord:
    """Map for an accepted branch point: ``nu_a = W(a) dm + a mu``."""
    mu_part = point.a * cfg.mu
    return map_from_density(point.W, mu_part, cfg.mode, point.a, point.C, N_s)


def disk_map(radius: float = 1.0, N_s: int = 64) -> ConformalMapRecord:
    """``f(z) = radius * z`` with its quadrature constant ``C = radius``."""
    W = TrigPolynomial.zeros(0)
    mu_part = TrigPolynomial.from_modes({0: -np.log(radius)}, 0)
    return map_from_density(W, mu_part, "consistent", 0.0, radius, N_s)


def map_from_taylor(f_coeffs, C: float | None = None) -> ConformalMapRecord:
    """Record for an explicitly given polynomial map (no boundary datum).

    Used for synthetic checks; the boundary density is the true ``|f'|``,
    ``W`` and ``mu_part`` are left empty and ``F`` is unknown (empty).
    """
    f = PowerSeries(f_coeffs)
    empty = TrigPolynomial.zeros(0)
    return ConformalMapRecord("taylor", 0.0, empty, empty, PowerSeries([0]), f.derivative(), f, C)


# --- diagnostics ---------------------------------------------------------


def jacobian_crosscheck(rec: ConformalMapRecord, grid: PolarGrid) -> float:
    """Max over the grid of ``| |f'|^2 - exp(-2 P[nu]) |``."""
    fp = rec.fprime.on_circles(grid.radii, grid.M)
    Pnu = poisson_extend(rec.nu.with_cutoff(max(rec.nu.N, 0)), grid).values
    return float(np.max(np.abs(np.abs(fp) ** 2 - np.exp(-2 * Pnu))))


def schwarzian_sup(rec: ConformalMapRecord, grid: PolarGrid) -> float:
    """``sup (1 - |z|^2)^2 |S_f(z)|`` over the grid, ``S_f = -F'' - (F')^2 / 2``."""
    F1 = rec.F.derivative()
    F2 = F1.derivative()
    d1 = F1.on_circles(grid.radii, grid.M)
    d2 = F2.on_circles(grid.radii, grid.M)
    S = -d2 - 0.5 * d1**2
    weight = (1 - grid.radii**2)[:, None] ** 2
    return float(np.max(weight * np.abs(S)))


@dataclass(frozen=True)
class UnivalenceVerdict:
    simple: bool
    M_b: int
    crossings: tuple = ()
    min_abs_fprime: float = float("nan")


def polyline_crossings(points: np.ndarray, limit: int = 16) -> list[tuple[int, int]]:
    """Pairs of non-adjacent segments of the closed polyline that intersect.

    Sweep over segments sorted by their left x-coordinate; only segments
    whose x-ranges overlap are tested, with exact orientation predicates.
    """
    p = np.asarray(points, dtype=complex)
    n = p.size
    a, b = p, np.roll(p, -1)
    xlo = np.minimum(a.real, b.real)
    xhi = np.maximum(a.real, b.real)
    ylo = np.minimum(a.imag, b.imag)
    yhi = np.maximum(a.imag, b.imag)
    order = np.argsort(xlo, kind="stable")
    xs = xlo[order]
    stop = np.searchsorted(xs, xhi[order], side="right")
    counts = stop - np.arange(n) - 1
    counts = np.maximum(counts, 0)
    I = np.repeat(np.arange(n), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    J = I + 1 + offs
    si, sj = order[I], order[J]
    gap = np.abs(si - sj)
    keep = (gap != 1) & (gap != n - 1) & (gap != 0)
    keep &= (ylo[si] <= yhi[sj]) & (ylo[sj] <= yhi[si])
    si, sj = si[keep], sj[keep]

    def orient(p, q, r):
        return np.sign((q.real - p.real) * (r.imag - p.imag) - (q.imag - p.imag) * (r.real - p.real))

    o1 = orient(a[si], b[si], a[sj])
    o2 = orient(a[si], b[si], b[sj])
    o3 = orient(a[sj], b[sj], a[si])
    o4 = orient(a[sj], b[sj], b[si])
    hit = (o1 * o2 <= 0) & (o3 * o4 <= 0)
    found = sorted({(int(min(i, j)), int(max(i, j))) for i, j in zip(si[hit], sj[hit])})
    return found[:limit]


def univalence_check(rec: ConformalMapRecord, M_b: int | None = None) -> UnivalenceVerdict:
    """Boundary-polyline simplicity test; ``M_b >= 8 N_s`` samples."""
    if M_b is None:
        M_b = 8 * rec.f.N_s
    if M_b < 8 * rec.f.N_s:
        raise ValueError(f"M_b={M_b} below 8*N_s={8 * rec.f.N_s}")
    pts = rec.boundary(M_b)
    crossings = polyline_crossings(pts)
    min_fp = float(np.min(np.abs(rec.boundary_fprime(M_b))))
    return UnivalenceVerdict(not crossings, M_b, tuple(crossings), min_fp)


@dataclass(frozen=True)
class GeometryReport:
    area: float
    area_grid: float
    perimeter: float
    perimeter_true: float
    centroid: complex
    radius_mean: float
    radius_std: float
    circularity_deficit: float

    def as_dict(self) -> dict:
        return {
            "area": self.area,
            "area_grid": self.area_grid,
            "perimeter": self.perimeter,
            "perimeter_true": self.perimeter_true,
            "centroid": [self.centroid.real, self.centroid.imag],
            "radius_mean": self.radius_mean,
            "radius_std": self.radius_std,
            "circularity_deficit": self.circularity_deficit,
        }


def area_from_coefficients(f: PowerSeries) -> float:
    k = np.arange(f.N_s + 1)
    return float(np.pi * np.sum(k * np.abs(f.taylor) ** 2))


def geometry(rec: ConformalMapRecord, grid: PolarGrid | None = None, M_b: int = 4096) -> GeometryReport:
    """Area, perimeter, centroid and circularity of ``f(D)``.

    The perimeter follows the map's boundary convention,
    ``2 pi int e^{-L} dm``; ``perimeter_true`` integrates ``|f'|`` of the
    truncated series for comparison.
    """
    if grid is None:
        grid = PolarGrid.gauss(64, 512)
    area = area_from_coefficients(rec.f)
    fp = rec.fprime.on_circles(grid.radii, grid.M)
    jac = np.abs(fp) ** 2
    area_grid = float(np.pi * grid.weights @ jac.mean(axis=1))
    fz = rec.f.on_circles(grid.radii, grid.M)
    centroid = complex(np.pi * grid.weights @ (fz * jac).mean(axis=1) / area_grid)
    perimeter = float(2 * np.pi * np.mean(rec.sigma(M_b)))
    perimeter_true = float(2 * np.pi * np.mean(np.abs(rec.boundary_fprime(M_b))))
    rad = np.abs(rec.boundary(M_b) - centroid)
    mean, std = float(rad.mean()), float(rad.std())
    return GeometryReport(area, area_grid, perimeter, perimeter_true, centroid, mean, std, std / mean)


def moments_area(rec: ConformalMapRecord, n: int, grid: PolarGrid | None = None) -> complex:
    """``int_Omega z^n dA = int_D f^n |f'|^2 dA`` by the grid rule."""
    if grid is None:
        grid = PolarGrid.gauss(64, 512)
    fz = rec.f.on_circles(grid.radii, grid.M)
    jac = np.abs(rec.fprime.on_circles(grid.radii, grid.M)) ** 2
    return complex(np.pi * grid.weights @ (fz**n * jac).mean(axis=1))


def moments_contour(rec: ConformalMapRecord, n: int, M_b: int = 4096) -> complex:
    """``(1/2i) oint z^n conj(z) dz`` by the trapezoid rule on the boundary."""
    t = 2 * np.pi * np.arange(M_b) / M_b
    z = rec.boundary(M_b)
    dz = rec.boundary_fprime(M_b) * 1j * np.exp(1j * t)
    integral = 2 * np.pi * np.mean(z**n * np.conj(z) * dz)
    return complex(integral / 2j)


@dataclass(frozen=True)
class MomentCurve:
    n: int
    a: tuple
    values: tuple
    derivative: float | complex
    analytic_derivative: complex


def moment_value(mu: MeasureSpec, n: int, a: float, grid: PolarGrid) -> complex:
    """``M_n(a) = int_D z^n exp(-2 a P[mu]) da`` by the grid rule."""
    Pmu = poisson_extend(mu.density, grid).values
    z_n = grid.points() ** n
    return complex(grid.weights @ (z_n * np.exp(-2 * a * Pmu)).mean(axis=1))


def moment_curve(mu: MeasureSpec, n: int, a_list, grid: PolarGrid | None = None, h: float = 1e-3) -> MomentCurve:
    """Moments ``M_n(a)``, a central-difference slope at 0, and ``-2 mu^(-n)/(n+1)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if grid is None:
        grid = PolarGrid.gauss(64, 512)
    values = tuple(moment_value(mu, n, a, grid) for a in a_list)
    slope = (moment_value(mu, n, h, grid) - moment_value(mu, n, -h, grid)) / (2 * h)
    # int zeta^n dmu is the coefficient of e^{-int}
    analytic = -2 * mu.density[-n] / (n + 1)
    return MomentCurve(n, tuple(float(a) for a in a_list), values, slope, complex(analytic))
