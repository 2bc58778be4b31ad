"""Executable audit of the quadrature-identity rigidity chain for one map.

Given a conformal map ``phi`` and a constant ``c``, the audit computes the
quadrature residuals, the boundary function ``b = conj(z) - 2ic conj(tau)``,
the Cauchy orthogonality moments, the holomorphic ``F`` with boundary
trace ``b``, the torsion-type function ``u`` and the integral identities
``4I + M = cB``, ``M - 4I = cB - 4c^2|Omega|`` and ``2I = c^2|Omega|``.

Arclength on the boundary always follows the map's declared convention,
``ds = sigma dt`` with ``sigma = e^{-L}``; for smooth (consistent) maps
this is the true ``|phi'|``.  Where the two differ, the discrepancy shows
up in the diagnostics rather than in an exception.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .conformal import ConformalMapRecord, area_from_coefficients, exp_neg_series, geometry, integrate_series
from .disk_ops import PolarGrid, PolarField
from .series import PowerSeries

DISK_TOL = 1e-8


class NotInHardySpace(ValueError):
    """The weighted boundary symbol has negative frequencies above tolerance."""

    def __init__(self, defect: float, tol: float):
        super().__init__(
            f"negative-frequency mass {defect:.3e} > {tol:.1e}: no F with boundary trace b "
            "exists (input fails the quadrature identity or is non-Smirnov)"
        )
        self.defect = defect


def _boundary_angles(M_b: int) -> np.ndarray:
    return 2 * np.pi * np.arange(M_b) / M_b


def _area_integral(values: np.ndarray, grid: PolarGrid) -> complex:
    """``int_D values dA`` (un-normalized area) on the grid."""
    return np.pi * (grid.weights @ values.mean(axis=1))


def quadrature_defects(rec: ConformalMapRecord, c: float, n_max: int, grid: PolarGrid, M_b: int) -> np.ndarray:
    """Signed ``int_D phi^n |phi'|^2 da - 2c int_T phi^n sigma dm``, ``n = 0..n_max``."""
    phi = rec.f.on_circles(grid.radii, grid.M)
    jac = np.abs(rec.fprime.on_circles(grid.radii, grid.M)) ** 2
    phib = rec.boundary(M_b)
    sigma = rec.sigma(M_b)
    out = np.empty(n_max + 1, dtype=complex)
    pw, pwb = np.ones_like(phi), np.ones_like(phib)
    for n in range(n_max + 1):
        out[n] = grid.weights @ (pw * jac).mean(axis=1) - 2 * c * np.mean(pwb * sigma)
        pw = pw * phi
        pwb = pwb * phib
    return out


def quadrature_residuals(rec, c, n_max=32, grid=None, M_b=4096) -> np.ndarray:
    """``R_n = |int_D phi^n |phi'|^2 da - 2c int_T phi^n sigma dm|``."""
    grid = grid or PolarGrid.gauss(64, 512)
    return np.abs(quadrature_defects(rec, c, n_max, grid, M_b))


def unit_tangent(rec: ConformalMapRecord, M_b: int) -> np.ndarray:
    t = _boundary_angles(M_b)
    dz = 1j * np.exp(1j * t) * rec.boundary_fprime(M_b)
    return dz / np.abs(dz)


def boundary_b(rec: ConformalMapRecord, c: float, M_b: int = 4096) -> np.ndarray:
    """Samples of ``b = conj(z) - 2ic conj(tau)`` on the boundary."""
    return np.conj(rec.boundary(M_b)) - 2j * c * np.conj(unit_tangent(rec, M_b))


def weighted_symbol(rec: ConformalMapRecord, c: float, M_b: int) -> np.ndarray:
    """``A`` with ``A i e^{it} dt = b dz``, i.e. ``A = conj(phi) phi' - 2c sigma e^{-it}``."""
    t = _boundary_angles(M_b)
    return np.conj(rec.boundary(M_b)) * rec.boundary_fprime(M_b) - 2 * c * rec.sigma(M_b) * np.exp(-1j * t)


def cauchy_orthogonality(rec, c, k_max=32, M_b=4096) -> np.ndarray:
    """``O_k = int_T phi^k A i e^{it} dm``, ``k = 0..k_max``."""
    t = _boundary_angles(M_b)
    dens = weighted_symbol(rec, c, M_b) * 1j * np.exp(1j * t)
    phib = rec.boundary(M_b)
    out = np.empty(k_max + 1, dtype=complex)
    pw = np.ones_like(phib)
    for k in range(k_max + 1):
        out[k] = np.mean(pw * dens)
        pw = pw * phib
    return out


@dataclass(frozen=True, eq=False)
class FBuild:
    """``F o phi`` as a series, the primitive ``G o phi`` and the Hardy defect."""

    F_phi: PowerSeries
    G_phi: PowerSeries
    F_defect: float
    boundary_dev: float


def build_F(rec: ConformalMapRecord, c: float, tol: float = 1e-9, M_b: int = 4096) -> FBuild:
    """Recover ``F o phi`` from the nonnegative frequencies of ``A``.

    ``(F o phi) phi'`` must be in ``H^1``, so ``A`` may not carry negative
    frequencies; their total magnitude is ``F_defect``.  ``1/phi'`` is the
    series ``e^{+F_nu}``.
    """
    A = weighted_symbol(rec, c, M_b)
    spec = np.fft.fft(A) / M_b
    N_s = rec.f.N_s if rec.mode != "taylor" else max(rec.f.N_s, 256)
    neg = spec[M_b // 2 + 1 :]
    defect = float(np.sum(np.abs(neg)))
    if defect > tol:
        raise NotInHardySpace(defect, tol)
    kmax = min(N_s, M_b // 2)
    A_plus = PowerSeries(spec[: kmax + 1])
    if rec.mode == "taylor":
        inv_fprime = _reciprocal(rec.fprime, N_s)
    else:
        inv_fprime = exp_neg_series(-1 * rec.F).padded(N_s)
    F_phi = A_plus.times(inv_fprime, N_s)
    G_phi = integrate_series(A_plus)
    dev = float(np.max(np.abs(F_phi.on_circle(1.0, M_b) - boundary_b(rec, c, M_b))))
    return FBuild(F_phi, G_phi, defect, dev)


def _reciprocal(s: PowerSeries, N_s: int) -> PowerSeries:
    """``1/s`` by long division (for maps given by Taylor data only)."""
    a = s.padded(N_s).taylor
    out = np.zeros(N_s + 1, dtype=complex)
    out[0] = 1 / a[0]
    for k in range(1, N_s + 1):
        out[k] = -np.dot(a[1 : k + 1], out[k - 1 :: -1][:k]) / a[0]
    return PowerSeries(out)


@dataclass(frozen=True, eq=False)
class USolution:
    """``v = u o phi`` on the grid and the normalizing constant ``C0``."""

    field: PolarField
    C0: float
    boundary_sup: float
    G_phi: PowerSeries


def build_u(rec: ConformalMapRecord, Fb: FBuild, c: float, grid=None, M_b: int = 4096) -> USolution:
    """``u = Re(G)/2 - |z|^2/4 + C0`` pulled back to the disk.

    ``C0`` makes the boundary mean of ``u o phi`` zero; the remaining
    boundary sup measures how far ``u`` is from vanishing on the boundary.
    """
    grid = grid or PolarGrid.gauss(64, 512)
    Gb = Fb.G_phi.on_circle(1.0, M_b)
    ub = 0.5 * Gb.real - 0.25 * np.abs(rec.boundary(M_b)) ** 2
    C0 = -float(np.mean(ub))
    Gi = Fb.G_phi.on_circles(grid.radii, grid.M)
    phi = rec.f.on_circles(grid.radii, grid.M)
    v = 0.5 * Gi.real - 0.25 * np.abs(phi) ** 2 + C0
    return USolution(PolarField(grid, v), C0, float(np.max(np.abs(ub + C0))), Fb.G_phi)


def gradient_and_normal_checks(rec, Fb: FBuild, c: float, grid=None, M_b: int = 4096) -> dict:
    """Gradient bound ``|F o phi - conj(phi)| / 2 <= c`` and ``du/dnu_in = c``."""
    grid = grid or PolarGrid.gauss(64, 512)
    Wg = Fb.F_phi.on_circles(grid.radii, grid.M) - np.conj(rec.f.on_circles(grid.radii, grid.M))
    sup_half = float(np.max(np.abs(Wg))) / 2
    tau = unit_tangent(rec, M_b)
    Wb = Fb.F_phi.on_circle(1.0, M_b) - np.conj(rec.boundary(M_b))
    dnu = 0.5 * np.real(1j * tau * Wb)
    return {
        "grad_sup_half": sup_half,
        "grad_bound_excess": max(0.0, sup_half - c),
        "normal_deriv_dev": float(np.max(np.abs(dnu - c))),
    }


def weinberger_identities(rec, U: USolution, c: float, grid=None, M_b: int = 4096) -> dict:
    """``I, M, B, |Omega|`` and the three identity defects."""
    grid = grid or U.field.grid
    phi = rec.f.on_circles(grid.radii, grid.M)
    jac = np.abs(rec.fprime.on_circles(grid.radii, grid.M)) ** 2
    I = float(np.real(_area_integral(U.field.values * jac, grid)))
    Mv = float(np.real(_area_integral(np.abs(phi) ** 2 * jac, grid)))
    B = float(2 * np.pi * np.mean(np.abs(rec.boundary(M_b)) ** 2 * rec.sigma(M_b)))
    area = area_from_coefficients(rec.f)
    return {
        "I": I,
        "M": Mv,
        "B": B,
        "area": area,
        "id1_defect": abs(4 * I + Mv - c * B),
        "id2_defect": abs((Mv - 4 * I) - (c * B - 4 * c**2 * area)),
        "volume_defect": abs(2 * I - c**2 * area),
    }


def _laplacian(poly: dict) -> dict:
    out: dict = {}
    for (i, j), coef in poly.items():
        if i >= 2:
            out[(i - 2, j)] = out.get((i - 2, j), 0.0) + coef * i * (i - 1)
        if j >= 2:
            out[(i, j - 2)] = out.get((i, j - 2), 0.0) + coef * j * (j - 1)
    return out


def _evaluate(poly: dict, z: np.ndarray) -> np.ndarray:
    x, y = z.real, z.imag
    total = np.zeros(z.shape)
    for (i, j), coef in poly.items():
        total = total + coef * x**i * y**j
    return total


def test_polynomials(degree: int) -> dict:
    """Monomials ``x^i y^j`` with ``i + j <= degree``, keyed by name."""
    return {f"x^{i}y^{d - i}": {(i, d - i): 1.0} for d in range(degree + 1) for i in range(d, -1, -1)}


def weak_serrin_residual(rec, U: USolution, c: float, polys, grid=None, M_b: int = 4096) -> dict:
    """``int u Lap(p) dA - [c oint p ds - int p dA]`` for each test polynomial.

    ``polys`` maps names to ``{(i, j): coef}`` dictionaries for
    ``sum coef x^i y^j``, or is an integer degree.
    """
    if isinstance(polys, int):
        polys = test_polynomials(polys)
    grid = grid or U.field.grid
    phi = rec.f.on_circles(grid.radii, grid.M)
    jac = np.abs(rec.fprime.on_circles(grid.radii, grid.M)) ** 2
    phib = rec.boundary(M_b)
    sigma = rec.sigma(M_b)
    out = {}
    for name, poly in polys.items():
        lap = _laplacian(poly)
        lhs = _area_integral(U.field.values * _evaluate(lap, phi) * jac, grid) if lap else 0.0
        boundary = c * 2 * np.pi * np.mean(_evaluate(poly, phib) * sigma)
        volume = _area_integral(_evaluate(poly, phi) * jac, grid)
        out[name] = float(np.real(lhs - (boundary - volume)))
    return out


def rigidity_verdict(rec: ConformalMapRecord, geo=None, tol: float = DISK_TOL) -> tuple[str, float]:
    geo = geo or geometry(rec)
    label = "DISK" if geo.circularity_deficit <= tol else "NON_DISK"
    return label, geo.circularity_deficit


@dataclass
class AuditReport:
    c: float
    mode: str
    a: float
    convention: str
    map_hash: str
    resolution: dict
    quad_residuals: list
    orth_residuals: list
    F_defect: float | None = None
    F_boundary_dev: float | None = None
    u_boundary_sup: float | None = None
    C0: float | None = None
    grad_bound_excess: float | None = None
    normal_deriv_dev: float | None = None
    I: float | None = None
    M: float | None = None
    B: float | None = None
    area: float | None = None
    id1_defect: float | None = None
    id2_defect: float | None = None
    volume_defect: float | None = None
    weak_serrin_residuals: dict = field(default_factory=dict)
    verdict: str = ""
    circularity_deficit: float = 0.0
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


def run_audit(
    rec: ConformalMapRecord,
    c: float | None = None,
    n_max: int = 32,
    k_max: int = 32,
    degree: int = 4,
    tol: float = 1e-9,
    grid: PolarGrid | None = None,
    M_b: int = 4096,
) -> AuditReport:
    """Full audit; never raises on a failing identity, only records it."""
    grid = grid or PolarGrid.gauss(64, 512)
    if c is None:
        if rec.C is None:
            raise ValueError("map carries no quadrature constant; pass c explicitly")
        c = rec.c
    if rec.mode == "singular":
        convention = "e^{-W} (singular inner factor unimodular)"
    else:
        convention = "|f'| (true arclength)"
    geo = geometry(rec, grid, M_b)
    verdict, deficit = rigidity_verdict(rec, geo)
    report = AuditReport(
        c=float(c),
        mode=rec.mode,
        a=rec.a,
        convention=convention,
        map_hash=rec.digest(),
        resolution={"Nr": grid.Nr, "M": grid.M, "M_b": M_b, "N_s": rec.f.N_s},
        quad_residuals=quadrature_residuals(rec, c, n_max, grid, M_b).tolist(),
        orth_residuals=np.abs(cauchy_orthogonality(rec, c, k_max, M_b)).tolist(),
        verdict=verdict,
        circularity_deficit=deficit,
        notes=["C0 normalizes the boundary mean of u to zero"],
    )
    try:
        Fb = build_F(rec, c, tol, M_b)
    except NotInHardySpace as exc:
        report.F_defect = exc.defect
        report.notes.append(str(exc))
        return report
    report.F_defect = Fb.F_defect
    report.F_boundary_dev = Fb.boundary_dev
    U = build_u(rec, Fb, c, grid, M_b)
    report.u_boundary_sup = U.boundary_sup
    report.C0 = U.C0
    checks = gradient_and_normal_checks(rec, Fb, c, grid, M_b)
    report.grad_bound_excess = checks["grad_bound_excess"]
    report.normal_deriv_dev = checks["normal_deriv_dev"]
    ids = weinberger_identities(rec, U, c, grid, M_b)
    for key, val in ids.items():
        setattr(report, key, val)
    report.weak_serrin_residuals = weak_serrin_residual(rec, U, c, degree, grid, M_b)
    return report


def format_report(report: AuditReport) -> str:
    rows = [
        ("c", report.c),
        ("mode", report.mode),
        ("a", report.a),
        ("boundary convention", report.convention),
        ("max quadrature residual", max(report.quad_residuals)),
        ("max orthogonality residual", max(report.orth_residuals)),
        ("F defect", report.F_defect),
        ("F boundary deviation", report.F_boundary_dev),
        ("u boundary sup", report.u_boundary_sup),
        ("gradient excess", report.grad_bound_excess),
        ("normal derivative dev", report.normal_deriv_dev),
        ("I", report.I),
        ("M", report.M),
        ("B", report.B),
        ("area", report.area),
        ("4I+M-cB", report.id1_defect),
        ("(M-4I)-(cB-4c^2|O|)", report.id2_defect),
        ("2I-c^2|O|", report.volume_defect),
        (
            "max weak-Serrin residual",
            max((abs(v) for v in report.weak_serrin_residuals.values()), default=None),
        ),
        ("verdict", f"{report.verdict} (deficit {report.circularity_deficit:.3e})"),
    ]
    width = max(len(k) for k, _ in rows)
    lines = []
    for key, val in rows:
        if val is None:
            text = "n/a"
        elif isinstance(val, float):
            text = f"{val:.6e}"
        else:
            text = str(val)
        lines.append(f"{key:<{width}}  {text}")
    return "\n".join(lines)
