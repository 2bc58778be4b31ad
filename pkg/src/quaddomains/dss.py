"""Fixed-point solver for the quadrature-domain boundary datum.

Unknown: a real, mean-zero, quarter-turn-invariant boundary function ``W``
(modes in ``4Z \\ {0}``).  Given the measure density ``mu`` and a parameter
``a >= 0``, the interior Jacobian density is

    G_{W,a} = exp(-2 (P[W] + a P[mu]))

and the equation is ``T(G_{W,a}) = C e^{-L}`` on the circle for some
constant ``C > 0``, where ``L`` is the boundary log-weight:

* ``singular`` mode: ``L = W`` (the density of ``mu`` stands in for a
  singular measure, whose inner factor has unit boundary modulus);
* ``consistent`` mode: ``L = W + a mu`` (the density is taken at face
  value, giving a smooth domain).

The equation is written as ``Psi(W, a) = 0`` with
``Psi = project_x4(log T(G) + L)`` and solved by the frozen-inverse
iteration ``W <- W - A^{-1} Psi`` with ``A = I - 2K``, or by Newton.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .circle_fourier import MeasureSpec, TrigPolynomial, is_x4, project_x4, riesz_product, sample
from .disk_ops import PolarField, PolarGrid, balayage, poisson_extend

log = logging.getLogger(__name__)

MODES = ("singular", "consistent")
OVERFLOW_EXPONENT = 300.0


class SolverError(RuntimeError):
    """Base class for failures that leave the small-data regime."""

    reason = "solver_error"


class PositivityLost(SolverError):
    reason = "positivity_lost"


class OverflowGuard(SolverError):
    reason = "overflow"


class ContractionLost(SolverError):
    reason = "contraction_lost"


class NotConverged(SolverError):
    reason = "max_iter"


@dataclass(frozen=True)
class SolverConfig:
    N: int = 255
    Nr: int = 64
    M: int = 512
    mode: str = "singular"
    measure: MeasureSpec = field(default_factory=lambda: riesz_product(0))
    a_grid: tuple = (0.0,)
    tol_residual: float = 1e-11
    max_iter: int = 200
    use_newton: bool = False
    seed: int = 0
    contraction_samples: int = 5

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        grid = tuple(float(a) for a in self.a_grid)
        object.__setattr__(self, "a_grid", grid)
        if not grid or grid[0] != 0.0:
            raise ValueError("a_grid must start at 0")
        if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
            raise ValueError("a_grid must be strictly increasing")
        if self.tol_residual <= 0:
            raise ValueError("tol_residual must be positive")
        if 2 * self.N + 1 > self.M:
            raise ValueError(f"N={self.N} needs at least {2 * self.N + 1} angles, got M={self.M}")
        if self.measure.N > self.N:
            raise ValueError(f"measure cutoff {self.measure.N} exceeds N={self.N}")
        if not self.measure.is_four_fold():
            raise ValueError("measure must be 4-fold symmetric")

    @cached_property
    def grid(self) -> PolarGrid:
        return PolarGrid.gauss(self.Nr, self.M)

    @cached_property
    def mu(self) -> TrigPolynomial:
        return self.measure.density.with_cutoff(self.N)

    @cached_property
    def poisson_mu(self) -> PolarField:
        return poisson_extend(self.mu, self.grid)

    def with_resolution(self, factor: int) -> SolverConfig:
        """Same problem on a grid refined by ``factor`` (mode cutoff kept)."""
        return SolverConfig(
            N=self.N,
            Nr=self.Nr * factor,
            M=self.M * factor,
            mode=self.mode,
            measure=self.measure,
            a_grid=self.a_grid,
            tol_residual=self.tol_residual,
            max_iter=self.max_iter,
            use_newton=self.use_newton,
            seed=self.seed,
        )

    def echo(self) -> dict:
        return {
            "N": self.N,
            "Nr": self.Nr,
            "M": self.M,
            "mode": self.mode,
            "measure": {
                "kind": self.measure.kind,
                "depth": self.measure.depth,
                "mass": self.measure.mass,
            },
            "a_grid": list(self.a_grid),
            "tol_residual": self.tol_residual,
            "max_iter": self.max_iter,
            "use_newton": self.use_newton,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class BranchPoint:
    a: float
    W: TrigPolynomial
    logC: float
    residual: float
    contraction_est: float
    iterations: int
    stop_reason: str = "converged"

    @property
    def C(self) -> float:
        return float(np.exp(self.logC))

    @property
    def c(self) -> float:
        """Quadrature constant of the image domain, ``C / 2``."""
        return 0.5 * self.C


@dataclass
class Branch:
    config: SolverConfig
    points: list = field(default_factory=list)
    stop_reason: str = "completed"
    stop_detail: str = ""
    failed_a: float | None = None


# --- operators -----------------------------------------------------------


def log_density(W: TrigPolynomial, a: float, cfg: SolverConfig) -> TrigPolynomial:
    """Boundary log-weight ``L`` with ``|f'^*| = e^{-L}`` in the mode's convention."""
    if cfg.mode == "singular":
        return W
    return W + a * cfg.mu


def jacobian_field(W: TrigPolynomial, a: float, cfg: SolverConfig) -> PolarField:
    """``G_{W,a} = exp(-2 (P[W] + a P[mu]))`` on the solver grid."""
    PW = poisson_extend(W, cfg.grid)
    exponent = 2 * (W.sup_norm(cfg.M) + a * float(np.max(cfg.poisson_mu.values)))
    if exponent > OVERFLOW_EXPONENT:
        raise OverflowGuard(f"exponent bound {exponent:.1f} exceeds {OVERFLOW_EXPONENT}")
    return PolarField(cfg.grid, np.exp(-2 * (PW.values + a * cfg.poisson_mu.values)))


def _balayage_samples(G: PolarField, cfg: SolverConfig) -> np.ndarray:
    TG = balayage(G, N=cfg.N)
    vals = sample(TG, cfg.M)
    lo = float(np.min(vals))
    if lo <= 0:
        raise PositivityLost(f"balayage of the Jacobian density reaches {lo:.3e} <= 0")
    return vals


def psi(W: TrigPolynomial, a: float, cfg: SolverConfig) -> tuple[TrigPolynomial, float]:
    """``Psi(W, a)`` and ``log C``, the mean of ``log T(G) + L``."""
    vals = _balayage_samples(jacobian_field(W, a, cfg), cfg)
    s = TrigPolynomial.from_samples(np.log(vals), cfg.N) + log_density(W, a, cfg)
    return project_x4(s), s.mean


def apply_A_inv(h: TrigPolynomial, tol: float = 1e-13) -> TrigPolynomial:
    """Inverse of ``I - 2K`` on the quarter-turn class: mode ``n`` times ``(|n|+1)/(|n|-1)``."""
    if not is_x4(h, tol):
        raise ValueError("A^{-1} is only defined for mean-zero, 4-fold symmetric input")
    n = np.abs(h.modes)
    scale = np.ones(n.size)
    ok = n >= 4
    scale[ok] = (n[ok] + 1) / (n[ok] - 1)
    return TrigPolynomial(np.where(ok, h.coeffs * scale, 0), h.is_real)


def gamma_step(W: TrigPolynomial, a: float, cfg: SolverConfig) -> TrigPolynomial:
    """``W - A^{-1} Psi(W, a)``."""
    P, _ = psi(W, a, cfg)
    return project_x4(W - apply_A_inv(P))


def dpsi(W: TrigPolynomial, a: float, cfg: SolverConfig):
    """Directional derivative ``H -> D_W Psi(W, a)[H]``.

    ``H - 2 (T(G P[H]) / T(G) - mean)``, projected onto the quarter-turn
    class.  The same formula holds in both modes since ``dL/dW = I``.
    """
    G = jacobian_field(W, a, cfg)
    TG = _balayage_samples(G, cfg)

    def apply(H: TrigPolynomial) -> TrigPolynomial:
        PH = poisson_extend(H.with_cutoff(cfg.N), cfg.grid)
        Q = sample(balayage(G * PH, N=cfg.N), cfg.M)
        ratio = TrigPolynomial.from_samples(Q / TG, cfg.N, is_real=H.is_real)
        return project_x4(H - 2 * ratio)

    return apply


# --- real coordinates on the quarter-turn class ---------------------------


def x4_modes(N: int) -> np.ndarray:
    return np.arange(4, N + 1, 4)


def to_coords(p: TrigPolynomial, N: int) -> np.ndarray:
    n = x4_modes(N)
    c = np.array([p[k] for k in n])
    return np.concatenate([c.real, c.imag])


def from_coords(x: np.ndarray, N: int) -> TrigPolynomial:
    n = x4_modes(N)
    k = n.size
    c = x[:k] + 1j * x[k:]
    arr = np.zeros(2 * N + 1, dtype=complex)
    arr[N + n] = c
    arr[N - n] = np.conj(c)
    return TrigPolynomial(arr, True)


def jacobian_matrix(W: TrigPolynomial, a: float, cfg: SolverConfig) -> np.ndarray:
    """Dense matrix of ``D_W Psi`` in the real coordinates of :func:`to_coords`."""
    D = dpsi(W, a, cfg)
    dim = 2 * x4_modes(cfg.N).size
    J = np.empty((dim, dim))
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        J[:, i] = to_coords(D(from_coords(e, cfg.N)), cfg.N)
    return J


def newton_step(W: TrigPolynomial, a: float, cfg: SolverConfig) -> TrigPolynomial:
    P, _ = psi(W, a, cfg)
    J = jacobian_matrix(W, a, cfg)
    dx = np.linalg.solve(J, to_coords(P, cfg.N))
    return from_coords(to_coords(W, cfg.N) - dx, cfg.N)


def random_x4(rng: np.random.Generator, N: int, decay: float = 2.0) -> TrigPolynomial:
    """Random real quarter-turn-invariant polynomial, unit sup-norm."""
    n = x4_modes(N)
    c = (rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size)) / (n / 4.0) ** decay
    p = from_coords(np.concatenate([c.real, c.imag]), N)
    return p / p.sup_norm(4 * N + 4)


def contraction_estimate(W: TrigPolynomial, a: float, cfg: SolverConfig, step: float = 1e-6) -> float:
    """Largest sampled ratio ``||Gamma(W + dH) - Gamma(W)|| / ||dH||``."""
    rng = np.random.default_rng(cfg.seed)
    base = gamma_step(W, a, cfg)
    worst = 0.0
    for _ in range(cfg.contraction_samples):
        dH = step * random_x4(rng, cfg.N)
        moved = gamma_step(W + dH, a, cfg)
        ratio = (moved - base).sup_norm(cfg.M) / dH.sup_norm(cfg.M)
        worst = max(worst, ratio)
    return worst


# --- driver --------------------------------------------------------------


def solve_point(a: float, cfg: SolverConfig, W0: TrigPolynomial | None = None) -> BranchPoint:
    """Solve ``Psi(W, a) = 0`` starting from ``W0`` (default 0).

    Raises a :class:`SolverError` subclass when the iteration leaves the
    small-data regime.
    """
    W = TrigPolynomial.zeros(cfg.N) if W0 is None else project_x4(W0.with_cutoff(cfg.N))
    steps: list[float] = []
    for it in range(cfg.max_iter + 1):
        P, logC = psi(W, a, cfg)
        res = P.sup_norm(cfg.M)
        log.debug("a=%g iter=%d residual=%.3e", a, it, res)
        if res <= cfg.tol_residual:
            est = contraction_estimate(W, a, cfg)
            if est >= 1.0:
                raise ContractionLost(f"sampled Lipschitz ratio {est:.3f} >= 1 at a={a:g}")
            return BranchPoint(a, W, float(logC), float(res), float(est), it)
        if it == cfg.max_iter:
            break
        if cfg.use_newton:
            W_new = newton_step(W, a, cfg)
        else:
            W_new = project_x4(W - apply_A_inv(P))
        steps.append((W_new - W).sup_norm(cfg.M))
        W = W_new
        # three consecutive growing increments: the map is not contracting here
        if len(steps) >= 4 and all(steps[-k] > steps[-k - 1] for k in (1, 2, 3)):
            raise ContractionLost(
                f"step sizes grew {steps[-4]:.2e} -> {steps[-1]:.2e} at a={a:g}"
            )
    raise NotConverged(f"residual {res:.3e} above tol after {cfg.max_iter} iterations at a={a:g}")


def solve_branch(cfg: SolverConfig) -> Branch:
    """Warm-started continuation along ``cfg.a_grid``.

    The branch stops at the first parameter where the solver fails; the
    failure reason is recorded, never swallowed.
    """
    branch = Branch(cfg)
    W = None
    for a in cfg.a_grid:
        try:
            pt = solve_point(a, cfg, W)
        except SolverError as exc:
            branch.stop_reason = exc.reason
            branch.stop_detail = str(exc)
            branch.failed_a = a
            log.info("branch stopped at a=%g: %s", a, exc)
            break
        branch.points.append(pt)
        W = pt.W
    return branch


def fixed_point_defect(point: BranchPoint, cfg: SolverConfig, factor: int = 2) -> float:
    """``||T(G_{W,a}) - C e^{-L}||_inf`` re-evaluated on a grid refined by ``factor``."""
    fine = cfg.with_resolution(factor)
    TG = sample(balayage(jacobian_field(point.W, point.a, fine), N=fine.N), fine.M)
    L = sample(log_density(point.W.with_cutoff(fine.N), point.a, fine), fine.M)
    return float(np.max(np.abs(TG - point.C * np.exp(-L))))


def first_order_coefficient(mu: TrigPolynomial, n: int) -> complex:
    """Linearized branch ``W_1^(n) = 2 mu^(n) / (|n| - 1)`` in singular mode."""
    return 2 * mu[n] / (abs(n) - 1)
