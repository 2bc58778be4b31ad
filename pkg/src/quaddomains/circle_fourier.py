"""Fourier calculus for real functions and measures on the unit circle.

Functions on the circle are stored as their complex Fourier coefficients
``c_n``, ``-N <= n <= N``, with respect to the normalized arclength measure
``dm = dt / 2pi``.  A finite measure with a trigonometric-polynomial density
is stored the same way, so the total mass is ``c_0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import PowerSeries

REALITY_TOL = 1e-14


class AliasingError(ValueError):
    """Raised when a sampling grid is too coarse for the requested modes."""


class CutoffError(ValueError):
    """Raised when an operation would silently drop nonzero modes."""


class TrigPolynomial:
    """Coefficients ``c_n`` of ``sum_n c_n e^{int}`` for ``|n| <= N``.

    When ``is_real`` is set the coefficients are re-symmetrized on
    construction, ``c_n <- (c_n + conj(c_{-n})) / 2``.
    """

    __slots__ = ("coeffs", "is_real")

    def __init__(self, coeffs, is_real: bool = True):
        arr = np.array(coeffs, dtype=complex).ravel()
        if arr.size % 2 != 1:
            raise ValueError("coefficient array must have odd length 2N+1")
        if is_real:
            arr = 0.5 * (arr + np.conj(arr[::-1]))
        arr.flags.writeable = False
        self.coeffs = arr
        self.is_real = bool(is_real)

    # construction -----------------------------------------------------

    @classmethod
    def zeros(cls, N: int, is_real: bool = True) -> TrigPolynomial:
        return cls(np.zeros(2 * N + 1, dtype=complex), is_real)

    @classmethod
    def from_modes(cls, modes: dict, N: int, is_real: bool = True) -> TrigPolynomial:
        """Build from a ``{n: c_n}`` mapping.

        For real polynomials only one of ``n`` / ``-n`` needs to be given;
        the conjugate partner is filled in.
        """
        arr = np.zeros(2 * N + 1, dtype=complex)
        for n, c in modes.items():
            if abs(n) > N:
                raise CutoffError(f"mode {n} exceeds cutoff N={N}")
            arr[n + N] = c
            if is_real and n != 0 and -n not in modes:
                arr[-n + N] = np.conj(c)
        return cls(arr, is_real)

    @classmethod
    def from_samples(cls, values, N: int, is_real: bool | None = None) -> TrigPolynomial:
        """Discrete forward transform of samples at ``t_j = 2 pi j / M``.

        Modes above ``N`` present in the samples are discarded; this is the
        one place where truncation is the intended behaviour.
        """
        values = np.asarray(values)
        M = values.shape[-1]
        if M < 2 * N + 1:
            raise AliasingError(f"{M} samples cannot resolve N={N} (need >= {2 * N + 1})")
        if is_real is None:
            is_real = not np.iscomplexobj(values)
        spec = np.fft.fft(values) / M
        n = np.arange(-N, N + 1)
        return cls(spec[n % M], is_real)

    # basic access -----------------------------------------------------

    @property
    def N(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.N:
            return 0j
        return complex(self.coeffs[n + self.N])

    @property
    def mean(self) -> float:
        """The zeroth coefficient (integral against ``dm``)."""
        c0 = self.coeffs[self.N]
        return float(c0.real) if self.is_real else c0

    def __repr__(self) -> str:
        nz = np.flatnonzero(np.abs(self.coeffs) > 0) - self.N
        return f"TrigPolynomial(N={self.N}, is_real={self.is_real}, nonzero_modes={nz[:8].tolist()}...)"

    # arithmetic -------------------------------------------------------

    def with_cutoff(self, N: int) -> TrigPolynomial:
        """Zero-pad to a larger cutoff, or shorten if nothing is lost."""
        if N == self.N:
            return self
        if N > self.N:
            arr = np.zeros(2 * N + 1, dtype=complex)
            arr[N - self.N : N + self.N + 1] = self.coeffs
            return TrigPolynomial(arr, self.is_real)
        drop = np.concatenate([self.coeffs[: self.N - N], self.coeffs[self.N + N + 1 :]])
        if np.any(drop != 0):
            raise CutoffError(f"shortening to N={N} would drop nonzero modes")
        return TrigPolynomial(self.coeffs[self.N - N : self.N + N + 1], self.is_real)

    def _aligned(self, other: TrigPolynomial):
        N = max(self.N, other.N)
        return self.with_cutoff(N).coeffs, other.with_cutoff(N).coeffs

    def __add__(self, other):
        if isinstance(other, TrigPolynomial):
            a, b = self._aligned(other)
            return TrigPolynomial(a + b, self.is_real and other.is_real)
        out = self.coeffs.copy()
        out[self.N] += other
        return TrigPolynomial(out, self.is_real and np.isrealobj(other))

    __radd__ = __add__

    def __neg__(self):
        return TrigPolynomial(-self.coeffs, self.is_real)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, TrigPolynomial):
            return NotImplemented
        return TrigPolynomial(self.coeffs * scalar, self.is_real and np.isrealobj(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def sample(self, M: int) -> np.ndarray:
        return sample(self, M)

    def sup_norm(self, M: int | None = None) -> float:
        if M is None:
            M = max(64, 4 * self.N + 4)
        return float(np.max(np.abs(sample(self, M))))

    def rotated(self, quarter_turns: int = 1) -> TrigPolynomial:
        """Coefficients of ``t -> p(t + k pi/2)``, i.e. ``p(i^k zeta)``."""
        phase = (1j ** quarter_turns) ** self.modes
        return TrigPolynomial(self.coeffs * phase, self.is_real)


def sample(p: TrigPolynomial, M: int) -> np.ndarray:
    """Values ``sum_n c_n e^{i n t_j}`` at ``t_j = 2 pi j / M``."""
    if M < 2 * p.N + 1:
        raise AliasingError(f"M={M} angles alias modes up to N={p.N} (need M >= {2 * p.N + 1})")
    spec = np.zeros(M, dtype=complex)
    spec[p.modes % M] = p.coeffs
    values = np.fft.ifft(spec) * M
    if p.is_real:
        return values.real
    return values


def project_x4(p: TrigPolynomial) -> TrigPolynomial:
    """Keep only modes ``n`` in ``4Z \\ {0}``.

    The result is mean-zero and invariant under ``zeta -> i zeta``.
    """
    keep = (p.modes % 4 == 0) & (p.modes != 0)
    return TrigPolynomial(np.where(keep, p.coeffs, 0), p.is_real)


def is_x4(p: TrigPolynomial, tol: float = 0.0) -> bool:
    bad = (p.modes % 4 != 0) | (p.modes == 0)
    return bool(np.all(np.abs(p.coeffs[bad]) <= tol))


@dataclass(frozen=True)
class MeasureSpec:
    """A finite real measure on the circle with trigonometric-polynomial density.

    ``kind`` is ``"riesz_product"`` (with ``depth``) or ``"explicit"``.
    """

    kind: str
    density: TrigPolynomial
    depth: int | None = None

    @property
    def mass(self) -> float:
        return self.density.mean

    @property
    def N(self) -> int:
        return self.density.N

    def is_four_fold(self, tol: float = 0.0) -> bool:
        p = self.density
        off = p.modes % 4 != 0
        return bool(np.all(np.abs(p.coeffs[off]) <= tol))

    @classmethod
    def explicit(cls, density: TrigPolynomial) -> MeasureSpec:
        if not density.is_real:
            raise ValueError("measure density must be real")
        return cls("explicit", density)


def riesz_cutoff(K: int) -> int:
    """Highest frequency of the depth-``K`` partial product, ``sum_k 4 3^k``."""
    return 2 * (3 ** (K + 1) - 1)


def riesz_product(K: int, N: int | None = None) -> MeasureSpec:
    """Partial Riesz product ``prod_{k=0}^{K} (1 + cos(4 3^k t))``.

    Frequencies are lacunary enough that every ``m = sum eps_k q_k`` with
    ``eps_k in {-1, 0, 1}`` has a unique representation, so coefficients
    are exactly ``2^{-#nonzero eps}``.
    """
    if K < 0:
        raise ValueError("depth K must be >= 0")
    need = riesz_cutoff(K)
    if N is None:
        N = need
    if N < need:
        raise CutoffError(f"riesz_product({K}) needs N >= {need}, got {N}")
    terms = {0: 1.0}
    for k in range(K + 1):
        q = 4 * 3**k
        nxt: dict[int, float] = {}
        for m, c in terms.items():
            for shift, weight in ((0, 1.0), (q, 0.5), (-q, 0.5)):
                nxt[m + shift] = nxt.get(m + shift, 0.0) + c * weight
        terms = nxt
    arr = np.zeros(2 * N + 1, dtype=complex)
    for m, c in terms.items():
        arr[m + N] = c
    return MeasureSpec("riesz_product", TrigPolynomial(arr, True), depth=K)


def herglotz_coeffs(nu, N_s: int | None = None) -> PowerSeries:
    """Taylor coefficients of ``int (zeta + z)/(zeta - z) d nu(zeta)``.

    ``F_0 = c_0`` and ``F_k = 2 c_k`` for ``k >= 1``; the real part of the
    series is the Poisson extension of ``nu``.
    """
    p = nu.density if isinstance(nu, MeasureSpec) else nu
    if not p.is_real:
        raise ValueError("Herglotz transform is defined here for real measures")
    if N_s is None:
        N_s = p.N
    taylor = np.zeros(N_s + 1, dtype=complex)
    taylor[0] = p[0]
    kmax = min(N_s, p.N)
    if np.any(np.abs(p.coeffs[p.N + kmax + 1 :]) > 0):
        raise CutoffError(f"N_s={N_s} is below the measure cutoff N={p.N}")
    taylor[1 : kmax + 1] = 2 * p.coeffs[p.N + 1 : p.N + kmax + 1]
    return PowerSeries(taylor)


def holder_estimate(p, alpha: float, M: int) -> float:
    """Discrete lower bound for ``||p||_{C^alpha}`` from ``M`` samples.

    Returns the sup-norm plus the largest quotient
    ``|p(xi) - p(eta)| / |xi - eta|^alpha`` over all sample pairs, with
    ``|xi - eta|`` the chordal distance.  ``p`` may also be an array of
    samples on a uniform grid.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    v = sample(p, M) if isinstance(p, TrigPolynomial) else np.asarray(p)
    M = v.size
    sup = float(np.max(np.abs(v)))
    semi = 0.0
    for d in range(1, M // 2 + 1):
        chord = 2.0 * np.sin(np.pi * d / M)
        diff = np.max(np.abs(np.roll(v, -d) - v))
        semi = max(semi, diff / chord**alpha)
    return sup + semi
