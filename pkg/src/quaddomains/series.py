"""Truncated Taylor series of holomorphic functions on the unit disk."""

from __future__ import annotations

import numpy as np

DEFAULT_TAIL_TOL = 1e-10


class UnderResolvedSeries(ValueError):
    """Raised when a series' top-decile coefficients exceed the tail tolerance."""


class PowerSeries:
    """Taylor coefficients ``a_0, ..., a_Ns`` of a function holomorphic in the disk.

    The coefficient array is stored read-only; all operations return new
    instances.
    """

    __slots__ = ("taylor", "tail_tol")

    def __init__(self, taylor, tail_tol: float = DEFAULT_TAIL_TOL):
        arr = np.array(taylor, dtype=complex).ravel()
        if arr.size == 0:
            arr = np.zeros(1, dtype=complex)
        arr.flags.writeable = False
        self.taylor = arr
        self.tail_tol = float(tail_tol)

    @property
    def N_s(self) -> int:
        return self.taylor.size - 1

    def __getitem__(self, k: int) -> complex:
        if k < 0 or k > self.N_s:
            return 0j
        return complex(self.taylor[k])

    def __repr__(self) -> str:
        return f"PowerSeries(N_s={self.N_s}, a0={self.taylor[0]:.3g})"

    def __add__(self, other: PowerSeries) -> PowerSeries:
        n = max(self.N_s, other.N_s)
        return PowerSeries(self.padded(n).taylor + other.padded(n).taylor, self.tail_tol)

    def __sub__(self, other: PowerSeries) -> PowerSeries:
        n = max(self.N_s, other.N_s)
        return PowerSeries(self.padded(n).taylor - other.padded(n).taylor, self.tail_tol)

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            return self.times(other)
        return PowerSeries(self.taylor * other, self.tail_tol)

    __rmul__ = __mul__

    def padded(self, N_s: int) -> PowerSeries:
        """Zero-pad (or losslessly shorten) to truncation ``N_s``."""
        if N_s >= self.N_s:
            out = np.zeros(N_s + 1, dtype=complex)
            out[: self.taylor.size] = self.taylor
            return PowerSeries(out, self.tail_tol)
        if np.any(self.taylor[N_s + 1 :] != 0):
            raise ValueError(f"shortening to N_s={N_s} would drop nonzero coefficients")
        return PowerSeries(self.taylor[: N_s + 1], self.tail_tol)

    def times(self, other: PowerSeries, N_s: int | None = None) -> PowerSeries:
        """Cauchy product truncated at ``N_s`` (default: the larger truncation)."""
        if N_s is None:
            N_s = max(self.N_s, other.N_s)
        prod = np.convolve(self.taylor, other.taylor)[: N_s + 1]
        out = np.zeros(N_s + 1, dtype=complex)
        out[: prod.size] = prod
        return PowerSeries(out, self.tail_tol)

    def derivative(self) -> PowerSeries:
        k = np.arange(1, self.N_s + 1)
        return PowerSeries(self.taylor[1:] * k, self.tail_tol)

    def tail_mass(self) -> float:
        """Sum of ``|a_k|`` over the top decile of indices."""
        start = self.N_s - max(1, (self.N_s + 1) // 10) + 1
        return float(np.sum(np.abs(self.taylor[start:])))

    def is_resolved(self) -> bool:
        return self.tail_mass() < self.tail_tol

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.polynomial.polynomial.polyval(z, self.taylor)

    def on_circle(self, r: float, M: int) -> np.ndarray:
        """Values at ``r e^{2 pi i k / M}``, exact up to rounding for any ``N_s``.

        Coefficients are folded modulo ``M`` before the inverse FFT, which
        is an identity at the sample points.
        """
        return self.on_circles(np.array([r], dtype=float), M)[0]

    def on_circles(self, radii, M: int) -> np.ndarray:
        radii = np.asarray(radii, dtype=float)
        k = np.arange(self.N_s + 1)
        with np.errstate(under="ignore"):
            scaled = self.taylor[None, :] * radii[:, None] ** k[None, :]
        pad = (-scaled.shape[1]) % M
        if pad:
            scaled = np.concatenate([scaled, np.zeros((radii.size, pad), dtype=complex)], axis=1)
        folded = scaled.reshape(radii.size, -1, M).sum(axis=1)
        return np.fft.ifft(folded, axis=1) * M
