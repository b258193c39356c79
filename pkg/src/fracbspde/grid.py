"""Periodic spatial grid, discrete Fourier transform, and norm estimators.

The continuum transform convention used throughout is

    F(f)(xi)  = int f(x) exp(+i xi x) dx,
    F^-1(c)(x) = (1/2pi) int c(xi) exp(-i xi x) dxi,

so discrete coefficients carry a dx weighting and approximate the continuum
Fourier integral of the field on the truncated domain.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import (
    EmptyEnsemble,
    GridMismatch,
    InvalidExponent,
    SymmetryViolation,
)

__all__ = [
    "Grid1D",
    "GridFunction",
    "SpectralCoeffs",
    "NormReport",
    "dft",
    "idft",
    "spectral_derivative",
    "holder_seminorm",
    "sobolev_norm",
    "l2_norm",
    "ensemble_process_norms",
    "pair_offsets",
    "write_field_csv",
    "read_field_csv",
    "grid_header",
]

# Above this size the Holder pair search restricts to dyadic offsets.
EXACT_PAIR_LIMIT = 4096


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [x_min, x_max) with n (a power of two) cells."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.x_max <= self.x_min:
            raise ValueError(f"empty interval [{self.x_min}, {self.x_max}]")
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two, got {self.n}")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        """Grid nodes x_j = x_min + j dx (x_max excluded, periodic wrap)."""
        return self.x_min + self.dx * np.arange(self.n)

    @cached_property
    def xi(self) -> np.ndarray:
        """Angular frequencies 2*pi*k/L in FFT ordering, k = 0..n/2-1, -n/2..-1."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def mode_index(self, k: int) -> int:
        """FFT array index of signed mode k."""
        if not -self.n // 2 <= k < self.n // 2:
            raise ValueError(f"mode {k} outside [-n/2, n/2)")
        return k % self.n

    @classmethod
    def default(cls, x_min: float = -32.0, x_max: float = 32.0, n: int = 2048) -> "Grid1D":
        return cls(x_min, x_max, n)


@dataclass(frozen=True)
class GridFunction:
    """Real field sampled on a Grid1D."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise GridMismatch(
                f"values shape {vals.shape} does not match grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: Grid1D, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.x), dtype=float))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self.grid, other.grid)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self.grid, other.grid)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, self.values * float(c))

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpectralCoeffs:
    """Complex Fourier coefficients in FFT ordering (continuum normalization)."""

    grid: Grid1D
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n,):
            raise GridMismatch(
                f"coeffs shape {c.shape} does not match grid n={self.grid.n}"
            )
        object.__setattr__(self, "coeffs", c)

    def mode(self, k: int) -> complex:
        return self.coeffs[self.grid.mode_index(k)]


@dataclass(frozen=True)
class NormReport:
    """Sup norm, Holder seminorm at exponent beta, Sobolev norm at gamma."""

    sup_norm: float
    holder_seminorm: float
    beta: float
    sobolev_norm: float | None = None
    gamma: float | None = None

    @property
    def holder_norm(self) -> float:
        return self.sup_norm + self.holder_seminorm


def _same_grid(g1: Grid1D, g2: Grid1D) -> None:
    if g1 != g2:
        raise GridMismatch(f"grids differ: {g1} vs {g2}")


def dft(f: GridFunction) -> SpectralCoeffs:
    """Forward transform with dx weighting: c_k = dx * sum_j f_j exp(+i xi_k x_j)."""
    g = f.grid
    # sum_j f_j exp(+2pi i jk/n) == n * ifft(f); the x_min offset enters as a phase
    raw = g.n * np.fft.ifft(f.values)
    return SpectralCoeffs(g, g.dx * raw * np.exp(1j * g.xi * g.x_min))


def idft(c: SpectralCoeffs, imag_tol: float = 1e-10) -> GridFunction:
    """Inverse transform; raises SymmetryViolation if the result is not real."""
    g = c.grid
    shifted = c.coeffs * np.exp(-1j * g.xi * g.x_min)
    vals = np.fft.fft(shifted) / g.length
    scale = max(1.0, float(np.max(np.abs(vals.real))))
    resid = float(np.max(np.abs(vals.imag)))
    if resid > imag_tol * scale:
        raise SymmetryViolation(
            f"imaginary residue {resid:.3e} exceeds {imag_tol:.1e} * {scale:.3e}"
        )
    return GridFunction(g, vals.real)


def spectral_derivative(f: GridFunction, order: int = 1) -> GridFunction:
    """k-th spatial derivative via the Fourier multiplier (-i xi)^k.

    The unpaired Nyquist mode is zeroed for odd orders so the result is real
    and the derivative matrix is exactly skew-symmetric on the grid.
    """
    if order < 0:
        raise InvalidExponent(f"derivative order must be >= 0, got {order}")
    if order == 0:
        return f
    g = f.grid
    # raw fft expands in exp(+i xi_k x), so d/dx multiplies by +i xi_k
    mult = (1j * g.xi) ** order
    if order % 2 == 1:
        mult[g.n // 2] = 0.0
    vals = np.real(np.fft.ifft(mult * np.fft.fft(f.values)))
    return GridFunction(g, vals)


def l2_norm(f: GridFunction) -> float:
    """Discrete L2 norm (sum f^2 dx)^(1/2)."""
    return float(np.sqrt(np.sum(f.values**2) * f.grid.dx))


def pair_offsets(n: int, exact_limit: int = EXACT_PAIR_LIMIT) -> np.ndarray:
    """Index offsets used in Holder pair searches.

    All offsets 1..n-1 when n <= exact_limit; otherwise dyadic strides
    {1,2,4,...} times {1..8}, which dominate the sup for Holder-regular fields.
    """
    if n <= exact_limit:
        return np.arange(1, n)
    offs = set()
    stride = 1
    while stride < n:
        for m in range(1, 9):
            if m * stride < n:
                offs.add(m * stride)
        stride *= 2
    return np.array(sorted(offs))


def holder_seminorm(f: GridFunction, beta: float) -> float:
    """sup over grid pairs of |f(x) - f(y)| / |x - y|^beta, beta in (0,1).

    Distances are Euclidean on the line (no periodic wrap), matching the
    definition of the seminorm on the truncated interval.
    """
    if not 0.0 < beta < 1.0:
        raise InvalidExponent(f"beta must lie in (0,1), got {beta}")
    vals = f.values
    dx = f.grid.dx
    best = 0.0
    for m in pair_offsets(f.grid.n):
        diff = float(np.max(np.abs(vals[m:] - vals[:-m])))
        best = max(best, diff / (m * dx) ** beta)
    return best


def sobolev_norm(f: GridFunction, gamma: float) -> float:
    """Spectral H^gamma norm (sum (1+xi^2)^gamma |c_k|^2 / L)^(1/2).

    gamma = 0 reproduces the discrete L2 norm by Parseval.
    """
    if gamma < 0.0:
        raise InvalidExponent(f"gamma must be >= 0, got {gamma}")
    g = f.grid
    c = dft(f).coeffs
    energy = np.sum((1.0 + g.xi**2) ** gamma * np.abs(c) ** 2) / g.length
    return float(np.sqrt(energy))


def _ensemble_time_reduce(sq: np.ndarray, dt: float, kind: str) -> np.ndarray:
    # sq has shape (paths, times, ...); reduce the time axis
    if kind == "s2":
        return sq.max(axis=1)
    if kind == "l2":
        # trapezoid in time; a single snapshot counts with full weight
        w = np.full(sq.shape[1], dt)
        if sq.shape[1] > 1:
            w[0] *= 0.5
            w[-1] *= 0.5
        return np.tensordot(sq, w, axes=([1], [0]))
    raise ValueError(f"unknown ensemble norm kind {kind!r}")


def ensemble_process_norms(
    values: np.ndarray,
    grid: Grid1D,
    dt: float,
    beta: float,
    kind: str = "s2",
    exact_limit: int = 512,
) -> NormReport:
    """Monte-Carlo estimators of the process-valued sup and Holder norms.

    values has shape (paths, times, n). kind = "s2" reduces time by a sup
    (pathwise running maximum), kind = "l2" by a trapezoid time integral; the
    path axis is always reduced by a mean, the space axis by sup / Holder
    quotients over the pair-offset set.
    """
    if not 0.0 < beta < 1.0:
        raise InvalidExponent(f"beta must lie in (0,1), got {beta}")
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2:  # single path
        arr = arr[None, :, :]
    if arr.ndim != 3 or arr.shape[0] == 0:
        raise EmptyEnsemble(f"expected nonempty (paths, times, n) array, got {arr.shape}")
    if arr.shape[2] != grid.n:
        raise GridMismatch(f"space axis {arr.shape[2]} does not match grid n={grid.n}")

    per_x = _ensemble_time_reduce(arr**2, dt, kind).mean(axis=0)
    sup = float(np.sqrt(per_x.max()))

    dx = grid.dx
    semi = 0.0
    for m in pair_offsets(grid.n, exact_limit=exact_limit):
        diff_sq = (arr[:, :, m:] - arr[:, :, :-m]) ** 2
        per_pair = _ensemble_time_reduce(diff_sq, dt, kind).mean(axis=0)
        semi = max(semi, float(np.sqrt(per_pair.max())) / (m * dx) ** beta)
    return NormReport(sup_norm=sup, holder_seminorm=semi, beta=beta)


def grid_header(grid: Grid1D) -> dict:
    """JSON-serializable grid descriptor."""
    return {"x_min": grid.x_min, "x_max": grid.x_max, "n": grid.n, "dx": grid.dx}


def write_field_csv(f: GridFunction, path: str, header_path: str | None = None) -> None:
    """Write a field as CSV rows (x, value); optional JSON grid header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "value"])
        for xj, vj in zip(f.grid.x, f.values):
            writer.writerow([repr(float(xj)), repr(float(vj))])
    if header_path is not None:
        with open(header_path, "w") as fh:
            json.dump(grid_header(f.grid), fh, sort_keys=True)
            fh.write("\n")


def read_field_csv(path: str, grid: Grid1D | None = None) -> GridFunction:
    """Read a (x, value) CSV; infers the grid from the x column if not given."""
    xs: list[float] = []
    vs: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader)
        if head[:2] != ["x", "value"]:
            raise ValueError(f"unexpected CSV header {head!r}")
        for row in reader:
            xs.append(float(row[0]))
            vs.append(float(row[1]))
    if grid is None:
        n = len(xs)
        dx = xs[1] - xs[0]
        grid = Grid1D(xs[0], xs[0] + n * dx, n)
    return GridFunction(grid, np.asarray(vs))
