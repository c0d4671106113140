"""Numerical substrate: uniform grids, trapezoid quadrature, discrete Fourier
integrals, Hermitian eigensolvers, dense solves and pseudoinverses.

All function spaces in this package are discretized on uniform grids over
bounded intervals; functions are stored as complex vectors per grid point
(dim = 1 for scalar spaces). Every operation here is a pure function on
immutable inputs with a deterministic summation order, so results are
bit-reproducible across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConditioningError, ShapeMismatchError, ValidationError

__all__ = [
    "Grid",
    "GridFunction",
    "quadrature",
    "inner_product",
    "norm",
    "dft",
    "inverse_dft",
    "hermitian_eig",
    "solve_hermitian",
    "pseudoinverse",
    "pseudoinverse_apply",
    "rng",
    "complex_unit_disc",
]


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D grid on [a, b] with n points inclusive of both endpoints."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValidationError(f"grid requires a < b, got [{self.a}, {self.b}]")
        if self.n < 2:
            raise ValidationError(f"grid requires n >= 2, got n={self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)

    def weights(self) -> np.ndarray:
        """Composite trapezoid weights (h at interior points, h/2 at ends)."""
        w = np.full(self.n, self.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def spans(self, lo: float, hi: float, tol: float = 1e-9) -> bool:
        return self.a - tol <= lo and hi <= self.b + tol


@dataclass(frozen=True)
class GridFunction:
    """A (possibly vector-valued) complex function sampled on a uniform grid.

    ``values`` has shape (grid.n, dim); dim = 1 represents scalar functions.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.grid.n:
            raise ShapeMismatchError(
                f"values shape {v.shape} incompatible with grid of {self.grid.n} points"
            )
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable, dim: int = 1) -> "GridFunction":
        x = grid.points()
        vals = np.asarray(fn(x), dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape != (grid.n, dim):
            vals = np.broadcast_to(vals, (grid.n, dim)).copy()
        return cls(grid, vals)

    def component(self, l: int) -> np.ndarray:
        return self.values[:, l]

    def same_layout(self, other: "GridFunction") -> bool:
        return self.grid == other.grid and self.dim == other.dim

    def __add__(self, other: "GridFunction") -> "GridFunction":
        if not self.same_layout(other):
            raise ShapeMismatchError("grid/dim mismatch in addition")
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        if not self.same_layout(other):
            raise ShapeMismatchError("grid/dim mismatch in subtraction")
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c) -> "GridFunction":
        return GridFunction(self.grid, self.values * complex(c))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)

    def to_json(self) -> dict:
        """Shared serialization format: values flattened component-major."""
        flat = self.values.T.reshape(-1)
        return {
            "a": self.grid.a,
            "b": self.grid.b,
            "dim": self.dim,
            "values": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GridFunction":
        dim = int(obj["dim"])
        raw = np.array([complex(re, im) for re, im in obj["values"]])
        if raw.size % dim != 0:
            raise ValidationError("serialized value count not divisible by dim")
        n = raw.size // dim
        grid = Grid(float(obj["a"]), float(obj["b"]), n)
        return cls(grid, raw.reshape(dim, n).T)

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "GridFunction":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def quadrature(f: GridFunction) -> np.ndarray:
    """Composite trapezoid approximation of the integral, componentwise.

    Returns a complex vector of length ``f.dim``.
    """
    return f.grid.weights() @ f.values


def integrate_values(grid: Grid, values: np.ndarray) -> complex | np.ndarray:
    """Trapezoid integral of raw samples (1-D array or (n, k) columns)."""
    return grid.weights() @ values


def inner_product(f: GridFunction, g: GridFunction) -> complex:
    """L2 inner product via quadrature, summed over components.

    Linear in the first argument, conjugate-linear in the second.
    """
    if not f.same_layout(g):
        raise ShapeMismatchError("grid/dim mismatch in inner product")
    integrand = np.sum(f.values * np.conj(g.values), axis=1)
    return complex(f.grid.weights() @ integrand)


def norm(f: GridFunction) -> float:
    return float(np.sqrt(max(inner_product(f, f).real, 0.0)))


def restrict(f: GridFunction, lo: float, hi: float) -> GridFunction:
    """Slice a grid function to the points inside [lo, hi] (uniformity kept)."""
    x = f.grid.points()
    mask = (x >= lo - 1e-12) & (x <= hi + 1e-12)
    idx = np.nonzero(mask)[0]
    if idx.size < 2:
        raise ShapeMismatchError("restriction window contains fewer than two grid points")
    sub = Grid(float(x[idx[0]]), float(x[idx[-1]]), int(idx.size))
    return GridFunction(sub, f.values[idx])


def dft(f: GridFunction, freqs: Sequence[float]) -> np.ndarray:
    """Quadrature Fourier integrals  \\int f(t) exp(-i t w_k) dt.

    Returns shape (len(freqs),) for scalar f, else (len(freqs), dim).
    """
    w = np.atleast_1d(np.asarray(freqs, dtype=float))
    t = f.grid.points()
    kernel = np.exp(-1j * np.outer(w, t)) * f.grid.weights()
    out = kernel @ f.values
    return out[:, 0] if f.dim == 1 else out


def inverse_dft(f: GridFunction, freqs: Sequence[float]) -> np.ndarray:
    """Quadrature inverse transform  (1/2pi) \\int f(t) exp(+i t w_k) dt."""
    w = np.atleast_1d(np.asarray(freqs, dtype=float))
    return dft(f, -w) / (2.0 * np.pi)


def _require_hermitian(m: np.ndarray, rel_tol: float = 1e-12) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    scale = max(np.linalg.norm(m), 1.0)
    if np.linalg.norm(m - m.conj().T) > rel_tol * scale:
        raise ValidationError("matrix is not Hermitian within tolerance")
    return m


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    m = _require_hermitian(m)
    w, v = np.linalg.eigh(m)
    return w, v


def solve_hermitian(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve m x = rhs for Hermitian positive definite m.

    Raises ConditioningError carrying the extreme eigenvalues when the
    spectrum is not safely positive.
    """
    w, v = hermitian_eig(m)
    rhs = np.asarray(rhs, dtype=complex)
    if w[-1] <= 0 or w[0] <= 1e-12 * w[-1]:
        raise ConditioningError(
            f"matrix not safely positive definite (eigs in [{w[0]:.3e}, {w[-1]:.3e}])",
            min_eig=float(w[0]),
            max_eig=float(w[-1]),
        )
    return v @ ((v.conj().T @ rhs) / w)


def pseudoinverse(m: np.ndarray, rel_cutoff: float) -> np.ndarray:
    """Moore-Penrose pseudoinverse, singular values below rel_cutoff*sigma_max
    treated as zero."""
    if not 0.0 < rel_cutoff < 1.0:
        raise ValidationError(f"rel_cutoff must lie in (0,1), got {rel_cutoff}")
    m = np.asarray(m, dtype=complex)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((m.shape[1], m.shape[0]), dtype=complex)
    keep = s > rel_cutoff * s[0]
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (vh.conj().T * inv) @ u.conj().T


def pseudoinverse_apply(m: np.ndarray, rhs: np.ndarray, rel_cutoff: float) -> np.ndarray:
    """Minimum-norm least-squares solution of m x = rhs."""
    return pseudoinverse(m, rel_cutoff) @ np.asarray(rhs, dtype=complex)


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def complex_unit_disc(gen: np.random.Generator, size) -> np.ndarray:
    """Uniform draws from the closed complex unit disc."""
    r = np.sqrt(gen.uniform(0.0, 1.0, size=size))
    theta = gen.uniform(0.0, 2.0 * np.pi, size=size)
    return r * np.exp(1j * theta)
