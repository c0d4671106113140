"""Functional families and average-sampling profiles.

A functional family maps an index value alpha to a concrete linear functional
(or operator into C^dim) acting on grid functions: Fourier coefficients,
local averages, point evaluations, and inner-product point evaluations.
Families carry a JSON descriptor so sample sets and experiment configs can
round-trip through files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .core import Grid, GridFunction, integrate_values
from .exceptions import DomainError, ShapeMismatchError, ValidationError

__all__ = [
    "AverageFunctional",
    "FunctionalFamily",
    "FourierCoefficientFamily",
    "AverageSamplingFamily",
    "PointEvaluationFamily",
    "PointInnerFamily",
    "family_from_descriptor",
    "SampleSet",
    "average_sample",
]

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# average profiles: nonnegative, unit mass, supported on [-delta, delta]
# ---------------------------------------------------------------------------

def _box(delta: float) -> Callable:
    # relative slack keeps support endpoints inside despite centering roundoff
    edge = delta * (1.0 + 1e-9)

    def profile(t):
        t = np.asarray(t, dtype=float)
        return np.where(np.abs(t) <= edge, 1.0 / (2.0 * delta), 0.0)

    return profile


def _triangle(delta: float) -> Callable:
    def profile(t):
        t = np.asarray(t, dtype=float)
        return np.maximum(1.0 - np.abs(t) / delta, 0.0) / delta

    return profile


def _raised_cosine(delta: float) -> Callable:
    def profile(t):
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) <= delta
        return np.where(inside, (1.0 + np.cos(np.pi * t / delta)) / (2.0 * delta), 0.0)

    return profile


# Closed-form transforms m(w) = \int profile(t) exp(-i w t) dt of the centered
# profiles (real and even); used by tests as oracles and by the density
# diagnostic when very deep periodization tails are required.

def _sinc(z):
    return np.sinc(np.asarray(z) / np.pi)


def _box_hat(delta):
    return lambda w: _sinc(delta * np.asarray(w))


def _triangle_hat(delta):
    return lambda w: _sinc(delta * np.asarray(w) / 2.0) ** 2


def _raised_cosine_hat(delta):
    def m(w):
        w = np.asarray(w, dtype=float)
        num = _sinc(delta * w)
        den = 1.0 - (delta * w / np.pi) ** 2
        # removable singularity at delta*w = pi, where the limit is 1/2*sinc'(..)
        safe = np.abs(den) > 1e-8
        out = np.empty_like(w)
        out[safe] = num[safe] / den[safe]
        out[~safe] = 0.5  # limit of sinc(x)/(1-(x/pi)^2) at x = pi
        return out

    return m


PROFILES = {"box": _box, "triangle": _triangle, "cosine": _raised_cosine}
PROFILE_TRANSFORMS = {"box": _box_hat, "triangle": _triangle_hat, "cosine": _raised_cosine_hat}


@dataclass(frozen=True)
class AverageFunctional:
    """Local average functional L(f) = \\int f(t) u(t) dt with a nonnegative
    unit-mass profile u supported on [x - delta, x + delta]."""

    x: float
    delta: float
    profile_name: str = "box"

    def __post_init__(self):
        if self.delta <= 0:
            raise ValidationError(f"delta must be positive, got {self.delta}")
        if self.profile_name not in PROFILES:
            raise ValidationError(f"unknown profile {self.profile_name!r}")
        mass = self._mass()
        if abs(mass - 1.0) > 1e-8:
            raise ValidationError(f"profile mass {mass} deviates from 1")

    def _centered(self) -> Callable:
        return PROFILES[self.profile_name](self.delta)

    def _mass(self) -> float:
        g = self.quad_grid(4097)
        vals = self._centered()(g.points() - self.x)
        return float(integrate_values(g, vals).real)

    @property
    def support(self) -> tuple[float, float]:
        return (self.x - self.delta, self.x + self.delta)

    def evaluate(self, t) -> np.ndarray:
        """Profile values u_x(t); vectorized, real and nonnegative."""
        return self._centered()(np.asarray(t, dtype=float) - self.x)

    def quad_grid(self, n: int = 4097) -> Grid:
        lo, hi = self.support
        return Grid(lo, hi, int(n))

    def _quad_transform(self, omega: np.ndarray, sign: float, quad_n: int) -> np.ndarray:
        g = self.quad_grid(quad_n)
        t = g.points()
        weighted = (self.evaluate(t) * g.weights()).astype(complex)
        out = np.empty(omega.size, dtype=complex)
        chunk = max(1, 4_000_000 // max(t.size, 1))
        for s in range(0, omega.size, chunk):
            om = omega[s : s + chunk]
            out[s : s + chunk] = np.exp(sign * 1j * np.outer(om, t)) @ weighted
        return out

    def transform(self, omega, quad_n: int = 4097, closed_form: bool = True) -> np.ndarray:
        """u_x^ at the given frequencies: \\int u_x(s) exp(-i omega s) ds.

        The centered profiles have closed-form transforms; the quadrature
        path is kept for cross-checks (closed_form=False).
        """
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        if closed_form:
            m = PROFILE_TRANSFORMS[self.profile_name](self.delta)
            return np.exp(-1j * omega * self.x) * m(omega)
        return self._quad_transform(omega, -1.0, quad_n)

    def inverse_transform(self, omega, quad_n: int = 4097, closed_form: bool = False) -> np.ndarray:
        """u_x^v at the given frequencies: (1/2pi) \\int u_x(s) exp(+i omega s) ds.

        Evaluated by quadrature on the refined support grid by default.
        """
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        if closed_form:
            return np.conj(self.transform(omega)) / TWO_PI
        return self._quad_transform(omega, +1.0, quad_n) / TWO_PI

    def descriptor(self) -> dict:
        return {"x": self.x, "delta": self.delta, "profile": self.profile_name}


# ---------------------------------------------------------------------------
# interpolation of grid functions onto off-grid points
# ---------------------------------------------------------------------------

def interpolate_values(f: GridFunction, points: np.ndarray, method: str = "cubic") -> np.ndarray:
    """Evaluate a grid function at arbitrary points inside its grid.

    Returns shape (len(points), dim). Cubic interpolation keeps the error at
    O(h^4) for smooth signals; linear is exact for piecewise-linear signals
    whose breakpoints lie on the grid.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size and (pts.min() < f.grid.a - 1e-9 or pts.max() > f.grid.b + 1e-9):
        raise DomainError("interpolation points escape the grid")
    x = f.grid.points()
    out = np.empty((pts.size, f.dim), dtype=complex)
    for l in range(f.dim):
        col = f.values[:, l]
        if method == "linear":
            out[:, l] = np.interp(pts, x, col.real) + 1j * np.interp(pts, x, col.imag)
        elif method == "cubic":
            out[:, l] = CubicSpline(x, col)(pts)
        else:
            raise ValidationError(f"unknown interpolation method {method!r}")
    return out


def average_sample(
    f: GridFunction,
    u: AverageFunctional,
    refine: int = 8,
    interp: str = "cubic",
) -> complex | np.ndarray:
    """Quadrature of f * u over the support of u on a refined local subgrid.

    The subgrid spacing is the signal grid spacing divided by ``refine``.
    Returns a complex scalar for scalar f, else a vector of per-component
    averages.
    """
    lo, hi = u.support
    if not f.grid.spans(lo, hi):
        raise DomainError(
            f"support [{lo}, {hi}] escapes the signal grid [{f.grid.a}, {f.grid.b}]"
        )
    n_sub = max(int(math.ceil((hi - lo) / f.grid.h * refine)), 16) + 1
    sub = Grid(lo, hi, n_sub)
    t = sub.points()
    fv = interpolate_values(f, t, method=interp)
    uv = u.evaluate(t)
    res = integrate_values(sub, fv * uv[:, None])
    return complex(res[0]) if f.dim == 1 else res


# ---------------------------------------------------------------------------
# functional families
# ---------------------------------------------------------------------------

class FunctionalFamily:
    """Base class: maps index values to applied functionals on grid functions."""

    kind: str = "abstract"

    def apply(self, alpha, f: GridFunction) -> np.ndarray:
        """Apply the functional with index alpha; returns a C^k vector."""
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def encode_alpha(self, alpha):
        return alpha

    def decode_alpha(self, alpha):
        return alpha


@dataclass(frozen=True)
class FourierCoefficientFamily(FunctionalFamily):
    """L_j(f) = (1/sqrt(2pi)) \\int_a^b f(x) exp(-i j x) dx for integer j."""

    a: float = 0.0
    b: float = TWO_PI
    kind = "fourier"

    def apply(self, alpha, f: GridFunction) -> np.ndarray:
        j = int(alpha)
        if not f.grid.spans(self.a, self.b) or abs(f.grid.a - self.a) > 1e-9 or abs(f.grid.b - self.b) > 1e-9:
            raise DomainError("fourier coefficients expect functions on the family interval")
        x = f.grid.points()
        kern = np.exp(-1j * j * x) * f.grid.weights()
        return (kern @ f.values) / math.sqrt(TWO_PI)

    def basis_function(self, j: int, grid: Grid) -> GridFunction:
        """The kernel section K(j) = exp(i j x)/sqrt(2pi) on the given grid."""
        x = grid.points()
        return GridFunction(grid, np.exp(1j * int(j) * x) / math.sqrt(TWO_PI))

    def descriptor(self) -> dict:
        return {"family": "fourier", "params": {"a": self.a, "b": self.b}}

    def decode_alpha(self, alpha):
        return int(alpha)


@dataclass(frozen=True)
class AverageSamplingFamily(FunctionalFamily):
    """Local averages with a common width/profile; alpha is the real center."""

    delta: float
    profile: str = "box"
    refine: int = 8
    interp: str = "cubic"
    kind = "average"

    def functional(self, x: float) -> AverageFunctional:
        return AverageFunctional(float(x), self.delta, self.profile)

    def apply(self, alpha, f: GridFunction) -> np.ndarray:
        res = average_sample(f, self.functional(alpha), refine=self.refine, interp=self.interp)
        return np.atleast_1d(np.asarray(res, dtype=complex))

    def descriptor(self) -> dict:
        return {
            "family": "average",
            "params": {"delta": self.delta, "profile": self.profile},
        }

    def decode_alpha(self, alpha):
        return float(alpha)


@dataclass(frozen=True)
class PointEvaluationFamily(FunctionalFamily):
    """L_x(f) = f(x), evaluated by interpolation on the sample grid."""

    interp: str = "cubic"
    kind = "point"

    def apply(self, alpha, f: GridFunction) -> np.ndarray:
        return interpolate_values(f, np.array([float(alpha)]), method=self.interp)[0]

    def descriptor(self) -> dict:
        return {"family": "point", "params": {"interp": self.interp}}

    def decode_alpha(self, alpha):
        return float(alpha)


@dataclass(frozen=True)
class PointInnerFamily(FunctionalFamily):
    """L_{(x, xi)}(f) = <f(x), xi>, scalarizing vector-valued point data."""

    interp: str = "cubic"
    kind = "point_inner"

    def apply(self, alpha, f: GridFunction) -> np.ndarray:
        x, xi = alpha
        xi = np.asarray(xi, dtype=complex)
        fx = interpolate_values(f, np.array([float(x)]), method=self.interp)[0]
        if fx.shape != xi.shape:
            raise ShapeMismatchError(
                f"point value shape {fx.shape} does not match xi shape {xi.shape}"
            )
        return np.array([np.sum(fx * np.conj(xi))])

    def descriptor(self) -> dict:
        return {"family": "point_inner", "params": {"interp": self.interp}}

    def encode_alpha(self, alpha):
        x, xi = alpha
        xi = np.asarray(xi, dtype=complex)
        return [float(x), [[float(z.real), float(z.imag)] for z in xi]]

    def decode_alpha(self, alpha):
        x, xi = alpha
        return (float(x), np.array([complex(re, im) for re, im in xi]))


_FAMILY_KINDS = {
    "fourier": lambda p: FourierCoefficientFamily(**p),
    "average": lambda p: AverageSamplingFamily(delta=p["delta"], profile=p.get("profile", "box")),
    "point": lambda p: PointEvaluationFamily(**p),
    "point_inner": lambda p: PointInnerFamily(**p),
}


def family_from_descriptor(desc: dict) -> FunctionalFamily:
    kind = desc.get("family")
    if kind not in _FAMILY_KINDS:
        raise ValidationError(f"unknown functional family {kind!r}")
    return _FAMILY_KINDS[kind](dict(desc.get("params", {})))


# ---------------------------------------------------------------------------
# sample sets
# ---------------------------------------------------------------------------

def _encode_value(v) -> list:
    arr = np.atleast_1d(np.asarray(v, dtype=complex))
    pairs = [[float(z.real), float(z.imag)] for z in arr]
    return pairs[0] if arr.size == 1 else pairs


def _decode_value(raw):
    if raw and isinstance(raw[0], (int, float)):
        return complex(raw[0], raw[1])
    return np.array([complex(re, im) for re, im in raw])


@dataclass(frozen=True)
class SampleSet:
    """Ordered (index, sampled value) pairs plus the family descriptor."""

    family: dict
    alphas: tuple
    values: tuple

    def __post_init__(self):
        if len(self.alphas) != len(self.values):
            raise ValidationError("sample set index/value length mismatch")

    def __len__(self) -> int:
        return len(self.alphas)

    def value_array(self) -> np.ndarray:
        return np.array([complex(np.atleast_1d(v)[0]) for v in self.values])

    def to_json(self) -> dict:
        fam = family_from_descriptor(self.family)
        return {
            "family": self.family,
            "entries": [
                {"alpha": fam.encode_alpha(a), "value": _encode_value(v)}
                for a, v in zip(self.alphas, self.values)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SampleSet":
        fam = family_from_descriptor(obj["family"])
        alphas = tuple(fam.decode_alpha(e["alpha"]) for e in obj["entries"])
        values = tuple(_decode_value(e["value"]) for e in obj["entries"])
        return cls(obj["family"], alphas, values)
