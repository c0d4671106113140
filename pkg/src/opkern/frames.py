"""Frame operator, dual kernel sections, and reconstruction from functional
values for truncated kernel families.

The dual of the infinite family is not computable at desk scale; this module
computes the canonical dual of the truncated family through the Gram
pseudoinverse and reports truncation diagnostics. Reconstruction error is
therefore measured on an interior window away from the truncation boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import GridFunction, inner_product, norm, pseudoinverse, restrict
from .exceptions import AlignmentError, DegenerateFrameError, ShapeMismatchError
from .families import SampleSet
from .kernels import GramMatrix, KernelSection, feature_gram

__all__ = [
    "TruncatedFrame",
    "DualFrame",
    "truncated_frame",
    "frame_operator_apply",
    "dual_frame",
    "reconstruct",
    "frame_bounds_estimate",
    "dual_inner_product",
    "interior_relative_error",
]


@dataclass(frozen=True)
class TruncatedFrame:
    """A finite kernel family with its section Gram and optional feature
    vectors."""

    sections: tuple
    gram: GramMatrix
    w_features: tuple | None = None

    def __len__(self) -> int:
        return len(self.sections)

    @property
    def alphas(self) -> list:
        return [s.alpha for s in self.sections]


def truncated_frame(sections: Sequence[KernelSection], prefer: str = "auto") -> TruncatedFrame:
    """Bundle sections with their Gram.

    prefer="w" computes the Gram from the sections' feature vectors (exact on
    the frequency side, no window truncation), prefer="h" from the grid inner
    products of the sections themselves; "auto" picks "w" when every section
    carries a feature vector. Either way the matrix is an exact Gram of
    discretized vectors, hence positive semi-definite.
    """
    if not sections:
        raise ShapeMismatchError("empty section list")
    have_w = all(s.w_repr is not None for s in sections)
    if prefer == "auto":
        prefer = "w" if have_w else "h"
    if prefer == "w":
        if not have_w:
            raise ShapeMismatchError("w route requires feature vectors on every section")
        vecs = [s.w_repr for s in sections]
    elif prefer == "h":
        vecs = [s.h_repr for s in sections]
    else:
        raise ShapeMismatchError(f"unknown gram preference {prefer!r}")
    m = feature_gram(vecs)
    gram = GramMatrix(
        matrix=(m + m.conj().T) / 2.0,
        indices=tuple((s.alpha, s.xi) for s in sections),
        asymmetry=float(np.linalg.norm(m - m.conj().T)),
    )
    return TruncatedFrame(
        sections=tuple(sections),
        gram=gram,
        w_features=tuple(s.w_repr for s in sections) if have_w else None,
    )


def frame_operator_apply(frame: TruncatedFrame, f: GridFunction) -> GridFunction:
    """T f = sum_j <f, K_j> K_j over the truncated index set."""
    first = frame.sections[0].h_repr
    if not f.same_layout(first):
        raise ShapeMismatchError("f does not live on the frame's grid")
    out = np.zeros_like(first.values)
    for s in frame.sections:
        out += inner_product(f, s.h_repr) * s.h_repr.values
    return GridFunction(first.grid, out)


@dataclass(frozen=True)
class DualFrame:
    """Canonical dual of a truncated family: dual_sections[j] = sum_k
    pinv(G)[j, k] K_k, biorthogonal to the sections on their span."""

    dual_sections: tuple
    coeffs: np.ndarray = field(repr=False)
    source: TruncatedFrame
    rel_cutoff: float
    dual_w: tuple | None = None

    def __len__(self) -> int:
        return len(self.dual_sections)


def dual_frame(frame: TruncatedFrame, rel_cutoff: float = 1e-10) -> DualFrame:
    g = frame.gram.matrix
    s = np.linalg.svd(g, compute_uv=False)
    if s.size == 0 or s[0] <= 0.0 or np.all(s <= rel_cutoff * s[0]):
        raise DegenerateFrameError(
            "all singular values of the section Gram fall below the cutoff",
            min_eig=float(s[-1]) if s.size else 0.0,
            max_eig=float(s[0]) if s.size else 0.0,
        )
    coeffs = pseudoinverse(g, rel_cutoff)
    h_stack = np.stack([sec.h_repr.values for sec in frame.sections])
    grid = frame.sections[0].h_repr.grid
    duals = tuple(
        GridFunction(grid, np.tensordot(coeffs[j], h_stack, axes=(0, 0)))
        for j in range(len(frame))
    )
    dual_w = None
    if frame.w_features is not None:
        w_stack = np.stack([w.values for w in frame.w_features])
        wgrid = frame.w_features[0].grid
        dual_w = tuple(
            GridFunction(wgrid, np.tensordot(coeffs[j], w_stack, axes=(0, 0)))
            for j in range(len(frame))
        )
    return DualFrame(
        dual_sections=duals,
        coeffs=coeffs,
        source=frame,
        rel_cutoff=rel_cutoff,
        dual_w=dual_w,
    )


def _alphas_match(a, b) -> bool:
    if isinstance(a, tuple) or isinstance(b, tuple):
        if not (isinstance(a, tuple) and isinstance(b, tuple) and len(a) == len(b)):
            return False
        return all(_alphas_match(x, y) for x, y in zip(a, b))
    if isinstance(a, (int, float, np.floating, np.integer)) and isinstance(
        b, (int, float, np.floating, np.integer)
    ):
        return abs(float(a) - float(b)) <= 1e-12
    return bool(np.all(np.asarray(a) == np.asarray(b)))


def reconstruct(dual: DualFrame, samples: SampleSet) -> GridFunction:
    """f_hat = sum_j L_{alpha_j}(f) K~_j from a sample set aligned with the
    dual's index order."""
    frame_alphas = dual.source.alphas
    if len(samples) != len(frame_alphas):
        raise AlignmentError(
            f"sample count {len(samples)} does not match frame size {len(frame_alphas)}"
        )
    for got, want in zip(samples.alphas, frame_alphas):
        if not _alphas_match(got, want):
            raise AlignmentError(f"sample index {got!r} does not match frame index {want!r}")
    grid = dual.dual_sections[0].grid
    out = np.zeros_like(dual.dual_sections[0].values)
    for value, section in zip(samples.value_array(), dual.dual_sections):
        out += value * section.values
    return GridFunction(grid, out)


def frame_bounds_estimate(frame: TruncatedFrame, rel_cutoff: float = 1e-10) -> tuple[float, float]:
    """Extreme nonzero eigenvalues of the section Gram; on the span of a
    truncated Riesz-regime family these bracket its frame bounds."""
    w = np.linalg.eigvalsh(frame.gram.matrix)
    top = float(w[-1])
    if top <= 0.0:
        raise DegenerateFrameError("section Gram has no positive spectrum", max_eig=top)
    nonzero = w[w > rel_cutoff * top]
    return float(nonzero[0]), float(nonzero[-1])


def dual_inner_product(dual: DualFrame, f_coeffs: np.ndarray, g_coeffs: np.ndarray) -> complex:
    """Inner product <T f, g> in coefficient space for f, g expanded in the
    dual sections; the dual family is orthonormal under this product."""
    a = np.asarray(f_coeffs, dtype=complex)
    b = np.asarray(g_coeffs, dtype=complex)
    n = len(dual)
    if a.shape != (n,) or b.shape != (n,):
        raise ShapeMismatchError("coefficient arrays must match the frame size")
    p = dual.coeffs @ dual.source.gram.matrix
    return complex(a @ p @ np.conj(b))


@dataclass(frozen=True)
class ReconstructionError:
    rel_l2: float
    window: tuple[float, float]
    abs_l2: float
    ref_l2: float


def interior_relative_error(
    f_hat: GridFunction,
    reference: GridFunction,
    margin: float = 4.0,
    window: tuple[float, float] | None = None,
) -> ReconstructionError:
    """Relative L2 error on an interior window (default: the common grid with
    a margin stripped at both ends, keeping truncation artifacts out)."""
    if not f_hat.same_layout(reference):
        raise ShapeMismatchError("reconstruction and reference live on different grids")
    if window is None:
        window = (f_hat.grid.a + margin, f_hat.grid.b - margin)
    lo, hi = window
    a = restrict(f_hat, lo, hi)
    b = restrict(reference, lo, hi)
    err = norm(a - b)
    ref = norm(b)
    return ReconstructionError(
        rel_l2=err / ref if ref > 0 else math.inf,
        window=(lo, hi),
        abs_l2=err,
        ref_l2=ref,
    )
