"""
Dense kernels shared by the emulator, the optimizer and the ECA fit.

Matrices are row-major float64 arrays with one data point per row. The
products below reduce every dot product along a contiguous axis, so a row
gives the same bits whether it is evaluated alone or stacked with others.
"""

from typing import Sequence, Union

import numpy as np
import numpy.typing as npt

from ecakit.errors import DegenerateVectorError, DimensionError, NumericsError

Matrix = npt.NDArray[np.float64]
Vector = npt.NDArray[np.float64]

Basis = Union[Matrix, Sequence[Vector]]

# Upper bound on the temporary product tensor built by matmul_rows.
_CHUNK_ELEMENTS = 1 << 21


def as_matrix(a, name="matrix") -> Matrix:
    """Returns `a` as a C-contiguous 2-D float64 array."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    return m


def as_vector(a, name="vector") -> Vector:
    v = np.ascontiguousarray(a, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    return v


def as_basis(basis: Basis, dim: int) -> Matrix:
    """Stacks basis vectors into a (k, dim) matrix; an empty basis gives (0, dim)."""
    if isinstance(basis, np.ndarray) and basis.ndim == 2:
        b = np.ascontiguousarray(basis, dtype=np.float64)
    elif len(basis) == 0:
        b = np.zeros((0, dim))
    else:
        b = np.ascontiguousarray(np.stack([as_vector(v) for v in basis]), dtype=np.float64)
    if b.shape[1] != dim:
        raise DimensionError(f"basis vectors have dim {b.shape[1]}, expected {dim}")
    return b


def dot(a: Vector, b: Vector) -> float:
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"dot of dims {a.shape[0]} and {b.shape[0]}")
    return float(np.sum(a * b))


def norm(v: Vector) -> float:
    v = as_vector(v)
    return float(np.sqrt(np.sum(v * v)))


def normalize(v: Vector) -> Vector:
    v = as_vector(v)
    n = norm(v)
    if n == 0.0:
        raise DegenerateVectorError("cannot normalize a zero vector")
    if not np.isfinite(n):
        raise NumericsError("cannot normalize a non-finite vector")
    return v / n


def matmul_rows(a: Matrix, w: Matrix) -> Matrix:
    """
    Computes a @ w.T, i.e. out[n, o] = sum_i a[n, i] * w[o, i].

    Each output entry is a pairwise sum over a contiguous row, independent of
    how many rows `a` has. Work is chunked to bound memory.
    """
    a = as_matrix(a, "a")
    w = as_matrix(w, "w")
    if a.shape[1] != w.shape[1]:
        raise DimensionError(f"cannot multiply ({a.shape[0]}x{a.shape[1]}) by ({w.shape[1]}x{w.shape[0]})")
    n, inner = a.shape
    out_dim = w.shape[0]
    out = np.empty((n, out_dim))
    if n == 0 or out_dim == 0:
        return out
    if inner == 0:
        out.fill(0.0)
        return out
    chunk = max(1, _CHUNK_ELEMENTS // (out_dim * inner))
    for start in range(0, n, chunk):
        block = a[start : start + chunk]
        out[start : start + chunk] = np.sum(block[:, None, :] * w[None, :, :], axis=-1)
    return out


def matvec(w: Matrix, x: Vector) -> Vector:
    """Computes w @ x with the same reduction order as matmul_rows."""
    x = as_vector(x, "x")
    return matmul_rows(x[None, :], w)[0]


def complement_project(g: Vector, basis: Basis) -> Vector:
    """Removes from g its components along every (orthonormal) basis vector."""
    g = as_vector(g, "g")
    b = as_basis(basis, g.shape[0])
    if b.shape[0] == 0:
        return g.copy()
    coeffs = matvec(b, g)
    return g - np.sum(coeffs[:, None] * b, axis=0)


def orthonormality_error(basis: Basis, dim: int) -> float:
    """Largest deviation of the Gram matrix of `basis` from the identity."""
    b = as_basis(basis, dim)
    if b.shape[0] == 0:
        return 0.0
    gram = matmul_rows(b, b)
    return float(np.max(np.abs(gram - np.eye(b.shape[0]))))
