"""Dense matrix kernel: SVD-backed pseudoinverse plus shape-checked products.

All shapes in scope are small (a few thousand entries at most), so plain
O(n^3) dense routines on float64 arrays are the right tool. The pseudoinverse
is the backward map through a layer's weight matrix: for full-column-rank W
it coincides with the normal-equation solution (W^T W)^-1 W^T, and for
rank-deficient or wide W it is the canonical least-squares inverse.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError

DEFAULT_RCOND = 1e-10


def as_matrix(values) -> np.ndarray:
    """Coerce to a 2-D float64 array with finite entries."""
    m = np.asarray(values, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatchError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionMismatchError("matrix entries must be finite")
    return m


def as_vector(values) -> np.ndarray:
    """Coerce to a 1-D float64 array with finite entries."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DimensionMismatchError("vector entries must be finite")
    return v


def matvec(matrix, vector) -> np.ndarray:
    m = as_matrix(matrix)
    v = as_vector(vector)
    if m.shape[1] != v.shape[0]:
        raise DimensionMismatchError(
            f"matrix has {m.shape[1]} columns but vector has length {v.shape[0]}"
        )
    return m @ v


def svd(matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduced singular value decomposition M = U @ diag(S) @ Vt.

    S is non-negative and sorted descending; U is rows x k and Vt is
    k x cols with k = min(rows, cols), so the product reconstructs M.
    """
    m = as_matrix(matrix)
    return np.linalg.svd(m, full_matrices=False)


def pinv(matrix, rcond: float = DEFAULT_RCOND) -> np.ndarray:
    """Moore-Penrose pseudoinverse with singular values below rcond*sigma_max dropped.

    Returns a cols x rows array. An all-zero input yields the all-zero
    pseudoinverse; no finite input raises.
    """
    if rcond < 0:
        raise ValueError("rcond must be non-negative")
    u, s, vt = svd(matrix)
    cutoff = rcond * s[0] if s.size else 0.0
    inv_s = np.where(s > cutoff, np.divide(1.0, s, out=np.zeros_like(s), where=s > 0), 0.0)
    return vt.T @ (inv_s[:, None] * u.T)
