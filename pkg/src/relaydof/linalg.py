"""Dense complex matrix kernel shared by every scheme.

All matrices here are tiny (a few rows and columns), so the routines favour
predictable pivoting and explicit tolerances over speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EmptyNullSpace, Singular

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_cmatrix",
    "solve",
    "null_space",
    "rank",
    "kron",
    "vec",
    "unvec",
]


@dataclass(frozen=True)
class Tolerance:
    """Relative threshold for pivot, rank and null-space decisions."""

    rel_eps: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.rel_eps < 1.0:
            raise ValueError(f"rel_eps must lie in (0, 1), got {self.rel_eps!r}")


DEFAULT_TOL = Tolerance()


def as_cmatrix(a) -> np.ndarray:
    """Coerce ``a`` to a 2-D complex array, rejecting empty or non-finite input.

    1-D input is read as a single row.
    """
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(1, -1)
    elif m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"matrix must be at least 1x1, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def solve(a, b, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Solve ``a @ x = b`` by Gaussian elimination with partial pivoting.

    Parameters
    ----------
    a : (n, n) array_like
        Square system matrix.
    b : (n,) or (n, m) array_like
        Right-hand side(s). A 1-D ``b`` gives a 1-D result.
    tol : Tolerance
        A pivot smaller than ``tol.rel_eps`` times the largest entry of ``a``
        raises :class:`Singular`.

    Returns
    -------
    x : ndarray
        Solution with the same trailing shape as ``b``.
    """
    a = as_cmatrix(a).copy()
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"solve needs a square matrix, got {a.shape}")
    b_arr = np.asarray(b, dtype=complex)
    vector_rhs = b_arr.ndim == 1
    x = b_arr.reshape(n, -1).copy() if vector_rhs else b_arr.copy()
    if x.ndim != 2 or x.shape[0] != n:
        raise ValueError(f"right-hand side has {x.shape[0]} rows, expected {n}")

    scale = np.max(np.abs(a))
    threshold = tol.rel_eps * scale
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if np.abs(a[p, k]) <= threshold:
            raise Singular(f"pivot {abs(a[p, k]):.3e} at column {k} below {threshold:.3e}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            x[[k, p]] = x[[p, k]]
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        x[k + 1:] -= np.outer(factors, x[k])
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x[:, 0] if vector_rhs else x


def _pivoted_r_diag(a: np.ndarray):
    # Householder QR with column pivoting (LAPACK geqp3).
    q, r, _ = scipy.linalg.qr(a, mode="full", pivoting=True)
    return q, np.abs(np.diag(r))


def _count_rank(diag: np.ndarray, tol: Tolerance) -> int:
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.count_nonzero(diag > tol.rel_eps * diag[0]))


def rank(a, tol: Tolerance = DEFAULT_TOL) -> int:
    """Numerical rank: pivots of a column-pivoted QR above ``rel_eps * |R[0,0]|``."""
    _, diag = _pivoted_r_diag(as_cmatrix(a))
    return _count_rank(diag, tol)


def _fix_phase(basis: np.ndarray) -> np.ndarray:
    out = basis.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-12 * np.max(np.abs(col)))
        lead = col[big[0]]
        out[:, j] = col * (np.conj(lead) / np.abs(lead))
    return out


def null_space(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``{x : a @ x = 0}``, one column per null direction.

    The basis comes from a pivoted QR of ``a^H``: trailing columns of the
    orthogonal factor are orthogonal to the row space of ``a``. Each column is
    rotated so its first non-negligible entry is real and positive.

    Raises
    ------
    EmptyNullSpace
        If ``a`` has full column rank.
    """
    a = as_cmatrix(a)
    n = a.shape[1]
    q, diag = _pivoted_r_diag(a.conj().T)
    r = _count_rank(diag, tol)
    if r >= n:
        raise EmptyNullSpace(f"{a.shape[0]}x{n} matrix has full column rank")
    return _fix_phase(q[:, r:])


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is ``a[i, j] * b``."""
    return np.kron(as_cmatrix(a), as_cmatrix(b))


def vec(a) -> np.ndarray:
    """Stack the columns of ``a`` into an ``(m*n, 1)`` column."""
    a = as_cmatrix(a)
    return a.reshape(-1, 1, order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != rows * cols:
        raise ValueError(f"cannot reshape {v.size} entries into {rows}x{cols}")
    return v.reshape(rows, cols, order="F")
