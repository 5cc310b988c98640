"""Finite-difference stencils on uniform 1D grids.

Fourth-order central stencils in the interior; near the ends the stencil is
shifted one-sided but keeps fourth order, so that derivatives of derivatives
stay accurate right up to the boundary rings.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp


@lru_cache(maxsize=None)
def fd_weights(offsets: tuple[int, ...], deriv: int) -> np.ndarray:
    """Weights w with sum_k w_k f(x + offsets_k h) ~ h^deriv f^(deriv)(x)."""
    offs = np.asarray(offsets, dtype=float)
    n = len(offs)
    V = np.vander(offs, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    return np.linalg.solve(V, rhs)


def _offsets(i: int, n: int, deriv: int) -> tuple[int, ...]:
    width = 5 if deriv == 1 else 6
    half = 2
    if half <= i <= n - 1 - half:
        return (-2, -1, 0, 1, 2)
    if i < half:
        return tuple(range(-i, width - i))
    return tuple(range(-(width - (n - i)), n - i))


def diff_matrix(n: int, h: float, deriv: int) -> sp.csr_matrix:
    """Sparse (n, n) matrix of the first or second derivative, fourth order."""
    if n < 6:
        raise ValueError("need at least 6 nodes for the one-sided fourth-order stencils")
    rows, cols, vals = [], [], []
    for i in range(n):
        offs = _offsets(i, n, deriv)
        w = fd_weights(offs, deriv) / h**deriv
        rows.extend([i] * len(offs))
        cols.extend(i + o for o in offs)
        vals.extend(w)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def periodic_diff_matrix(n: int, h: float, deriv: int) -> sp.csr_matrix:
    if n < 5:
        raise ValueError("periodic stencil needs at least 5 nodes")
    offs = (-2, -1, 0, 1, 2)
    w = fd_weights(offs, deriv) / h**deriv
    rows, cols, vals = [], [], []
    for i in range(n):
        for o, wk in zip(offs, w):
            rows.append(i)
            cols.append((i + o) % n)
            vals.append(wk)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def apply_axis0(D: sp.spmatrix, f: np.ndarray) -> np.ndarray:
    """Apply a 1D operator along the radial (first) axis of an (n_r, n_theta) array."""
    return np.asarray(D @ f)


def apply_axis1(D: sp.spmatrix, f: np.ndarray) -> np.ndarray:
    return np.asarray((D @ f.T).T)


def upwind_first(n: int, h: float, positive: bool, periodic: bool = False) -> sp.csr_matrix:
    """Second-order upwind first derivative (first order on the ring next to an end).

    ``positive`` selects the backward-biased stencil used where the advecting
    velocity component is positive.
    """
    rows, cols, vals = [], [], []
    sgn = 1 if positive else -1
    w2 = np.array([3.0, -4.0, 1.0]) / (2 * h)
    for i in range(n):
        idx = [i, i - sgn, i - 2 * sgn]
        if periodic:
            idx = [k % n for k in idx]
            w = w2
        elif all(0 <= k < n for k in idx):
            w = w2
        elif 0 <= i - sgn < n:
            idx, w = [i, i - sgn], np.array([1.0, -1.0]) / h
        else:
            # end node facing outflow; use the inward one-sided stencil
            idx = [i, i + sgn, i + 2 * sgn]
            w = np.array([-3.0, 4.0, -1.0]) / (2 * h)
        w = w * sgn
        rows.extend([i] * len(idx))
        cols.extend(idx)
        vals.extend(w)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
