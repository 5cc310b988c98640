"""Sparse linear solves with a common interface and an iteration trace."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class LinearSolveError(RuntimeError):
    def __init__(self, msg: str, info: "LinearSolveInfo"):
        super().__init__(msg)
        self.info = info


@dataclass
class LinearSolveInfo:
    method: str
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    trace: list[float] = field(default_factory=list)


def relative_residual(A, x, b) -> float:
    nb = np.linalg.norm(b)
    r = np.linalg.norm(A @ x - b)
    return float(r / nb) if nb > 0 else float(r)


def sor(A: sp.spmatrix, b: np.ndarray, omega: float = 1.5, tol: float = 1e-10, maxiter: int = 10000, x0=None):
    """Successive over-relaxation in lexicographic order, via sparse triangular solves."""
    A = sp.csr_matrix(A)
    D = A.diagonal()
    if np.any(D == 0):
        raise ValueError("SOR needs a nonzero diagonal")
    lower = sp.tril(A, k=-1, format="csr")
    upper = sp.triu(A, k=1, format="csr")
    M = (sp.diags(D / omega) + lower).tocsr()
    Nmat = (sp.diags((1.0 / omega - 1.0) * D) - upper).tocsr()
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    info = LinearSolveInfo("sor")
    for k in range(1, maxiter + 1):
        x = spla.spsolve_triangular(M, Nmat @ x + b, lower=True)
        res = relative_residual(A, x, b)
        info.trace.append(res)
        if not np.isfinite(res):
            break
        if res < tol:
            info.iterations, info.residual = k, res
            return x, info
    info.iterations, info.residual, info.converged = len(info.trace), info.trace[-1], False
    raise LinearSolveError(f"SOR did not reach {tol:g} in {maxiter} sweeps", info)


class ReusableLU:
    """Direct solves that keep the last factorisation and reuse it as a GMRES
    preconditioner while the matrix changes only slightly."""

    def __init__(self, tol: float = 1e-10, max_inner: int = 30):
        self.tol, self.max_inner = tol, max_inner
        self.lu = None
        self.factorizations = 0

    def _factor(self, A):
        self.lu = spla.splu(sp.csc_matrix(A))
        self.factorizations += 1

    def __call__(self, A, b, x0=None):
        if self.lu is not None:
            M = spla.LinearOperator(A.shape, self.lu.solve)
            count = [0]

            def cb(_):
                count[0] += 1

            x, flag = spla.gmres(A, b, x0=x0, M=M, rtol=self.tol, atol=0.0, restart=self.max_inner,
                                 maxiter=1, callback=cb, callback_type="pr_norm")
            res = relative_residual(A, x, b)
            if flag == 0 and res < 10 * self.tol:
                return x, LinearSolveInfo("gmres-lu", count[0], res, True, [res])
        self._factor(A)
        x = self.lu.solve(b)
        res = relative_residual(A, x, b)
        info = LinearSolveInfo("direct", 1, res, bool(np.isfinite(res)), [res])
        if not info.converged:
            raise LinearSolveError("direct solve produced nonfinite values", info)
        return x, info


def solve(A: sp.spmatrix, b: np.ndarray, method: str = "direct", tol: float = 1e-10, maxiter: int = 10000, x0=None):
    """Solve A x = b. Methods: direct (sparse LU), sor, bicgstab (ILU preconditioned)."""
    if method == "direct":
        x = spla.splu(sp.csc_matrix(A)).solve(b)
        res = relative_residual(A, x, b)
        info = LinearSolveInfo("direct", 1, res, bool(np.isfinite(res)), [res])
        if not info.converged:
            raise LinearSolveError("direct solve produced nonfinite values", info)
        return x, info
    if method == "sor":
        return sor(A, b, tol=tol, maxiter=maxiter, x0=x0)
    if method == "bicgstab":
        A = sp.csc_matrix(A)
        ilu = spla.spilu(A, drop_tol=1e-5, fill_factor=20)
        M = spla.LinearOperator(A.shape, ilu.solve)
        info = LinearSolveInfo("bicgstab")

        def cb(xk):
            info.trace.append(relative_residual(A, xk, b))

        x, flag = spla.bicgstab(A, b, x0=x0, rtol=tol, atol=0.0, maxiter=maxiter, M=M, callback=cb)
        info.iterations = len(info.trace)
        info.residual = relative_residual(A, x, b)
        info.converged = flag == 0
        if not info.converged:
            raise LinearSolveError(f"bicgstab stopped with flag {flag}", info)
        return x, info
    raise ValueError(f"unknown linear solver {method!r}")
