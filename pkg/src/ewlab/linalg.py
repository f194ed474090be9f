"""Dense and tridiagonal complex linear algebra behind the solver paths.

Everything is hand-written on plain numpy arrays, with no LAPACK/BLAS calls:
the solves must be bitwise reproducible across runs and thread counts, and
the error contract (SingularMatrixError at a relative pivot threshold) is
part of the API. Sizes are modest: dense systems are the coupling dimension
(n <= ~50), tridiagonal systems are discretization grids (up to ~10^6).

Dense systems A + G(r) are non-Hermitian whenever the couplings are complex,
and tridiagonal shifts can sit close to discrete eigenvalues, so partial
pivoting is used everywhere; the tridiagonal factorization carries the usual
one extra superdiagonal of fill plus a swap flag per step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ComplexTridiagonal",
    "DenseLU",
    "PIVOT_RTOL",
    "SingularMatrixError",
    "TridiagonalLU",
    "batched_solve",
    "condition_estimate",
    "dense_solve",
    "tridiag_solve",
]

# A pivot at or below this times the row scale counts as singular.
PIVOT_RTOL = 1e-14


class SingularMatrixError(ArithmeticError):
    """A pivot fell below the relative threshold during elimination."""


class DenseLU:
    """LU factorization with partial pivoting of a square complex matrix.

    P A = L U with unit lower triangular L. Row scales are taken from the
    input matrix and permuted along with the rows, so the singularity test
    is relative to the data, not absolute.
    """

    def __init__(self, a) -> None:
        lu = np.array(a, dtype=complex)
        if lu.ndim != 2 or lu.shape[0] != lu.shape[1]:
            raise ValueError("matrix must be square")
        n = lu.shape[0]
        scale = np.max(np.abs(lu), axis=1)
        piv = np.arange(n)
        parity = 1.0
        for k in range(n):
            p = k + int(np.argmax(np.abs(lu[k:, k])))
            if np.abs(lu[p, k]) <= PIVOT_RTOL * scale[p]:
                raise SingularMatrixError(
                    f"pivot {k} at or below {PIVOT_RTOL} times its row scale"
                )
            if p != k:
                lu[[k, p]] = lu[[p, k]]
                scale[[k, p]] = scale[[p, k]]
                piv[[k, p]] = piv[[p, k]]
                parity = -parity
            lu[k + 1:, k] /= lu[k, k]
            lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
        self.lu = lu
        self.piv = piv
        self.parity = parity
        self.n = n

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve A x = b for b of shape (n,) or (n, m)."""
        b = np.asarray(b, dtype=complex)
        x = b[self.piv].astype(complex, copy=True)
        lu = self.lu
        for k in range(1, self.n):
            x[k] -= lu[k, :k] @ x[:k]
        for k in range(self.n - 1, -1, -1):
            x[k] = (x[k] - lu[k, k + 1:] @ x[k + 1:]) / lu[k, k]
        return x

    def solve_adjoint(self, b: np.ndarray) -> np.ndarray:
        """Solve A^H x = b; drives the transposed sweep of the norm estimator.

        With P A = L U one has A^H = U^H L^H P, so the sweeps run in the
        opposite order: forward with U^H (lower triangular), backward with
        L^H (unit upper triangular), then undo the permutation.
        """
        b = np.asarray(b, dtype=complex)
        lu = self.lu
        y = b.astype(complex, copy=True)
        for k in range(self.n):
            y[k] = (y[k] - np.conj(lu[:k, k]) @ y[:k]) / np.conj(lu[k, k])
        for k in range(self.n - 2, -1, -1):
            y[k] -= np.conj(lu[k + 1:, k]) @ y[k + 1:]
        x = np.empty_like(y)
        x[self.piv] = y
        return x

    def det(self) -> complex:
        """det A = (pivot parity) * prod(diag U)."""
        return complex(self.parity * np.prod(np.diag(self.lu)))


def dense_solve(a, b) -> np.ndarray:
    """One-shot solve A x = b via DenseLU."""
    return DenseLU(a).solve(b)


def batched_solve(mats: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve A_k x_k = b_k for a stack of systems, shapes (K,n,n) and (K,n).

    Gaussian elimination with partial pivoting, vectorized across the batch
    index; the arithmetic per system is identical to DenseLU. Used by the
    grid samplers, where K is the number of radii and n stays tiny.
    """
    a = np.array(mats, dtype=complex)
    b = np.array(rhs, dtype=complex)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError("mats must have shape (K, n, n)")
    nbatch, n = a.shape[0], a.shape[1]
    vector_rhs = b.ndim == 2
    if vector_rhs:
        b = b[:, :, None]
    scale = np.max(np.abs(a), axis=2)
    rows = np.arange(nbatch)
    for k in range(n):
        p = k + np.argmax(np.abs(a[:, k:, k]), axis=1)
        bad = np.abs(a[rows, p, k]) <= PIVOT_RTOL * scale[rows, p]
        if np.any(bad):
            first = int(np.argmax(bad))
            raise SingularMatrixError(
                f"pivot {k} below threshold in batch entry {first}"
            )
        # swap rows k and p in every system; p == k entries are no-ops
        for block in (a, b):
            tmp = block[rows, k].copy()
            block[rows, k] = block[rows, p]
            block[rows, p] = tmp
        tmp = scale[rows, k].copy()
        scale[rows, k] = scale[rows, p]
        scale[rows, p] = tmp
        fac = a[:, k + 1:, k] / a[:, k, k][:, None]
        a[:, k + 1:, k + 1:] -= fac[:, :, None] * a[:, k, None, k + 1:]
        b[:, k + 1:, :] -= fac[:, :, None] * b[:, k, None, :]
    x = np.empty_like(b)
    for k in range(n - 1, -1, -1):
        acc = b[:, k, :] - np.sum(a[:, k, k + 1:, None] * x[:, k + 1:, :], axis=1)
        x[:, k, :] = acc / a[:, k, k][:, None]
    return x[:, :, 0] if vector_rhs else x


@dataclass(frozen=True, eq=False)
class ComplexTridiagonal:
    """Tridiagonal matrix as three bands: sub (K-1), diag (K), super (K-1)."""

    sub: np.ndarray
    diag: np.ndarray
    super: np.ndarray

    def __post_init__(self) -> None:
        sub = np.asarray(self.sub, dtype=complex)
        diag = np.asarray(self.diag, dtype=complex)
        sup = np.asarray(self.super, dtype=complex)
        object.__setattr__(self, "sub", sub)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "super", sup)
        k = diag.size
        if k == 0:
            raise ValueError("empty tridiagonal matrix")
        if sub.size != k - 1 or sup.size != k - 1:
            raise ValueError("band lengths must be K-1, K, K-1")

    @property
    def size(self) -> int:
        return self.diag.size

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """T x without forming the dense matrix."""
        x = np.asarray(x, dtype=complex)
        y = self.diag * x
        y[:-1] += self.super * x[1:]
        y[1:] += self.sub * x[:-1]
        return y

    def dense(self) -> np.ndarray:
        """Dense counterpart; only sensible for small K (tests, cross-checks)."""
        k = self.size
        out = np.zeros((k, k), dtype=complex)
        out[np.arange(k), np.arange(k)] = self.diag
        out[np.arange(1, k), np.arange(k - 1)] = self.sub
        out[np.arange(k - 1), np.arange(1, k)] = self.super
        return out


class TridiagonalLU:
    """Banded LU with partial pivoting; fill is one extra superdiagonal.

    Step i either eliminates sub[i] in place (no swap) or exchanges rows i
    and i+1 first, which moves a super entry into the du2 band. swap[i]
    records the choice so the solve can replay the permutation. Python-list
    inner loops: numpy scalar indexing is several times slower here.
    """

    def __init__(self, t: ComplexTridiagonal) -> None:
        k = t.size
        dl = [complex(z) for z in t.sub]
        d = [complex(z) for z in t.diag]
        du = [complex(z) for z in t.super]
        du2 = [0j] * max(k - 2, 0)
        swap = [False] * max(k - 1, 0)
        scale = float(np.max(np.abs(t.diag)))
        if k > 1:
            scale = max(scale, float(np.max(np.abs(t.sub))),
                        float(np.max(np.abs(t.super))))
        limit = PIVOT_RTOL * scale
        for i in range(k - 1):
            if abs(d[i]) >= abs(dl[i]):
                if abs(d[i]) <= limit:
                    raise SingularMatrixError(f"pivot {i} below threshold")
                fact = dl[i] / d[i]
                dl[i] = fact
                d[i + 1] -= fact * du[i]
            else:
                fact = d[i] / dl[i]
                d[i] = dl[i]
                dl[i] = fact
                tmp = du[i]
                du[i] = d[i + 1]
                d[i + 1] = tmp - fact * d[i + 1]
                if i < k - 2:
                    du2[i] = du[i + 1]
                    du[i + 1] = -fact * du[i + 1]
                swap[i] = True
        if abs(d[k - 1]) <= limit:
            raise SingularMatrixError(f"pivot {k - 1} below threshold")
        self.size = k
        self._dl = dl
        self._d = d
        self._du = du
        self._du2 = du2
        self._swap = swap

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve T x = b."""
        k = self.size
        b = np.asarray(b, dtype=complex)
        if b.shape != (k,):
            raise ValueError("right-hand side has wrong length")
        x = [complex(z) for z in b]
        dl, d, du, du2, swap = self._dl, self._d, self._du, self._du2, self._swap
        for i in range(k - 1):
            if swap[i]:
                x[i], x[i + 1] = x[i + 1], x[i] - dl[i] * x[i + 1]
            else:
                x[i + 1] -= dl[i] * x[i]
        x[k - 1] /= d[k - 1]
        if k > 1:
            x[k - 2] = (x[k - 2] - du[k - 2] * x[k - 1]) / d[k - 2]
        for i in range(k - 3, -1, -1):
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i]
        return np.asarray(x, dtype=complex)


def tridiag_solve(t: ComplexTridiagonal, b: np.ndarray) -> np.ndarray:
    """One-shot solve T x = b via TridiagonalLU."""
    return TridiagonalLU(t).solve(b)


def condition_estimate(a) -> float:
    """1-norm condition estimate ||A||_1 * est(||A^-1||_1).

    The inverse norm comes from Hager's method driven by solve and
    solve_adjoint; the returned value is a lower bound on kappa_1, in
    practice within a small factor of it.
    """
    a = np.asarray(a, dtype=complex)
    lu = DenseLU(a)
    n = lu.n
    norm_a = float(np.max(np.sum(np.abs(a), axis=0)))
    x = np.full(n, 1.0 / n, dtype=complex)
    best = 0.0
    last_j = -1
    for _ in range(5):
        y = lu.solve(x)
        est = float(np.sum(np.abs(y)))
        if est <= best and last_j >= 0:
            break
        best = max(best, est)
        ay = np.abs(y)
        xi = np.where(ay == 0.0, 1.0 + 0j, y / np.where(ay == 0.0, 1.0, ay))
        z = lu.solve_adjoint(xi)
        j = int(np.argmax(np.abs(z)))
        if j == last_j:
            break
        last_j = j
        x = np.zeros(n, dtype=complex)
        x[j] = 1.0
    return norm_a * best
