"""Discretized Dirichlet probe for the embedded eigenvalues.

The half-line operator is truncated to [0, R] with hard Dirichlet walls and
discretized by the standard 3-point stencil on a uniform grid: interior
nodes r_1 .. r_{K-1} carry diag_k = 2/h^2 + V(r_k) and off-diagonals -1/h^2.
The matrix is complex symmetric (never Hermitian unless V is real), so
eigenvalue estimates use the bilinear, unconjugated Rayleigh quotient
txHx/txx, the stationary functional appropriate for that class.

Shifted inverse iteration at sigma = mu_j^2 then locates the discrete
eigenpair nearest each prescribed eigenvalue. Two error sources separate
cleanly: O(h^2) stencil truncation, and the domain-truncation error set by
the boundary leak |v_j(R)| ~ 2/R. Estimates should therefore approach
mu_j^2 as R grows at fixed small h, and be independent of the couplings A
(the eigenvalues persist while eigenvectors and V change).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ewlab.construct import sample_grid
from ewlab.kernel import ModelConfig
from ewlab.linalg import ComplexTridiagonal, SingularMatrixError, TridiagonalLU
from ewlab.oracle import GridError, GridSpec

__all__ = [
    "DiscreteHamiltonian",
    "IsotropicVectorError",
    "NoConvergenceError",
    "ProbeResult",
    "aligned_correlation",
    "build_hamiltonian",
    "free_hamiltonian",
    "free_laplacian_eigenvalue",
    "inverse_iteration",
    "phase_align",
    "probe_embedded",
    "rayleigh_quotient",
]


class IsotropicVectorError(ArithmeticError):
    """txx ~ 0: the bilinear quotient is undefined; perturb and retry."""


class NoConvergenceError(RuntimeError):
    """Inverse iteration failed to reach the residual tolerance."""


@dataclass(frozen=True, eq=False)
class DiscreteHamiltonian:
    """FD matrix of -d^2/dr^2 + V on the interior nodes of [0, R]."""

    grid: GridSpec
    operator: ComplexTridiagonal

    @property
    def step(self) -> float:
        return self.grid.step

    def interior_radii(self) -> np.ndarray:
        return self.grid.radii()[1:-1]


@dataclass(frozen=True, eq=False)
class ProbeResult:
    """Converged inverse-iteration eigenpair near one prescribed shift."""

    j: int                    # 0-based eigen-index; -1 when not tied to one
    shift: float
    eigval_estimate: complex
    residual: float
    boundary_leak: float      # |v_j(R)|; nan when no reference eigenfunction
    iterations: int
    start_mode: str           # "sampled eigenfunction" or "seeded random"
    vector: np.ndarray


def build_hamiltonian(config: ModelConfig, grid: GridSpec) -> DiscreteHamiltonian:
    """Discretize -d^2/dr^2 + V(r) with Dirichlet walls at 0 and r_end."""
    if grid.r_start != 0.0:
        raise GridError("probe grids start at r = 0")
    radii = grid.radii()
    h = grid.step
    v_interior = sample_grid(config, radii[1:-1]).V
    diag = 2.0 / h**2 + v_interior
    off = np.full(diag.size - 1, -1.0 / h**2, dtype=complex)
    op = ComplexTridiagonal(sub=off, diag=diag, super=off.copy())
    return DiscreteHamiltonian(grid=grid, operator=op)


def free_hamiltonian(grid: GridSpec) -> DiscreteHamiltonian:
    """Test hook: the V = 0 discretization, whose spectrum is known exactly."""
    if grid.r_start != 0.0:
        raise GridError("probe grids start at r = 0")
    h = grid.step
    k = grid.count - 2
    diag = np.full(k, 2.0 / h**2, dtype=complex)
    off = np.full(k - 1, -1.0 / h**2, dtype=complex)
    return DiscreteHamiltonian(
        grid=grid, operator=ComplexTridiagonal(sub=off, diag=diag, super=off.copy())
    )


def free_laplacian_eigenvalue(grid: GridSpec, k: int) -> float:
    """k-th Dirichlet eigenvalue (k >= 1) of the discrete free Laplacian.

    lambda_k = (2/h^2) (1 - cos(k pi h / R)); tends to (k pi / R)^2 as h -> 0.
    """
    h = grid.step
    length = grid.r_end - grid.r_start
    return (2.0 / h**2) * (1.0 - math.cos(k * math.pi * h / length))


def rayleigh_quotient(hd: DiscreteHamiltonian, x: np.ndarray) -> complex:
    """Bilinear quotient txHx / txx (no conjugation)."""
    x = np.asarray(x, dtype=complex)
    txx = complex(x @ x)
    norm2 = float(np.real(np.vdot(x, x)))
    if norm2 == 0.0:
        raise ValueError("zero vector")
    if abs(txx) <= 1e-12 * norm2:
        raise IsotropicVectorError("txx vanishes relative to |x|^2")
    return complex(x @ hd.operator.matvec(x)) / txx


def phase_align(x: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Rotate x by the unit scalar making <ref, x> real and nonnegative."""
    c = complex(np.vdot(ref, x))
    if c == 0.0:
        return np.asarray(x, dtype=complex)
    return np.asarray(x, dtype=complex) * (c.conjugate() / abs(c))


def aligned_correlation(x: np.ndarray, ref: np.ndarray) -> float:
    """|<ref, x>| / (|ref| |x|); insensitive to phase and scale."""
    x = np.asarray(x, dtype=complex)
    ref = np.asarray(ref, dtype=complex)
    denom = float(np.linalg.norm(x) * np.linalg.norm(ref))
    if denom == 0.0:
        raise ValueError("zero vector")
    return float(abs(np.vdot(ref, x)) / denom)


def _shifted_factor(hd: DiscreteHamiltonian, shift: complex) -> TridiagonalLU:
    op = hd.operator
    return TridiagonalLU(
        ComplexTridiagonal(sub=op.sub, diag=op.diag - shift, super=op.super)
    )


def inverse_iteration(hd: DiscreteHamiltonian, shift: complex,
                      tol: float = 1e-10, max_iter: int = 50,
                      start: np.ndarray | None = None,
                      seed: int = 0) -> ProbeResult:
    """Eigenpair of the discretization nearest the shift.

    Iterates x <- normalize((H - shift I)^{-1} x); the eigenvalue estimate is
    the bilinear Rayleigh quotient, and convergence means the 2-norm residual
    |H x - lambda x| <= tol for the unit vector x. A shift landing exactly on
    a discrete eigenvalue surfaces as SingularMatrixError from the
    factorization; the shift is then nudged by a relative 1e-10 and retried.
    """
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    k = hd.operator.size
    if start is None:
        x = np.random.default_rng(seed).standard_normal(k).astype(complex)
        start_mode = "seeded random"
    else:
        x = np.asarray(start, dtype=complex).copy()
        start_mode = "sampled eigenfunction"
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise ValueError("zero start vector")
    x /= norm

    lu = None
    for attempt in range(3):
        try:
            lu = _shifted_factor(hd, shift)
            break
        except SingularMatrixError:
            shift = shift * (1.0 + 1e-10)
    if lu is None:
        raise NoConvergenceError("shifted matrix singular after nudging")

    for it in range(1, max_iter + 1):
        y = lu.solve(x)
        x = y / float(np.linalg.norm(y))
        try:
            lam = rayleigh_quotient(hd, x)
        except IsotropicVectorError:
            # quasi-isotropic iterate: perturb deterministically and continue
            x = x + 1e-8 * np.cos(np.arange(k))
            x /= float(np.linalg.norm(x))
            continue
        residual = float(np.linalg.norm(hd.operator.matvec(x) - lam * x))
        if residual <= tol:
            return ProbeResult(
                j=-1, shift=float(np.real(shift)), eigval_estimate=lam,
                residual=residual, boundary_leak=math.nan, iterations=it,
                start_mode=start_mode, vector=x,
            )
    raise NoConvergenceError(
        f"no convergence to {tol} within {max_iter} iterations"
    )


def probe_embedded(config: ModelConfig, grid: GridSpec,
                   tol: float = 1e-10, max_iter: int = 50) -> list[ProbeResult]:
    """Run the probe at every prescribed eigenvalue mu_j^2.

    Start vectors are the sampled eigenfunctions v_j at the interior nodes;
    boundary_leak records |v_j(R)|, the size of the domain-truncation error
    committed by the hard wall.
    """
    hd = build_hamiltonian(config, grid)
    radii = grid.radii()
    ps = sample_grid(config, radii)
    results = []
    for j in range(config.n):
        raw = inverse_iteration(
            hd, config.mu[j] ** 2, tol=tol, max_iter=max_iter,
            start=ps.v[1:-1, j],
        )
        results.append(replace(
            raw, j=j, boundary_leak=float(abs(ps.v[-1, j])),
        ))
    return results
