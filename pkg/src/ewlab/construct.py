"""The constructed objects: v(r), v'(r), V(r), W(r), and their expansions.

Given an admissible pair (mu, A) the eigenfunction vector is

    v(r) = -(A + G(r))^{-1} s(r),

and the potential is V(r) = 2 (sum_j sin(mu_j .) v_j(.))'(r). With these
definitions each component solves the Dirichlet problem

    (-d^2/dr^2 + V) v_j = mu_j^2 v_j,     v_j(0) = 0,

with |v_j(r)| <= C r/(1+r^2), so every mu_j^2 is an eigenvalue embedded in
the continuous spectrum [0, inf). Real couplings give a real V; couplings
with an imaginary part give a complex V with the same eigenvalues.

The derivative never goes through finite differences: since G' = s.ts and
s' = M c, differentiating the defining solve gives

    v' = (ts v) v - (A+G)^{-1} M c,

one extra right-hand side on the same factorization. V is then assembled
from (v, v') exactly, V = 2 sum_j (mu_j cos(mu_j r) v_j + sin(mu_j r) v_j').

Large-r behaviour, used by the asymptotic checks:

    V(r) = -(4/r) sum_j mu_j sin(2 mu_j r)
           + (8/r^2) (sum_j a_j mu_j sin(2 mu_j r) + W(r)) + O(r^-3),

with the A-independent real function
W = (sum_j sin^2(mu_j r))^2 + 2 sum_{ij} h_ij mu_i sin(mu_j r) cos(mu_i r).

A cross-check identity ties V to the determinant of the system matrix:
(log det(A+G))' = -ts v, hence V = -2 (log det(A+G))''. The log-det helpers
below evaluate difference quotients of that determinant in a branch-safe way
(ratios det(I+X) with X a small resolvent increment, principal logarithm).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ewlab.kernel import (
    ModelConfig,
    gram_matrix,
    gram_matrix_stack,
    h_matrix,
    h_matrix_stack,
    trig_c,
    trig_s,
)
from ewlab.linalg import DenseLU, SingularMatrixError, batched_solve

__all__ = [
    "AsymptoticTerms",
    "EigenfunctionFrame",
    "InvertibilityError",
    "PotentialSample",
    "PotentialValue",
    "eigenfunction_derivative",
    "eigenfunction_frame",
    "eigenfunction_large_r",
    "eigenfunction_values",
    "log_det_derivative",
    "log_det_second_difference",
    "potential_asymptotics",
    "potential_value",
    "resolvent_apply",
    "sample_grid",
    "system_matrix",
    "w_function",
]


class InvertibilityError(RuntimeError):
    """A+G(r) reported singular for admissible couplings.

    Cannot happen in exact arithmetic (the Gram quadratic form is positive
    and Re a_j >= 0 keeps the real part of <xi,(A+G)xi> away from zero), so
    an occurrence means an invariant was violated upstream.
    """


@dataclass(frozen=True, eq=False)
class EigenfunctionFrame:
    """(v(r), v'(r)) at one radius; v(0) = 0 by construction."""

    r: float
    v: np.ndarray
    v_prime: np.ndarray


@dataclass(frozen=True, eq=False)
class PotentialValue:
    """V at one radius; real up to round-off when all a_j are real."""

    r: float
    V: complex


@dataclass(frozen=True, eq=False)
class AsymptoticTerms:
    """First two large-r terms of V; leading is A-independent and real."""

    r: float
    leading: float
    second: complex
    w_value: float


@dataclass(frozen=True, eq=False)
class PotentialSample:
    """Grid sample of the construction; arrays indexed (radius, eigenindex)."""

    radii: np.ndarray      # (K,)
    v: np.ndarray          # (K, n) complex
    v_prime: np.ndarray    # (K, n) complex
    V: np.ndarray          # (K,) complex
    w: np.ndarray          # (K,) real

    @property
    def n(self) -> int:
        return self.v.shape[1]


def system_matrix(config: ModelConfig, r: float) -> np.ndarray:
    """A + G(r) as a dense complex matrix."""
    m = gram_matrix(config.freqs, r).g.astype(complex)
    idx = np.arange(config.n)
    m[idx, idx] += config.a
    return m


def _factor(config: ModelConfig, r: float) -> DenseLU:
    try:
        return DenseLU(system_matrix(config, r))
    except SingularMatrixError as exc:
        raise InvertibilityError(
            f"A+G({r}) numerically singular; couplings violate admissibility"
        ) from exc


def resolvent_apply(config: ModelConfig, r: float, b: np.ndarray) -> np.ndarray:
    """(A + G(r))^{-1} b."""
    return _factor(config, r).solve(np.asarray(b, dtype=complex))


def eigenfunction_frame(config: ModelConfig, r: float) -> EigenfunctionFrame:
    """v and v' at one radius from a single factorization of A+G(r).

    Columns solved together: (A+G)^{-1} s gives v = -that, and
    (A+G)^{-1} M c enters v' = (ts v) v - (A+G)^{-1} M c.
    """
    s = trig_s(config.freqs, r)
    mc = config.mu * trig_c(config.freqs, r)
    sol = _factor(config, r).solve(np.stack([s, mc], axis=1))
    v = -sol[:, 0]
    v_prime = (s @ v) * v - sol[:, 1]
    return EigenfunctionFrame(r=float(r), v=v, v_prime=v_prime)


def eigenfunction_values(config: ModelConfig, r: float) -> np.ndarray:
    """v(r) = -(A+G(r))^{-1} s(r)."""
    return -resolvent_apply(config, r, trig_s(config.freqs, r))


def eigenfunction_derivative(config: ModelConfig, r: float) -> np.ndarray:
    """v'(r); at r = 0 this is -A^{-1} M 1, i.e. v_j'(0) = -mu_j/a_j."""
    return eigenfunction_frame(config, r).v_prime


def potential_value(config: ModelConfig, r: float) -> PotentialValue:
    """V(r) = 2 sum_j (mu_j cos(mu_j r) v_j + sin(mu_j r) v_j')."""
    frame = eigenfunction_frame(config, r)
    s = trig_s(config.freqs, r)
    mc = config.mu * trig_c(config.freqs, r)
    value = 2.0 * (mc @ frame.v + s @ frame.v_prime)
    return PotentialValue(r=float(r), V=complex(value))


def w_function(config: ModelConfig, r: float) -> float:
    """W(r), the real A-independent part of the r^-2 term of V."""
    s = trig_s(config.freqs, r)
    mc = config.mu * trig_c(config.freqs, r)
    h = h_matrix(config.freqs, r).h
    return float((s @ s) ** 2 + 2.0 * (mc @ h @ s))


def potential_asymptotics(config: ModelConfig, r: float) -> AsymptoticTerms:
    """Leading and second large-r terms of V, evaluated exactly at r."""
    if not r > 0.0:
        raise ValueError("asymptotic terms require r > 0")
    mu = config.mu
    sin2 = np.sin(2.0 * mu * r)
    leading = float(-(4.0 / r) * (mu @ sin2))
    w = w_function(config, r)
    second = complex((8.0 / r**2) * ((config.a * mu) @ sin2 + w))
    return AsymptoticTerms(r=float(r), leading=leading, second=second, w_value=w)


def eigenfunction_large_r(config: ModelConfig, j: int, r: float) -> complex:
    """Two-term large-r expansion of v_j (0-based j); error is O(r^-3).

    v_j(r) ~ -(2/r) sin(mu_j r)
             + (4/r^2) (a_j sin(mu_j r) + sum_l h_jl(r) sin(mu_l r)).
    """
    if not r > 0.0:
        raise ValueError("expansion requires r > 0")
    s = trig_s(config.freqs, r)
    h = h_matrix(config.freqs, r).h
    return complex(
        -(2.0 / r) * s[j] + (4.0 / r**2) * (config.a[j] * s[j] + h[j] @ s)
    )


def _log_det_ratio(config: ModelConfig, base_lu: DenseLU, r_base: float,
                   r_to: float) -> complex:
    """log(det(A+G(r_to)) / det(A+G(r_base))) without evaluating either det.

    The ratio equals det(I + X) with X = (A+G(r_base))^{-1} (G(r_to)-G(r_base));
    for the small increments used here det(I+X) stays near 1, so the principal
    logarithm is branch-safe where the raw log det is not.
    """
    dg = (gram_matrix(config.freqs, r_to).g
          - gram_matrix(config.freqs, r_base).g).astype(complex)
    x = base_lu.solve(dg)
    ratio = DenseLU(np.eye(config.n, dtype=complex) + x).det()
    return complex(np.log(ratio))


def log_det_derivative(config: ModelConfig, r: float, h: float = 1e-4) -> complex:
    """Central-difference estimate of (log det(A+G))'(r).

    Contract: equals -ts(r) v(r) within O(h^2). Wraps the difference as a
    single determinant ratio between r-h and r+h.
    """
    if not h > 0.0:
        raise ValueError("step must be positive")
    lu = _factor(config, r - h)
    return _log_det_ratio(config, lu, r - h, r + h) / (2.0 * h)


def log_det_second_difference(config: ModelConfig, r: float,
                              h: float = 1e-3) -> complex:
    """Second difference of log det(A+G) at r; -2 times it estimates V(r).

    Both increments share the factorization at r:
    (f(r+h) - 2f(r) + f(r-h))/h^2 = (log det(I+X_+) + log det(I+X_-))/h^2
    with X_pm = (A+G(r))^{-1} (G(r pm h) - G(r)).
    """
    if not h > 0.0:
        raise ValueError("step must be positive")
    lu = _factor(config, r)
    plus = _log_det_ratio(config, lu, r, r + h)
    minus = _log_det_ratio(config, lu, r, r - h)
    return (plus + minus) / h**2


def sample_grid(config: ModelConfig, radii: np.ndarray) -> PotentialSample:
    """Vectorized sample of (v, v', V, W) over a radius array.

    One batched LU sweep over the stacked systems (A+G(r_k)); identical
    arithmetic to the scalar path, radii processed in array order so output
    is deterministic.
    """
    radii = np.asarray(radii, dtype=float)
    mu = config.mu
    n = config.n
    s = np.sin(np.outer(radii, mu))
    c = np.cos(np.outer(radii, mu))
    mc = c * mu
    mats = gram_matrix_stack(config.freqs, radii).astype(complex)
    idx = np.arange(n)
    mats[:, idx, idx] += config.a
    rhs = np.stack([s, mc], axis=2).astype(complex)
    try:
        sol = batched_solve(mats, rhs)
    except SingularMatrixError as exc:
        raise InvertibilityError(
            "A+G(r) numerically singular on the sampling grid"
        ) from exc
    v = -sol[:, :, 0]
    sv = np.sum(s * v, axis=1)
    v_prime = sv[:, None] * v - sol[:, :, 1]
    big_v = 2.0 * (np.sum(mc * v, axis=1) + np.sum(s * v_prime, axis=1))
    h = h_matrix_stack(config.freqs, radii)
    w = np.sum(s * s, axis=1) ** 2 + 2.0 * np.einsum("ki,kij,kj->k", mc, h, s)
    return PotentialSample(radii=radii, v=v, v_prime=v_prime, V=big_v, w=w)
